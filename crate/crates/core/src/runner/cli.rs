//! Command-line interface. Exit codes: 0 success, 1 engine failure,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::config::{Config, DataFormat};
use super::{
    cmd_baseline, cmd_evaluate, cmd_induce, cmd_infer, cmd_optimize, BaselineArgs, BaselineKind, OptimizeArgs,
    RunError, Workspace,
};
use crate::prompt::TaskKind;

#[derive(Debug, Parser)]
#[command(name = "apio", version, about = "Induce and optimize instruction-list prompts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Induce an instruction-list prompt from training pairs.
    Induce {
        #[command(flatten)]
        common: Common,
        /// Also copy the induced prompt here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        instructions: Option<usize>,
    },
    /// Optimize a prompt by beam search over instruction lists.
    Optimize {
        #[command(flatten)]
        common: Common,
        /// Prompt file to start from.
        #[arg(long)]
        prompt: Option<PathBuf>,
        /// Also copy the best prompt here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        epochs: Option<usize>,
        /// Pool size kept after every epoch.
        #[arg(long)]
        beam: Option<usize>,
        /// Stop right after this epoch has been saved.
        #[arg(long, value_name = "EPOCH")]
        halt_after: Option<usize>,
    },
    /// Run a prompt over a dataset, one output line per input line.
    Infer {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        prompt: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Score predictions against gold data.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        predictions: PathBuf,
        /// JSON report path.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Copy, zero-shot or few-shot predictions.
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: BaselineKind,
        #[arg(long, default_value_t = 3)]
        shots: usize,
        #[arg(long)]
        output: PathBuf,
        /// Pairs to draw few-shot exemplars from.
        #[arg(long)]
        exemplars: Option<PathBuf>,
        #[arg(long, num_args = 1..)]
        exemplar_refs: Vec<PathBuf>,
        /// File replacing the built-in zero-shot instruction.
        #[arg(long)]
        template: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, value_enum)]
    pub task: Option<TaskKind>,
    /// JSON configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub run_id: Option<String>,
    /// Continue the given run from its saved state.
    #[arg(long, value_name = "RUN_ID", conflicts_with = "run_id")]
    pub resume: Option<String>,
    /// Answer model calls from --script; no network, no cache.
    #[arg(long)]
    pub dry_run: bool,
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Dev items used for scoring candidates, or "all".
    #[arg(long, value_parser = parse_subsample)]
    pub dev_subsample: Option<Subsample>,
    /// Dataset file (.jsonl, .m2, or a source file with --refs).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, num_args = 1..)]
    pub refs: Vec<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long, default_value = "runs")]
    pub runs_dir: PathBuf,
    #[arg(long)]
    pub train_size: Option<usize>,
    #[arg(long)]
    pub dev_size: Option<usize>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long)]
    pub base_url: Option<String>,
    /// Replace an existing run with the same id.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Subsample(pub Option<usize>);

fn parse_subsample(s: &str) -> Result<Subsample, String> {
    if s == "all" {
        return Ok(Subsample(None));
    }
    match s.parse::<usize>() {
        Ok(0) | Err(_) => Err(format!("expected a positive count or \"all\", got {s:?}")),
        Ok(n) => Ok(Subsample(Some(n))),
    }
}

impl Common {
    /// Defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<Config, RunError> {
        let mut cfg = Config::load(self.config.as_deref())?;
        if let Some(t) = self.task {
            cfg.task = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(p) = &self.data {
            cfg.data.path = Some(p.clone());
        }
        if !self.refs.is_empty() {
            cfg.data.refs = self.refs.clone();
        }
        if let Some(f) = self.format {
            cfg.data.format = Some(f);
        }
        if let Some(n) = self.train_size {
            cfg.data.train_size = n;
        }
        if let Some(n) = self.dev_size {
            cfg.data.dev_size = n;
        }
        if let Some(Subsample(n)) = self.dev_subsample {
            cfg.optimizer.dev_subsample = n;
        }
        if let Some(m) = &self.model {
            cfg.backend.model = m.clone();
        }
        if let Some(u) = &self.base_url {
            cfg.backend.base_url = u.clone();
        }
        if self.dry_run {
            cfg.dry_run = true;
        }
        if let Some(s) = &self.script {
            cfg.script = Some(s.clone());
        }
        cfg.sync_seeds();
        Ok(cfg)
    }

    fn workspace(&self) -> Workspace {
        Workspace {
            runs_dir: self.runs_dir.clone(),
        }
    }

    fn run_id(&self, command: &str, cfg: &Config) -> String {
        self.run_id
            .clone()
            .unwrap_or_else(|| format!("{command}-{}-s{}", cfg.task, cfg.seed))
    }
}

pub fn execute(command: Command) -> Result<String, RunError> {
    match command {
        Command::Induce {
            common,
            output,
            trials,
            instructions,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = trials {
                cfg.induction.n_trials = n;
            }
            if let Some(n) = instructions {
                cfg.induction.n_instructions = n;
            }
            let run_id = common.run_id("induce", &cfg);
            cmd_induce(&cfg, &common.workspace(), &run_id, common.force, output.as_deref())
        }
        Command::Optimize {
            common,
            prompt,
            output,
            epochs,
            beam,
            halt_after,
        } => {
            let mut cfg = common.resolve()?;
            if let Some(n) = epochs {
                cfg.optimizer.n_epochs = n;
            }
            if let Some(n) = beam {
                cfg.optimizer.beam_b = n;
            }
            let (run_id, resume) = match &common.resume {
                Some(id) => (id.clone(), true),
                None => (common.run_id("optimize", &cfg), false),
            };
            cmd_optimize(
                &cfg,
                &common.workspace(),
                &OptimizeArgs {
                    run_id: &run_id,
                    prompt: prompt.as_deref(),
                    resume,
                    force: common.force,
                    halt_after,
                    output: output.as_deref(),
                },
            )
        }
        Command::Infer { common, prompt, output } => {
            let cfg = common.resolve()?;
            cmd_infer(&cfg, &common.workspace(), &prompt, &output)
        }
        Command::Evaluate {
            common,
            predictions,
            output,
        } => {
            let cfg = common.resolve()?;
            cmd_evaluate(&cfg, &predictions, output.as_deref())
        }
        Command::Baseline {
            common,
            kind,
            shots,
            output,
            exemplars,
            exemplar_refs,
            template,
        } => {
            let cfg = common.resolve()?;
            cmd_baseline(
                &cfg,
                &common.workspace(),
                &BaselineArgs {
                    kind,
                    shots,
                    output: &output,
                    exemplars: exemplars.as_deref(),
                    exemplar_refs: &exemplar_refs,
                    template: template.as_deref(),
                },
            )
        }
    }
}

/// Parses `args` (program name first), runs the command, prints the outcome
/// and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
