//! Command implementations behind the `apio` binary: induction, optimization
//! with resumable run state, inference, evaluation and baselines.

pub mod cli;
pub mod config;
pub mod data;
pub mod state;

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use log::{info, warn};
use rand::seq::index;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::corpus::{sample_split, SamplePair, SplitSpec};
use crate::induction::{best_of_trials, InductionError};
use crate::llm::{
    Backend, ChatRequest, Client, Gateway, GatewayStats, GenerationProfile, LlmError, OpenAiBackend,
    ProfileKind, ResponseCache, Script, ScriptedBackend,
};
use crate::metrics::{MetricError, MetricReport};
use crate::optimizer::fitness::{raw_error, run_all};
use crate::optimizer::{dev_subsample, Optimizer, OptimizerError, OptimizerState};
use crate::prompt::{clean_output, Prompt, PromptError, TaskKind, TaskTemplate, SLOT};
use crate::seed::derived_rng;

use config::Config;
use data::{load_pairs, load_sources, read_lines, require_file, Dataset};
use state::{FinalReport, Phase, RankedMetric, RequestCounts, RunLock, RunState};

pub const FAILED_PLACEHOLDER: &str = "<FAILED>";
const TOP_REPORTED: usize = 5;

const ZERO_SHOT_GEC: &str = include_str!("../../templates/zero_shot_gec.txt");
const ZERO_SHOT_SIMPLIFY: &str = include_str!("../../templates/zero_shot_simplify.txt");
const ZERO_SHOT_GENERIC: &str = include_str!("../../templates/zero_shot_generic.txt");

#[derive(Debug, Error)]
pub enum RunError {
    /// Bad flags, configuration or input files.
    #[error("{0}")]
    Usage(String),
    /// The engine or a model backend failed.
    #[error("{0}")]
    Engine(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Engine(_) => 1,
        }
    }
}

impl From<LlmError> for RunError {
    fn from(e: LlmError) -> Self {
        RunError::Engine(e.to_string())
    }
}

impl From<PromptError> for RunError {
    fn from(e: PromptError) -> Self {
        RunError::Usage(e.to_string())
    }
}

impl From<MetricError> for RunError {
    fn from(e: MetricError) -> Self {
        RunError::Usage(e.to_string())
    }
}

impl From<InductionError> for RunError {
    fn from(e: InductionError) -> Self {
        match e {
            InductionError::Config(_) => RunError::Usage(e.to_string()),
            _ => RunError::Engine(e.to_string()),
        }
    }
}

impl From<OptimizerError> for RunError {
    fn from(e: OptimizerError) -> Self {
        match e {
            OptimizerError::Config(_) | OptimizerError::Prompt(_) => RunError::Usage(e.to_string()),
            _ => RunError::Engine(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> RunError {
    RunError::Engine(format!("{}: {e}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<(), RunError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| io_error(parent, e))?;
    }
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    write_text(path, &text)
}

/// Where a command keeps run directories and the response cache.
#[derive(Debug, Clone)]
pub struct Workspace {
    pub runs_dir: PathBuf,
}

impl Workspace {
    pub fn run_dir(&self, run_id: &str) -> PathBuf {
        self.runs_dir.join(run_id)
    }

    fn cache_dir(&self, cfg: &Config) -> PathBuf {
        cfg.cache_dir.clone().unwrap_or_else(|| self.runs_dir.join("cache"))
    }

    /// Creates a fresh run directory. An existing run is only replaced with
    /// `force`.
    fn fresh_run_dir(&self, run_id: &str, force: bool) -> Result<PathBuf, RunError> {
        validate_run_id(run_id)?;
        let dir = self.run_dir(run_id);
        if dir.join(state::STATE_FILE).exists() {
            if !force {
                return Err(RunError::Usage(format!(
                    "run {run_id} already exists in {}; pass --force to replace it or --resume to continue it",
                    self.runs_dir.display()
                )));
            }
            fs::remove_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| io_error(&dir, e))?;
        Ok(dir)
    }
}

fn validate_run_id(run_id: &str) -> Result<(), RunError> {
    let ok = !run_id.is_empty()
        && run_id != "cache"
        && run_id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        && !run_id.starts_with('.');
    if ok {
        Ok(())
    } else {
        Err(RunError::Usage(format!("invalid run id {run_id:?}")))
    }
}

/// Builds the model client: scripted for dry runs, otherwise the HTTP
/// backend with the disk cache.
pub fn build_client(cfg: &Config, ws: &Workspace) -> Result<Client, RunError> {
    let (backend, cache): (Arc<dyn Backend>, Option<ResponseCache>) = match &cfg.script {
        Some(path) => {
            require_file(path, "script")?;
            let script = Script::load(path).map_err(|e| RunError::Usage(e.to_string()))?;
            let backend = ScriptedBackend::new(script).map_err(|e| RunError::Usage(e.to_string()))?;
            (Arc::new(backend), None)
        }
        None => {
            let cache = ResponseCache::open(ws.cache_dir(cfg))?;
            (Arc::new(OpenAiBackend::from_env(cfg.backend.clone())), Some(cache))
        }
    };
    Ok(Client::new(
        Arc::new(Gateway::new(backend, cache)),
        cfg.backend.model.clone(),
        cfg.backend.max_tokens,
    ))
}

fn request_counts(gateway: &Gateway, base: RequestCounts) -> RequestCounts {
    let mut counts = base;
    for record in gateway.records() {
        match record.kind {
            ProfileKind::Explore => counts.explore += 1,
            ProfileKind::Infer => counts.infer += 1,
        }
    }
    counts
}

#[derive(Serialize)]
struct CallLog {
    stats: GatewayStats,
    requests: usize,
}

fn write_call_log(dir: &Path, gateway: &Gateway) -> Result<(), RunError> {
    write_json(
        &dir.join("calls.json"),
        &CallLog {
            stats: gateway.stats(),
            requests: gateway.records().len(),
        },
    )
}

/// Train split, scoring subsample of dev, full dev, and the M2 records of
/// the dev items when the data came with gold edits.
struct Splits {
    train: Vec<SamplePair>,
    dev: Vec<SamplePair>,
    dev_sub: Vec<SamplePair>,
    dev_m2: Option<Vec<crate::corpus::M2Record>>,
}

fn load_splits(cfg: &Config, dev_indices: Option<&[usize]>) -> Result<(Splits, Vec<usize>), RunError> {
    let path = cfg
        .data
        .path
        .as_ref()
        .ok_or_else(|| RunError::Usage("no dataset given (--data)".into()))?;
    let Dataset { pairs, m2 } = load_pairs(path, &cfg.data.refs, cfg.data.format)?;
    let spec = SplitSpec {
        train_size: cfg.data.train_size,
        dev_size: cfg.data.dev_size,
        seed: cfg.seed,
    };
    let (train, dev) = sample_split(&pairs, &spec).map_err(|e| RunError::Usage(e.to_string()))?;
    if dev.is_empty() {
        return Err(RunError::Usage("dev split is empty (--dev-size)".into()));
    }
    let indices = match dev_indices {
        Some(i) => i.to_vec(),
        None => dev_subsample(dev.len(), cfg.optimizer.dev_subsample, cfg.seed),
    };
    if indices.iter().any(|&i| i >= dev.len()) {
        return Err(RunError::Engine("stored dev subsample does not fit the dev split".into()));
    }
    let dev_sub = indices.iter().map(|&i| dev[i].clone()).collect();
    let dev_m2 = m2.map(|records| {
        let by_id: HashMap<&str, &crate::corpus::M2Record> =
            pairs.iter().map(|p| p.id.as_str()).zip(records.iter()).collect();
        dev.iter().map(|p| by_id[p.id.as_str()].clone()).collect()
    });
    Ok((
        Splits {
            train,
            dev,
            dev_sub,
            dev_m2,
        },
        indices,
    ))
}

/// `apio induce`: best-of-trials induction; writes `prompt.txt`.
pub fn cmd_induce(cfg: &Config, ws: &Workspace, run_id: &str, force: bool, output: Option<&Path>) -> Result<String, RunError> {
    cfg.validate()?;
    let (splits, indices) = load_splits(cfg, None)?;
    let dir = ws.fresh_run_dir(run_id, force)?;
    let _lock = RunLock::acquire(&dir)?;
    let client = build_client(cfg, ws)?;
    let template = TaskTemplate::for_task(cfg.task);

    let mut state = RunState {
        run_id: run_id.to_string(),
        command: "induce".into(),
        config: cfg.clone(),
        phase: Phase::Induction,
        epoch: 0,
        seed_prompt: None,
        dev_subsample: indices,
        induction: Vec::new(),
        optimizer: None,
        backend_state: None,
        deterministic_infer: None,
        requests: RequestCounts::default(),
        final_report: None,
        artifacts: Vec::new(),
    };
    state.save(&dir)?;

    let dev = &splits.dev_sub;
    let result = best_of_trials(&splits.train, &cfg.induction, &template, &client, |p| {
        raw_error(p, dev, &client).map(|e| -e).map_err(|e| e.to_string())
    });
    write_call_log(&dir, client.gateway())?;
    let (prompt, reports) = result?;
    let text = prompt.render_template()? + "\n";
    write_text(&dir.join("prompt.txt"), &text)?;
    if let Some(out) = output {
        write_text(out, &text)?;
    }
    let best = reports
        .iter()
        .filter_map(|r| r.fitness)
        .fold(f64::NEG_INFINITY, f64::max);
    state.induction = reports;
    state.backend_state = client.gateway().backend().snapshot();
    state.requests = request_counts(client.gateway(), RequestCounts::default());
    state.artifacts = vec!["prompt.txt".into()];
    state.phase = Phase::Done;
    state.save(&dir)?;
    Ok(format!(
        "induced {} instructions (dev raw error {:.4}); prompt written to {}",
        prompt.instructions.len(),
        -best,
        dir.join("prompt.txt").display()
    ))
}

pub struct OptimizeArgs<'a> {
    pub run_id: &'a str,
    pub prompt: Option<&'a Path>,
    pub resume: bool,
    pub force: bool,
    /// Stop after persisting this epoch, as if the process had been killed.
    pub halt_after: Option<usize>,
    pub output: Option<&'a Path>,
}

/// `apio optimize`: beam search from a prompt file, persisting the run state
/// after every epoch.
pub fn cmd_optimize(cfg: &Config, ws: &Workspace, args: &OptimizeArgs) -> Result<String, RunError> {
    let (dir, fresh) = if args.resume {
        validate_run_id(args.run_id)?;
        let dir = ws.run_dir(args.run_id);
        if !dir.join(state::STATE_FILE).exists() {
            return Err(RunError::Usage(format!("no run {} in {}", args.run_id, ws.runs_dir.display())));
        }
        (dir.clone(), None)
    } else {
        cfg.validate()?;
        let path = args
            .prompt
            .ok_or_else(|| RunError::Usage("optimize needs --prompt <file> (or --resume <run>)".into()))?;
        require_file(path, "prompt file")?;
        let text = fs::read_to_string(path).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?;
        let prompt = Prompt::parse(&text)?;
        let seed_prompt = prompt.render_template()?;
        let (_, indices) = load_splits(cfg, None)?;
        let dir = ws.fresh_run_dir(args.run_id, args.force)?;
        let state = RunState {
            run_id: args.run_id.to_string(),
            command: "optimize".into(),
            config: cfg.clone(),
            phase: Phase::Optimization,
            epoch: 0,
            seed_prompt: Some(seed_prompt),
            dev_subsample: indices,
            induction: Vec::new(),
            optimizer: None,
            backend_state: None,
            deterministic_infer: None,
            requests: RequestCounts::default(),
            final_report: None,
            artifacts: Vec::new(),
        };
        (dir, Some(state))
    };
    let _lock = RunLock::acquire(&dir)?;
    let mut state = match fresh {
        Some(s) => {
            s.save(&dir)?;
            s
        }
        None => RunState::load(&dir)?,
    };
    if state.command != "optimize" {
        return Err(RunError::Usage(format!("run {} is not an optimize run", state.run_id)));
    }
    if state.phase == Phase::Done {
        return Ok(format!("run {} is already complete", state.run_id));
    }
    let cfg = state.config.clone();
    let (splits, _) = load_splits(&cfg, Some(&state.dev_subsample))?;
    let client = build_client(&cfg, ws)?;
    let gateway = client.gateway().clone();
    if let Some(saved) = &state.backend_state {
        gateway.backend().restore(saved)?;
    }
    let base = state.requests;
    let template = TaskTemplate::for_task(cfg.task);
    let seed_prompt = Prompt::parse(state.seed_prompt.as_deref().unwrap_or_default())?;
    let optimizer = Optimizer::new(&cfg.optimizer, &template, &splits.train, &splits.dev_sub, &client)?;

    let persist = |state: &mut RunState, opt: &OptimizerState| -> Result<(), RunError> {
        state.epoch = opt.epoch;
        state.optimizer = Some(opt.clone());
        state.backend_state = gateway.backend().snapshot();
        state.requests = request_counts(&gateway, base);
        state.save(&dir)?;
        write_call_log(&dir, &gateway)
    };

    let mut opt = match state.optimizer.take() {
        Some(o) => o,
        None => {
            if gateway.backend().is_network() {
                state.deterministic_infer = probe_determinism(&client, &cfg, &seed_prompt, &splits.dev_sub);
            }
            let o = optimizer.init(&seed_prompt)?;
            persist(&mut state, &o)?;
            o
        }
    };
    if state.phase == Phase::Optimization {
        while opt.epoch < cfg.optimizer.n_epochs {
            if args.halt_after == Some(opt.epoch) {
                return Ok(format!("halted after epoch {}", opt.epoch));
            }
            if let Err(e) = optimizer.run_epoch(&mut opt) {
                write_call_log(&dir, &gateway)?;
                return Err(e.into());
            }
            persist(&mut state, &opt)?;
        }
        state.phase = Phase::Evaluation;
        persist(&mut state, &opt)?;
    }

    let best = opt.best().clone();
    let full_dev_raw_error = raw_error(&best.prompt, &splits.dev, &client)?;
    let mut top = Vec::new();
    for c in opt.pool.members.iter().take(TOP_REPORTED) {
        let outputs = run_all(&c.prompt, &splits.dev, &client)?;
        let report = task_metric(cfg.task, &splits.dev, splits.dev_m2.as_deref(), &outputs)?;
        top.push(RankedMetric {
            candidate_id: c.id,
            fitness: c.fitness,
            metric: report.metric_name,
            value: report.aggregate,
        });
    }
    let best_text = best.prompt.render_template()? + "\n";
    write_text(&dir.join("best_prompt.txt"), &best_text)?;
    if let Some(out) = args.output {
        write_text(out, &best_text)?;
    }
    let report = FinalReport {
        best_id: best.id,
        full_dev_raw_error,
        top,
    };
    write_json(&dir.join("report.json"), &report)?;
    state.final_report = Some(report);
    state.artifacts = vec!["best_prompt.txt".into(), "report.json".into()];
    state.phase = Phase::Done;
    persist(&mut state, &opt)?;
    Ok(format!(
        "best candidate #{} ({} instructions): fitness {:.4}, dev-subsample raw error {:.4}, full dev raw error {:.4}; prompt written to {}",
        best.id,
        best.prompt.instructions.len(),
        best.fitness,
        best.raw_error,
        full_dev_raw_error,
        dir.join("best_prompt.txt").display()
    ))
}

/// Sends the first dev input twice under the inference profile, bypassing
/// the cache. A mismatch is logged, not fatal.
fn probe_determinism(client: &Client, cfg: &Config, prompt: &Prompt, dev: &[SamplePair]) -> Option<bool> {
    let pair = dev.iter().find(|p| !p.source.trim().is_empty())?;
    let text = prompt.render(&pair.source).ok()?;
    let profile = GenerationProfile::infer(cfg.backend.model.clone(), cfg.backend.max_tokens);
    let request = ChatRequest::user(text, profile, 0).ok()?;
    match client.gateway().probe_determinism(&request, 2) {
        Ok(same) => {
            if !same {
                warn!("backend is not deterministic under the inference profile");
            }
            Some(same)
        }
        Err(e) => {
            warn!("determinism probe failed: {e}");
            None
        }
    }
}

/// SARI for simplification, f05-approx when gold edits are available,
/// otherwise mean word-level distance.
fn task_metric(
    task: TaskKind,
    pairs: &[SamplePair],
    m2: Option<&[crate::corpus::M2Record]>,
    outputs: &[String],
) -> Result<MetricReport, RunError> {
    Ok(match (task, m2) {
        (TaskKind::Simplify, _) => MetricReport::sari(pairs, outputs)?,
        (TaskKind::Gec, Some(records)) => MetricReport::f05(records, outputs)?,
        _ => MetricReport::levenshtein(pairs, outputs)?,
    })
}

/// Runs `render` output through the model for every input, keeping order.
/// Blank inputs give blank outputs without a call. A failing line is retried
/// once, then replaced by [`FAILED_PLACEHOLDER`].
pub fn infer_lines<F>(client: &Client, inputs: &[String], render: F) -> (Vec<String>, usize)
where
    F: Fn(&str) -> Result<String, PromptError> + Sync,
{
    let one = |input: &String| -> Option<String> {
        if input.trim().is_empty() {
            return Some(String::new());
        }
        let text = match render(input.trim()) {
            Ok(t) => t,
            Err(e) => {
                warn!("cannot render prompt: {e}");
                return None;
            }
        };
        for attempt in 1..=2 {
            match client.infer(&text) {
                Ok(out) => return Some(clean_output(&out)),
                Err(e) => warn!("inference attempt {attempt} failed: {e}"),
            }
        }
        None
    };
    let results: Vec<Option<String>> = if client.parallel_safe() {
        inputs.par_iter().map(one).collect()
    } else {
        inputs.iter().map(one).collect()
    };
    let failed = results.iter().filter(|r| r.is_none()).count();
    let lines = results
        .into_iter()
        .map(|r| r.unwrap_or_else(|| FAILED_PLACEHOLDER.to_string()))
        .collect();
    (lines, failed)
}

fn write_predictions(path: &Path, lines: &[String]) -> Result<(), RunError> {
    let mut text = lines.join("\n");
    if !lines.is_empty() {
        text.push('\n');
    }
    write_text(path, &text)
}

fn infer_summary(client: &Client, output: &Path, n: usize, failed: usize) -> Result<String, RunError> {
    let stats = client.gateway().stats();
    let summary = format!(
        "{n} predictions written to {} ({} backend calls, {} network, {} cached)",
        output.display(),
        stats.backend_calls,
        stats.network_calls,
        stats.cache_hits
    );
    if failed > 0 {
        return Err(RunError::Engine(format!("{summary}; {failed} line(s) failed and hold {FAILED_PLACEHOLDER}")));
    }
    Ok(summary)
}

fn dataset_path(cfg: &Config) -> Result<&Path, RunError> {
    cfg.data
        .path
        .as_deref()
        .ok_or_else(|| RunError::Usage("no dataset given (--data)".into()))
}

/// `apio infer`: one prediction line per input line.
pub fn cmd_infer(cfg: &Config, ws: &Workspace, prompt_path: &Path, output: &Path) -> Result<String, RunError> {
    cfg.validate()?;
    require_file(prompt_path, "prompt file")?;
    let text = fs::read_to_string(prompt_path).map_err(|e| RunError::Usage(format!("{}: {e}", prompt_path.display())))?;
    let prompt = Prompt::parse(&text)?;
    let inputs = load_sources(dataset_path(cfg)?, &cfg.data.refs, cfg.data.format)?;
    let client = build_client(cfg, ws)?;
    let (lines, failed) = infer_lines(&client, &inputs, |s| prompt.render(s));
    write_predictions(output, &lines)?;
    infer_summary(&client, output, lines.len(), failed)
}

/// `apio evaluate`: writes a JSON array of metric reports.
pub fn cmd_evaluate(cfg: &Config, predictions: &Path, output: Option<&Path>) -> Result<String, RunError> {
    require_file(predictions, "predictions file")?;
    let text = fs::read_to_string(predictions).map_err(|e| RunError::Usage(format!("{}: {e}", predictions.display())))?;
    let hyps: Vec<String> = read_lines(&text).into_iter().map(|l| l.trim().to_string()).collect();
    let path = dataset_path(cfg)?;
    let format = data::resolve_format(path, &cfg.data.refs, cfg.data.format);
    let mut reports = Vec::new();
    if format == config::DataFormat::M2 {
        require_file(path, "dataset")?;
        let records = crate::corpus::load_m2(path).map_err(|e| RunError::Usage(e.to_string()))?;
        if records.len() != hyps.len() {
            return Err(RunError::Usage(format!(
                "length mismatch: {} predictions for {} gold records",
                hyps.len(),
                records.len()
            )));
        }
        if cfg.task != TaskKind::Simplify {
            reports.push(MetricReport::f05(&records, &hyps)?);
        }
        let pairs: Result<Vec<SamplePair>, _> = records
            .iter()
            .enumerate()
            .map(|(i, r)| r.to_sample_pair(i.to_string()))
            .collect();
        match pairs {
            Ok(pairs) => {
                if cfg.task == TaskKind::Simplify {
                    reports.push(MetricReport::sari(&pairs, &hyps)?);
                } else {
                    reports.push(MetricReport::levenshtein(&pairs, &hyps)?);
                }
            }
            Err(e) => warn!("word-level distance skipped: {e}"),
        }
    } else {
        let Dataset { pairs, .. } = load_pairs(path, &cfg.data.refs, cfg.data.format)?;
        if pairs.len() != hyps.len() {
            return Err(RunError::Usage(format!(
                "length mismatch: {} predictions for {} gold items",
                hyps.len(),
                pairs.len()
            )));
        }
        match cfg.task {
            TaskKind::Simplify => reports.push(MetricReport::sari(&pairs, &hyps)?),
            _ => reports.push(MetricReport::levenshtein(&pairs, &hyps)?),
        }
    }
    if let Some(out) = output {
        MetricReport::write_json(&reports, out).map_err(|e| io_error(out, e))?;
    }
    Ok(reports
        .iter()
        .map(|r| format!("{}: {:.4} (n={})", r.metric_name, r.aggregate, r.n_samples))
        .collect::<Vec<_>>()
        .join("\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    Copy,
    ZeroShot,
    FewShot,
}

pub struct BaselineArgs<'a> {
    pub kind: BaselineKind,
    pub shots: usize,
    pub output: &'a Path,
    /// Pool the few-shot exemplars are drawn from.
    pub exemplars: Option<&'a Path>,
    pub exemplar_refs: &'a [PathBuf],
    /// Replaces the built-in zero-shot instruction.
    pub template: Option<&'a Path>,
}

#[derive(Serialize)]
struct BaselineMeta<'a> {
    kind: BaselineKind,
    task: TaskKind,
    seed: u64,
    shots: Option<usize>,
    exemplar_ids: Vec<String>,
    prompt_text: Option<&'a str>,
}

pub fn zero_shot_instruction(task: TaskKind) -> &'static str {
    match task {
        TaskKind::Gec => ZERO_SHOT_GEC,
        TaskKind::Simplify => ZERO_SHOT_SIMPLIFY,
        TaskKind::Generic => ZERO_SHOT_GENERIC,
    }
}

/// `apio baseline`: copy, zero-shot or few-shot predictions plus a
/// `<output>.meta.json` sidecar recording the exact prompt.
pub fn cmd_baseline(cfg: &Config, ws: &Workspace, args: &BaselineArgs) -> Result<String, RunError> {
    cfg.validate()?;
    let inputs = load_sources(dataset_path(cfg)?, &cfg.data.refs, cfg.data.format)?;
    let meta_path = PathBuf::from(format!("{}.meta.json", args.output.display()));
    if args.kind == BaselineKind::Copy {
        let lines: Vec<String> = inputs.iter().map(|s| s.trim().to_string()).collect();
        write_predictions(args.output, &lines)?;
        write_json(
            &meta_path,
            &BaselineMeta {
                kind: args.kind,
                task: cfg.task,
                seed: cfg.seed,
                shots: None,
                exemplar_ids: Vec::new(),
                prompt_text: None,
            },
        )?;
        return Ok(format!("{} copied lines written to {}", lines.len(), args.output.display()));
    }

    let instruction = match args.template {
        Some(path) => {
            require_file(path, "template")?;
            fs::read_to_string(path).map_err(|e| RunError::Usage(format!("{}: {e}", path.display())))?
        }
        None => zero_shot_instruction(cfg.task).to_string(),
    };
    let template = TaskTemplate::for_task(cfg.task);
    let mut prompt_text = format!("{}\n", instruction.trim());
    let mut exemplar_ids = Vec::new();
    if args.kind == BaselineKind::FewShot {
        if args.shots == 0 {
            return Err(RunError::Usage("few-shot needs --shots >= 1".into()));
        }
        let pool_path = args
            .exemplars
            .ok_or_else(|| RunError::Usage("few-shot needs --exemplars <file>".into()))?;
        let pool = load_pairs(pool_path, args.exemplar_refs, None)?.pairs;
        if pool.len() < args.shots {
            return Err(RunError::Usage(format!(
                "{} shots requested but the exemplar pool has {} pairs",
                args.shots,
                pool.len()
            )));
        }
        let picked = index::sample(&mut derived_rng(cfg.seed, &["few-shot"]), pool.len(), args.shots);
        prompt_text.push('\n');
        for i in picked {
            let pair = &pool[i];
            exemplar_ids.push(pair.id.clone());
            prompt_text.push_str(&template.example(&pair.source, pair.first_reference()));
            prompt_text.push_str("\n\n");
        }
    }
    prompt_text.push_str(&template.footer);
    if prompt_text.matches(SLOT).count() != 1 {
        return Err(RunError::Usage(format!("baseline prompt must contain {SLOT} exactly once")));
    }

    let client = build_client(cfg, ws)?;
    let (lines, failed) = infer_lines(&client, &inputs, |s| Ok(prompt_text.replacen(SLOT, s, 1)));
    write_predictions(args.output, &lines)?;
    write_json(
        &meta_path,
        &BaselineMeta {
            kind: args.kind,
            task: cfg.task,
            seed: cfg.seed,
            shots: (args.kind == BaselineKind::FewShot).then_some(args.shots),
            exemplar_ids,
            prompt_text: Some(&prompt_text),
        },
    )?;
    info!("baseline prompt:\n{prompt_text}");
    infer_summary(&client, args.output, lines.len(), failed)
}
