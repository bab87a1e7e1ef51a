use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::{CorpusError, SamplePair};
use crate::seed::derived_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_size: usize,
    pub dev_size: usize,
    pub seed: u64,
}

/// Draws disjoint train and dev subsets without replacement. Both subsets
/// keep the corpus order of their members.
pub fn sample_split(
    corpus: &[SamplePair],
    spec: &SplitSpec,
) -> Result<(Vec<SamplePair>, Vec<SamplePair>), CorpusError> {
    let wanted = spec.train_size + spec.dev_size;
    if wanted > corpus.len() {
        return Err(CorpusError::Split(format!(
            "train {} + dev {} exceeds corpus size {}",
            spec.train_size,
            spec.dev_size,
            corpus.len()
        )));
    }
    let mut rng = derived_rng(spec.seed, &["split"]);
    let picked = index::sample(&mut rng, corpus.len(), wanted).into_vec();
    let mut train_idx = picked[..spec.train_size].to_vec();
    let mut dev_idx = picked[spec.train_size..].to_vec();
    train_idx.sort_unstable();
    dev_idx.sort_unstable();
    let take = |idx: &[usize]| idx.iter().map(|&i| corpus[i].clone()).collect::<Vec<_>>();
    Ok((take(&train_idx), take(&dev_idx)))
}
