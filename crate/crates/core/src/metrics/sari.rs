//! Sentence-level SARI over whitespace tokens.
//!
//! For each n-gram order 1..=4 three scores are computed against the source
//! `S`, the system output `C` and the pooled reference n-grams `R` (a
//! multiset summed over all `r` references):
//!
//! * keep: F1 of precision/recall over `K = rS ∩ rC`, where `rX` scales every
//!   count of `X` by `r`. For each kept n-gram `g`, `good(g) = min(K(g), R(g))`;
//!   precision averages `good(g) / K(g)` over the distinct n-grams of `K`,
//!   recall averages `good(g) / A(g)` over the distinct n-grams of
//!   `A = rS ∩ R`.
//! * delete: precision only. `D = rS − rC`; each deleted n-gram is correct to
//!   the extent it is absent from the references, `(D − R)(g) / D(g)`.
//! * add: F1 over n-gram *sets*. Added = `C − S`, correct = added ∩ `R`,
//!   recall against `R − S`.
//!
//! Worked example, source `a b c`, output `a b`, reference `a b`:
//! unigram keep 1, delete 1 (`c` dropped and absent from the reference),
//! add 0; bigram keep 1, delete 1; trigram keep 0, delete 1; 4-gram all 0.
//! Averages: keep 0.5, delete 0.75, add 0, so SARI = 100 · 1.25 / 3 ≈ 41.67.
//!
//! Any ratio with a zero denominator contributes 0; there is no smoothing.

use std::collections::HashMap;

use super::MetricError;

const MAX_ORDER: usize = 4;

type Counts<'a> = HashMap<Vec<&'a str>, usize>;

fn ngram_counts<'a>(tokens: &[&'a str], n: usize) -> Counts<'a> {
    let mut counts = HashMap::new();
    if tokens.len() >= n {
        for window in tokens.windows(n) {
            *counts.entry(window.to_vec()).or_insert(0) += 1;
        }
    }
    counts
}

fn scaled<'a>(counts: &Counts<'a>, factor: usize) -> Counts<'a> {
    counts.iter().map(|(k, v)| (k.clone(), v * factor)).collect()
}

fn intersect<'a>(a: &Counts<'a>, b: &Counts<'a>) -> Counts<'a> {
    a.iter()
        .filter_map(|(k, &v)| {
            let m = v.min(b.get(k).copied().unwrap_or(0));
            (m > 0).then(|| (k.clone(), m))
        })
        .collect()
}

fn subtract<'a>(a: &Counts<'a>, b: &Counts<'a>) -> Counts<'a> {
    a.iter()
        .filter_map(|(k, &v)| {
            let d = v.saturating_sub(b.get(k).copied().unwrap_or(0));
            (d > 0).then(|| (k.clone(), d))
        })
        .collect()
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Keep, delete and add scores for a single n-gram order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SariComponents {
    pub keep: f64,
    pub delete: f64,
    pub add: f64,
}

fn order_components(source: &[&str], output: &[&str], refs: &[Vec<&str>], n: usize) -> SariComponents {
    let r = refs.len();
    let src = ngram_counts(source, n);
    let out = ngram_counts(output, n);
    let mut pooled: Counts = HashMap::new();
    for reference in refs {
        for (k, v) in ngram_counts(reference, n) {
            *pooled.entry(k).or_insert(0) += v;
        }
    }
    let src_rep = scaled(&src, r);
    let out_rep = scaled(&out, r);

    let kept = intersect(&src_rep, &out_rep);
    let kept_good = intersect(&kept, &pooled);
    let kept_all = intersect(&src_rep, &pooled);
    let mut p_sum = 0.0;
    let mut r_sum = 0.0;
    for (g, &good) in &kept_good {
        p_sum += good as f64 / kept[g] as f64;
        r_sum += good as f64 / kept_all[g] as f64;
    }
    let keep = f1(
        ratio(p_sum, kept.len() as f64),
        ratio(r_sum, kept_all.len() as f64),
    );

    let deleted = subtract(&src_rep, &out_rep);
    let deleted_good = subtract(&deleted, &pooled);
    let del_sum: f64 = deleted_good
        .iter()
        .map(|(g, &good)| good as f64 / deleted[g] as f64)
        .sum();
    let delete = ratio(del_sum, deleted.len() as f64);

    let added: Vec<_> = out.keys().filter(|g| !src.contains_key(*g)).collect();
    let added_good = added.iter().filter(|g| pooled.contains_key(**g)).count();
    let addable = pooled.keys().filter(|g| !src.contains_key(*g)).count();
    let add = f1(
        ratio(added_good as f64, added.len() as f64),
        ratio(added_good as f64, addable as f64),
    );

    SariComponents { keep, delete, add }
}

/// Per-order components averaged over orders 1..=4.
pub fn sari_components(
    source: &str,
    output: &str,
    references: &[String],
) -> Result<SariComponents, MetricError> {
    if references.is_empty() {
        return Err(MetricError::EmptyReferences);
    }
    let source: Vec<&str> = source.split_whitespace().collect();
    let output: Vec<&str> = output.split_whitespace().collect();
    let refs: Vec<Vec<&str>> = references
        .iter()
        .map(|r| r.split_whitespace().collect())
        .collect();
    let mut total = SariComponents {
        keep: 0.0,
        delete: 0.0,
        add: 0.0,
    };
    for n in 1..=MAX_ORDER {
        let c = order_components(&source, &output, &refs, n);
        total.keep += c.keep;
        total.delete += c.delete;
        total.add += c.add;
    }
    let k = MAX_ORDER as f64;
    Ok(SariComponents {
        keep: total.keep / k,
        delete: total.delete / k,
        add: total.add / k,
    })
}

/// SARI on a 0–100 scale.
pub fn sari(source: &str, output: &str, references: &[String]) -> Result<f64, MetricError> {
    let c = sari_components(source, output, references)?;
    Ok(100.0 * (c.keep + c.delete + c.add) / 3.0)
}
