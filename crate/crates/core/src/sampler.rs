//! Multistage smoothed language sampling.
//!
//! A batch first fixes a pivot side by a fair coin, then a pivot language from
//! the smoothed marginal of that side, then draws `m` partner languages from
//! the smoothed conditional, one mini-batch of `mb` samples each. Marginals
//! are `q_i ∝ p_i^α` and conditionals `q_{j|i} ∝ p_{j|i}^β`, where `p` are the
//! empirical proportions of the pair counts. Zero-mass entries stay at zero
//! for any exponent, including zero.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus_io::LangCode;
use crate::error::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.75;
pub const DEFAULT_MIN_PAIR_COUNT: u64 = 30;
pub const DEFAULT_MINI_BATCHES: usize = 8;
pub const DEFAULT_MINI_BATCH_SIZE: usize = 32;

/// Square count matrix `c[i][j]`: samples with source language `i` and
/// target language `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCounts {
    pub languages: Vec<LangCode>,
    pub counts: Vec<Vec<u64>>,
}

impl PairCounts {
    pub fn from_map(map: &BTreeMap<(LangCode, LangCode), u64>) -> Self {
        let mut languages: Vec<LangCode> = map.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect();
        languages.sort();
        languages.dedup();
        let n = languages.len();
        let mut counts = vec![vec![0u64; n]; n];
        for ((a, b), &c) in map {
            let i = languages.binary_search(a).expect("collected above");
            let j = languages.binary_search(b).expect("collected above");
            counts[i][j] += c;
        }
        PairCounts { languages, counts }
    }

    /// Zeroes every pair with fewer than `min_count` samples.
    pub fn with_floor(mut self, min_count: u64) -> Self {
        for row in &mut self.counts {
            for c in row.iter_mut() {
                if *c < min_count {
                    *c = 0;
                }
            }
        }
        self
    }

    pub fn index_of(&self, lang: &LangCode) -> Option<usize> {
        self.languages.binary_search(lang).ok()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SamplingPlan {
    pub languages: Vec<LangCode>,
    pub alpha: f64,
    pub beta: f64,
    pub q_src: Vec<f64>,
    pub q_tgt: Vec<f64>,
    /// `q_tgt_given_src[i][j]`
    pub q_tgt_given_src: Vec<Vec<f64>>,
    /// `q_src_given_tgt[j][i]`
    pub q_src_given_tgt: Vec<Vec<f64>>,
}

/// `x^e` with zero mass kept at zero, normalized. All-zero input stays zero.
fn smooth(weights: &[f64], exponent: f64) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return vec![0.0; weights.len()];
    }
    let powered: Vec<f64> = weights
        .iter()
        .map(|&w| if w > 0.0 { (w / total).powf(exponent) } else { 0.0 })
        .collect();
    let z: f64 = powered.iter().sum();
    powered.into_iter().map(|x| x / z).collect()
}

pub fn compute_plan(counts: &PairCounts, alpha: f64, beta: f64) -> Result<SamplingPlan> {
    if !(alpha >= 0.0 && beta >= 0.0 && alpha.is_finite() && beta.is_finite()) {
        return Err(Error::Config(format!(
            "smoothing exponents must be finite and nonnegative, got alpha={alpha} beta={beta}"
        )));
    }
    let n = counts.languages.len();
    if counts.counts.len() != n || counts.counts.iter().any(|r| r.len() != n) {
        return Err(Error::Invalid("count matrix is not square over its languages".into()));
    }
    let c: Vec<Vec<f64>> = counts
        .counts
        .iter()
        .map(|r| r.iter().map(|&x| x as f64).collect())
        .collect();
    let row_sums: Vec<f64> = c.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<f64> = (0..n).map(|j| c.iter().map(|r| r[j]).sum()).collect();
    if row_sums.iter().all(|&s| s == 0.0) {
        return Err(Error::EmptyCounts);
    }
    let q_tgt_given_src = c.iter().map(|row| smooth(row, beta)).collect();
    let q_src_given_tgt = (0..n)
        .map(|j| smooth(&c.iter().map(|r| r[j]).collect::<Vec<_>>(), beta))
        .collect();
    Ok(SamplingPlan {
        languages: counts.languages.clone(),
        alpha,
        beta,
        q_src: smooth(&row_sums, alpha),
        q_tgt: smooth(&col_sums, alpha),
        q_tgt_given_src,
        q_src_given_tgt,
    })
}

/// Draws an index from a categorical distribution by inverse CDF.
fn draw<R: Rng>(rng: &mut R, probs: &[f64]) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PivotSide {
    Source,
    Target,
}

/// Per-language-pair sample pools `D_ij`, addressed by plan indices.
#[derive(Debug, Clone, Default)]
pub struct SamplePools {
    pools: BTreeMap<(usize, usize), Vec<String>>,
}

impl SamplePools {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds pools from `(src_lang, tgt_lang, sample_id)` triples.
    pub fn from_samples<'a>(
        plan_languages: &[LangCode],
        samples: impl IntoIterator<Item = (&'a LangCode, &'a LangCode, String)>,
    ) -> Self {
        let mut pools = SamplePools::new();
        for (s, t, id) in samples {
            if let (Ok(i), Ok(j)) = (plan_languages.binary_search(s), plan_languages.binary_search(t)) {
                pools.pools.entry((i, j)).or_default().push(id);
            }
        }
        pools
    }

    pub fn insert(&mut self, i: usize, j: usize, ids: Vec<String>) {
        self.pools.insert((i, j), ids);
    }

    pub fn get(&self, i: usize, j: usize) -> &[String] {
        self.pools.get(&(i, j)).map_or(&[], Vec::as_slice)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MiniBatch {
    pub src: usize,
    pub tgt: usize,
    /// Positions in the `(src, tgt)` pool, drawn with replacement.
    pub samples: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Batch {
    pub pivot_side: PivotSide,
    pub pivot: usize,
    pub mini_batches: Vec<MiniBatch>,
}

impl Batch {
    pub fn sample_count(&self) -> usize {
        self.mini_batches.iter().map(|m| m.samples.len()).sum()
    }
}

/// Audit form of a batch with language codes and sample ids resolved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchRecord {
    pub step: u64,
    pub pivot_side: PivotSide,
    pub pivot_lang: LangCode,
    pub mini_batches: Vec<MiniBatchRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniBatchRecord {
    pub src_lang: LangCode,
    pub tgt_lang: LangCode,
    pub ids: Vec<String>,
}

impl Batch {
    pub fn to_record(&self, step: u64, plan: &SamplingPlan, pools: &SamplePools) -> BatchRecord {
        BatchRecord {
            step,
            pivot_side: self.pivot_side,
            pivot_lang: plan.languages[self.pivot].clone(),
            mini_batches: self
                .mini_batches
                .iter()
                .map(|mb| {
                    let pool = pools.get(mb.src, mb.tgt);
                    MiniBatchRecord {
                        src_lang: plan.languages[mb.src].clone(),
                        tgt_lang: plan.languages[mb.tgt].clone(),
                        ids: mb.samples.iter().map(|&k| pool[k as usize].clone()).collect(),
                    }
                })
                .collect(),
        }
    }
}

/// One batch: `r > 0.5` pivots on the source side, otherwise on the target.
pub fn next_batch<R: Rng>(plan: &SamplingPlan, pools: &SamplePools, m: usize, mb: usize, rng: &mut R) -> Result<Batch> {
    let r: f64 = rng.random();
    let (side, marginal, conditional) = if r > 0.5 {
        (PivotSide::Source, &plan.q_src, &plan.q_tgt_given_src)
    } else {
        (PivotSide::Target, &plan.q_tgt, &plan.q_src_given_tgt)
    };
    let pivot = draw(rng, marginal);
    let mut mini_batches = Vec::with_capacity(m);
    for _ in 0..m {
        let partner = draw(rng, &conditional[pivot]);
        let (src, tgt) = match side {
            PivotSide::Source => (pivot, partner),
            PivotSide::Target => (partner, pivot),
        };
        let pool = pools.get(src, tgt);
        if pool.is_empty() {
            return Err(Error::EmptyPool(
                plan.languages[src].to_string(),
                plan.languages[tgt].to_string(),
            ));
        }
        let samples = (0..mb).map(|_| rng.random_range(0..pool.len()) as u32).collect();
        mini_batches.push(MiniBatch { src, tgt, samples });
    }
    Ok(Batch {
        pivot_side: side,
        pivot,
        mini_batches,
    })
}

/// Deterministic stream of exactly `steps` batches seeded by `seed`.
pub struct TrainingFeed<'a> {
    plan: &'a SamplingPlan,
    pools: &'a SamplePools,
    m: usize,
    mb: usize,
    remaining: u64,
    rng: ChaCha8Rng,
}

pub fn training_feed<'a>(
    plan: &'a SamplingPlan,
    pools: &'a SamplePools,
    steps: u64,
    m: usize,
    mb: usize,
    seed: u64,
) -> TrainingFeed<'a> {
    TrainingFeed {
        plan,
        pools,
        m,
        mb,
        remaining: steps,
        rng: ChaCha8Rng::seed_from_u64(seed),
    }
}

impl Iterator for TrainingFeed<'_> {
    type Item = Result<Batch>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let batch = next_batch(self.plan, self.pools, self.m, self.mb, &mut self.rng);
        if batch.is_err() {
            self.remaining = 0;
        }
        Some(batch)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lang(s: &str) -> LangCode {
        LangCode::new(s).unwrap()
    }

    fn counts(entries: &[(&str, &str, u64)]) -> PairCounts {
        PairCounts::from_map(&entries.iter().map(|(a, b, c)| ((lang(a), lang(b)), *c)).collect())
    }

    #[test]
    fn sqrt_smoothing_of_90_10() {
        let c = counts(&[("l1", "l1", 90), ("l2", "l2", 10)]);
        let plan = compute_plan(&c, 0.5, 0.75).unwrap();
        let expect = 0.9f64.sqrt() / (0.9f64.sqrt() + 0.1f64.sqrt());
        assert!((plan.q_src[0] - expect).abs() < 1e-12);
        assert!((plan.q_src[0] - 0.75).abs() < 1e-12);
        assert!((plan.q_src[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn exponent_identities() {
        let c = counts(&[("a1", "a1", 50), ("a1", "a2", 30), ("a2", "a3", 20), ("a3", "a3", 0)]);
        let raw = compute_plan(&c, 1.0, 1.0).unwrap();
        assert!((raw.q_src[0] - 0.8).abs() < 1e-12);
        assert!((raw.q_src[1] - 0.2).abs() < 1e-12);
        assert_eq!(raw.q_src[2], 0.0);
        let flat = compute_plan(&c, 0.0, 0.0).unwrap();
        assert!((flat.q_src[0] - 0.5).abs() < 1e-12);
        assert!((flat.q_src[1] - 0.5).abs() < 1e-12);
        assert_eq!(flat.q_src[2], 0.0);
        assert!((flat.q_tgt_given_src[0][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn all_zero_counts_rejected() {
        let c = counts(&[("a1", "a2", 0)]);
        assert!(matches!(compute_plan(&c, 0.5, 0.75), Err(Error::EmptyCounts)));
        assert!(compute_plan(&counts(&[("a1", "a2", 3)]), -1.0, 0.5).is_err());
    }

    #[test]
    fn floor_zeroes_small_pairs() {
        let c = counts(&[("a1", "a2", 29), ("a1", "a1", 30)]).with_floor(DEFAULT_MIN_PAIR_COUNT);
        assert_eq!(c.counts, vec![vec![30, 0], vec![0, 0]]);
    }

    #[test]
    fn single_language_batches() {
        let c = counts(&[("l1", "l1", 40)]);
        let plan = compute_plan(&c, DEFAULT_ALPHA, DEFAULT_BETA).unwrap();
        let mut pools = SamplePools::new();
        pools.insert(0, 0, (0..40).map(|i| format!("s{i}")).collect());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let b = next_batch(&plan, &pools, 8, 32, &mut rng).unwrap();
            assert_eq!(b.mini_batches.len(), 8);
            assert_eq!(b.sample_count(), 256);
            assert!(b.mini_batches.iter().all(|m| m.src == 0 && m.tgt == 0));
        }
    }

    #[test]
    fn empty_pool_names_the_pair() {
        let c = counts(&[("l1", "l2", 40)]);
        let plan = compute_plan(&c, 0.5, 0.75).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = next_batch(&plan, &SamplePools::new(), 1, 1, &mut rng).unwrap_err();
        assert!(matches!(err, Error::EmptyPool(a, b) if a == "l1" && b == "l2"));
    }

    #[test]
    fn feed_length_and_determinism() {
        let c = counts(&[("l1", "l2", 40), ("l2", "l1", 35)]);
        let plan = compute_plan(&c, 0.5, 0.75).unwrap();
        let mut pools = SamplePools::new();
        pools.insert(0, 1, vec!["x".into(), "y".into()]);
        pools.insert(1, 0, vec!["z".into()]);
        assert_eq!(training_feed(&plan, &pools, 0, 8, 32, 1).count(), 0);
        let a: Vec<Batch> = training_feed(&plan, &pools, 20, 2, 3, 9).map(Result::unwrap).collect();
        let b: Vec<Batch> = training_feed(&plan, &pools, 20, 2, 3, 9).map(Result::unwrap).collect();
        assert_eq!(a.len(), 20);
        assert_eq!(a, b);
        let ra = serde_json::to_string(&a[0].to_record(0, &plan, &pools)).unwrap();
        let rb = serde_json::to_string(&b[0].to_record(0, &plan, &pools)).unwrap();
        assert_eq!(ra, rb);
    }
}
