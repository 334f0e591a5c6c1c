use ndarray::ArrayView1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::lexicon::WeatSpec;
use crate::linalg::cosine;

/// Exact enumeration is used while C(2N, N) stays at or below this.
pub const EXACT_PARTITION_LIMIT: u128 = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PermutationMode {
    Exact,
    MonteCarlo { samples: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeatResult {
    /// Difference of mean association between X and Y over the sample
    /// standard deviation of all target associations.
    pub effect_size: f64,
    /// One-sided probability that a random even partition scores strictly
    /// higher than the observed one.
    pub p_value: f64,
    /// `Σ_X s(x, A, B) - Σ_Y s(y, A, B)`.
    pub statistic: f64,
    pub mode: PermutationMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeatOptions {
    pub samples: usize,
    pub seed: u64,
    /// Override the automatic exact/Monte Carlo choice.
    pub force_mode: Option<PermutationMode>,
}

impl Default for WeatOptions {
    fn default() -> Self {
        WeatOptions {
            samples: 100_000,
            seed: 0,
            force_mode: None,
        }
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn association(w: ArrayView1<'_, f64>, a: &[ArrayView1<'_, f64>], b: &[ArrayView1<'_, f64>]) -> f64 {
    let mean = |set: &[ArrayView1<'_, f64>]| set.iter().map(|v| cosine(w, *v)).sum::<f64>() / set.len() as f64;
    mean(a) - mean(b)
}

/// `s(w, A, B)` for every target word, X first then Y.
pub fn association_scores(emb: &Embeddings, spec: &WeatSpec) -> Result<(Vec<f64>, Vec<f64>)> {
    spec.validate()?;
    let rows = |words: &[String]| -> Result<Vec<ArrayView1<'_, f64>>> { words.iter().map(|w| emb.vector(w)).collect() };
    let (a, b) = (rows(&spec.a)?, rows(&spec.b)?);
    let x = rows(&spec.x)?.into_iter().map(|w| association(w, &a, &b)).collect();
    let y = rows(&spec.y)?.into_iter().map(|w| association(w, &a, &b)).collect();
    Ok((x, y))
}

pub fn weat(emb: &Embeddings, spec: &WeatSpec) -> Result<WeatResult> {
    weat_with(emb, spec, &WeatOptions::default())
}

pub fn weat_with(emb: &Embeddings, spec: &WeatSpec, opts: &WeatOptions) -> Result<WeatResult> {
    let (x, y) = association_scores(emb, spec)?;
    let n = x.len();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let all: Vec<f64> = x.iter().chain(&y).copied().collect();
    let mu = mean(&all);
    let var = all.iter().map(|s| (s - mu) * (s - mu)).sum::<f64>() / (all.len() - 1) as f64;
    let sd = var.sqrt();
    if !(sd > 1e-15) {
        return Err(Error::DegenerateEffect);
    }
    let effect_size = (mean(&x) - mean(&y)) / sd;
    let statistic = x.iter().sum::<f64>() - y.iter().sum::<f64>();

    let mode = opts.force_mode.unwrap_or_else(|| {
        if binomial(2 * n as u64, n as u64) <= EXACT_PARTITION_LIMIT {
            PermutationMode::Exact
        } else {
            PermutationMode::MonteCarlo { samples: opts.samples }
        }
    });
    let p_value = permutation_p_value(&all, n, mode, opts.seed);
    Ok(WeatResult {
        effect_size,
        p_value,
        statistic,
        mode,
    })
}

/// Permutation test over even partitions of `scores` (observed X = the first
/// `n` entries). Counts partitions whose statistic exceeds the observed one
/// by more than rounding noise.
pub fn permutation_p_value(scores: &[f64], n: usize, mode: PermutationMode, seed: u64) -> f64 {
    assert_eq!(scores.len(), 2 * n, "need two target sets of equal size");
    // s(Xi, Yi) = 2 Σ_Xi - Σ_all, so comparing Σ_Xi is equivalent.
    let observed: f64 = scores[..n].iter().sum();
    let tol = 1e-12 * scores.iter().map(|s| s.abs()).sum::<f64>().max(1.0);
    let exceeds = |sum: f64| sum > observed + tol;

    match mode {
        PermutationMode::Exact => {
            let mut idx: Vec<usize> = (0..n).collect();
            let mut hits = 0u64;
            let mut count = 0u64;
            loop {
                let sum: f64 = idx.iter().map(|&i| scores[i]).sum();
                if exceeds(sum) {
                    hits += 1;
                }
                count += 1;
                if !next_combination(&mut idx, 2 * n) {
                    break;
                }
            }
            hits as f64 / count as f64
        }
        PermutationMode::MonteCarlo { samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut idx: Vec<usize> = (0..2 * n).collect();
            let mut hits = 0u64;
            for _ in 0..samples {
                let (chosen, _) = idx.partial_shuffle(&mut rng, n);
                let sum: f64 = chosen.iter().map(|&i| scores[i]).sum();
                if exceeds(sum) {
                    hits += 1;
                }
            }
            hits as f64 / samples.max(1) as f64
        }
    }
}

/// Advances `idx` (sorted, distinct, < `m`) to the next combination in
/// lexicographic order.
fn next_combination(idx: &mut [usize], m: usize) -> bool {
    let k = idx.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if idx[i] < m - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
