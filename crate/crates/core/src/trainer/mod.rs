//! CBOW with negative sampling, optionally regularized by an explicit
//! gender-encoding head on the center word.
//!
//! With `threads == 1` training is fully deterministic for a given seed.
//! With more threads, workers update the shared matrices without locks;
//! some updates can be lost, which only affects convergence statistically.

mod model;
mod shared;

use std::sync::atomic::{AtomicU64, Ordering};
use std::thread;

use log::info;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{weighted::WeightedAliasIndex, Distribution};

use model::log_softmax3;
pub use model::{log_sigmoid, sigmoid, CbowGradients, EgeGradients, EmbeddingModel};
use shared::SharedMatrix;

use crate::corpus::{TokenStream, Vocabulary};
use crate::error::{Error, Result};
use crate::lexicon::PairLexicon;

/// Tokens per training "sentence". Context windows never cross a boundary.
const SENTENCE_LEN: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub dim: usize,
    /// Maximum context radius; the radius is resampled per center word.
    pub window: usize,
    pub epochs: usize,
    /// Examples between learning-rate updates.
    pub batch: usize,
    pub negatives: usize,
    pub learning_rate: f64,
    pub subsample_t: f64,
    pub min_count: u64,
    pub ege_enabled: bool,
    pub ege_lambda: f64,
    /// Weight the gender loss by inverse class frequency.
    pub ege_class_weighting: bool,
    pub seed: u64,
    pub threads: usize,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            dim: 100,
            window: 5,
            epochs: 5,
            batch: 4096,
            negatives: 5,
            learning_rate: 0.025,
            subsample_t: 1e-4,
            min_count: 5,
            ege_enabled: false,
            ege_lambda: 0.5,
            ege_class_weighting: false,
            seed: 1,
            threads: 1,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.dim < 2 {
            return fail("dim must be at least 2");
        }
        if self.window < 1 {
            return fail("window must be at least 1");
        }
        if self.epochs < 1 {
            return fail("epochs must be at least 1");
        }
        if self.batch < 1 {
            return fail("batch must be at least 1");
        }
        if self.negatives < 1 {
            return fail("negatives must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if !(self.subsample_t >= 0.0 && self.subsample_t.is_finite()) {
            return fail("subsample_t must be non-negative");
        }
        if !(self.ege_lambda > 0.0 && self.ege_lambda.is_finite()) {
            return fail("ege_lambda must be positive");
        }
        if self.min_count < 1 {
            return fail("min_count must be at least 1");
        }
        if self.threads < 1 {
            return fail("threads must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GenderClass {
    Male,
    Female,
    Neutral,
}

impl GenderClass {
    pub fn index(self) -> usize {
        match self {
            GenderClass::Male => 0,
            GenderClass::Female => 1,
            GenderClass::Neutral => 2,
        }
    }

    pub fn from_index(i: usize) -> Self {
        match i {
            0 => GenderClass::Male,
            1 => GenderClass::Female,
            _ => GenderClass::Neutral,
        }
    }
}

/// Gender class per vocabulary index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenderLabeling {
    labels: Vec<GenderClass>,
}

impl GenderLabeling {
    pub fn neutral(vocab: &Vocabulary) -> Self {
        GenderLabeling {
            labels: vec![GenderClass::Neutral; vocab.len()],
        }
    }

    /// Male and female tokens of the lexicon get their class; everything
    /// else in the vocabulary is neutral.
    pub fn from_lexicon(vocab: &Vocabulary, lex: &PairLexicon) -> Self {
        let mut out = Self::neutral(vocab);
        for (m, f) in lex.pairs() {
            if let Some(i) = vocab.index(m) {
                out.labels[i] = GenderClass::Male;
            }
            if let Some(i) = vocab.index(f) {
                out.labels[i] = GenderClass::Female;
            }
        }
        out
    }

    pub fn label(&self, idx: usize) -> GenderClass {
        self.labels[idx]
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainReport {
    /// Mean per-example loss (CBOW plus weighted gender loss) of each epoch.
    pub epoch_mean_loss: Vec<f64>,
    /// Exponential moving average of the per-example loss at the end of each epoch.
    pub epoch_ema_loss: Vec<f64>,
    pub examples: u64,
    pub corpus_tokens: u64,
}

/// Maps a token stream onto vocabulary indices, skipping unknown tokens.
pub fn index_corpus(corpus: &TokenStream, vocab: &Vocabulary) -> Result<Vec<u32>> {
    let mut out = Vec::new();
    for tok in corpus.iter()? {
        if let Some(i) = vocab.index(&tok?) {
            out.push(i as u32);
        }
    }
    Ok(out)
}

pub fn train(
    corpus: &TokenStream,
    vocab: &Vocabulary,
    labeling: &GenderLabeling,
    config: &TrainingConfig,
) -> Result<EmbeddingModel> {
    train_with_report(corpus, vocab, labeling, config).map(|(m, _)| m)
}

pub fn train_with_report(
    corpus: &TokenStream,
    vocab: &Vocabulary,
    labeling: &GenderLabeling,
    config: &TrainingConfig,
) -> Result<(EmbeddingModel, TrainReport)> {
    let tokens = index_corpus(corpus, vocab)?;
    train_indexed(&tokens, vocab, labeling, config)
}

struct Shared<'a> {
    input: SharedMatrix,
    output: SharedMatrix,
    ege_weights: SharedMatrix,
    ege_bias: SharedMatrix,
    labeling: &'a GenderLabeling,
    class_weight: [f64; 3],
    keep_prob: Vec<f64>,
    negatives: WeightedAliasIndex<f64>,
    config: &'a TrainingConfig,
    progress: AtomicU64,
    total_work: u64,
}

#[derive(Default)]
struct WorkerStats {
    loss_sum: Vec<f64>,
    examples: Vec<u64>,
    ema: Vec<f64>,
}

/// Trains on a pre-indexed corpus.
pub fn train_indexed(
    tokens: &[u32],
    vocab: &Vocabulary,
    labeling: &GenderLabeling,
    config: &TrainingConfig,
) -> Result<(EmbeddingModel, TrainReport)> {
    config.validate()?;
    if vocab.is_empty() {
        return Err(Error::EmptyVocab);
    }
    if labeling.len() != vocab.len() {
        return Err(Error::Spec("labeling does not match vocabulary".into()));
    }
    let model = EmbeddingModel::init(vocab.clone(), config);

    let total: u64 = vocab.retained_tokens().max(1);
    let keep_prob = vocab
        .counts()
        .iter()
        .map(|&c| {
            if config.subsample_t <= 0.0 {
                1.0
            } else {
                let f = c as f64 / total as f64;
                (config.subsample_t / f).sqrt().min(1.0)
            }
        })
        .collect();
    let weights: Vec<f64> = vocab.counts().iter().map(|&c| (c as f64).powf(0.75)).collect();
    let negatives = WeightedAliasIndex::new(weights).map_err(|e| Error::Config(e.to_string()))?;

    let class_weight = if config.ege_class_weighting {
        let mut counts = [0u64; 3];
        for &t in tokens {
            counts[labeling.label(t as usize).index()] += 1;
        }
        let n = tokens.len() as f64;
        counts.map(|c| if c == 0 { 0.0 } else { n / (3.0 * c as f64) })
    } else {
        [1.0; 3]
    };

    let shared = Shared {
        input: SharedMatrix::from_array(&model.input),
        output: SharedMatrix::from_array(&model.output),
        ege_weights: SharedMatrix::from_array(&model.ege_weights),
        ege_bias: SharedMatrix::from_array(&model.ege_bias.clone().insert_axis(ndarray::Axis(0))),
        labeling,
        class_weight,
        keep_prob,
        negatives,
        config,
        progress: AtomicU64::new(0),
        total_work: (tokens.len() as u64 * config.epochs as u64).max(1),
    };

    let threads = config.threads.min(tokens.len().max(1));
    let stats: Vec<WorkerStats> = if threads <= 1 {
        vec![run_worker(&shared, tokens, 0)]
    } else {
        let chunk = tokens.len().div_ceil(threads);
        thread::scope(|s| {
            let handles: Vec<_> = tokens
                .chunks(chunk)
                .enumerate()
                .map(|(t, part)| {
                    let shared = &shared;
                    s.spawn(move || run_worker(shared, part, t as u64))
                })
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("worker panicked"))
                .collect()
        })
    };

    let mut report = TrainReport {
        corpus_tokens: tokens.len() as u64,
        ..TrainReport::default()
    };
    for e in 0..config.epochs {
        let loss: f64 = stats.iter().map(|s| s.loss_sum[e]).sum();
        let n: u64 = stats.iter().map(|s| s.examples[e]).sum();
        let ema = stats.iter().map(|s| s.ema[e]).sum::<f64>() / stats.len() as f64;
        report.epoch_mean_loss.push(if n == 0 { 0.0 } else { loss / n as f64 });
        report.epoch_ema_loss.push(ema);
        report.examples += n;
    }

    let model = EmbeddingModel {
        input: shared.input.to_array(),
        output: shared.output.to_array(),
        ege_weights: shared.ege_weights.to_array(),
        ege_bias: shared.ege_bias.to_array().row(0).to_owned(),
        vocab: model.vocab,
    };
    Ok((model, report))
}

fn run_worker(shared: &Shared<'_>, tokens: &[u32], worker: u64) -> WorkerStats {
    let config = shared.config;
    let dim = config.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(worker + 1);

    let mut stats = WorkerStats::default();
    let mut sentence: Vec<u32> = Vec::with_capacity(SENTENCE_LEN);
    let mut context: Vec<u32> = Vec::with_capacity(2 * config.window);
    let mut h = vec![0.0; dim];
    let mut acc = vec![0.0; dim];
    let mut x = vec![0.0; dim];
    let mut ema = 0.0;
    let mut ema_started = false;
    let mut lr = config.learning_rate;
    let mut since_update = 0u64;
    let vocab_len = shared.keep_prob.len();

    for epoch in 0..config.epochs {
        let mut loss_sum = 0.0;
        let mut examples = 0u64;
        for chunk in tokens.chunks(SENTENCE_LEN) {
            sentence.clear();
            for &t in chunk {
                let keep = shared.keep_prob[t as usize];
                if keep >= 1.0 || rng.random::<f64>() < keep {
                    sentence.push(t);
                }
            }
            since_update += chunk.len() as u64;
            if since_update >= config.batch as u64 {
                let done = shared.progress.fetch_add(since_update, Ordering::Relaxed) + since_update;
                since_update = 0;
                let frac = done as f64 / shared.total_work as f64;
                lr = config.learning_rate * (1.0 - frac).max(1e-4);
            }

            for pos in 0..sentence.len() {
                let center = sentence[pos] as usize;
                let radius = rng.random_range(1..=config.window);
                let lo = pos.saturating_sub(radius);
                let hi = (pos + radius).min(sentence.len() - 1);
                context.clear();
                context.extend(sentence[lo..pos].iter().chain(&sentence[pos + 1..=hi]));
                if context.is_empty() {
                    continue;
                }

                h.iter_mut().for_each(|v| *v = 0.0);
                for &c in &context {
                    shared.input.add_row_to(c as usize, &mut h);
                }
                let inv = 1.0 / context.len() as f64;
                h.iter_mut().for_each(|v| *v *= inv);
                acc.iter_mut().for_each(|v| *v = 0.0);

                let mut loss = 0.0;
                for d in 0..=config.negatives {
                    let (target, label) = if d == 0 {
                        (center, 1.0)
                    } else {
                        if vocab_len < 2 {
                            break;
                        }
                        let mut n = shared.negatives.sample(&mut rng);
                        while n == center {
                            n = shared.negatives.sample(&mut rng);
                        }
                        (n, 0.0)
                    };
                    let f = shared.output.dot(target, &h);
                    loss -= if label == 1.0 { log_sigmoid(f) } else { log_sigmoid(-f) };
                    let g = lr * (label - sigmoid(f));
                    shared.output.exchange(target, g, &h, &mut acc);
                }
                for &c in &context {
                    shared.input.axpy(c as usize, inv, &acc);
                }

                if config.ege_enabled {
                    loss += ege_step(shared, center, lr, &mut x);
                }

                loss_sum += loss;
                examples += 1;
                if ema_started {
                    ema += 1e-4 * (loss - ema);
                } else {
                    ema = loss;
                    ema_started = true;
                }
            }
        }
        info!(
            "worker {worker} epoch {}: mean loss {:.6}, lr {:.6}",
            epoch + 1,
            if examples == 0 { 0.0 } else { loss_sum / examples as f64 },
            lr
        );
        stats.loss_sum.push(loss_sum);
        stats.examples.push(examples);
        stats.ema.push(ema);
    }
    stats
}

/// One SGD step of the gender head on `center`. Returns the weighted loss.
fn ege_step(shared: &Shared<'_>, center: usize, lr: f64, x: &mut [f64]) -> f64 {
    let label = shared.labeling.label(center);
    let weight = shared.config.ege_lambda * shared.class_weight[label.index()];
    if weight == 0.0 {
        return 0.0;
    }
    for (c, v) in x.iter_mut().enumerate() {
        *v = shared.input.get(center, c);
    }
    let mut z = [0.0; 3];
    for (k, zk) in z.iter_mut().enumerate() {
        *zk = shared.ege_weights.dot(k, x) + shared.ege_bias.get(0, k);
    }
    let logp = log_softmax3(z);
    let k = label.index();
    let mut dz = logp.map(f64::exp);
    dz[k] -= 1.0;
    dz.iter_mut().for_each(|v| *v *= weight);

    // Row gradient uses the head before its own update.
    for (c, xc) in x.iter().enumerate() {
        let grad: f64 = (0..3).map(|r| dz[r] * shared.ege_weights.get(r, c)).sum();
        shared.input.set(center, c, xc - lr * grad);
    }
    for (r, d) in dz.iter().enumerate() {
        shared.ege_weights.axpy(r, -lr * d, x);
        shared.ege_bias.set(0, r, shared.ege_bias.get(0, r) - lr * d);
    }
    -weight * logp[k]
}
