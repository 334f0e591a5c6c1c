use std::collections::BTreeMap;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{GenderClass, TrainingConfig};
use crate::corpus::Vocabulary;
use crate::embedding::Embeddings;

/// Numerically safe logistic function.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln σ(x)` without overflow for large |x|.
#[inline]
pub fn log_sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        -(-x).exp().ln_1p()
    } else {
        x - x.exp().ln_1p()
    }
}

/// Log-softmax of a 3-vector.
#[inline]
pub(crate) fn log_softmax3(z: [f64; 3]) -> [f64; 3] {
    let m = z[0].max(z[1]).max(z[2]);
    let lse = m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
    [z[0] - lse, z[1] - lse, z[2] - lse]
}

/// CBOW parameters plus the 3-way gender classification head.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub vocab: Vocabulary,
    /// Context/word vectors; this is the exported embedding.
    pub input: Array2<f64>,
    /// Prediction vectors used by negative sampling.
    pub output: Array2<f64>,
    /// 3 x dim, rows ordered male, female, neutral.
    pub ege_weights: Array2<f64>,
    pub ege_bias: Array1<f64>,
}

/// Gradients of the CBOW negative-sampling loss, one entry per distinct row.
#[derive(Debug, Clone, PartialEq)]
pub struct CbowGradients {
    pub input: BTreeMap<usize, Array1<f64>>,
    pub output: BTreeMap<usize, Array1<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EgeGradients {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub center: usize,
    pub input_row: Array1<f64>,
}

impl EmbeddingModel {
    /// Input entries are uniform in [-0.5/dim, 0.5/dim]; everything else is
    /// zero. Identical seed and vocabulary give an identical model.
    pub fn init(vocab: Vocabulary, config: &TrainingConfig) -> Self {
        let dim = config.dim;
        let bound = 0.5 / dim as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let input = Array2::from_shape_simple_fn((vocab.len(), dim), || rng.random_range(-bound..=bound));
        EmbeddingModel {
            output: Array2::zeros((vocab.len(), dim)),
            ege_weights: Array2::zeros((3, dim)),
            ege_bias: Array1::zeros(3),
            input,
            vocab,
        }
    }

    pub fn dim(&self) -> usize {
        self.input.ncols()
    }

    /// The exported word vectors (input matrix) keyed by vocabulary word.
    pub fn embeddings(&self) -> Embeddings {
        Embeddings::new(self.vocab.words().to_vec(), self.input.clone()).expect("vocabulary words are unique")
    }

    fn context_mean(&self, context: &[usize]) -> Array1<f64> {
        let mut h = Array1::zeros(self.dim());
        for &c in context {
            h += &self.input.row(c);
        }
        h / context.len() as f64
    }

    /// Negative-sampling CBOW loss
    /// `L = -ln σ(out_center·h) - Σ ln σ(-out_n·h)` with `h` the mean of the
    /// context input rows, and its exact gradient.
    pub fn cbow_loss(&self, center: usize, context: &[usize], negatives: &[usize]) -> (f64, CbowGradients) {
        assert!(!context.is_empty(), "context must be non-empty");
        debug_assert!(!negatives.contains(&center), "center drawn as negative");
        let dim = self.dim();
        let h = self.context_mean(context);
        let mut loss = 0.0;
        let mut grad_h = Array1::<f64>::zeros(dim);
        let mut output: BTreeMap<usize, Array1<f64>> = BTreeMap::new();

        let targets = std::iter::once((center, 1.0)).chain(negatives.iter().map(|&n| (n, 0.0)));
        for (t, label) in targets {
            let row = self.output.row(t);
            let f = row.dot(&h);
            loss -= if label == 1.0 { log_sigmoid(f) } else { log_sigmoid(-f) };
            let dldf = sigmoid(f) - label;
            grad_h.scaled_add(dldf, &row);
            output
                .entry(t)
                .or_insert_with(|| Array1::zeros(dim))
                .scaled_add(dldf, &h);
        }

        let mut input: BTreeMap<usize, Array1<f64>> = BTreeMap::new();
        let share = 1.0 / context.len() as f64;
        for &c in context {
            input
                .entry(c)
                .or_insert_with(|| Array1::zeros(dim))
                .scaled_add(share, &grad_h);
        }
        (loss, CbowGradients { input, output })
    }

    fn ege_logits(&self, center: usize) -> [f64; 3] {
        let x = self.input.row(center);
        let z = self.ege_weights.dot(&x) + &self.ege_bias;
        [z[0], z[1], z[2]]
    }

    /// Class probabilities of the gender head for a vocabulary row.
    pub fn ege_probabilities(&self, center: usize) -> [f64; 3] {
        log_softmax3(self.ege_logits(center)).map(f64::exp)
    }

    pub fn ege_predict(&self, center: usize) -> GenderClass {
        let p = self.ege_probabilities(center);
        let best = (0..3).max_by(|&a, &b| p[a].total_cmp(&p[b])).expect("three classes");
        GenderClass::from_index(best)
    }

    /// Weighted cross-entropy of the gender head on the center word's input
    /// row. Gradients flow to the head and to that row.
    pub fn ege_loss(&self, center: usize, label: GenderClass, lambda: f64) -> (f64, EgeGradients) {
        let x = self.input.row(center);
        let logp = log_softmax3(self.ege_logits(center));
        let k = label.index();
        let loss = -lambda * logp[k];
        let mut dz = Array1::from(logp.map(f64::exp).to_vec());
        dz[k] -= 1.0;
        dz *= lambda;
        let weights = Array2::from_shape_fn((3, self.dim()), |(r, c)| dz[r] * x[c]);
        let input_row = self.ege_weights.t().dot(&dz);
        (
            loss,
            EgeGradients {
                weights,
                bias: dz,
                center,
                input_row,
            },
        )
    }

    pub fn is_finite(&self) -> bool {
        [&self.input, &self.output, &self.ege_weights]
            .iter()
            .all(|m| m.iter().all(|v| v.is_finite()))
            && self.ege_bias.iter().all(|v| v.is_finite())
    }
}
