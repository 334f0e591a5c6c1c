//! Central finite-difference checks of the training losses.

use ndarray::{Array1, Array2};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use embias::trainer::{EmbeddingModel, GenderClass, TrainingConfig};
use embias::{TokenStream, Vocabulary};

pub const EPS: f64 = 1e-5;

/// Dense gradient of every parameter group.
#[derive(Debug, Clone)]
pub struct Grads {
    pub input: Array2<f64>,
    pub output: Array2<f64>,
    pub ege_weights: Array2<f64>,
    pub ege_bias: Array1<f64>,
}

impl Grads {
    fn zeros(m: &EmbeddingModel) -> Self {
        Grads {
            input: Array2::zeros(m.input.dim()),
            output: Array2::zeros(m.output.dim()),
            ege_weights: Array2::zeros(m.ege_weights.dim()),
            ege_bias: Array1::zeros(3),
        }
    }
}

/// `‖a - n‖ / max(‖a‖, ‖n‖)`, or the absolute difference when both are
/// (numerically) zero.
pub fn rel_error<'a>(a: impl IntoIterator<Item = &'a f64>, n: impl IntoIterator<Item = &'a f64>) -> f64 {
    let (mut diff, mut na, mut nn) = (0.0, 0.0, 0.0);
    for (x, y) in a.into_iter().zip(n) {
        diff += (x - y) * (x - y);
        na += x * x;
        nn += y * y;
    }
    let scale = na.sqrt().max(nn.sqrt());
    if scale < 1e-8 {
        diff.sqrt()
    } else {
        diff.sqrt() / scale
    }
}

/// Worst relative error over the four parameter groups.
pub fn max_rel_error(a: &Grads, n: &Grads) -> f64 {
    [
        rel_error(&a.input, &n.input),
        rel_error(&a.output, &n.output),
        rel_error(&a.ege_weights, &n.ege_weights),
        rel_error(&a.ege_bias, &n.ege_bias),
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn numeric(model: &EmbeddingModel, loss: impl Fn(&EmbeddingModel) -> f64) -> Grads {
    let mut g = Grads::zeros(model);
    let mut m = model.clone();
    macro_rules! sweep {
        ($field:ident, $out:expr) => {
            for (idx, slot) in $out.indexed_iter_mut() {
                let orig = m.$field[idx];
                m.$field[idx] = orig + EPS;
                let up = loss(&m);
                m.$field[idx] = orig - EPS;
                let down = loss(&m);
                m.$field[idx] = orig;
                *slot = (up - down) / (2.0 * EPS);
            }
        };
    }
    sweep!(input, g.input);
    sweep!(output, g.output);
    sweep!(ege_weights, g.ege_weights);
    sweep!(ege_bias, g.ege_bias);
    g
}

/// A model over a `vocab`-word vocabulary with every parameter drawn
/// uniformly from [-0.5, 0.5].
pub fn random_model(vocab: usize, dim: usize, rng: &mut ChaCha8Rng) -> EmbeddingModel {
    let text: Vec<String> = (0..vocab).map(|i| format!("t{i}")).collect();
    let vocab = Vocabulary::build(&TokenStream::from_tokens(text), 1).unwrap();
    let cfg = TrainingConfig {
        dim,
        seed: rng.random(),
        ..TrainingConfig::default()
    };
    let mut m = EmbeddingModel::init(vocab, &cfg);
    let mut fill = |a: &mut Array2<f64>| a.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    fill(&mut m.input);
    fill(&mut m.output);
    fill(&mut m.ege_weights);
    m.ege_bias.mapv_inplace(|_| rng.random_range(-0.5..0.5));
    m
}

pub struct CbowInstance {
    pub center: usize,
    pub context: Vec<usize>,
    pub negatives: Vec<usize>,
}

pub fn random_cbow_instance(vocab: usize, negatives: usize, rng: &mut ChaCha8Rng) -> CbowInstance {
    let center = rng.random_range(0..vocab);
    let width = rng.random_range(1..=6);
    let context = (0..width).map(|_| rng.random_range(0..vocab)).collect();
    let others: Vec<usize> = (0..vocab).filter(|&i| i != center).collect();
    // Negatives may repeat, as they do when sampled during training.
    let negatives = (0..negatives)
        .map(|_| others[rng.random_range(0..others.len())])
        .collect();
    CbowInstance {
        center,
        context,
        negatives,
    }
}

/// (analytic, numeric) gradients of the CBOW loss.
pub fn cbow_check(m: &EmbeddingModel, inst: &CbowInstance) -> (Grads, Grads) {
    let (_, grads) = m.cbow_loss(inst.center, &inst.context, &inst.negatives);
    let mut a = Grads::zeros(m);
    for (r, g) in &grads.input {
        a.input.row_mut(*r).assign(g);
    }
    for (r, g) in &grads.output {
        a.output.row_mut(*r).assign(g);
    }
    let n = numeric(m, |m| m.cbow_loss(inst.center, &inst.context, &inst.negatives).0);
    (a, n)
}

/// (analytic, numeric) gradients of the gender-head loss.
pub fn ege_check(m: &EmbeddingModel, center: usize, label: GenderClass, lambda: f64) -> (Grads, Grads) {
    let (_, grads) = m.ege_loss(center, label, lambda);
    let mut a = Grads::zeros(m);
    a.input.row_mut(grads.center).assign(&grads.input_row);
    a.ege_weights.assign(&grads.weights);
    a.ege_bias.assign(&grads.bias);
    let n = numeric(m, |m| m.ege_loss(center, label, lambda).0);
    (a, n)
}

pub fn random_label(rng: &mut ChaCha8Rng) -> GenderClass {
    GenderClass::from_index(rng.random_range(0..3))
}

/// Distinct indices, for sampling words without replacement.
pub fn distinct(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample(&mut rng, n, k.min(n)).into_vec()
}
