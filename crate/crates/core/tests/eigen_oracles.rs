mod common;

use std::sync::OnceLock;

use common::synth::{SynthConfig, SynthWorld};
use embias::bias_eval::pca_project;
use embias::hard_debias::gender_direction;
use embias::linalg::normalized;
use embias::trainer::{train, GenderLabeling, TrainingConfig};
use embias::{Embeddings, TokenStream, Vocabulary};
use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A small trained embedding over the synthetic language.
fn desk() -> &'static (SynthWorld, Embeddings) {
    static CELL: OnceLock<(SynthWorld, Embeddings)> = OnceLock::new();
    CELL.get_or_init(|| {
        let world = SynthWorld::new(SynthConfig::default());
        let corpus = TokenStream::from_text(&world.generate(2 << 20, 11));
        let vocab = Vocabulary::build(&corpus, 5).unwrap();
        let cfg = TrainingConfig {
            dim: 50,
            seed: 3,
            ..TrainingConfig::default()
        };
        let model = train(
            &corpus,
            &vocab,
            &GenderLabeling::from_lexicon(&vocab, &world.pair_lexicon()),
            &cfg,
        )
        .unwrap();
        let emb = model.embeddings();
        (world, emb)
    })
}

/// Eigenvector of the largest eigenvalue of `m`, via nalgebra.
fn top_eigenvectors(m: DMatrix<f64>, k: usize) -> Vec<Array1<f64>> {
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    order[..k]
        .iter()
        .map(|&c| Array1::from_iter(eig.eigenvectors.column(c).iter().copied()))
        .collect()
}

fn to_dmatrix(a: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |r, c| a[[r, c]])
}

fn max_diff_up_to_sign(a: &Array1<f64>, b: &Array1<f64>) -> f64 {
    let plus = (a - b).mapv(f64::abs).fold(0.0, |m: f64, v| m.max(*v));
    let minus = (a + b).mapv(f64::abs).fold(0.0, |m: f64, v| m.max(*v));
    plus.min(minus)
}

#[test]
fn gender_direction_matches_dense_eigensolver() {
    let (world, emb) = desk();
    let pairs = world.definitional_pairs();
    assert_eq!(pairs.len(), 10);
    let g = gender_direction(emb, &pairs).unwrap();

    let mut rows = Vec::new();
    for (m, f) in pairs.pairs() {
        let a = normalized(emb.vector(m).unwrap());
        let b = normalized(emb.vector(f).unwrap());
        let mu = (&a + &b) / 2.0;
        rows.push(&a - &mu);
        rows.push(&b - &mu);
    }
    let r = Array2::from_shape_fn((rows.len(), emb.dim()), |(i, j)| rows[i][j]);
    let cov = r.t().dot(&r);
    let oracle = &top_eigenvectors(to_dmatrix(&cov), 1)[0];
    let g = g.vector().to_owned();
    assert!(max_diff_up_to_sign(&g, oracle) < 1e-8);
    assert!(((g.dot(&g)).sqrt() - 1.0).abs() < 1e-12);
    let (m, f) = &pairs.pairs()[0];
    assert!(g.dot(&(emb.vector(m).unwrap().to_owned() - emb.vector(f).unwrap())) >= 0.0);
}

#[test]
fn gender_direction_is_scale_invariant() {
    let (world, emb) = desk();
    let pairs = world.definitional_pairs();
    let scaled = Embeddings::new(emb.words().to_vec(), emb.matrix() * 3.25).unwrap();
    let a = gender_direction(emb, &pairs).unwrap();
    let b = gender_direction(&scaled, &pairs).unwrap();
    let diff = (&a.vector() - &b.vector())
        .mapv(f64::abs)
        .fold(0.0, |m: f64, v| m.max(*v));
    assert!(diff < 1e-10);
}

#[test]
fn profession_projection_matches_dense_eigensolver() {
    let (world, emb) = desk();
    let words: Vec<String> = world.professions.iter().map(|p| p.0.clone()).collect();
    let proj = pca_project(emb, &words).unwrap();
    assert!(proj.missing.is_empty());

    let mut x = Array2::zeros((words.len(), emb.dim()));
    for (i, w) in words.iter().enumerate() {
        x.row_mut(i).assign(&normalized(emb.vector(w).unwrap()));
    }
    let mean = x.mean_axis(ndarray::Axis(0)).unwrap();
    x -= &mean;
    let comps = top_eigenvectors(to_dmatrix(&x.t().dot(&x)), 2);
    for (k, c) in comps.iter().enumerate() {
        let oracle = x.dot(c);
        let ours = Array1::from_iter(proj.points.iter().map(|p| if k == 0 { p.x } else { p.y }));
        assert!(max_diff_up_to_sign(&ours, &oracle) < 1e-6, "component {k}");
    }
}

#[test]
fn planar_points_keep_their_distances() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let dim = 100;
    let basis = |rng: &mut ChaCha8Rng| Array1::from_shape_fn(dim, |_| rng.random_range(-1.0..1.0));
    let u = normalized(basis(&mut rng).view());
    let mut v = basis(&mut rng);
    v = &v - &(v.dot(&u) * &u);
    let v = normalized(v.view());
    // Unit vectors in a plane through the origin stay in it after normalization.
    let n = 12;
    let mut m = Array2::zeros((n, dim));
    for i in 0..n {
        let t: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        m.row_mut(i).assign(&(t.cos() * &u + t.sin() * &v));
    }
    let words: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let emb = Embeddings::new(words.clone(), m.clone()).unwrap();
    let proj = pca_project(&emb, &words).unwrap();
    for i in 0..n {
        for j in 0..n {
            let d = (&m.row(i) - &m.row(j)).mapv(|x| x * x).sum().sqrt();
            let (a, b) = (&proj.points[i], &proj.points[j]);
            let e = ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
            assert!((d - e).abs() < 1e-8);
        }
    }
}
