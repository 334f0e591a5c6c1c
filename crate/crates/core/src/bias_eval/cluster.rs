use ndarray::{Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::lexicon::{ProfessionSet, Stereotype};
use crate::linalg::normalized;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        KMeansOptions {
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

fn sq_dist(a: ndarray::ArrayView1<'_, f64>, b: ndarray::ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Lloyd's algorithm with k-means++ seeding. Returns the cluster id of every row.
pub fn kmeans(points: ArrayView2<'_, f64>, k: usize, seed: u64, opts: &KMeansOptions) -> Vec<usize> {
    let n = points.nrows();
    assert!(k >= 1 && n >= k, "need at least k points");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut centroids = Array2::zeros((k, points.ncols()));
    centroids.row_mut(0).assign(&points.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = points
        .rows()
        .into_iter()
        .map(|p| sq_dist(p, centroids.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, d) in d2.iter().enumerate() {
                if r < *d {
                    chosen = i;
                    break;
                }
                r -= d;
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        centroids.row_mut(c).assign(&points.row(pick));
        for (i, p) in points.rows().into_iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(p, centroids.row(c)));
        }
    }

    let mut assign = vec![0usize; n];
    for _ in 0..opts.max_iter {
        for (i, p) in points.rows().into_iter().enumerate() {
            let mut best = (f64::INFINITY, 0);
            for (c, cen) in centroids.rows().into_iter().enumerate() {
                let d = sq_dist(p, cen);
                if d < best.0 {
                    best = (d, c);
                }
            }
            assign[i] = best.1;
        }
        let mut next = Array2::<f64>::zeros(centroids.raw_dim());
        let mut sizes = vec![0usize; k];
        for (i, p) in points.rows().into_iter().enumerate() {
            let mut row = next.row_mut(assign[i]);
            row += &p;
            sizes[assign[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for (c, &size) in sizes.iter().enumerate() {
            if size == 0 {
                // Empty cluster keeps its centroid.
                next.row_mut(c).assign(&centroids.row(c));
            } else {
                let mut row = next.row_mut(c);
                row /= size as f64;
            }
            shift = shift.max(sq_dist(next.row(c), centroids.row(c)).sqrt());
        }
        centroids = next;
        if shift < opts.tol {
            break;
        }
    }
    assign
}

/// Agreement between a 2-way clustering and binary labels, maximized over
/// both cluster-to-label mappings.
pub fn labeling_accuracy(assign: &[usize], labels: &[Stereotype]) -> f64 {
    let agree = assign
        .iter()
        .zip(labels)
        .filter(|(&c, &l)| (c == 0) == (l == Stereotype::Male))
        .count() as f64;
    let n = assign.len() as f64;
    (agree / n).max(1.0 - agree / n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterRun {
    pub seed: u64,
    pub accuracy: f64,
    pub assignment: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterReport {
    pub mean_accuracy: f64,
    /// Population standard deviation over runs.
    pub std_dev: f64,
    pub runs: usize,
    pub per_run: Vec<ClusterRun>,
    /// Professions that were clustered, with their labels.
    pub words: Vec<(String, Stereotype)>,
    /// Professions missing from the embedding.
    pub dropped: Vec<String>,
}

/// Clusters the unit-normalized profession vectors into two groups `runs`
/// times (seeds `base_seed..base_seed + runs`) and reports how well the
/// clusters recover the stereotype labels.
pub fn cluster_accuracy(emb: &Embeddings, prof: &ProfessionSet, runs: usize, base_seed: u64) -> Result<ClusterReport> {
    let mut words = Vec::new();
    let mut dropped = Vec::new();
    for (w, s) in prof.entries() {
        match emb.index(w) {
            Some(_) => words.push((w.clone(), *s)),
            None => dropped.push(w.clone()),
        }
    }
    let per_class = |c| words.iter().filter(|(_, s)| *s == c).count();
    if words.len() < 4 || per_class(Stereotype::Male) < 2 || per_class(Stereotype::Female) < 2 {
        return Err(Error::InsufficientWords {
            found: words.len(),
            needed: 4,
        });
    }
    let mut points = Array2::zeros((words.len(), emb.dim()));
    for (i, (w, _)) in words.iter().enumerate() {
        points.row_mut(i).assign(&normalized(emb.vector(w)?));
    }
    let labels: Vec<Stereotype> = words.iter().map(|(_, s)| *s).collect();
    let opts = KMeansOptions::default();
    let per_run: Vec<ClusterRun> = (0..runs as u64)
        .map(|r| {
            let seed = base_seed + r;
            let assignment = kmeans(points.view(), 2, seed, &opts);
            ClusterRun {
                seed,
                accuracy: labeling_accuracy(&assignment, &labels),
                assignment,
            }
        })
        .collect();
    let accs = ndarray::Array1::from_iter(per_run.iter().map(|r| r.accuracy));
    let (mean_accuracy, std_dev) = if runs == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (accs.mean().unwrap(), accs.std(0.0))
    };
    Ok(ClusterReport {
        mean_accuracy,
        std_dev,
        runs,
        per_run,
        words,
        dropped,
    })
}
