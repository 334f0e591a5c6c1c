//! Small dense linear algebra: cyclic Jacobi eigensolver and PCA helpers.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

/// Eigen-decomposition of a symmetric matrix. Eigenvalues are sorted in
/// descending order; column `k` of `vectors` belongs to `values[k]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Array2<f64>,
}

/// Cyclic Jacobi rotations until the off-diagonal mass is negligible.
pub fn symmetric_eigen(a: ArrayView2<'_, f64>) -> SymmetricEigen {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "matrix must be square");
    let mut m = a.to_owned();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();

    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += m[[p, q]] * m[[p, q]];
            }
        }
        if off.sqrt() <= 1e-15 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[[q, q]] - m[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[[j, j]].total_cmp(&m[[i, i]]));
    let values = order.iter().map(|&i| m[[i, i]]).collect();
    let vectors = v.select(Axis(1), &order);
    SymmetricEigen { values, vectors }
}

/// Leading principal directions of the rows of `x` (rows are observations,
/// assumed already centered). Computed through the Gram matrix, which is
/// small when there are fewer observations than dimensions.
///
/// Returns `(variances, directions)` with unit-length directions as rows.
/// Components with zero variance are returned as zero vectors.
pub fn principal_directions(x: ArrayView2<'_, f64>, k: usize) -> (Vec<f64>, Array2<f64>) {
    let gram = x.dot(&x.t());
    let eig = symmetric_eigen(gram.view());
    let k = k.min(x.nrows());
    let mut dirs = Array2::zeros((k, x.ncols()));
    let mut vars = Vec::with_capacity(k);
    for c in 0..k {
        let lambda = eig.values[c].max(0.0);
        vars.push(lambda);
        let u = eig.vectors.column(c);
        let mut d = x.t().dot(&u);
        let n = norm(d.view());
        if n > 0.0 {
            d /= n;
            dirs.row_mut(c).assign(&d);
        }
    }
    (vars, dirs)
}

pub fn norm(v: ArrayView1<'_, f64>) -> f64 {
    v.dot(&v).sqrt()
}

pub fn normalized(v: ArrayView1<'_, f64>) -> Array1<f64> {
    let n = norm(v);
    if n > 0.0 {
        v.to_owned() / n
    } else {
        v.to_owned()
    }
}

/// Cosine similarity, clamped to [-1, 1]. Zero vectors give 0.
pub fn cosine(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let d = norm(a) * norm(b);
    if d == 0.0 {
        0.0
    } else {
        (a.dot(&b) / d).clamp(-1.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_matrix() {
        let e = symmetric_eigen(array![[1.0, 0.0], [0.0, 3.0]].view());
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!((e.vectors[[1, 0]].abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reconstructs_random_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1, 2, 5, 12] {
            let b = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
            let a = &b + &b.t();
            let e = symmetric_eigen(a.view());
            let d = Array2::from_diag(&Array1::from(e.values.clone()));
            let back = e.vectors.dot(&d).dot(&e.vectors.t());
            for (x, y) in back.iter().zip(a.iter()) {
                assert!((x - y).abs() < 1e-12, "n={n}");
            }
            let id = e.vectors.t().dot(&e.vectors);
            for ((i, j), v) in id.indexed_iter() {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((v - want).abs() < 1e-12);
            }
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn principal_direction_of_a_line() {
        let x = array![[1.0, 2.0], [-1.0, -2.0], [2.0, 4.0], [-2.0, -4.0]];
        let (vars, dirs) = principal_directions(x.view(), 2);
        let d = dirs.row(0);
        assert!((d[0].abs() - 1.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!((vars[0] - 50.0).abs() < 1e-10);
        assert!(vars[1].abs() < 1e-10);
    }

    #[test]
    fn cosine_edge_cases() {
        assert_eq!(cosine(array![1.0, 0.0].view(), array![0.0, 0.0].view()), 0.0);
        assert_eq!(cosine(array![2.0, 0.0].view(), array![3.0, 0.0].view()), 1.0);
    }
}
