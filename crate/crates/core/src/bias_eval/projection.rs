use ndarray::{Array2, Axis};

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::linalg::{normalized, principal_directions};

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint {
    pub word: String,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub points: Vec<ProjectedPoint>,
    /// 2 x dim, unit rows.
    pub components: Array2<f64>,
    pub variances: [f64; 2],
    /// Requested words that are not in the embedding.
    pub missing: Vec<String>,
}

/// Projects the unit-normalized, mean-centered vectors of `words` onto their
/// top two principal components. Each component is oriented so that its
/// largest-magnitude loading is positive.
pub fn pca_project<S: AsRef<str>>(emb: &Embeddings, words: &[S]) -> Result<Projection> {
    let mut found = Vec::new();
    let mut missing = Vec::new();
    for w in words {
        let w = w.as_ref();
        match emb.index(w) {
            Some(i) => found.push((w.to_string(), i)),
            None => missing.push(w.to_string()),
        }
    }
    if found.len() < 3 {
        return Err(Error::InsufficientWords {
            found: found.len(),
            needed: 3,
        });
    }
    let mut x = Array2::zeros((found.len(), emb.dim()));
    for (r, (_, i)) in found.iter().enumerate() {
        x.row_mut(r).assign(&normalized(emb.row(*i)));
    }
    let mean = x.mean_axis(Axis(0)).expect("non-empty");
    x -= &mean;

    let (vars, mut comps) = principal_directions(x.view(), 2);
    if vars.len() < 2 || !(vars[0] > 1e-20) || !(vars[1] > 1e-12 * vars[0]) {
        return Err(Error::DegenerateProjection);
    }
    for mut c in comps.rows_mut() {
        let lead = c
            .iter()
            .copied()
            .max_by(|a, b| a.abs().total_cmp(&b.abs()))
            .unwrap_or(0.0);
        if lead < 0.0 {
            c.mapv_inplace(|v| -v);
        }
    }
    let coords = x.dot(&comps.t());
    let points = found
        .into_iter()
        .zip(coords.rows())
        .map(|((word, _), c)| ProjectedPoint { word, x: c[0], y: c[1] })
        .collect();
    Ok(Projection {
        points,
        components: comps,
        variances: [vars[0], vars[1]],
        missing,
    })
}
