//! Hard debiasing: a one-dimensional gender direction from definitional
//! pairs, neutralization of gender-neutral words and equalization of
//! gendered pairs.
//!
//! Every vector is L2-normalized before it is used and after it is edited.

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView1};

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::lexicon::PairLexicon;
use crate::linalg::{norm, normalized, principal_directions};

/// Unit vector spanning the estimated gender subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct GenderDirection {
    g: Array1<f64>,
    source_pairs: PairLexicon,
}

impl GenderDirection {
    /// Wraps an arbitrary nonzero vector, normalizing it.
    pub fn from_vector(v: Array1<f64>, source_pairs: PairLexicon) -> Result<Self> {
        let n = norm(v.view());
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::DegenerateDirection);
        }
        Ok(GenderDirection { g: v / n, source_pairs })
    }

    pub fn vector(&self) -> ArrayView1<'_, f64> {
        self.g.view()
    }

    pub fn source_pairs(&self) -> &PairLexicon {
        &self.source_pairs
    }

    /// Projection of the unit-normalized `v` on the direction.
    pub fn projection(&self, v: ArrayView1<'_, f64>) -> f64 {
        let n = norm(v);
        if n == 0.0 {
            0.0
        } else {
            (v.dot(&self.g) / n).clamp(-1.0, 1.0)
        }
    }
}

/// Top principal component of the centered, normalized definitional pairs.
///
/// Each pair contributes the residuals of its two unit vectors around their
/// mean. The sign is chosen so that the first pair's male word projects
/// positively relative to its female word.
pub fn gender_direction(emb: &Embeddings, pairs: &PairLexicon) -> Result<GenderDirection> {
    let dim = emb.dim();
    let mut residuals = Array2::zeros((2 * pairs.len(), dim));
    let mut first_diff = None;
    for (i, (m, f)) in pairs.pairs().iter().enumerate() {
        let a = normalized(emb.vector(m)?);
        let b = normalized(emb.vector(f)?);
        let mu = (&a + &b) / 2.0;
        residuals.row_mut(2 * i).assign(&(&a - &mu));
        residuals.row_mut(2 * i + 1).assign(&(&b - &mu));
        if first_diff.is_none() {
            first_diff = Some(&a - &b);
        }
    }
    if residuals.iter().all(|&v| v == 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let (vars, dirs) = principal_directions(residuals.view(), 1);
    if !(vars[0] > 0.0) {
        return Err(Error::DegenerateDirection);
    }
    let mut g = dirs.row(0).to_owned();
    if let Some(d) = first_diff {
        if g.dot(&d) < 0.0 {
            g.mapv_inplace(|v| -v);
        }
    }
    GenderDirection::from_vector(g, pairs.clone())
}

/// Outcome of [`neutralize`].
#[derive(Debug, Clone)]
pub struct Neutralized {
    pub embeddings: Embeddings,
    /// Words that were edited.
    pub neutralized: Vec<String>,
    /// Words collinear with the direction, left untouched.
    pub skipped: Vec<String>,
}

/// Removes the gender component of every word outside `exclude` and
/// renormalizes. Excluded words are copied unchanged.
pub fn neutralize(emb: &Embeddings, g: &GenderDirection, exclude: &HashSet<String>) -> Neutralized {
    let dir = g.vector();
    let mut out = emb.clone();
    let mut neutralized = Vec::new();
    let mut skipped = Vec::new();
    for (i, word) in emb.words().iter().enumerate() {
        if exclude.contains(word) {
            continue;
        }
        let w = normalized(emb.row(i));
        let mut r = &w - &(w.dot(&dir) * &dir);
        // One more pass removes the rounding residue of the first.
        let again = r.dot(&dir);
        r.scaled_add(-again, &dir);
        let n = norm(r.view());
        if n <= 1e-12 {
            skipped.push(word.clone());
            continue;
        }
        out.matrix_mut().row_mut(i).assign(&(r / n));
        neutralized.push(word.clone());
    }
    Neutralized {
        embeddings: out,
        neutralized,
        skipped,
    }
}

/// Makes each pair symmetric about the subspace orthogonal to `g` and unit
/// length, so every neutralized word is equidistant from both members.
pub fn equalize(emb: &Embeddings, g: &GenderDirection, pairs: &PairLexicon) -> Result<Embeddings> {
    let dir = g.vector();
    let mut out = emb.clone();
    for (m, f) in pairs.pairs() {
        let ia = emb.require(m)?;
        let ib = emb.require(f)?;
        let a = normalized(emb.row(ia));
        let b = normalized(emb.row(ib));
        let pa = a.dot(&dir);
        let pb = b.dot(&dir);
        if pa == pb {
            return Err(Error::EqualizeDegenerate(m.clone(), f.clone()));
        }
        let mu = (&a + &b) / 2.0;
        let mut nu = &mu - &(mu.dot(&dir) * &dir);
        let again = nu.dot(&dir);
        nu.scaled_add(-again, &dir);
        let along = (1.0 - nu.dot(&nu)).max(0.0).sqrt();
        let s = (pa - pb).signum();
        let a_new = &nu + &(s * along * &dir);
        let b_new = &nu - &(s * along * &dir);
        out.matrix_mut().row_mut(ia).assign(&normalized(a_new.view()));
        out.matrix_mut().row_mut(ib).assign(&normalized(b_new.view()));
    }
    Ok(out)
}

/// Full hard-debias pass: normalize, neutralize everything outside
/// `exclude`, then equalize `equalize_pairs`.
pub fn hard_debias(
    emb: &Embeddings,
    g: &GenderDirection,
    exclude: &HashSet<String>,
    equalize_pairs: &PairLexicon,
) -> Result<Neutralized> {
    let unit = emb.normalized();
    let mut n = neutralize(&unit, g, exclude);
    n.embeddings = equalize(&n.embeddings, g, equalize_pairs)?;
    Ok(n)
}

/// Default exclusion set: every token of the given lexicons.
pub fn lexicon_tokens<'a>(lexicons: impl IntoIterator<Item = &'a PairLexicon>) -> HashSet<String> {
    lexicons
        .into_iter()
        .flat_map(|l| l.tokens().map(str::to_owned))
        .collect()
}
