use ndarray::{Array1, ArrayView1};

use crate::embedding::Embeddings;
use crate::error::{Error, Result};
use crate::hard_debias::GenderDirection;
use crate::linalg::{cosine, norm};

/// `|cos(w, g)|`.
pub fn direct_bias(emb: &Embeddings, g: &GenderDirection, word: &str) -> Result<f64> {
    Ok(g.projection(emb.vector(word)?).abs())
}

fn orthogonal_part(v: ArrayView1<'_, f64>, g: ArrayView1<'_, f64>) -> Array1<f64> {
    &v - &(v.dot(&g) * &g)
}

/// Share of the similarity of `w` and `v` that comes from their gender
/// components: `(w·v - cos(w⊥, v⊥)) / (w·v)` on unit vectors, where `x⊥`
/// removes the projection on `g`.
pub fn indirect_bias(emb: &Embeddings, g: &GenderDirection, w: &str, v: &str) -> Result<f64> {
    let undefined = || Error::UndefinedBias(w.to_string(), v.to_string());
    let wv = emb.vector(w)?;
    let vv = emb.vector(v)?;
    let (nw, nv) = (norm(wv), norm(vv));
    if nw == 0.0 || nv == 0.0 {
        return Err(undefined());
    }
    let wu = wv.to_owned() / nw;
    let vu = vv.to_owned() / nv;
    let sim = wu.dot(&vu);
    let wp = orthogonal_part(wu.view(), g.vector());
    let vp = orthogonal_part(vu.view(), g.vector());
    let (np, nq) = (norm(wp.view()), norm(vp.view()));
    if sim == 0.0 || np <= 1e-12 || nq <= 1e-12 {
        return Err(undefined());
    }
    Ok((sim - wp.dot(&vp) / (np * nq)) / sim)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NeighborRow {
    /// 1 for the nearest neighbor.
    pub rank: usize,
    pub word: String,
    pub cosine: f64,
    /// Signed `cos(word, g)`.
    pub bias_by_projection: f64,
}

/// Top-`k` words by cosine similarity to `word`, excluding `word` itself.
/// Ties are broken by vocabulary order.
pub fn neighbors(emb: &Embeddings, word: &str, k: usize, g: &GenderDirection) -> Result<Vec<NeighborRow>> {
    let qi = emb.require(word)?;
    let q = emb.row(qi);
    let mut scored: Vec<(f64, usize)> = (0..emb.len())
        .filter(|&i| i != qi)
        .map(|i| (cosine(q, emb.row(i)), i))
        .collect();
    let k = k.min(scored.len());
    let cmp = |a: &(f64, usize), b: &(f64, usize)| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1));
    if k < scored.len() && k > 0 {
        scored.select_nth_unstable_by(k - 1, cmp);
    }
    scored.truncate(k);
    scored.sort_by(cmp);
    Ok(scored
        .into_iter()
        .enumerate()
        .map(|(rank, (c, i))| NeighborRow {
            rank: rank + 1,
            word: emb.word(i).to_string(),
            cosine: c,
            bias_by_projection: g.projection(emb.row(i)),
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ProximityRule {
    /// Neighbor counts when its direct bias exceeds the threshold.
    #[default]
    DirectBias,
    /// Neighbor counts when its indirect bias with the query exceeds the threshold.
    IndirectBias,
}

/// Fraction of the top-`k` neighbors of `word` whose direct bias exceeds `tau`.
pub fn proximity_bias(emb: &Embeddings, g: &GenderDirection, word: &str, k: usize, tau: f64) -> Result<f64> {
    proximity_bias_with(emb, g, word, k, tau, ProximityRule::DirectBias)
}

pub fn proximity_bias_with(
    emb: &Embeddings,
    g: &GenderDirection,
    word: &str,
    k: usize,
    tau: f64,
    rule: ProximityRule,
) -> Result<f64> {
    if k == 0 || !(tau > 0.0) {
        return Err(Error::Spec("proximity bias needs k >= 1 and tau > 0".into()));
    }
    let rows = neighbors(emb, word, k, g)?;
    if rows.is_empty() {
        return Ok(0.0);
    }
    let mut biased = 0usize;
    for row in &rows {
        let hit = match rule {
            ProximityRule::DirectBias => row.bias_by_projection.abs() > tau,
            ProximityRule::IndirectBias => indirect_bias(emb, g, word, &row.word).is_ok_and(|b| b > tau),
        };
        if hit {
            biased += 1;
        }
    }
    Ok(biased as f64 / rows.len() as f64)
}
