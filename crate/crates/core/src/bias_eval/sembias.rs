use ndarray::Array1;

use crate::embedding::Embeddings;
use crate::error::Result;
use crate::lexicon::{SemBiasSet, SemBiasTag};
use crate::linalg::{cosine, normalized};

#[derive(Debug, Clone, PartialEq)]
pub struct SemBiasReport {
    /// Fraction of evaluated instances whose best pair is the definitional one.
    pub definition: f64,
    /// Fraction whose best pair is the stereotypical one.
    pub stereotype: f64,
    pub none: f64,
    pub evaluated: usize,
    /// Instances with at least one word missing from the embedding.
    pub skipped: usize,
}

/// For each instance, picks the candidate pair whose difference vector is
/// most cosine-similar to the `direction_pair` difference.
pub fn sembias_eval(emb: &Embeddings, set: &SemBiasSet, direction_pair: (&str, &str)) -> Result<SemBiasReport> {
    let he = normalized(emb.vector(direction_pair.0)?);
    let she = normalized(emb.vector(direction_pair.1)?);
    let dir = &he - &she;

    let mut counts = [0usize; 3];
    let mut skipped = 0;
    'instances: for inst in set.instances() {
        let mut diffs: Vec<(Array1<f64>, SemBiasTag)> = Vec::with_capacity(4);
        for (a, b, tag) in &inst.candidates {
            match (emb.vector(a), emb.vector(b)) {
                (Ok(a), Ok(b)) => diffs.push((normalized(a) - normalized(b), *tag)),
                _ => {
                    skipped += 1;
                    continue 'instances;
                }
            }
        }
        let mut best = (f64::NEG_INFINITY, SemBiasTag::None);
        for (d, tag) in &diffs {
            let c = cosine(d.view(), dir.view());
            if c > best.0 {
                best = (c, *tag);
            }
        }
        counts[match best.1 {
            SemBiasTag::Definition => 0,
            SemBiasTag::Stereotype => 1,
            SemBiasTag::None => 2,
        }] += 1;
    }
    let evaluated: usize = counts.iter().sum();
    let frac = |c: usize| {
        if evaluated == 0 {
            0.0
        } else {
            c as f64 / evaluated as f64
        }
    };
    Ok(SemBiasReport {
        definition: frac(counts[0]),
        stereotype: frac(counts[1]),
        none: frac(counts[2]),
        evaluated,
        skipped,
    })
}
