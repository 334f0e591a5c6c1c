//! Static word embeddings with gender-debiasing interventions and bias audits.
//!
//! The crate covers the whole pipeline: word lists ([`lexicon`]), corpus
//! transforms ([`corpus`]), CBOW training with an optional gender-encoding
//! head ([`trainer`]), the hard-debias baseline ([`hard_debias`]) and the
//! bias metrics ([`bias_eval`]).

// Negated float comparisons deliberately treat NaN as failing the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bias_eval;
pub mod corpus;
pub mod embedding;
pub mod error;
pub mod hard_debias;
pub mod lexicon;
pub mod linalg;
pub mod trainer;

pub use corpus::{TokenStream, Vocabulary};
pub use embedding::Embeddings;
pub use error::{Error, Result};
pub use hard_debias::GenderDirection;
pub use lexicon::{NameSet, PairLexicon, ProfessionSet, SemBiasSet, Stereotype, WeatSpec};
pub use trainer::{EmbeddingModel, GenderClass, GenderLabeling, TrainingConfig};
