//! Bayesian graphical entity resolution.
//!
//! Records drawn from one or more sources are clustered to latent entities
//! under an Ewens-Pitman prior on the linkage structure and a hit-miss
//! distortion model in which a distorted record value is forbidden from
//! matching the entity's true value. Inference runs as a partially collapsed
//! Gibbs sampler with auxiliary-variable updates for every non-conjugate
//! parameter and inverted indices to prune the linkage update.
//!
//! The crate is organised as follows:
//!
//! * [`model`]: domain types ([`model::RecordTable`], [`model::AttributeSpec`],
//!   [`model::EpPrior`]), hyperparameter defaults and state validation.
//! * [`partition`]: Ewens-Pitman random partitions: seating rules, prior
//!   sampling, exact partition probabilities and parameter updates.
//! * [`distance`]: distance measures (constant, normalized Levenshtein,
//!   hybrid token distance), an LSAP solver and range-query indices.
//! * [`distortion`]: distortion propensities, base distributions and the
//!   collapsed record likelihood, plus the `blink` preset.
//! * [`sampler`]: the Gibbs sweep, chain orchestration and indices.
//! * [`evaluation`]: pairwise precision/recall/F1, posterior summaries and
//!   the Geweke convergence diagnostic.
//! * [`simulator`]: a household-survey data generator with ground truth.

pub mod categorical;
pub mod distance;
pub mod distortion;
pub mod evaluation;
pub mod model;
pub mod partition;
pub mod sampler;
pub mod simulator;

mod error;

pub use error::{Error, Result};
