//! The partially collapsed Gibbs sampler.
//!
//! One sweep updates, in order: the distortion indicators (point mass), the
//! distortion probabilities (auxiliary `q`), every entity attribute
//! (collapsing the distortion distribution and indicators), every record
//! link (urn scheme over index-pruned candidates), the distortion
//! concentrations (auxiliary `w`, `u`), the Ewens-Pitman parameters and the
//! entity-attribute distributions.

mod chain;
mod state;
mod updates;

pub use chain::{run_chain, run_chain_with, PosteriorChain, SampleView, ScalarTrace};
pub use state::{initialize, refresh_indicators, Entity, FitContext, InvertedIndex, ModelState};
pub use updates::{
    entity_attribute_log_weights, link_log_weights, update_entity_attribute,
    update_entity_distribution, update_ep_params, update_link, update_rho, update_theta,
    LinkCandidates,
};
