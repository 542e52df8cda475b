//! Chain orchestration: the sweep schedule, thinning and scalar monitoring.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::state::{initialize, refresh_indicators, FitContext, ModelState};
use super::updates;
use crate::model::{EpParams, EpPrior, EpRegime, RunConfig};
use crate::{Error, Result};

/// Monitored scalars of one chain, one row per stored sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarTrace {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScalarTrace {
    /// The column of one scalar across samples.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.names.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|row| row[idx]).collect())
    }
}

/// Thinned post-burn-in output of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorChain {
    /// Stored linkage samples.
    pub samples: Vec<Vec<u32>>,
    /// Iteration number of each stored sample.
    pub sample_iterations: Vec<usize>,
    pub scalars: ScalarTrace,
}

/// One stored sample as seen by a streaming sink.
pub struct SampleView<'a> {
    /// Zero-based index among stored samples.
    pub index: usize,
    /// One-based sweep number that produced this sample.
    pub iteration: usize,
    pub state: &'a ModelState,
    pub scalar_names: &'a [String],
    pub scalars: &'a [f64],
}

/// One full Gibbs sweep in the partially collapsed schedule.
pub fn sweep<R: Rng + ?Sized>(state: &mut ModelState, ctx: &FitContext, rng: &mut R) {
    refresh_indicators(state, ctx, rng);
    updates::update_theta(state, ctx, rng);
    let a_count = ctx.num_attributes();
    for label in state.occupied_labels() {
        for a in 0..a_count {
            updates::update_entity_attribute(state, ctx, label, a, rng);
        }
    }
    for i in 0..ctx.num_records() {
        updates::update_link(state, ctx, i, rng);
    }
    for a in 0..a_count {
        updates::update_rho(state, ctx, a, rng);
    }
    updates::update_ep_params(state, rng);
    for a in 0..a_count {
        updates::update_entity_distribution(state, ctx, a, rng);
    }
}

fn canonical_scalar_names(ctx: &FitContext, ep: &EpPrior) -> Vec<String> {
    let mut names = vec!["E".to_string()];
    for s in 0..ctx.table.num_sources {
        for spec in &ctx.table.attribute_specs {
            names.push(format!("theta_{s}_{}", spec.name));
        }
    }
    for spec in &ctx.table.attribute_specs {
        names.push(format!("rho_{}", spec.name));
    }
    match ep.regime {
        EpRegime::PitmanYor { .. } => {
            names.push("sigma".to_string());
            names.push("alpha".to_string());
        }
        EpRegime::Ewens { .. } => names.push("alpha".to_string()),
        EpRegime::GenCoupon { .. } => {
            names.push("kappa".to_string());
            names.push("m".to_string());
        }
        EpRegime::CouponFixed => {}
    }
    for spec in &ctx.table.attribute_specs {
        names.push(format!("distortion_{}", spec.name));
    }
    names
}

fn monitored_names(ctx: &FitContext, ep: &EpPrior, config: &RunConfig) -> Result<Vec<String>> {
    let canonical = canonical_scalar_names(ctx, ep);
    match &config.monitor {
        None => Ok(canonical),
        Some(requested) => {
            for name in requested {
                if !canonical.contains(name) {
                    return Err(Error::invalid_config(format!(
                        "unknown monitored scalar `{name}`"
                    )));
                }
            }
            Ok(canonical
                .into_iter()
                .filter(|n| requested.contains(n))
                .collect())
        }
    }
}

fn attr_index(ctx: &FitContext, name: &str) -> usize {
    ctx.table
        .attribute_specs
        .iter()
        .position(|s| s.name == name)
        .expect("known attribute name")
}

fn collect_scalars(state: &ModelState, ctx: &FitContext, names: &[String]) -> Vec<f64> {
    names
        .iter()
        .map(|name| {
            if name == "E" {
                return state.num_occupied() as f64;
            }
            if let Some(rest) = name.strip_prefix("theta_") {
                let (s, attr) = rest.split_once('_').expect("theta scalar name");
                let s: usize = s.parse().expect("source index");
                return state.theta_at(s, attr_index(ctx, attr));
            }
            if let Some(attr) = name.strip_prefix("rho_") {
                return state.rho[attr_index(ctx, attr)];
            }
            if let Some(attr) = name.strip_prefix("distortion_") {
                return state.distortion_fraction(attr_index(ctx, attr));
            }
            match (name.as_str(), &state.ep.params) {
                ("sigma", EpParams::SigmaAlpha { sigma, .. }) => *sigma,
                ("alpha", EpParams::SigmaAlpha { alpha, .. }) => *alpha,
                ("kappa", EpParams::KappaM { kappa, .. }) => *kappa,
                ("m", EpParams::KappaM { m, .. }) => *m as f64,
                _ => panic!("unknown scalar {name}"),
            }
        })
        .collect()
}

/// Runs one chain, streaming each stored sample to `sink`.
///
/// The sweep order per iteration is: indicator refresh, distortion
/// probabilities, all entity attributes, all links, all distortion
/// concentrations, the Ewens-Pitman parameters, the entity-attribute
/// distributions. Deterministic given the seed in `config`.
pub fn run_chain_with<F>(
    ctx: &FitContext,
    ep: &EpPrior,
    config: &RunConfig,
    mut sink: F,
) -> Result<()>
where
    F: FnMut(SampleView) -> Result<()>,
{
    config.validate()?;
    if config.distortion_model != ctx.model {
        return Err(Error::invalid_config(
            "run config distortion model differs from the fitted context",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = initialize(ctx, ep, &mut rng)?;
    let names = monitored_names(ctx, ep, config)?;

    let mut stored = 0usize;
    for iteration in 1..=config.iterations {
        sweep(&mut state, ctx, &mut rng);
        if cfg!(debug_assertions) || iteration % 1000 == 0 {
            let violations = state.check_index_consistency();
            assert!(
                violations.is_empty(),
                "state inconsistency at iteration {iteration}: {violations:?}"
            );
        }
        if iteration > config.burn_in && (iteration - config.burn_in) % config.thin == 0 {
            let scalars = collect_scalars(&state, ctx, &names);
            sink(SampleView {
                index: stored,
                iteration,
                state: &state,
                scalar_names: &names,
                scalars: &scalars,
            })?;
            stored += 1;
        }
    }
    Ok(())
}

/// Runs one chain and collects the thinned samples in memory.
pub fn run_chain(ctx: &FitContext, ep: &EpPrior, config: &RunConfig) -> Result<PosteriorChain> {
    let mut samples = Vec::with_capacity(config.num_samples());
    let mut sample_iterations = Vec::with_capacity(config.num_samples());
    let mut names = Vec::new();
    let mut rows = Vec::with_capacity(config.num_samples());
    run_chain_with(ctx, ep, config, |view| {
        if names.is_empty() {
            names = view.scalar_names.to_vec();
        }
        samples.push(view.state.lambda.iter().map(|&l| l as u32).collect());
        sample_iterations.push(view.iteration);
        rows.push(view.scalars.to_vec());
        Ok(())
    })?;
    if names.is_empty() {
        // No stored samples; still report the canonical header.
        names = monitored_names(ctx, ep, config)?;
    }
    Ok(PosteriorChain {
        samples,
        sample_iterations,
        scalars: ScalarTrace { names, rows },
    })
}
