//! Domain types, hyperparameter defaults and state validation. No inference
//! logic lives here.

use crate::distance::DistanceMeasure;
use crate::sampler::ModelState;
use crate::{Error, Result};

pub type RecordId = usize;
pub type EntityId = usize;
pub type ValueId = usize;

/// One observed record: its source and interned attribute values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub source: usize,
    pub values: Vec<ValueId>,
}

/// How the distortion base distribution is formed for an attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseMode {
    /// `psi(x | y) ∝ 1[x != y] exp(-dist(y, x))` over the cut-off-restricted
    /// support. Reduces to uniform for a constant distance.
    SoftmaxOverDistance,
    /// `psi(x | y) ∝ 1[x != y] * (empirical frequency of x)`, intended for
    /// categorical attributes with a constant distance.
    FrequencyWeightedUniform,
}

/// Which distortion model variant the sampler runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionModel {
    /// The corrected hit-miss model: a distorted value never equals the
    /// entity value, and propensities gate distortion by domain geometry.
    Ours,
    /// The `blink` baseline: propensity pinned at one and a base distribution
    /// that keeps mass on the entity value, weighted by empirical frequency.
    Blink,
}

/// Full per-attribute specification: domain, distance, base-distribution
/// recipe and prior hyperparameters.
#[derive(Debug, Clone)]
pub struct AttributeSpec {
    pub name: String,
    /// `D_a`: the finite, ordered domain. Entries must be distinct.
    pub domain: Vec<String>,
    pub distance: DistanceMeasure,
    pub base_mode: BaseMode,
    /// Dirichlet concentration `υ_a` for the entity-attribute distribution.
    pub entity_concentration: f64,
    /// Dirichlet base pmf `φ_a` over the domain; must sum to one.
    pub entity_base: Vec<f64>,
    /// Per-source Beta hyperparameters `(β^(0), β^(1))` for the distortion
    /// probability.
    pub distortion_prior: Vec<(f64, f64)>,
    /// Gamma hyperparameters `(τ^(0), τ^(1))` for the distortion
    /// concentration `ρ_a`.
    pub rho_prior: (f64, f64),
}

impl AttributeSpec {
    pub fn validate(&self, num_sources: usize) -> Result<()> {
        let d = self.domain.len();
        if d == 0 {
            return Err(Error::invalid_config(format!(
                "attribute {}: empty domain",
                self.name
            )));
        }
        let mut sorted = self.domain.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != d {
            return Err(Error::invalid_config(format!(
                "attribute {}: domain entries must be distinct",
                self.name
            )));
        }
        if self.entity_base.len() != d {
            return Err(Error::invalid_config(format!(
                "attribute {}: base pmf length {} != domain size {}",
                self.name,
                self.entity_base.len(),
                d
            )));
        }
        let total: f64 = self.entity_base.iter().sum();
        if (total - 1.0).abs() > 1e-12 || self.entity_base.iter().any(|p| *p < 0.0) {
            return Err(Error::invalid_config(format!(
                "attribute {}: base pmf must sum to one",
                self.name
            )));
        }
        if self.distortion_prior.len() != num_sources {
            return Err(Error::invalid_config(format!(
                "attribute {}: expected {} per-source distortion priors, got {}",
                self.name,
                num_sources,
                self.distortion_prior.len()
            )));
        }
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.entity_concentration)
            || !positive(self.rho_prior.0)
            || !positive(self.rho_prior.1)
            || self
                .distortion_prior
                .iter()
                .any(|&(b0, b1)| !positive(b0) || !positive(b1))
        {
            return Err(Error::invalid_config(format!(
                "attribute {}: hyperparameters must be strictly positive",
                self.name
            )));
        }
        Ok(())
    }
}

/// The observed records together with their attribute specifications.
///
/// Immutable after construction and safe to share across chains.
#[derive(Debug, Clone)]
pub struct RecordTable {
    pub records: Vec<Record>,
    pub attribute_specs: Vec<AttributeSpec>,
    pub num_sources: usize,
}

impl RecordTable {
    pub fn new(
        records: Vec<Record>,
        attribute_specs: Vec<AttributeSpec>,
        num_sources: usize,
    ) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::invalid_input("record table is empty"));
        }
        if attribute_specs.is_empty() {
            return Err(Error::invalid_input("no attributes specified"));
        }
        if num_sources == 0 {
            return Err(Error::invalid_input("number of sources must be >= 1"));
        }
        for spec in &attribute_specs {
            spec.validate(num_sources)?;
        }
        for (i, rec) in records.iter().enumerate() {
            if rec.source >= num_sources {
                return Err(Error::invalid_input(format!(
                    "record {i}: source id {} out of range",
                    rec.source
                )));
            }
            if rec.values.len() != attribute_specs.len() {
                return Err(Error::invalid_input(format!(
                    "record {i}: expected {} values, got {}",
                    attribute_specs.len(),
                    rec.values.len()
                )));
            }
            for (a, &v) in rec.values.iter().enumerate() {
                if v >= attribute_specs[a].domain.len() {
                    return Err(Error::invalid_input(format!(
                        "record {i}: value id {v} outside domain of attribute {}",
                        attribute_specs[a].name
                    )));
                }
            }
        }
        Ok(RecordTable {
            records,
            attribute_specs,
            num_sources,
        })
    }

    /// Builds a table from string-valued columns, interning each column
    /// against a domain formed from the distinct observed values plus any
    /// extras from the seed, and filling in the vague-prior hyperparameter
    /// defaults.
    pub fn from_columns(
        seeds: &[ColumnSeed],
        columns: &[Vec<String>],
        sources: Option<&[usize]>,
    ) -> Result<Self> {
        if seeds.len() != columns.len() {
            return Err(Error::invalid_input(format!(
                "{} column seeds for {} columns",
                seeds.len(),
                columns.len()
            )));
        }
        if columns.is_empty() || columns[0].is_empty() {
            return Err(Error::invalid_input("no data"));
        }
        let n = columns[0].len();
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::invalid_input("ragged columns"));
        }
        let (sources, num_sources) = match sources {
            Some(s) => {
                if s.len() != n {
                    return Err(Error::invalid_input("source column length mismatch"));
                }
                let max = s.iter().copied().max().unwrap_or(0);
                (s.to_vec(), max + 1)
            }
            None => (vec![0usize; n], 1),
        };

        let mut domains: Vec<Vec<String>> = Vec::with_capacity(seeds.len());
        let mut value_ids: Vec<Vec<ValueId>> = Vec::with_capacity(seeds.len());
        for (seed, column) in seeds.iter().zip(columns) {
            let mut domain: Vec<String> = column
                .iter()
                .cloned()
                .chain(seed.extra_domain.iter().cloned())
                .collect();
            domain.sort();
            domain.dedup();
            let ids = column
                .iter()
                .map(|v| domain.binary_search(v).expect("value interned"))
                .collect();
            domains.push(domain);
            value_ids.push(ids);
        }

        let seeded: Vec<(String, DistanceMeasure, BaseMode, Vec<String>)> = seeds
            .iter()
            .zip(domains)
            .map(|(s, d)| (s.name.clone(), s.distance.clone(), s.base_mode, d))
            .collect();
        let (specs, _) = default_hyperparameters(n, num_sources, &seeded)?;

        let records = (0..n)
            .map(|i| Record {
                source: sources[i],
                values: value_ids.iter().map(|col| col[i]).collect(),
            })
            .collect();
        RecordTable::new(records, specs, num_sources)
    }

    pub fn num_records(&self) -> usize {
        self.records.len()
    }

    pub fn num_attributes(&self) -> usize {
        self.attribute_specs.len()
    }

    pub fn value(&self, record: RecordId, attribute: usize) -> ValueId {
        self.records[record].values[attribute]
    }

    pub fn source(&self, record: RecordId) -> usize {
        self.records[record].source
    }
}

/// Ingestion-time description of one attribute column.
#[derive(Debug, Clone)]
pub struct ColumnSeed {
    pub name: String,
    pub distance: DistanceMeasure,
    pub base_mode: BaseMode,
    /// Extra domain values beyond the observed ones.
    pub extra_domain: Vec<String>,
}

impl ColumnSeed {
    pub fn new(name: impl Into<String>, distance: DistanceMeasure, base_mode: BaseMode) -> Self {
        ColumnSeed {
            name: name.into(),
            distance,
            base_mode,
            extra_domain: Vec::new(),
        }
    }
}

/// Hyperparameters of the linkage-structure prior, by parameter regime.
#[derive(Debug, Clone, PartialEq)]
pub enum EpRegime {
    /// `0 < sigma < 1`, `alpha > 0`, with Beta/Gamma hyperpriors.
    PitmanYor { zeta: (f64, f64), chi: (f64, f64) },
    /// `sigma = 0` pinned, Gamma hyperprior on `alpha`.
    Ewens { chi: (f64, f64) },
    /// `sigma = -kappa < 0`, `alpha = m * kappa`, with Gamma/shifted
    /// negative-binomial hyperpriors.
    GenCoupon { chi: (f64, f64), r: f64, nu: f64 },
    /// The `kappa -> inf` limit with `m` fixed: uniform sampling with
    /// replacement from `m` population slots.
    CouponFixed,
}

/// Current values of the linkage-structure prior parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpParams {
    SigmaAlpha { sigma: f64, alpha: f64 },
    KappaM { kappa: f64, m: usize },
    FixedM { m: usize },
}

/// The linkage-structure prior: a parameter regime plus current values.
#[derive(Debug, Clone, PartialEq)]
pub struct EpPrior {
    pub regime: EpRegime,
    pub params: EpParams,
}

impl EpPrior {
    /// Pitman-Yor regime initialized at the hyperprior means.
    pub fn pitman_yor(zeta: (f64, f64), chi: (f64, f64)) -> Result<Self> {
        check_positive_pair("zeta", zeta)?;
        check_positive_pair("chi", chi)?;
        let sigma = zeta.0 / (zeta.0 + zeta.1);
        let alpha = chi.0 / chi.1;
        let prior = EpPrior {
            regime: EpRegime::PitmanYor { zeta, chi },
            params: EpParams::SigmaAlpha { sigma, alpha },
        };
        prior.validate()?;
        Ok(prior)
    }

    /// Ewens regime (`sigma = 0`) initialized at the hyperprior mean.
    pub fn ewens(chi: (f64, f64)) -> Result<Self> {
        check_positive_pair("chi", chi)?;
        let prior = EpPrior {
            regime: EpRegime::Ewens { chi },
            params: EpParams::SigmaAlpha {
                sigma: 0.0,
                alpha: chi.0 / chi.1,
            },
        };
        prior.validate()?;
        Ok(prior)
    }

    /// Generalized coupon regime initialized at the hyperprior means.
    pub fn gen_coupon(chi: (f64, f64), r: f64, nu: f64) -> Result<Self> {
        check_positive_pair("chi", chi)?;
        if !(r > 0.0) || !(nu > 0.0 && nu <= 1.0) {
            return Err(Error::invalid_config(format!(
                "generalized coupon hyperparameters require r > 0 and 0 < nu <= 1, got r={r}, nu={nu}"
            )));
        }
        let kappa = chi.0 / chi.1;
        let m_mean = 1.0 + r * (1.0 - nu) / nu;
        let m = m_mean.round().max(1.0) as usize;
        let prior = EpPrior {
            regime: EpRegime::GenCoupon { chi, r, nu },
            params: EpParams::KappaM { kappa, m },
        };
        prior.validate()?;
        Ok(prior)
    }

    /// Generalized coupon regime with `(r, nu)` solved so the shifted
    /// negative-binomial prior on `m` has mean `n` and variance `n^2`.
    pub fn gen_coupon_default(n: usize) -> Result<Self> {
        let (r, nu) = solve_coupon_hyperparameters(n)?;
        Self::gen_coupon(DEFAULT_CHI, r, nu)
    }

    /// Coupon-collector's partition: `m` fixed, `kappa -> inf`.
    pub fn coupon_fixed(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid_config("coupon prior requires m >= 1"));
        }
        Ok(EpPrior {
            regime: EpRegime::CouponFixed,
            params: EpParams::FixedM { m },
        })
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.regime, &self.params) {
            (EpRegime::PitmanYor { .. }, EpParams::SigmaAlpha { sigma, alpha }) => {
                if !(*sigma > 0.0 && *sigma < 1.0) || !(*alpha > 0.0) {
                    return Err(Error::invalid_config(format!(
                        "Pitman-Yor requires 0 < sigma < 1 and alpha > 0, got sigma={sigma}, alpha={alpha}"
                    )));
                }
            }
            (EpRegime::Ewens { .. }, EpParams::SigmaAlpha { sigma, alpha }) => {
                if *sigma != 0.0 || !(*alpha > 0.0) {
                    return Err(Error::invalid_config(format!(
                        "Ewens requires sigma = 0 and alpha > 0, got sigma={sigma}, alpha={alpha}"
                    )));
                }
            }
            (EpRegime::GenCoupon { .. }, EpParams::KappaM { kappa, m }) => {
                if !(*kappa > 0.0) || *m < 1 {
                    return Err(Error::invalid_config(format!(
                        "generalized coupon requires kappa > 0 and m >= 1, got kappa={kappa}, m={m}"
                    )));
                }
            }
            (EpRegime::CouponFixed, EpParams::FixedM { m }) => {
                if *m < 1 {
                    return Err(Error::invalid_config("coupon prior requires m >= 1"));
                }
            }
            _ => {
                return Err(Error::invalid_config(
                    "Ewens-Pitman regime and parameters do not match",
                ))
            }
        }
        Ok(())
    }

    /// `(sigma, alpha)` for the current parameters. Not defined for the fixed
    /// coupon limit.
    pub fn sigma_alpha(&self) -> Option<(f64, f64)> {
        match self.params {
            EpParams::SigmaAlpha { sigma, alpha } => Some((sigma, alpha)),
            EpParams::KappaM { kappa, m } => Some((-kappa, m as f64 * kappa)),
            EpParams::FixedM { .. } => None,
        }
    }

    /// The population-size cap `m`, when the regime has one.
    pub fn slot_limit(&self) -> Option<usize> {
        match self.params {
            EpParams::KappaM { m, .. } | EpParams::FixedM { m } => Some(m),
            EpParams::SigmaAlpha { .. } => None,
        }
    }
}

fn check_positive_pair(name: &str, pair: (f64, f64)) -> Result<()> {
    if pair.0 > 0.0 && pair.1 > 0.0 && pair.0.is_finite() && pair.1.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid_config(format!(
            "{name} hyperparameters must be strictly positive, got {pair:?}"
        )))
    }
}

pub const DEFAULT_CHI: (f64, f64) = (1.0, 1e-2);
pub const DEFAULT_ZETA: (f64, f64) = (1.0, 1.0);
pub const DEFAULT_RHO_PRIOR: (f64, f64) = (2.0, 1e-4);
pub const DEFAULT_DISTORTION_PRIOR: (f64, f64) = (1.0, 4.0);

/// Solves `(r, nu)` so the shifted negative binomial `m ~ NB(r, nu) + 1` has
/// mean `n` and variance `n^2`.
pub fn solve_coupon_hyperparameters(n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::invalid_input("record count must be >= 1"));
    }
    if n == 1 {
        // Degenerate target (mean 1): pin m at its lower bound.
        return Ok((1.0, 1.0 - 1e-12));
    }
    let n = n as f64;
    let nu = (n - 1.0) / (n * n);
    let r = (n - 1.0) * nu / (1.0 - nu);
    Ok((r, nu))
}

/// Fills the vague-prior defaults for every attribute and returns them with
/// the default generalized-coupon linkage prior.
pub fn default_hyperparameters(
    num_records: usize,
    num_sources: usize,
    seeds: &[(String, DistanceMeasure, BaseMode, Vec<String>)],
) -> Result<(Vec<AttributeSpec>, EpPrior)> {
    if num_records == 0 {
        return Err(Error::invalid_input("record count must be >= 1"));
    }
    if num_sources == 0 {
        return Err(Error::invalid_input("source count must be >= 1"));
    }
    let specs = seeds
        .iter()
        .map(|(name, distance, base_mode, domain)| {
            let d = domain.len().max(1);
            AttributeSpec {
                name: name.clone(),
                domain: domain.clone(),
                distance: distance.clone(),
                base_mode: *base_mode,
                entity_concentration: 1.0,
                entity_base: vec![1.0 / d as f64; domain.len()],
                distortion_prior: vec![DEFAULT_DISTORTION_PRIOR; num_sources],
                rho_prior: DEFAULT_RHO_PRIOR,
            }
        })
        .collect();
    let ep = EpPrior::gen_coupon_default(num_records)?;
    Ok((specs, ep))
}

/// Configuration of one MCMC run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
    pub distortion_model: DistortionModel,
    /// Scalars to monitor; `None` monitors everything.
    pub monitor: Option<Vec<String>>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            iterations: 200_000,
            burn_in: 100_000,
            thin: 10,
            seed: 0,
            distortion_model: DistortionModel::Ours,
            monitor: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::invalid_config("iterations must be >= 1"));
        }
        if self.burn_in > self.iterations {
            return Err(Error::invalid_config(format!(
                "burn-in {} exceeds iterations {}",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::invalid_config("thinning interval must be >= 1"));
        }
        Ok(())
    }

    /// Number of samples the run will store.
    pub fn num_samples(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Checks every [`ModelState`] invariant against `table`, returning all
/// violations rather than failing on the first.
///
/// The indicator/point-mass equivalence is two-sided under the corrected
/// model; under the blink preset a distorted indicator may sit on a matching
/// value, so only the forward direction (mismatch implies distorted) is
/// checked there.
pub fn validate_state_for(
    state: &ModelState,
    table: &RecordTable,
    model: DistortionModel,
) -> Vec<String> {
    let mut violations = validate_state_common(state, table);
    for i in 0..table.num_records() {
        let Some(entity) = state.entity(state.lambda[i]) else {
            continue;
        };
        for a in 0..table.num_attributes() {
            let mismatch = table.value(i, a) != entity.values[a];
            let bad = match model {
                DistortionModel::Ours => state.z(i, a) != mismatch,
                DistortionModel::Blink => mismatch && !state.z(i, a),
            };
            if bad {
                violations.push(format!(
                    "indicator/point-mass mismatch at record {i}, attribute {a}"
                ));
            }
        }
    }
    violations
}

/// [`validate_state_for`] under the corrected distortion model.
pub fn validate_state(state: &ModelState, table: &RecordTable) -> Vec<String> {
    validate_state_for(state, table, DistortionModel::Ours)
}

fn validate_state_common(state: &ModelState, table: &RecordTable) -> Vec<String> {
    let mut violations = Vec::new();
    let n = table.num_records();
    let a_count = table.num_attributes();

    if state.lambda.len() != n {
        violations.push(format!(
            "linkage length {} != record count {n}",
            state.lambda.len()
        ));
        return violations;
    }

    let mut seen_members = vec![false; n];
    let mut occupied = 0usize;
    for (label, entity) in state.entities() {
        occupied += 1;
        if entity.members.is_empty() {
            violations.push(format!("entity {label}: occupied but empty"));
        }
        for &i in &entity.members {
            if i >= n {
                violations.push(format!("entity {label}: member {i} out of range"));
                continue;
            }
            seen_members[i] = true;
            if state.lambda[i] != label {
                violations.push(format!(
                    "cluster size mismatch: record {i} in entity {label} but lambda[{i}] = {}",
                    state.lambda[i]
                ));
            }
        }
        for a in 0..a_count {
            if entity.values[a] >= table.attribute_specs[a].domain.len() {
                violations.push(format!(
                    "entity {label}: attribute {a} value out of domain"
                ));
            }
            let mut counts: std::collections::BTreeMap<ValueId, u32> =
                std::collections::BTreeMap::new();
            for &i in &entity.members {
                *counts.entry(table.value(i, a)).or_insert(0) += 1;
            }
            if counts != entity.counts[a] {
                violations.push(format!(
                    "entity {label}: attribute {a} value counts stale"
                ));
            }
        }
    }
    for (i, seen) in seen_members.iter().enumerate() {
        if !seen {
            violations.push(format!(
                "cluster size mismatch: record {i} assigned to entity {} but not a member",
                state.lambda[i]
            ));
        }
    }
    if occupied != state.num_occupied() {
        violations.push(format!(
            "occupied-entity count {} != tracked {}",
            occupied,
            state.num_occupied()
        ));
    }

    for i in 0..n {
        if state.entity(state.lambda[i]).is_none() {
            violations.push(format!(
                "record {i} linked to vacant entity {}",
                state.lambda[i]
            ));
        }
    }

    for (idx, &theta) in state.theta.iter().enumerate() {
        if !(theta > 0.0 && theta < 1.0) {
            violations.push(format!("theta[{idx}] = {theta} outside (0, 1)"));
        }
    }
    for (a, &rho) in state.rho.iter().enumerate() {
        if !(rho > 0.0 && rho.is_finite()) {
            violations.push(format!("rho[{a}] = {rho} not positive"));
        }
    }
    for (a, g) in state.g.iter().enumerate() {
        let total: f64 = g.iter().sum();
        if (total - 1.0).abs() > 1e-9 || g.iter().any(|p| *p < 0.0) {
            violations.push(format!("entity-attribute distribution {a} is not a pmf"));
        }
    }

    violations.extend(state.check_index_consistency());
    violations
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coupon_defaults_match_closed_form() {
        let (r, nu) = solve_coupon_hyperparameters(1000).unwrap();
        assert!((nu - 9.99e-4).abs() < 1e-12);
        assert!((r - 0.99900).abs() < 1e-5);
        // Direct check: mean and variance of the shifted negative binomial.
        let mean = 1.0 + r * (1.0 - nu) / nu;
        let var = r * (1.0 - nu) / (nu * nu);
        assert!((mean - 1000.0).abs() < 1e-6);
        assert!((var - 1e6).abs() < 1e-3);

        let (r2, nu2) = solve_coupon_hyperparameters(2).unwrap();
        assert!((nu2 - 0.25).abs() < 1e-15);
        assert!((r2 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn defaults_populate_vague_priors() {
        let seeds = vec![(
            "name".to_string(),
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
            vec!["a".into(), "b".into()],
        )];
        let (specs, ep) = default_hyperparameters(1000, 2, &seeds).unwrap();
        assert_eq!(specs[0].distortion_prior, vec![(1.0, 4.0), (1.0, 4.0)]);
        assert_eq!(specs[0].rho_prior, (2.0, 1e-4));
        assert_eq!(specs[0].entity_concentration, 1.0);
        assert_eq!(specs[0].entity_base, vec![0.5, 0.5]);
        match ep.regime {
            EpRegime::GenCoupon { chi, r, nu } => {
                assert_eq!(chi, DEFAULT_CHI);
                assert!((nu - 999.0 / 1e6).abs() < 1e-15);
                assert!((r - 999.0 * nu / (1.0 - nu)).abs() < 1e-12);
            }
            _ => panic!("expected generalized coupon default"),
        }
        assert!(default_hyperparameters(0, 1, &seeds).is_err());
    }

    #[test]
    fn ep_invariants_enforced() {
        assert!(EpPrior::pitman_yor((1.0, 1.0), (1.0, 0.01)).is_ok());
        assert!(EpPrior::pitman_yor((0.0, 1.0), (1.0, 0.01)).is_err());
        assert!(EpPrior::ewens((1.0, 0.01)).is_ok());
        assert!(EpPrior::gen_coupon((1.0, 0.01), 0.5, 0.5).is_ok());
        assert!(EpPrior::gen_coupon((1.0, 0.01), 0.5, 1.5).is_err());
        assert!(EpPrior::coupon_fixed(0).is_err());
        let ewens = EpPrior::ewens((2.0, 0.5)).unwrap();
        assert_eq!(ewens.sigma_alpha(), Some((0.0, 4.0)));
    }

    #[test]
    fn run_config_validation() {
        let mut cfg = RunConfig::default();
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.num_samples(), 10_000);
        cfg.burn_in = cfg.iterations;
        assert!(cfg.validate().is_ok());
        assert_eq!(cfg.num_samples(), 0);
        cfg.burn_in = cfg.iterations + 1;
        assert!(cfg.validate().is_err());
        cfg.burn_in = 0;
        cfg.thin = 0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn table_construction_checks_shapes() {
        let seeds = vec![ColumnSeed::new(
            "x",
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
        )];
        let cols = vec![vec!["b".to_string(), "a".to_string(), "b".to_string()]];
        let table = RecordTable::from_columns(&seeds, &cols, None).unwrap();
        assert_eq!(table.num_records(), 3);
        assert_eq!(table.attribute_specs[0].domain, vec!["a", "b"]);
        assert_eq!(table.records[0].values, vec![1]);
        assert_eq!(table.records[1].values, vec![0]);
        assert_eq!(table.num_sources, 1);
    }
}
