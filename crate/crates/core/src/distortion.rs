//! The corrected hit-miss distortion model: value-specific distortion
//! propensities, distortion base distributions and the collapsed record
//! likelihood, plus the `blink` baseline preset.

use crate::distance::RangeIndex;
use crate::model::{
    AttributeSpec, BaseMode, DistortionModel, EpPrior, RecordTable, ValueId,
};
use crate::{Error, Result};

/// Distortion propensity from the nearest-neighbor geometry of a value.
///
/// `d_min` is the minimum cut distance from the truth to any other domain
/// value; `d_max` the maximum raw distance over the domain. A value with no
/// neighbor inside the cut-off (`d_min` infinite) can never be distorted.
pub fn propensity(d_min: f64, d_max: f64) -> f64 {
    if d_min.is_infinite() {
        return 0.0;
    }
    debug_assert!(
        d_max > 0.0 || d_min == 0.0,
        "d_min <= d_max must hold by construction"
    );
    if d_min == 0.0 && d_max == 0.0 {
        return 1.0;
    }
    (-d_min / (2.0 * d_max)).exp()
}

/// Per-attribute distortion base distributions `psi(. | y)`, stored in both
/// directions: by truth value `y` (the support of distortions of `y`) and by
/// observed value `x` (the truth values that can produce `x`).
#[derive(Debug, Clone)]
pub struct BaseDistribution {
    /// `support[y]`: `(x, psi(x | y))` sorted by `x`.
    support: Vec<Vec<(ValueId, f64)>>,
    /// `carriers[x]`: `(y, psi(x | y))` sorted by `y`.
    carriers: Vec<Vec<(ValueId, f64)>>,
}

impl BaseDistribution {
    /// Builds the base distribution for one attribute.
    ///
    /// In [`DistortionModel::Ours`] the truth value is excluded from its own
    /// support and weights follow the attribute's base mode. In
    /// [`DistortionModel::Blink`] the truth keeps its mass and weights carry
    /// the empirical-frequency factor.
    pub fn build(
        spec: &AttributeSpec,
        range: &RangeIndex,
        record_freq: &[u32],
        model: DistortionModel,
    ) -> Self {
        let d = spec.domain.len();
        let mut weights: Vec<Vec<(ValueId, f64)>> = vec![Vec::new(); d];
        // The range index is keyed by query value x; transpose to per-y rows.
        for x in 0..d {
            for &(y, dist) in range.query(x) {
                let w = match model {
                    DistortionModel::Ours => {
                        if x == y {
                            continue;
                        }
                        match spec.base_mode {
                            BaseMode::SoftmaxOverDistance => (-dist).exp(),
                            BaseMode::FrequencyWeightedUniform => record_freq[x] as f64,
                        }
                    }
                    DistortionModel::Blink => record_freq[x] as f64 * (-dist).exp(),
                };
                if w > 0.0 {
                    weights[y].push((x, w));
                }
            }
        }
        let mut carriers: Vec<Vec<(ValueId, f64)>> = vec![Vec::new(); d];
        for (y, row) in weights.iter_mut().enumerate() {
            let total: f64 = row.iter().map(|&(_, w)| w).sum();
            if total > 0.0 {
                for (_, w) in row.iter_mut() {
                    *w /= total;
                }
            }
            for &(x, w) in row.iter() {
                carriers[x].push((y, w));
            }
        }
        BaseDistribution {
            support: weights,
            carriers,
        }
    }

    /// `psi(x | y)`; zero for values outside the support.
    pub fn psi(&self, y: ValueId, x: ValueId) -> f64 {
        match self.support[y].binary_search_by(|&(v, _)| v.cmp(&x)) {
            Ok(idx) => self.support[y][idx].1,
            Err(_) => 0.0,
        }
    }

    /// The support of distortions of truth value `y`, with probabilities.
    pub fn support_of(&self, y: ValueId) -> &[(ValueId, f64)] {
        &self.support[y]
    }

    /// The truth values whose distortion support contains `x`, with
    /// `psi(x | y)` for each.
    pub fn carriers_of(&self, x: ValueId) -> &[(ValueId, f64)] {
        &self.carriers[x]
    }
}

/// Everything the sampler needs about one attribute: the range index, the
/// base distribution, cached propensities and empirical value frequencies.
#[derive(Debug, Clone)]
pub struct AttributeModel {
    pub range: RangeIndex,
    pub base: BaseDistribution,
    /// `omega[y]`: distortion propensity of truth value `y`.
    pub omega: Vec<f64>,
    /// Number of records observed with each value.
    pub record_freq: Vec<u32>,
}

impl AttributeModel {
    pub fn build(
        spec: &AttributeSpec,
        table: &RecordTable,
        attribute: usize,
        model: DistortionModel,
    ) -> Self {
        let mut record_freq = vec![0u32; spec.domain.len()];
        for record in &table.records {
            record_freq[record.values[attribute]] += 1;
        }
        let range = RangeIndex::build(&spec.domain, &spec.distance);
        let base = BaseDistribution::build(spec, &range, &record_freq, model);
        let omega = (0..spec.domain.len())
            .map(|y| match model {
                DistortionModel::Ours => {
                    let (d_min, d_max) = range.propensity_inputs(y);
                    propensity(d_min, d_max)
                }
                DistortionModel::Blink => 1.0,
            })
            .collect();
        AttributeModel {
            range,
            base,
            omega,
            record_freq,
        }
    }

    /// Propensity inputs `(d_min, d_max)` for truth value `y`.
    pub fn propensity_inputs(&self, y: ValueId) -> (f64, f64) {
        self.range.propensity_inputs(y)
    }
}

/// Record likelihood with the distortion indicator collapsed:
/// `(1 - theta*omega) 1[x = y] + theta*omega * h(x)`, where `h` is the
/// prior- or posterior-predictive mass of the distortion distribution.
pub fn collapsed_record_likelihood(
    x: ValueId,
    theta: f64,
    omega: f64,
    y: ValueId,
    h_mass: f64,
) -> f64 {
    let q = theta * omega;
    (1.0 - q) * f64::from(u8::from(x == y)) + q * h_mass
}

/// Overrides that reproduce the `blink` baseline: distortion probability
/// priors `beta = (N/1000, N/10)` and the fixed coupon prior with `m = N`.
/// The propensity and base-distribution changes follow from running the
/// sampler with [`DistortionModel::Blink`].
pub fn blink_variant_overrides(
    specs: &[AttributeSpec],
    num_records: usize,
) -> Result<(Vec<AttributeSpec>, EpPrior)> {
    if num_records == 0 {
        return Err(Error::invalid_input("record count must be >= 1"));
    }
    let n = num_records as f64;
    let beta = (n / 1000.0, n / 10.0);
    let specs = specs
        .iter()
        .map(|spec| {
            let mut spec = spec.clone();
            for b in spec.distortion_prior.iter_mut() {
                *b = beta;
            }
            spec
        })
        .collect();
    Ok((specs, EpPrior::coupon_fixed(num_records)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distance::DistanceMeasure;
    use crate::model::ColumnSeed;

    fn toy_table(values: &[&str], distance: DistanceMeasure, base_mode: BaseMode) -> RecordTable {
        let seeds = vec![ColumnSeed::new("x", distance, base_mode)];
        let cols = vec![values.iter().map(|s| s.to_string()).collect()];
        RecordTable::from_columns(&seeds, &cols, None).unwrap()
    }

    #[test]
    fn propensity_cases() {
        assert_eq!(propensity(f64::INFINITY, f64::INFINITY), 0.0);
        assert_eq!(propensity(f64::INFINITY, 0.0), 0.0);
        assert_eq!(propensity(0.0, 0.0), 1.0);
        assert!((propensity(1.0, 2.0) - (-0.25f64).exp()).abs() < 1e-12);
        assert!((propensity(1.0, 2.0) - 0.778_800_783_071_404_9).abs() < 1e-9);
    }

    #[test]
    fn constant_distance_base_is_uniform() {
        let table = toy_table(
            &["a", "b", "c", "d"],
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
        );
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Ours,
        );
        for y in 0..4 {
            assert_eq!(model.base.psi(y, y), 0.0);
            let support = model.base.support_of(y);
            assert_eq!(support.len(), 3);
            for &(_, p) in support {
                assert!((p - 1.0 / 3.0).abs() < 1e-12);
            }
            assert_eq!(model.omega[y], 1.0);
        }
    }

    #[test]
    fn softmax_base_weights_by_distance() {
        let table = toy_table(
            &["abc", "abd", "xyz"],
            DistanceMeasure::normalized_levenshtein(f64::INFINITY).unwrap(),
            BaseMode::SoftmaxOverDistance,
        );
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Ours,
        );
        let y = table.attribute_specs[0]
            .domain
            .binary_search(&"abc".to_string())
            .unwrap();
        let x_abd = table.attribute_specs[0]
            .domain
            .binary_search(&"abd".to_string())
            .unwrap();
        let x_xyz = table.attribute_specs[0]
            .domain
            .binary_search(&"xyz".to_string())
            .unwrap();
        let w_abd = (-1.0f64 / 3.0).exp();
        let w_xyz = (-1.0f64).exp();
        let z = w_abd + w_xyz;
        assert!((model.base.psi(y, x_abd) - w_abd / z).abs() < 1e-12);
        assert!((model.base.psi(y, x_xyz) - w_xyz / z).abs() < 1e-12);
        assert_eq!(model.base.psi(y, y), 0.0);
    }

    #[test]
    fn frequency_mode_drops_unobserved_values() {
        // Observed counts: "x1" five times, "y" ten times, "x2" never
        // (injected through the domain override).
        let mut seeds = vec![ColumnSeed::new(
            "x",
            DistanceMeasure::constant(),
            BaseMode::FrequencyWeightedUniform,
        )];
        seeds[0].extra_domain = vec!["x2".to_string()];
        let mut values = vec!["x1"; 5];
        values.extend(vec!["y"; 10]);
        let cols = vec![values.iter().map(|s| s.to_string()).collect()];
        let table = RecordTable::from_columns(&seeds, &cols, None).unwrap();
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Ours,
        );
        let dom = &table.attribute_specs[0].domain;
        let y = dom.binary_search(&"y".to_string()).unwrap();
        let x1 = dom.binary_search(&"x1".to_string()).unwrap();
        let x2 = dom.binary_search(&"x2".to_string()).unwrap();
        assert_eq!(model.base.psi(y, x1), 1.0);
        assert_eq!(model.base.psi(y, x2), 0.0);
    }

    #[test]
    fn blink_keeps_truth_in_support() {
        let table = toy_table(
            &["a", "a", "b", "c"],
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
        );
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Blink,
        );
        let dom = &table.attribute_specs[0].domain;
        let a = dom.binary_search(&"a".to_string()).unwrap();
        // psi(a | a) > 0 under blink, proportional to empirical frequency.
        assert!((model.base.psi(a, a) - 0.5).abs() < 1e-12);
        assert!(model.omega.iter().all(|&w| w == 1.0));
    }

    #[test]
    fn singleton_domain_cannot_distort() {
        let table = toy_table(
            &["only"],
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
        );
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Ours,
        );
        assert_eq!(model.omega[0], 0.0);
        assert!(model.base.support_of(0).is_empty());
    }

    #[test]
    fn propensity_cache_range_and_truth_exclusion() {
        // Every cached propensity lies in [0, 1], is zero exactly when the
        // value has no within-cutoff neighbor, and the base distribution
        // puts no mass on the truth.
        let table = toy_table(
            &["ab", "ac", "zz", "qqqq"],
            DistanceMeasure::normalized_levenshtein(0.6).unwrap(),
            BaseMode::SoftmaxOverDistance,
        );
        let model = AttributeModel::build(
            &table.attribute_specs[0],
            &table,
            0,
            DistortionModel::Ours,
        );
        let domain = &table.attribute_specs[0].domain;
        for y in 0..domain.len() {
            let omega = model.omega[y];
            assert!((0.0..=1.0).contains(&omega));
            let (d_min, _) = model.propensity_inputs(y);
            assert_eq!(omega == 0.0, d_min.is_infinite(), "value {}", domain[y]);
            assert_eq!(model.base.psi(y, y), 0.0);
            let total: f64 = model.base.support_of(y).iter().map(|&(_, p)| p).sum();
            if model.base.support_of(y).is_empty() {
                assert_eq!(omega, 0.0);
            } else {
                assert!((total - 1.0).abs() < 1e-12);
            }
        }
        // "qqqq" has no neighbor within the 0.6 cut-off.
        let q = domain.binary_search(&"qqqq".to_string()).unwrap();
        assert_eq!(model.omega[q], 0.0);
    }

    #[test]
    fn collapsed_likelihood_cases() {
        assert!((collapsed_record_likelihood(3, 0.4, 0.5, 3, 0.0) - 0.8).abs() < 1e-12);
        assert!((collapsed_record_likelihood(2, 0.4, 0.5, 3, 0.5) - 0.1).abs() < 1e-12);
        assert_eq!(collapsed_record_likelihood(2, 0.0, 0.7, 3, 0.5), 0.0);
        assert_eq!(collapsed_record_likelihood(3, 0.0, 0.7, 3, 0.5), 1.0);
    }

    #[test]
    fn collapsed_likelihood_is_a_pmf() {
        // Sums to one over {y} union support(h) when h is a proper pmf.
        let theta = 0.3;
        let omega = 0.8;
        let h = [(0usize, 0.25), (2usize, 0.75)];
        let y = 1usize;
        let mut total = collapsed_record_likelihood(y, theta, omega, y, 0.0);
        for &(x, mass) in &h {
            total += collapsed_record_likelihood(x, theta, omega, y, mass);
        }
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn blink_overrides_set_beta_and_coupon() {
        let table = toy_table(
            &["a", "b"],
            DistanceMeasure::constant(),
            BaseMode::SoftmaxOverDistance,
        );
        let (specs, ep) = blink_variant_overrides(&table.attribute_specs, 10_000).unwrap();
        assert_eq!(specs[0].distortion_prior[0], (10.0, 1000.0));
        assert_eq!(ep.slot_limit(), Some(10_000));
    }

    #[test]
    fn augmentation_recovers_marginal_distortion_rate() {
        // Simulating q ~ Bern(omega), z ~ Bern(theta q) must give
        // P(z = 1) = theta * omega.
        use rand::prelude::*;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(12);
        let theta: f64 = 0.35;
        let omega: f64 = 0.6;
        let draws = 1_000_000usize;
        let mut ones = 0usize;
        for _ in 0..draws {
            let q = rng.gen::<f64>() < omega;
            let z = q && rng.gen::<f64>() < theta;
            ones += usize::from(z);
        }
        let p = theta * omega;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        let got = ones as f64 / draws as f64;
        assert!((got - p).abs() < 4.0 * se, "got {got}, want {p}");
    }
}
