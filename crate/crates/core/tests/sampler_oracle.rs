//! Exact-posterior check on a string-valued instance with value-dependent
//! propensities and a non-uniform base distribution, complementing the
//! constant-distance oracle in the acceptance suite.

use std::collections::HashMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use resolver_core::distance::{normalized_levenshtein, DistanceMeasure};
use resolver_core::model::{
    validate_state, BaseMode, ColumnSeed, DistortionModel, EpParams, EpPrior, RecordTable,
};
use resolver_core::sampler::{
    initialize, refresh_indicators, update_entity_attribute, update_link, FitContext,
};

fn canonical(lambda: &[usize]) -> Vec<usize> {
    let mut map = HashMap::new();
    lambda
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect()
}

struct Oracle {
    /// psi[y][x] with zero on the diagonal.
    psi: Vec<Vec<f64>>,
    omega: Vec<f64>,
    theta: f64,
    rho: f64,
    g: f64,
}

impl Oracle {
    /// Derives the propensities and base distribution for a domain straight
    /// from the distance definitions.
    fn for_domain(domain: &[&str], theta: f64, rho: f64) -> Self {
        let d = domain.len();
        let mut dist = vec![vec![0.0; d]; d];
        let mut d_max = 0.0f64;
        for y in 0..d {
            for x in 0..d {
                dist[y][x] = normalized_levenshtein(domain[y], domain[x]);
                if y != x && dist[y][x] > d_max {
                    d_max = dist[y][x];
                }
            }
        }
        let mut psi = vec![vec![0.0; d]; d];
        let mut omega = vec![0.0; d];
        for y in 0..d {
            let z: f64 = (0..d)
                .filter(|&x| x != y)
                .map(|x| (-dist[y][x]).exp())
                .sum();
            for x in 0..d {
                if x != y {
                    psi[y][x] = (-dist[y][x]).exp() / z;
                }
            }
            let d_min = (0..d)
                .filter(|&x| x != y)
                .map(|x| dist[y][x])
                .fold(f64::INFINITY, f64::min);
            omega[y] = (-d_min / (2.0 * d_max)).exp();
        }
        Oracle {
            psi,
            omega,
            theta,
            rho,
            g: 1.0 / d as f64,
        }
    }

    fn cluster_mass(&self, values: &[usize], y: usize) -> f64 {
        let mut mass = 1.0;
        let tq = self.theta * self.omega[y];
        let mut counts: HashMap<usize, usize> = HashMap::new();
        for &x in values {
            if x == y {
                mass *= 1.0 - tq;
            } else {
                mass *= tq;
                *counts.entry(x).or_insert(0) += 1;
            }
        }
        let mismatches: usize = counts.values().sum();
        for (&v, &n_v) in counts.iter() {
            for j in 1..=n_v {
                mass *= (j - 1) as f64 + self.rho * self.psi[y][v];
            }
        }
        for j in 1..=mismatches {
            mass /= (j - 1) as f64 + self.rho;
        }
        mass
    }
}

#[test]
fn chain_matches_enumeration_with_value_dependent_propensities() {
    let domain = ["ab", "ac", "zz"];
    let theta = 0.3;
    let rho = 1.2;
    let oracle = Oracle::for_domain(&domain, theta, rho);
    // Records: ab, ab, ac (value ids 0, 0, 1 in the sorted domain).
    let record_values = [0usize, 0, 1];

    // Ewens(alpha = 1) partition priors over [3].
    let partitions: [(&[usize], f64); 5] = [
        (&[0, 0, 0], 1.0 / 3.0),
        (&[0, 0, 1], 1.0 / 6.0),
        (&[0, 1, 0], 1.0 / 6.0),
        (&[0, 1, 1], 1.0 / 6.0),
        (&[0, 1, 2], 1.0 / 6.0),
    ];
    let mut exact: HashMap<Vec<usize>, f64> = HashMap::new();
    let mut total = 0.0;
    for (labels, prior) in partitions {
        let clusters = labels.iter().max().unwrap() + 1;
        let mut likelihood = 1.0;
        for cluster in 0..clusters {
            let members: Vec<usize> = (0..3)
                .filter(|&i| labels[i] == cluster)
                .map(|i| record_values[i])
                .collect();
            let marginal: f64 = (0..3)
                .map(|y| oracle.g * oracle.cluster_mass(&members, y))
                .sum();
            likelihood *= marginal;
        }
        exact.insert(labels.to_vec(), prior * likelihood);
        total += prior * likelihood;
    }
    for mass in exact.values_mut() {
        *mass /= total;
    }

    let mut seed = ColumnSeed::new(
        "x",
        DistanceMeasure::normalized_levenshtein(f64::INFINITY).unwrap(),
        BaseMode::SoftmaxOverDistance,
    );
    seed.extra_domain = vec!["zz".to_string()];
    let columns = vec![vec!["ab".to_string(), "ab".to_string(), "ac".to_string()]];
    let table = RecordTable::from_columns(&[seed], &columns, None).unwrap();
    let ctx = FitContext::new(table, DistortionModel::Ours).unwrap();
    // The context's derived quantities must agree with the oracle's.
    for y in 0..3 {
        assert!((ctx.attrs[0].omega[y] - oracle.omega[y]).abs() < 1e-12);
        for x in 0..3 {
            assert!((ctx.attrs[0].base.psi(y, x) - oracle.psi[y][x]).abs() < 1e-12);
        }
    }

    let mut ep = EpPrior::ewens((1.0, 1.0)).unwrap();
    ep.params = EpParams::SigmaAlpha {
        sigma: 0.0,
        alpha: 1.0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut state = initialize(&ctx, &ep, &mut rng).unwrap();
    state.theta = vec![theta];
    state.rho = vec![rho];
    state.g = vec![vec![oracle.g; 3]];

    let sweeps = 150_000usize;
    let burn_in = 1_000usize;
    let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
    for sweep in 0..(sweeps + burn_in) {
        refresh_indicators(&mut state, &ctx, &mut rng);
        for label in state.occupied_labels() {
            update_entity_attribute(&mut state, &ctx, label, 0, &mut rng);
        }
        for i in 0..3 {
            update_link(&mut state, &ctx, i, &mut rng);
        }
        if sweep >= burn_in {
            *counts.entry(canonical(&state.lambda)).or_insert(0) += 1;
        }
    }
    assert!(validate_state(&state, &ctx.table).is_empty());

    let mut tv = 0.0;
    for (labels, &p_exact) in &exact {
        let p_emp = *counts.get(labels).unwrap_or(&0) as f64 / sweeps as f64;
        tv += (p_exact - p_emp).abs();
    }
    tv /= 2.0;
    assert!(tv < 0.02, "total variation {tv}");
}
