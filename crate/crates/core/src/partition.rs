//! Ewens-Pitman random partitions.
//!
//! Covers the sequential seating construction, prior sampling, exact
//! partition probabilities (sequential product for every regime plus a
//! closed form for the generalized coupon regime) and auxiliary-variable
//! posterior updates for the regime parameters.
//!
//! All arithmetic is in log space; rising and falling factorials go through
//! log-gamma differences so partitions of 10^4-plus records do not overflow.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::model::{EpParams, EpPrior, EpRegime};
use crate::{Error, Result};

/// A partition reduced to its sufficient statistics: the multiset of
/// cluster sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionView {
    pub cluster_sizes: Vec<usize>,
    pub total: usize,
}

impl PartitionView {
    pub fn empty() -> Self {
        PartitionView {
            cluster_sizes: Vec::new(),
            total: 0,
        }
    }

    pub fn from_linkage(lambda: &[usize]) -> Self {
        let mut counts = std::collections::BTreeMap::new();
        for &label in lambda {
            *counts.entry(label).or_insert(0usize) += 1;
        }
        PartitionView {
            cluster_sizes: counts.into_values().collect(),
            total: lambda.len(),
        }
    }

    pub fn from_sizes(sizes: Vec<usize>) -> Result<Self> {
        if sizes.iter().any(|&s| s == 0) {
            return Err(Error::invalid_input("cluster sizes must be >= 1"));
        }
        let total = sizes.iter().sum();
        Ok(PartitionView {
            cluster_sizes: sizes,
            total,
        })
    }

    pub fn num_clusters(&self) -> usize {
        self.cluster_sizes.len()
    }
}

/// Unnormalized seating weight of an existing cluster of size `n_e`.
///
/// Shares a common scale with [`seat_weight_new`] within each regime, so the
/// pair can feed an unnormalized categorical draw.
pub fn seat_weight_existing(ep: &EpPrior, cluster_size: usize) -> f64 {
    match ep.params {
        EpParams::SigmaAlpha { sigma, .. } => cluster_size as f64 - sigma,
        EpParams::KappaM { kappa, .. } => cluster_size as f64 + kappa,
        EpParams::FixedM { .. } => 1.0,
    }
}

/// Unnormalized seating weight of a new cluster when `num_clusters` are
/// occupied.
pub fn seat_weight_new(ep: &EpPrior, num_clusters: usize) -> f64 {
    match ep.params {
        EpParams::SigmaAlpha { sigma, alpha } => alpha + sigma * num_clusters as f64,
        EpParams::KappaM { kappa, m } => kappa * (m.saturating_sub(num_clusters)) as f64,
        EpParams::FixedM { m } => m.saturating_sub(num_clusters) as f64,
    }
}

/// Seating probabilities for the next record: one entry per existing cluster
/// (aligned with `view.cluster_sizes`) plus the probability of a new cluster.
///
/// The probabilities sum to one; a generalized coupon prior with all `m`
/// slots occupied gives the new cluster probability zero.
pub fn seat_probabilities(view: &PartitionView, ep: &EpPrior) -> Result<(Vec<f64>, f64)> {
    ep.validate()?;
    if let Some(m) = ep.slot_limit() {
        if view.num_clusters() > m {
            return Err(Error::invalid_input(format!(
                "partition has {} clusters but the prior caps the population at {m}",
                view.num_clusters()
            )));
        }
    }
    let existing: Vec<f64> = view
        .cluster_sizes
        .iter()
        .map(|&n_e| seat_weight_existing(ep, n_e))
        .collect();
    let new = seat_weight_new(ep, view.num_clusters());
    let total: f64 = existing.iter().sum::<f64>() + new;
    Ok((existing.iter().map(|w| w / total).collect(), new / total))
}

/// Samples a linkage array of length `n` by the sequential seating
/// construction. Labels are dense, in order of first appearance.
pub fn sample_partition<R: Rng + ?Sized>(n: usize, ep: &EpPrior, rng: &mut R) -> Vec<usize> {
    let mut lambda = Vec::with_capacity(n);
    let mut sizes: Vec<usize> = Vec::new();
    for _ in 0..n {
        let new_w = seat_weight_new(ep, sizes.len());
        let total: f64 = sizes
            .iter()
            .map(|&s| seat_weight_existing(ep, s))
            .sum::<f64>()
            + new_w;
        let mut target = rng.gen::<f64>() * total;
        let mut chosen = sizes.len();
        for (e, &s) in sizes.iter().enumerate() {
            let w = seat_weight_existing(ep, s);
            if target < w {
                chosen = e;
                break;
            }
            target -= w;
        }
        if chosen == sizes.len() {
            sizes.push(1);
        } else {
            sizes[chosen] += 1;
        }
        lambda.push(chosen);
    }
    lambda
}

/// Log probability of the partition induced by `lambda`, computed as the
/// product of sequential seating probabilities. Exchangeability makes the
/// result invariant to record order.
///
/// Returns `-inf` for partitions outside the prior's support (more clusters
/// than population slots).
pub fn log_partition_prob(lambda: &[usize], ep: &EpPrior) -> f64 {
    let mut label_map = std::collections::HashMap::new();
    let mut sizes: Vec<usize> = Vec::new();
    let mut lp = 0.0f64;
    for (t, &label) in lambda.iter().enumerate() {
        let n_seen = t as f64;
        let denom = match ep.params {
            EpParams::SigmaAlpha { alpha, .. } => n_seen + alpha,
            EpParams::KappaM { kappa, m } => n_seen + m as f64 * kappa,
            EpParams::FixedM { m } => m as f64,
        };
        match label_map.get(&label) {
            Some(&idx) => {
                lp += (seat_weight_existing(ep, sizes[idx]) / denom).ln();
                sizes[idx] += 1;
            }
            None => {
                let w = seat_weight_new(ep, sizes.len());
                if w <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                lp += (w / denom).ln();
                label_map.insert(label, sizes.len());
                sizes.push(1);
            }
        }
    }
    lp
}

/// Closed-form log probability of a generalized coupon partition:
/// the falling factorial of `m` over occupied slots, divided by the rising
/// factorial of `m * kappa`, times per-cluster rising factorials of `kappa`.
pub fn log_gen_coupon_closed_form(view: &PartitionView, kappa: f64, m: usize) -> f64 {
    let e = view.num_clusters();
    if e > m {
        return f64::NEG_INFINITY;
    }
    let n = view.total as f64;
    let mf = m as f64;
    let mut lp = ln_gamma(mf + 1.0) - ln_gamma(mf - e as f64 + 1.0);
    lp -= ln_gamma(mf * kappa + n) - ln_gamma(mf * kappa);
    for &n_e in &view.cluster_sizes {
        lp += ln_gamma(kappa + n_e as f64) - ln_gamma(kappa);
    }
    lp
}

/// Posterior update for `(sigma, alpha)` under the Pitman-Yor or Ewens
/// regime, via the auxiliary-variable scheme with one Beta draw `w`,
/// Bernoulli draws `u_k` over clusters and `v_ej` within clusters.
///
/// Under the Ewens regime `sigma` stays pinned at zero (the `u_k` draws are
/// almost surely one there) and only `alpha` moves. A single-record
/// partition leaves the parameters unchanged.
pub fn update_py_params<R: Rng + ?Sized>(
    view: &PartitionView,
    prior: &mut EpPrior,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let (zeta, chi, ewens) = match &prior.regime {
        EpRegime::PitmanYor { zeta, chi } => (*zeta, *chi, false),
        EpRegime::Ewens { chi } => ((0.0, 0.0), *chi, true),
        _ => {
            return Err(Error::invalid_input(
                "update_py_params requires the Pitman-Yor or Ewens regime",
            ))
        }
    };
    let EpParams::SigmaAlpha { sigma, alpha } = prior.params else {
        return Err(Error::invalid_input("parameter/regime mismatch"));
    };
    let n = view.total;
    if n <= 1 {
        return Ok((sigma, alpha));
    }
    let e = view.num_clusters();

    let w = Beta::new(alpha + 1.0, (n - 1) as f64)
        .expect("valid Beta parameters")
        .sample(rng);

    let mut u_sum = 0usize;
    for k in 1..e {
        let p = alpha / (alpha + sigma * k as f64);
        if rng.gen::<f64>() < p {
            u_sum += 1;
        }
    }

    let mut new_sigma = sigma;
    if !ewens {
        let mut v_complement = 0usize;
        for &n_e in &view.cluster_sizes {
            for j in 1..n_e {
                let p = (j as f64 - 1.0) / (j as f64 - sigma);
                if rng.gen::<f64>() >= p {
                    v_complement += 1;
                }
            }
        }
        let a = zeta.0 + (e - 1 - u_sum) as f64;
        let b = zeta.1 + v_complement as f64;
        new_sigma = Beta::new(a, b)
            .expect("valid Beta parameters")
            .sample(rng)
            .clamp(1e-12, 1.0 - 1e-12);
    }

    let shape = chi.0 + u_sum as f64;
    let rate = chi.1 - w.ln();
    let new_alpha = Gamma::new(shape, 1.0 / rate)
        .expect("valid Gamma parameters")
        .sample(rng)
        .max(f64::MIN_POSITIVE);

    prior.params = EpParams::SigmaAlpha {
        sigma: new_sigma,
        alpha: new_alpha,
    };
    Ok((new_sigma, new_alpha))
}

/// Posterior update for `(kappa, m)` under the generalized coupon regime.
///
/// Draws `w ~ Beta(m*kappa + 1, N - 1)` and within-cluster Bernoulli draws
/// `v_ej`, then samples `m` from a shifted negative binomial supported on
/// `m >= E` and `kappa` from its Gamma conditional given the new `m`.
pub fn update_gencoupon_params<R: Rng + ?Sized>(
    view: &PartitionView,
    prior: &mut EpPrior,
    rng: &mut R,
) -> Result<(f64, usize)> {
    let EpRegime::GenCoupon { chi, r, nu } = prior.regime else {
        return Err(Error::invalid_input(
            "update_gencoupon_params requires the generalized coupon regime",
        ));
    };
    let EpParams::KappaM { kappa, m } = prior.params else {
        return Err(Error::invalid_input("parameter/regime mismatch"));
    };
    let n = view.total;
    if n <= 1 {
        return Ok((kappa, m));
    }
    let e = view.num_clusters();
    if e > m {
        return Err(Error::invalid_input(format!(
            "partition occupies {e} slots but m = {m}"
        )));
    }

    let w = Beta::new(m as f64 * kappa + 1.0, (n - 1) as f64)
        .expect("valid Beta parameters")
        .sample(rng);

    let mut v_sum = 0usize;
    for &n_e in &view.cluster_sizes {
        for j in 1..n_e {
            let p = kappa / (kappa + j as f64);
            if rng.gen::<f64>() < p {
                v_sum += 1;
            }
        }
    }

    // m | w, kappa ~ NegBinomial(r + E - 1, 1 - (1 - nu) w^kappa) + E,
    // sampled through the Gamma-Poisson mixture.
    let success = 1.0 - (1.0 - nu) * (kappa * w.ln()).exp();
    let new_m = e + sample_neg_binomial(r + e as f64 - 1.0, success, rng);

    let shape = chi.0 + (e - 1) as f64 + v_sum as f64;
    let rate = chi.1 - new_m as f64 * w.ln();
    let new_kappa = Gamma::new(shape, 1.0 / rate)
        .expect("valid Gamma parameters")
        .sample(rng)
        .max(f64::MIN_POSITIVE);

    prior.params = EpParams::KappaM {
        kappa: new_kappa,
        m: new_m,
    };
    Ok((new_kappa, new_m))
}

/// Negative binomial draw (failures before `r` successes with success
/// probability `p`) via the Gamma-Poisson mixture.
pub fn sample_neg_binomial<R: Rng + ?Sized>(r: f64, p: f64, rng: &mut R) -> usize {
    debug_assert!(r > 0.0 && p > 0.0 && p <= 1.0);
    if p >= 1.0 {
        return 0;
    }
    let scale = (1.0 - p) / p;
    let lambda = Gamma::new(r, scale)
        .expect("valid Gamma parameters")
        .sample(rng);
    if lambda <= 0.0 {
        return 0;
    }
    Poisson::new(lambda).expect("positive rate").sample(rng) as usize
}
