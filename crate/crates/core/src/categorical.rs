//! Categorical sampling helpers.
//!
//! [`AliasTable`] gives O(1) draws after linear-time setup and is used where
//! one fixed distribution is sampled many times (e.g. the simulator's
//! frequency tables). One-shot pmfs inside the Gibbs sweep instead use
//! inverse-CDF directly on (log-)weights, where alias setup cost would
//! dominate.

use rand::Rng;

/// Vose's alias method for a fixed discrete distribution.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

impl AliasTable {
    /// Builds the table from unnormalized non-negative weights.
    pub fn new(weights: &[f64]) -> crate::Result<Self> {
        if weights.is_empty() {
            return Err(crate::Error::invalid_input("empty weight vector"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(crate::Error::invalid_input(
                "weights must be finite and non-negative",
            ));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(crate::Error::invalid_input("weights sum to zero"));
        }
        let n = weights.len();
        let scale = n as f64 / total;
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * scale).collect();
        let mut prob = vec![0.0; n];
        let mut alias = vec![0usize; n];
        let mut small: Vec<usize> = Vec::with_capacity(n);
        let mut large: Vec<usize> = Vec::with_capacity(n);
        for (i, &s) in scaled.iter().enumerate() {
            if s < 1.0 {
                small.push(i);
            } else {
                large.push(i);
            }
        }
        while let (Some(&s), Some(&l)) = (small.last(), large.last()) {
            small.pop();
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        for &i in small.iter().chain(large.iter()) {
            prob[i] = 1.0;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let i = rng.gen_range(0..self.prob.len());
        if rng.gen::<f64>() < self.prob[i] {
            i
        } else {
            self.alias[i]
        }
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }
}

/// Draws an index proportional to `exp(log_weights)` using a max-shift to
/// avoid underflow. Entries of `-inf` have probability zero.
///
/// Panics if every entry is `-inf`.
pub fn sample_log_weights<R: Rng + ?Sized>(log_weights: &[f64], rng: &mut R) -> usize {
    let max = log_weights
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    assert!(
        max > f64::NEG_INFINITY,
        "all categorical log-weights are -inf"
    );
    let total: f64 = log_weights.iter().map(|&lw| (lw - max).exp()).sum();
    let mut target = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &lw) in log_weights.iter().enumerate() {
        let w = (lw - max).exp();
        if w > 0.0 {
            last = i;
            if target < w {
                return i;
            }
            target -= w;
        }
    }
    last
}

/// Draws an index proportional to plain non-negative weights.
pub fn sample_weights<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "all categorical weights are zero");
    let mut target = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if target < w {
                return i;
            }
            target -= w;
        }
    }
    last
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn alias_matches_weights() {
        let weights = [2.0, 1.0, 0.0, 5.0];
        let table = AliasTable::new(&weights).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 4];
        let draws = 400_000;
        for _ in 0..draws {
            counts[table.sample(&mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        let total: f64 = weights.iter().sum();
        for (i, &w) in weights.iter().enumerate() {
            let p = w / total;
            let got = counts[i] as f64 / draws as f64;
            assert!(
                (got - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt() + 1e-9,
                "weight {i}: expected {p}, got {got}"
            );
        }
    }

    #[test]
    fn alias_rejects_degenerate_input() {
        assert!(AliasTable::new(&[]).is_err());
        assert!(AliasTable::new(&[0.0, 0.0]).is_err());
        assert!(AliasTable::new(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn log_weight_sampling_respects_shift() {
        // Weights differing by a huge common offset must still normalize.
        let lw = [-1000.0, -1000.0 + (2.0f64).ln(), f64::NEG_INFINITY];
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut counts = [0usize; 3];
        for _ in 0..300_000 {
            counts[sample_log_weights(&lw, &mut rng)] += 1;
        }
        assert_eq!(counts[2], 0);
        let frac = counts[1] as f64 / 300_000.0;
        assert!((frac - 2.0 / 3.0).abs() < 0.01, "got {frac}");
    }
}
