//! Posterior evaluation: pairwise linkage metrics, posterior summaries,
//! entity-count error and the Geweke convergence diagnostic.

use std::collections::HashMap;

use crate::{Error, Result};

/// Pairwise metrics of one posterior sample against the truth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSample {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub num_entities: usize,
    pub iteration: usize,
}

/// Median and 95% equi-tailed credible interval of one metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PosteriorSummary {
    pub median: f64,
    pub lower: f64,
    pub upper: f64,
}

fn pairs(n: u64) -> u64 {
    n * (n - 1) / 2
}

/// Pairwise precision, recall and F1 of `predicted` against `truth`.
///
/// Uses the cluster-contingency identity (sums of `n choose 2` over the
/// contingency table), which equals pair enumeration exactly. When the
/// prediction links no pairs the precision is one by convention; when the
/// truth links none the recall is one.
pub fn pairwise_metrics(predicted: &[usize], truth: &[usize]) -> Result<MetricSample> {
    if predicted.len() != truth.len() {
        return Err(Error::invalid_input(format!(
            "length mismatch: {} predicted labels vs {} true labels",
            predicted.len(),
            truth.len()
        )));
    }
    let mut cell: HashMap<(usize, usize), u64> = HashMap::new();
    let mut pred_sizes: HashMap<usize, u64> = HashMap::new();
    let mut true_sizes: HashMap<usize, u64> = HashMap::new();
    for (&p, &t) in predicted.iter().zip(truth) {
        *cell.entry((p, t)).or_insert(0) += 1;
        *pred_sizes.entry(p).or_insert(0) += 1;
        *true_sizes.entry(t).or_insert(0) += 1;
    }
    let tp: u64 = cell.values().map(|&n| pairs(n)).sum();
    let predicted_pairs: u64 = pred_sizes.values().map(|&n| pairs(n)).sum();
    let true_pairs: u64 = true_sizes.values().map(|&n| pairs(n)).sum();

    let precision = if predicted_pairs == 0 {
        1.0
    } else {
        tp as f64 / predicted_pairs as f64
    };
    let recall = if true_pairs == 0 {
        1.0
    } else {
        tp as f64 / true_pairs as f64
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(MetricSample {
        precision,
        recall,
        f1,
        num_entities: pred_sizes.len(),
        iteration: 0,
    })
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    if sorted.len() == 1 {
        return sorted[0];
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Median plus a 95% equi-tailed credible interval.
pub fn summarize(samples: &[f64]) -> Result<PosteriorSummary> {
    if samples.is_empty() {
        return Err(Error::invalid_input("no samples to summarize"));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("no NaN samples"));
    Ok(PosteriorSummary {
        median: quantile(&sorted, 0.5),
        lower: quantile(&sorted, 0.025),
        upper: quantile(&sorted, 0.975),
    })
}

/// Signed relative error of each sample's entity count against the truth.
pub fn relative_entity_error(num_entities: &[usize], true_entities: usize) -> Vec<f64> {
    let e = true_entities as f64;
    num_entities
        .iter()
        .map(|&est| (est as f64 - e) / e)
        .collect()
}

/// Geweke's convergence diagnostic: a Z score for equality of the means of
/// the first `first_frac` and final `last_frac` segments of a trace, with
/// batch-means variance estimates.
///
/// Returns `None` when the trace is too short (< 20 points) or a segment has
/// zero variance.
pub fn geweke_z(trace: &[f64], first_frac: f64, last_frac: f64) -> Option<f64> {
    if trace.len() < 20 {
        return None;
    }
    let n = trace.len();
    let first = &trace[..((n as f64 * first_frac).floor() as usize).max(2)];
    let last = &trace[n - ((n as f64 * last_frac).floor() as usize).max(2)..];
    let (mean_a, var_a) = batch_means(first)?;
    let (mean_b, var_b) = batch_means(last)?;
    let denom = (var_a / first.len() as f64 + var_b / last.len() as f64).sqrt();
    if denom == 0.0 {
        return None;
    }
    Some((mean_a - mean_b) / denom)
}

/// Mean and a batch-means estimate of the per-sample variance accounting for
/// autocorrelation (batch size ~ sqrt(n)).
fn batch_means(segment: &[f64]) -> Option<(f64, f64)> {
    let n = segment.len();
    let mean = segment.iter().sum::<f64>() / n as f64;
    let batch = (n as f64).sqrt().floor() as usize;
    if batch < 1 {
        return None;
    }
    let num_batches = n / batch;
    if num_batches < 2 {
        return None;
    }
    let means: Vec<f64> = (0..num_batches)
        .map(|b| segment[b * batch..(b + 1) * batch].iter().sum::<f64>() / batch as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / num_batches as f64;
    let var_of_means =
        means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (num_batches - 1) as f64;
    let var = var_of_means * batch as f64;
    if var == 0.0 {
        return None;
    }
    Some((mean, var))
}

/// Convenience wrapper with the standard 10% / 50% split.
pub fn geweke_z_default(trace: &[f64]) -> Option<f64> {
    geweke_z(trace, 0.1, 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// O(N^2) pair-enumeration oracle.
    fn metrics_by_enumeration(pred: &[usize], truth: &[usize]) -> (f64, f64, f64) {
        let n = pred.len();
        let mut tp = 0u64;
        let mut pred_pairs = 0u64;
        let mut true_pairs = 0u64;
        for i in 0..n {
            for j in (i + 1)..n {
                let p = pred[i] == pred[j];
                let t = truth[i] == truth[j];
                tp += u64::from(p && t);
                pred_pairs += u64::from(p);
                true_pairs += u64::from(t);
            }
        }
        let precision = if pred_pairs == 0 {
            1.0
        } else {
            tp as f64 / pred_pairs as f64
        };
        let recall = if true_pairs == 0 {
            1.0
        } else {
            tp as f64 / true_pairs as f64
        };
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        (precision, recall, f1)
    }

    #[test]
    fn identical_partitions_score_one() {
        let lambda = vec![0, 1, 1, 2, 0];
        let m = pairwise_metrics(&lambda, &lambda).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn split_cluster_example() {
        let m = pairwise_metrics(&[0, 0, 1], &[0, 0, 0]).unwrap();
        assert_eq!(m.precision, 1.0);
        assert!((m.recall - 1.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn all_singletons_conventions() {
        let m = pairwise_metrics(&[0, 1, 2], &[0, 0, 1]).unwrap();
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 0.0);
        assert_eq!(m.f1, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(pairwise_metrics(&[0, 1], &[0, 1, 2]).is_err());
    }

    #[test]
    fn contingency_identity_matches_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..50 {
            let n = rng.gen_range(1..=200);
            let k = rng.gen_range(1..=n);
            let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let m = pairwise_metrics(&pred, &truth).unwrap();
            let (p, r, f) = metrics_by_enumeration(&pred, &truth);
            assert_eq!(m.precision, p);
            assert_eq!(m.recall, r);
            assert_eq!(m.f1, f);
        }
    }

    #[test]
    fn metrics_are_label_invariant_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let n = 60;
        let pred: Vec<usize> = (0..n).map(|_| rng.gen_range(0..10)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.gen_range(0..10)).collect();
        let base = pairwise_metrics(&pred, &truth).unwrap();
        for _ in 0..100 {
            let shift = rng.gen_range(1..1000);
            let relabeled: Vec<usize> = pred.iter().map(|&l| l * 7 + shift).collect();
            let m = pairwise_metrics(&relabeled, &truth).unwrap();
            assert_eq!(m.precision, base.precision);
            assert_eq!(m.recall, base.recall);
        }
        // precision(a, b) = recall(b, a).
        let ab = pairwise_metrics(&pred, &truth).unwrap();
        let ba = pairwise_metrics(&truth, &pred).unwrap();
        assert_eq!(ab.precision, ba.recall);
        assert_eq!(ab.recall, ba.precision);
    }

    #[test]
    fn summary_quantiles_interpolate() {
        let constant = vec![2.5; 10];
        let s = summarize(&constant).unwrap();
        assert_eq!((s.median, s.lower, s.upper), (2.5, 2.5, 2.5));

        let samples: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let s = summarize(&samples).unwrap();
        assert!((s.median - 50.5).abs() < 1e-12);
        assert!((s.lower - 3.475).abs() < 1e-12);
        assert!((s.upper - 97.525).abs() < 1e-12);

        assert!(summarize(&[]).is_err());
    }

    #[test]
    fn relative_error_examples() {
        assert_eq!(relative_entity_error(&[10], 10), vec![0.0]);
        assert_eq!(relative_entity_error(&[20], 10), vec![1.0]);
        assert_eq!(relative_entity_error(&[5], 10), vec![-0.5]);
    }

    #[test]
    fn geweke_not_applicable_cases() {
        assert_eq!(geweke_z_default(&[1.0; 10]), None);
        assert_eq!(geweke_z_default(&[3.25; 5000]), None);
    }

    #[test]
    fn geweke_calibrated_on_iid_normal() {
        let mut failures = 0;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let trace: Vec<f64> = (0..10_000)
                .map(|_| {
                    let d: f64 = rand_distr::StandardNormal.sample(&mut rng);
                    d
                })
                .collect();
            let z = geweke_z_default(&trace).expect("applicable");
            if z.abs() > 3.0 {
                failures += 1;
            }
        }
        assert!(failures <= 10, "{failures} of 1000 replicates exceeded |Z| = 3");
    }

    #[test]
    fn geweke_flags_shifted_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let mut trace: Vec<f64> = (0..10_000)
            .map(|_| {
                let d: f64 = rand_distr::StandardNormal.sample(&mut rng);
                d
            })
            .collect();
        for value in trace.iter_mut().take(1000) {
            *value += 5.0;
        }
        let z = geweke_z_default(&trace).expect("applicable");
        assert!(z.abs() > 5.0, "z = {z}");
    }
}
