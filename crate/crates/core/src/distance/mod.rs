//! Attribute distance measures and the range-query index used to restrict
//! distortion support.
//!
//! Measures need not be symmetric: `dist(y, x)` is read as "the cost of `x`
//! appearing as a distorted alternative to the true value `y`".

mod lsap;
mod range;

pub use lsap::solve_lsap;
pub use range::RangeIndex;

/// Weights for the hybrid token distance. All weights must be non-negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridWeights {
    /// Cost multiplier for token insertions.
    pub insert: f64,
    /// Cost multiplier for token deletions.
    pub delete: f64,
    /// Cost multiplier for token substitutions.
    pub substitute: f64,
}

impl Default for HybridWeights {
    fn default() -> Self {
        HybridWeights {
            insert: 1.0,
            delete: 1.0,
            substitute: 1.0,
        }
    }
}

/// The functional form of a distance measure.
#[derive(Debug, Clone, PartialEq)]
pub enum DistanceKind {
    /// `dist(y, x) = 0` for every pair: all domain values are equally likely
    /// distortions of one another.
    Constant,
    /// Unit-cost Levenshtein distance divided by the length of the longer
    /// string (`0` when both are empty), so values lie in `[0, 1]`.
    NormalizedLevenshtein,
    /// Token-level edit distance with Levenshtein inner costs, solved as a
    /// linear sum assignment over null-padded token multisets.
    Hybrid {
        weights: HybridWeights,
        separator: char,
    },
}

/// A distance measure together with its cut-off.
///
/// Distances above the cut-off are treated as infinite by [`cut`](Self::cut),
/// which removes the corresponding values from distortion support.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMeasure {
    pub kind: DistanceKind,
    pub cutoff: f64,
}

impl DistanceMeasure {
    pub fn new(kind: DistanceKind, cutoff: f64) -> crate::Result<Self> {
        if !(cutoff > 0.0) {
            return Err(crate::Error::invalid_config(format!(
                "distance cut-off must be positive, got {cutoff}"
            )));
        }
        if let DistanceKind::Hybrid { weights, .. } = &kind {
            if weights.insert < 0.0 || weights.delete < 0.0 || weights.substitute < 0.0 {
                return Err(crate::Error::invalid_config(
                    "hybrid distance weights must be non-negative".to_string(),
                ));
            }
        }
        Ok(DistanceMeasure { kind, cutoff })
    }

    pub fn constant() -> Self {
        DistanceMeasure {
            kind: DistanceKind::Constant,
            cutoff: f64::INFINITY,
        }
    }

    pub fn normalized_levenshtein(cutoff: f64) -> crate::Result<Self> {
        Self::new(DistanceKind::NormalizedLevenshtein, cutoff)
    }

    pub fn hybrid(weights: HybridWeights, separator: char, cutoff: f64) -> crate::Result<Self> {
        Self::new(DistanceKind::Hybrid { weights, separator }, cutoff)
    }

    /// The raw (uncut) distance from `y` to `x`.
    pub fn raw(&self, y: &str, x: &str) -> f64 {
        match &self.kind {
            DistanceKind::Constant => constant_distance(y, x),
            DistanceKind::NormalizedLevenshtein => normalized_levenshtein(y, x),
            DistanceKind::Hybrid { weights, separator } => {
                hybrid_distance(y, x, *weights, *separator)
            }
        }
    }

    /// The cut distance: `raw(y, x)` when it does not exceed the cut-off,
    /// infinite otherwise.
    pub fn cut(&self, y: &str, x: &str) -> f64 {
        let d = self.raw(y, x);
        if d <= self.cutoff {
            d
        } else {
            f64::INFINITY
        }
    }
}

/// Constant distance: every pair is at distance zero.
pub fn constant_distance(_y: &str, _x: &str) -> f64 {
    0.0
}

/// Unit-cost Levenshtein distance on Unicode scalar values.
pub fn levenshtein(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    levenshtein_chars(&a, &b)
}

fn levenshtein_chars(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    if b.is_empty() {
        return a.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0usize; b.len() + 1];
    for (i, &ca) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(ca != cb);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the length of the longer string.
///
/// Two empty strings are at distance zero.
pub fn normalized_levenshtein(y: &str, x: &str) -> f64 {
    let ny = y.chars().count();
    let nx = x.chars().count();
    let denom = ny.max(nx);
    if denom == 0 {
        return 0.0;
    }
    levenshtein(y, x) as f64 / denom as f64
}

/// Hybrid token distance: the cost of an optimal set of token edits
/// (insertions, deletions, substitutions with Levenshtein inner costs)
/// divided by the number of edit operations in the optimal assignment.
///
/// Token pairs of two null strings do not count as operations; exact-match
/// token pairs do.
pub fn hybrid_distance(y: &str, x: &str, weights: HybridWeights, separator: char) -> f64 {
    let ytoks: Vec<&str> = y.split(separator).filter(|t| !t.is_empty()).collect();
    let xtoks: Vec<&str> = x.split(separator).filter(|t| !t.is_empty()).collect();
    if ytoks.is_empty() && xtoks.is_empty() {
        return 0.0;
    }

    // Pad each side with as many null tokens as the other side has real
    // tokens, so every insertion/deletion pattern is expressible.
    let n = ytoks.len() + xtoks.len();
    let mut cost = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            let yt = ytoks.get(i).copied();
            let xt = xtoks.get(j).copied();
            cost[i * n + j] = match (yt, xt) {
                (Some(a), Some(b)) => weights.substitute * levenshtein(a, b) as f64,
                (Some(a), None) => weights.delete * a.chars().count() as f64,
                (None, Some(b)) => weights.insert * b.chars().count() as f64,
                (None, None) => 0.0,
            };
        }
    }

    let (assignment, total) = solve_lsap(&cost, n).expect("finite square cost matrix");
    let ops = assignment
        .iter()
        .enumerate()
        .filter(|&(i, &j)| i < ytoks.len() || j < xtoks.len())
        .count();
    if ops == 0 {
        0.0
    } else {
        total / ops as f64
    }
}
