//! Range-query index over a finite attribute domain.
//!
//! For a query value `x` the index returns every domain value `y` with
//! `dist(y, x) <= cutoff` together with the distance. Neighbor lists are
//! precomputed by a full scan of the domain, so queries are exact by
//! construction and O(1). Because measures may be asymmetric the index never
//! assumes `dist(y, x) = dist(x, y)`.

use super::DistanceMeasure;

#[derive(Debug, Clone)]
pub struct RangeIndex {
    cutoff: f64,
    /// `within[x]` lists `(y, dist(y, x))` for all `y` within the cut-off of
    /// query `x`, ordered by value id.
    within: Vec<Vec<(usize, f64)>>,
    /// `d_min[y]`: minimum cut distance from `y` to any other domain value
    /// (infinite when no other value lies within the cut-off).
    d_min: Vec<f64>,
    /// Maximum raw distance over all ordered pairs of distinct values
    /// (zero for a singleton domain).
    d_max: f64,
}

impl RangeIndex {
    /// Builds the index for `domain` under `measure`.
    pub fn build(domain: &[String], measure: &DistanceMeasure) -> Self {
        Self::build_with(domain, measure.cutoff, |y, x| measure.raw(y, x))
    }

    /// Builds the index from an arbitrary (possibly asymmetric) raw measure.
    pub fn build_with<F>(domain: &[String], cutoff: f64, raw: F) -> Self
    where
        F: Fn(&str, &str) -> f64,
    {
        let n = domain.len();
        let mut within = vec![Vec::new(); n];
        let mut d_min = vec![f64::INFINITY; n];
        let mut d_max = 0.0f64;
        for (y, yv) in domain.iter().enumerate() {
            for (x, xv) in domain.iter().enumerate() {
                let d = raw(yv, xv);
                if y != x && d > d_max {
                    d_max = d;
                }
                if d <= cutoff {
                    within[x].push((y, d));
                    if y != x && d < d_min[y] {
                        d_min[y] = d;
                    }
                }
            }
        }
        RangeIndex {
            cutoff,
            within,
            d_min,
            d_max,
        }
    }

    /// All `(y, dist(y, x))` with the distance within the cut-off.
    pub fn query(&self, x: usize) -> &[(usize, f64)] {
        &self.within[x]
    }

    /// Whether `dist(y, x) <= cutoff`.
    pub fn contains(&self, y: usize, x: usize) -> bool {
        self.within[x].binary_search_by(|&(v, _)| v.cmp(&y)).is_ok()
    }

    /// Inputs to the distortion propensity for truth value `y`: the minimum
    /// cut distance to any other value and the maximum raw distance over the
    /// domain.
    pub fn propensity_inputs(&self, y: usize) -> (f64, f64) {
        (self.d_min[y], self.d_max)
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.within.len()
    }

    pub fn is_empty(&self) -> bool {
        self.within.is_empty()
    }
}
