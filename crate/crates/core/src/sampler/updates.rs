//! Gibbs updates for every block of the model.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use super::state::{Entity, FitContext, ModelState};
use crate::categorical::sample_log_weights;
use crate::model::{EntityId, EpRegime, RecordId, ValueId};
use crate::partition::{
    seat_weight_existing, seat_weight_new, update_gencoupon_params, update_py_params,
    PartitionView,
};

const THETA_CLAMP: f64 = 1e-12;

/// Updates every distortion probability `theta[s][a]`.
///
/// Draws the auxiliary indicator `q` per record; `q` is forced to one
/// whenever the record is distorted (distortion is impossible without an
/// active propensity draw), and otherwise follows its two-point conditional.
/// The Beta conditional then uses the distorted counts and the undistorted
/// `q` counts. Under the blink model every propensity is one, so `q = 1`
/// throughout and the update reduces to plain Beta conjugacy.
pub fn update_theta<R: Rng + ?Sized>(state: &mut ModelState, ctx: &FitContext, rng: &mut R) {
    let table = &ctx.table;
    let n = table.num_records();
    let a_count = table.num_attributes();
    let s_count = table.num_sources;
    let mut sum_z = vec![0.0f64; s_count * a_count];
    let mut sum_q = vec![0.0f64; s_count * a_count];

    for i in 0..n {
        let s = table.source(i);
        let entity = state.entity(state.lambda[i]).expect("occupied entity");
        for a in 0..a_count {
            if state.z(i, a) {
                sum_z[s * a_count + a] += 1.0;
            } else {
                let omega = ctx.attrs[a].omega[entity.values[a]];
                let theta = state.theta_at(s, a);
                let p = omega * (1.0 - theta) / (1.0 - omega * theta);
                if rng.gen::<f64>() < p {
                    sum_q[s * a_count + a] += 1.0;
                }
            }
        }
    }

    for s in 0..s_count {
        for a in 0..a_count {
            let (b0, b1) = table.attribute_specs[a].distortion_prior[s];
            let draw = Beta::new(b0 + sum_z[s * a_count + a], b1 + sum_q[s * a_count + a])
                .expect("valid Beta parameters")
                .sample(rng)
                .clamp(THETA_CLAMP, 1.0 - THETA_CLAMP);
            state.set_theta(s, a, draw);
        }
    }
}

/// Unnormalized log conditional for one entity attribute, over its feasible
/// support.
///
/// The support intersects the range-index neighborhoods of every distinct
/// linked record value; each candidate weight combines the entity-attribute
/// distribution, the match/mismatch factors scaled by the candidate's
/// propensity, and the collapsed Polya mass of the distorted values.
pub fn entity_attribute_log_weights(
    entity: &Entity,
    state: &ModelState,
    ctx: &FitContext,
    attribute: usize,
) -> (Vec<ValueId>, Vec<f64>) {
    let table = &ctx.table;
    let attr = &ctx.attrs[attribute];
    let g = &state.g[attribute];
    let rho = state.rho[attribute];
    let s_count = table.num_sources;

    if entity.members.is_empty() {
        let support: Vec<ValueId> = (0..g.len()).collect();
        let weights = g.iter().map(|&p| p.ln()).collect();
        return (support, weights);
    }

    // Per-source value counts for the match/mismatch factors. The
    // single-source case reads the maintained cluster counts directly.
    let mut by_source: std::collections::BTreeMap<ValueId, Vec<u32>> =
        std::collections::BTreeMap::new();
    let mut source_totals = vec![0u32; s_count];
    if s_count == 1 {
        source_totals[0] = entity.size() as u32;
    } else {
        for &i in &entity.members {
            let v = table.value(i, attribute);
            by_source.entry(v).or_insert_with(|| vec![0; s_count])[table.source(i)] += 1;
            source_totals[table.source(i)] += 1;
        }
    }

    let distinct: Vec<ValueId> = entity.counts[attribute].keys().copied().collect();
    let base_value = distinct
        .iter()
        .copied()
        .min_by_key(|&v| attr.range.query(v).len())
        .expect("non-empty cluster");
    let support: Vec<ValueId> = attr
        .range
        .query(base_value)
        .iter()
        .map(|&(y, _)| y)
        .filter(|&y| {
            distinct
                .iter()
                .all(|&v| v == base_value || attr.range.contains(y, v))
        })
        .collect();

    let n_e = entity.size() as u32;
    let counts = &entity.counts[attribute];
    let mut weights = Vec::with_capacity(support.len());
    for &y in &support {
        let mut lw = g[y].ln();
        let omega = attr.omega[y];
        let matched = by_source.get(&y);
        for s in 0..s_count {
            if source_totals[s] == 0 {
                continue;
            }
            let m_s = if s_count == 1 {
                counts.get(&y).copied().unwrap_or(0)
            } else {
                matched.map_or(0, |row| row[s])
            };
            let mm_s = source_totals[s] - m_s;
            let tq = state.theta_at(s, attribute) * omega;
            if mm_s > 0 {
                if tq <= 0.0 {
                    lw = f64::NEG_INFINITY;
                    break;
                }
                lw += mm_s as f64 * tq.ln();
            }
            if m_s > 0 {
                lw += m_s as f64 * (1.0 - tq).ln();
            }
        }
        if lw == f64::NEG_INFINITY {
            weights.push(lw);
            continue;
        }
        let mismatches = n_e - counts.get(&y).copied().unwrap_or(0);
        for j in 1..=mismatches {
            lw -= (j as f64 - 1.0 + rho).ln();
        }
        for (&v, &n_v) in counts.iter() {
            if v == y {
                continue;
            }
            let rp = rho * attr.base.psi(y, v);
            if rp <= 0.0 {
                lw = f64::NEG_INFINITY;
                break;
            }
            for j in 1..=n_v {
                lw += (j as f64 - 1.0 + rp).ln();
            }
        }
        weights.push(lw);
    }
    (support, weights)
}

/// Resamples `y[entity][attribute]` from its conditional with the distortion
/// distribution and indicators collapsed, then refreshes the indicators of
/// the linked records and the inverted index. Returns the new value.
pub fn update_entity_attribute<R: Rng + ?Sized>(
    state: &mut ModelState,
    ctx: &FitContext,
    entity: EntityId,
    attribute: usize,
    rng: &mut R,
) -> ValueId {
    let ent = state.entity(entity).expect("occupied entity");
    let current = ent.values[attribute];
    let (support, weights) = entity_attribute_log_weights(ent, state, ctx, attribute);
    if support.is_empty() || weights.iter().all(|&w| w == f64::NEG_INFINITY) {
        log::warn!(
            "entity {entity} attribute {attribute}: empty feasible support, keeping current value"
        );
        return current;
    }
    let choice = support[sample_log_weights(&weights, rng)];
    state.set_entity_value(&ctx.table, entity, attribute, choice);
    choice
}

/// The candidate set and log weights for one record's link update.
#[derive(Debug, Clone)]
pub struct LinkCandidates {
    /// Existing entity labels with positive prior weight.
    pub entities: Vec<EntityId>,
    /// Log weights aligned with `entities`, followed by the "new entity"
    /// weight in the last slot.
    pub log_weights: Vec<f64>,
}

/// Computes the link conditional for `record`, which must currently be
/// detached. When `prune` is set the candidate entities come from
/// intersecting the inverted indices over the record's undistorted
/// attributes; otherwise every occupied entity is scored (entities failing
/// the match constraints get `-inf`, so both routes give the same pmf).
pub(crate) fn link_candidates(
    state: &ModelState,
    ctx: &FitContext,
    record: RecordId,
    prune: bool,
) -> LinkCandidates {
    let table = &ctx.table;
    let a_count = table.num_attributes();
    let clear: Vec<usize> = (0..a_count).filter(|&a| !state.z(record, a)).collect();

    let candidates: Vec<EntityId> = if !prune || clear.is_empty() {
        state.occupied_labels()
    } else {
        let smallest = clear
            .iter()
            .copied()
            .min_by_key(|&a| state.index.entities_with(a, table.value(record, a)).len())
            .expect("non-empty clear set");
        state
            .index
            .entities_with(smallest, table.value(record, smallest))
            .iter()
            .copied()
            .filter(|&e| {
                clear.iter().all(|&a| {
                    a == smallest
                        || state.entity(e).expect("occupied").values[a] == table.value(record, a)
                })
            })
            .collect()
    };

    let mut log_weights = Vec::with_capacity(candidates.len() + 1);
    for &e in &candidates {
        log_weights.push(existing_link_log_weight(state, ctx, record, e));
    }
    log_weights.push(new_link_log_weight(state, ctx, record));
    LinkCandidates {
        entities: candidates,
        log_weights,
    }
}

fn existing_link_log_weight(
    state: &ModelState,
    ctx: &FitContext,
    record: RecordId,
    label: EntityId,
) -> f64 {
    let table = &ctx.table;
    let entity = state.entity(label).expect("occupied entity");
    let mut lw = seat_weight_existing(&state.ep, entity.size()).ln();
    for a in 0..table.num_attributes() {
        let x = table.value(record, a);
        let y = entity.values[a];
        if !state.z(record, a) {
            if x != y {
                return f64::NEG_INFINITY;
            }
            continue;
        }
        // Distorted attribute: the indicator-prior propensity factor (the
        // parts shared by every candidate cancel) times the
        // posterior-predictive mass of the collapsed distortion distribution
        // given the entity's other distorted values.
        let omega = ctx.attrs[a].omega[y];
        if omega <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let psi = ctx.attrs[a].base.psi(y, x);
        let others = if x == y {
            0
        } else {
            entity.count(a, x)
        };
        let numerator = state.rho[a] * psi + others as f64;
        if numerator <= 0.0 {
            return f64::NEG_INFINITY;
        }
        let denominator = state.rho[a] + entity.mismatch_count(a) as f64;
        lw += omega.ln() + numerator.ln() - denominator.ln();
    }
    lw
}

fn new_link_log_weight(state: &ModelState, ctx: &FitContext, record: RecordId) -> f64 {
    let table = &ctx.table;
    let new_weight = seat_weight_new(&state.ep, state.num_occupied());
    if new_weight <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let mut lw = new_weight.ln();
    for a in 0..table.num_attributes() {
        let x = table.value(record, a);
        let g = &state.g[a];
        if state.z(record, a) {
            // Prior-predictive mass summed over truth values able to
            // produce x, each weighted by its propensity (the
            // indicator-prior factor).
            let omega = &ctx.attrs[a].omega;
            let mass: f64 = ctx.attrs[a]
                .base
                .carriers_of(x)
                .iter()
                .map(|&(y, psi)| g[y] * omega[y] * psi)
                .sum();
            if mass > 0.0 {
                lw += mass.ln();
            } else {
                // A distorted value outside every base-distribution support
                // is unreachable from a coherent state; widen to the
                // record's own value so the sweep can continue.
                log::warn!(
                    "record {record} attribute {a}: distorted value outside all supports"
                );
                lw += g[x].ln();
            }
        } else {
            lw += g[x].ln();
        }
    }
    lw
}

/// Index-pruned and brute-force link conditionals for `record`, as
/// `(candidates, normalized probabilities)`. Test support for the
/// filtering-equivalence property; the record keeps its current link.
pub fn link_log_weights(
    state: &mut ModelState,
    ctx: &FitContext,
    record: RecordId,
    prune: bool,
) -> LinkCandidates {
    let old_values = state
        .entity(state.lambda[record])
        .expect("occupied entity")
        .values
        .clone();
    let old = state.detach(&ctx.table, record);
    let was_deleted = state.entity(old).is_none();
    let candidates = link_candidates(state, ctx, record, prune);
    if was_deleted {
        let label = state.create_entity(old_values);
        debug_assert_eq!(label, old);
        state.attach(&ctx.table, record, label);
    } else {
        state.attach(&ctx.table, record, old);
    }
    candidates
}

/// Resamples the link of `record` via the urn scheme over the pruned
/// candidate set, then updates cluster statistics, the indices and, for a
/// new entity, its attribute values.
pub fn update_link<R: Rng + ?Sized>(
    state: &mut ModelState,
    ctx: &FitContext,
    record: RecordId,
    rng: &mut R,
) -> EntityId {
    let table = &ctx.table;
    state.detach(table, record);
    let candidates = link_candidates(state, ctx, record, true);
    let choice = sample_log_weights(&candidates.log_weights, rng);
    let label = if choice < candidates.entities.len() {
        candidates.entities[choice]
    } else {
        let values = draw_new_entity_values(state, ctx, record, rng);
        state.create_entity(values)
    };
    state.attach(table, record, label);
    label
}

/// Attribute values for a fresh entity linked only to `record`: undistorted
/// attributes copy the record; distorted ones draw from the conditional
/// proportional to `G(y) omega(y) psi(x | y)`.
fn draw_new_entity_values<R: Rng + ?Sized>(
    state: &ModelState,
    ctx: &FitContext,
    record: RecordId,
    rng: &mut R,
) -> Vec<ValueId> {
    let table = &ctx.table;
    (0..table.num_attributes())
        .map(|a| {
            let x = table.value(record, a);
            if !state.z(record, a) {
                return x;
            }
            let carriers = ctx.attrs[a].base.carriers_of(x);
            let g = &state.g[a];
            let omega = &ctx.attrs[a].omega;
            let total: f64 = carriers.iter().map(|&(y, psi)| g[y] * omega[y] * psi).sum();
            if total <= 0.0 {
                return x;
            }
            let mut target = rng.gen::<f64>() * total;
            for &(y, psi) in carriers {
                let w = g[y] * omega[y] * psi;
                target -= w;
                if target < 0.0 {
                    return y;
                }
            }
            carriers.last().expect("non-empty carriers").0
        })
        .collect()
}

/// Updates the distortion concentration of one attribute through its
/// auxiliary-variable scheme: one Beta draw per entity carrying distorted
/// values and Bernoulli draws over the Polya factors.
pub fn update_rho<R: Rng + ?Sized>(
    state: &mut ModelState,
    ctx: &FitContext,
    attribute: usize,
    rng: &mut R,
) {
    let rho = state.rho[attribute];
    let (t0, t1) = ctx.table.attribute_specs[attribute].rho_prior;
    let mut shape = t0;
    let mut rate = t1;
    for (_, entity) in state.entities() {
        let y = entity.values[attribute];
        let n_bar = entity.mismatch_count(attribute);
        if n_bar == 0 {
            continue;
        }
        let w_e = Beta::new(rho, n_bar as f64)
            .expect("valid Beta parameters")
            .sample(rng)
            .clamp(f64::MIN_POSITIVE, 1.0 - 1e-16);
        rate -= w_e.ln();
        for (&v, &n_v) in entity.counts[attribute].iter() {
            if v == y {
                continue;
            }
            let rp = rho * ctx.attrs[attribute].base.psi(y, v);
            debug_assert!(rp > 0.0, "distorted value with zero base mass");
            if rp <= 0.0 {
                continue;
            }
            for j in 1..=n_v {
                if rng.gen::<f64>() < rp / (j as f64 - 1.0 + rp) {
                    shape += 1.0;
                }
            }
        }
    }
    state.rho[attribute] = Gamma::new(shape, 1.0 / rate)
        .expect("valid Gamma parameters")
        .sample(rng)
        .max(f64::MIN_POSITIVE);
}

/// Updates the Ewens-Pitman parameters for the state's regime; the fixed
/// coupon limit has none.
pub fn update_ep_params<R: Rng + ?Sized>(state: &mut ModelState, rng: &mut R) {
    let view = PartitionView::from_sizes(state.cluster_sizes()).expect("occupied clusters");
    match state.ep.regime {
        EpRegime::PitmanYor { .. } | EpRegime::Ewens { .. } => {
            update_py_params(&view, &mut state.ep, rng).expect("regime matches");
        }
        EpRegime::GenCoupon { .. } => {
            update_gencoupon_params(&view, &mut state.ep, rng).expect("regime matches");
        }
        EpRegime::CouponFixed => {}
    }
}

/// Redraws the entity-attribute distribution of one attribute from its
/// Dirichlet conditional given the occupied entities' values.
pub fn update_entity_distribution<R: Rng + ?Sized>(
    state: &mut ModelState,
    ctx: &FitContext,
    attribute: usize,
    rng: &mut R,
) {
    let spec = &ctx.table.attribute_specs[attribute];
    let mut alpha: Vec<f64> = spec
        .entity_base
        .iter()
        .map(|&p| spec.entity_concentration * p)
        .collect();
    for (_, entity) in state.entities() {
        alpha[entity.values[attribute]] += 1.0;
    }
    let mut draws: Vec<f64> = alpha
        .iter()
        .map(|&a| {
            if a > 0.0 {
                Gamma::new(a, 1.0)
                    .expect("valid Gamma parameters")
                    .sample(rng)
            } else {
                0.0
            }
        })
        .collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 {
        for d in draws.iter_mut() {
            *d /= total;
        }
    } else {
        draws.fill(1.0 / alpha.len() as f64);
    }
    state.g[attribute] = draws;
}
