//! Latent chain state and the inverted indices kept consistent with it.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::distortion::AttributeModel;
use crate::model::{
    DistortionModel, EntityId, EpParams, EpPrior, RecordId, RecordTable, ValueId,
};
use crate::{Error, Result};

/// Immutable per-fit context: the table plus everything precomputed from it
/// (range indices, base distributions, propensities). Shared read-only by
/// all chains.
#[derive(Debug, Clone)]
pub struct FitContext {
    pub table: RecordTable,
    pub model: DistortionModel,
    pub attrs: Vec<AttributeModel>,
}

impl FitContext {
    pub fn new(table: RecordTable, model: DistortionModel) -> Result<Self> {
        let attrs = table
            .attribute_specs
            .iter()
            .enumerate()
            .map(|(a, spec)| AttributeModel::build(spec, &table, a, model))
            .collect();
        Ok(FitContext {
            table,
            model,
            attrs,
        })
    }

    pub fn num_records(&self) -> usize {
        self.table.num_records()
    }

    pub fn num_attributes(&self) -> usize {
        self.table.num_attributes()
    }
}

/// Maps an attribute value to the set of occupied entities carrying it.
#[derive(Debug, Clone)]
pub struct InvertedIndex {
    by_value: Vec<Vec<BTreeSet<EntityId>>>,
}

impl InvertedIndex {
    fn new(domain_sizes: &[usize]) -> Self {
        InvertedIndex {
            by_value: domain_sizes
                .iter()
                .map(|&d| vec![BTreeSet::new(); d])
                .collect(),
        }
    }

    fn insert(&mut self, attribute: usize, value: ValueId, entity: EntityId) {
        self.by_value[attribute][value].insert(entity);
    }

    fn remove(&mut self, attribute: usize, value: ValueId, entity: EntityId) {
        let removed = self.by_value[attribute][value].remove(&entity);
        debug_assert!(removed, "index entry missing on removal");
    }

    /// Entities whose attribute equals `value`.
    pub fn entities_with(&self, attribute: usize, value: ValueId) -> &BTreeSet<EntityId> {
        &self.by_value[attribute][value]
    }
}

/// One occupied entity: its attribute values, linked records and per-attribute
/// record-value counts (the incremental cluster statistics).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub values: Vec<ValueId>,
    pub members: BTreeSet<RecordId>,
    /// `counts[a][v]`: number of linked records with value `v` on attribute
    /// `a`. Sums to the cluster size for every attribute.
    pub counts: Vec<BTreeMap<ValueId, u32>>,
}

impl Entity {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn count(&self, attribute: usize, value: ValueId) -> u32 {
        self.counts[attribute].get(&value).copied().unwrap_or(0)
    }

    /// Number of linked records that disagree with the entity on `attribute`.
    pub fn mismatch_count(&self, attribute: usize) -> u32 {
        self.size() as u32 - self.count(attribute, self.values[attribute])
    }
}

/// Full latent state of one chain.
///
/// The mixing proportions and per-entity distortion distributions are
/// collapsed and never materialized; the source distribution is unmodeled.
/// Entity labels are dense small integers recycled through a free list.
#[derive(Debug, Clone)]
pub struct ModelState {
    pub lambda: Vec<EntityId>,
    entities: Vec<Option<Entity>>,
    free: Vec<EntityId>,
    num_occupied: usize,
    z: Vec<bool>,
    /// Distortion probabilities, row-major `[source][attribute]`.
    pub theta: Vec<f64>,
    /// Distortion concentration per attribute.
    pub rho: Vec<f64>,
    /// Entity-attribute distribution per attribute.
    pub g: Vec<Vec<f64>>,
    pub ep: EpPrior,
    pub(crate) index: InvertedIndex,
    num_attributes: usize,
}

impl ModelState {
    pub fn num_occupied(&self) -> usize {
        self.num_occupied
    }

    pub fn entity(&self, label: EntityId) -> Option<&Entity> {
        self.entities.get(label).and_then(|e| e.as_ref())
    }

    /// Occupied entities in label order.
    pub fn entities(&self) -> impl Iterator<Item = (EntityId, &Entity)> {
        self.entities
            .iter()
            .enumerate()
            .filter_map(|(label, e)| e.as_ref().map(|e| (label, e)))
    }

    pub fn occupied_labels(&self) -> Vec<EntityId> {
        self.entities().map(|(label, _)| label).collect()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        self.entities().map(|(_, e)| e.size()).collect()
    }

    pub fn z(&self, record: RecordId, attribute: usize) -> bool {
        self.z[record * self.num_attributes + attribute]
    }

    pub(crate) fn set_z(&mut self, record: RecordId, attribute: usize, value: bool) {
        self.z[record * self.num_attributes + attribute] = value;
    }

    pub fn theta_at(&self, source: usize, attribute: usize) -> f64 {
        self.theta[source * self.num_attributes + attribute]
    }

    pub(crate) fn set_theta(&mut self, source: usize, attribute: usize, value: f64) {
        self.theta[source * self.num_attributes + attribute] = value;
    }

    /// Fraction of records flagged distorted on `attribute`.
    pub fn distortion_fraction(&self, attribute: usize) -> f64 {
        let n = self.lambda.len();
        let count = (0..n).filter(|&i| self.z(i, attribute)).count();
        count as f64 / n as f64
    }

    /// Detaches `record` from its entity, deleting the entity if it empties.
    /// Returns the old label.
    pub(crate) fn detach(&mut self, table: &RecordTable, record: RecordId) -> EntityId {
        let label = self.lambda[record];
        let entity = self.entities[label].as_mut().expect("occupied entity");
        entity.members.remove(&record);
        for a in 0..self.num_attributes {
            let v = table.value(record, a);
            let c = entity.counts[a].get_mut(&v).expect("counted value");
            *c -= 1;
            if *c == 0 {
                entity.counts[a].remove(&v);
            }
        }
        if entity.members.is_empty() {
            let values = entity.values.clone();
            for (a, &v) in values.iter().enumerate() {
                self.index.remove(a, v, label);
            }
            self.entities[label] = None;
            self.free.push(label);
            self.num_occupied -= 1;
        }
        label
    }

    /// Attaches `record` to the occupied entity `label`.
    pub(crate) fn attach(&mut self, table: &RecordTable, record: RecordId, label: EntityId) {
        let entity = self.entities[label].as_mut().expect("occupied entity");
        entity.members.insert(record);
        for a in 0..self.num_attributes {
            *entity.counts[a].entry(table.value(record, a)).or_insert(0) += 1;
        }
        self.lambda[record] = label;
    }

    /// Creates a fresh entity with the given attribute values, recycling a
    /// label when one is free.
    pub(crate) fn create_entity(&mut self, values: Vec<ValueId>) -> EntityId {
        let entity = Entity {
            members: BTreeSet::new(),
            counts: vec![BTreeMap::new(); values.len()],
            values,
        };
        let label = match self.free.pop() {
            Some(label) => {
                self.entities[label] = Some(entity);
                label
            }
            None => {
                self.entities.push(Some(entity));
                self.entities.len() - 1
            }
        };
        let values = self.entities[label].as_ref().unwrap().values.clone();
        for (a, &v) in values.iter().enumerate() {
            self.index.insert(a, v, label);
        }
        self.num_occupied += 1;
        label
    }

    /// Rewrites one entity attribute, keeping the inverted index and the
    /// members' distortion indicators coherent.
    pub(crate) fn set_entity_value(
        &mut self,
        table: &RecordTable,
        label: EntityId,
        attribute: usize,
        value: ValueId,
    ) {
        let entity = self.entities[label].as_mut().expect("occupied entity");
        let old = entity.values[attribute];
        if old == value {
            return;
        }
        entity.values[attribute] = value;
        let members: Vec<RecordId> = entity.members.iter().copied().collect();
        self.index.remove(attribute, old, label);
        self.index.insert(attribute, value, label);
        for i in members {
            let mismatch = table.value(i, attribute) != value;
            self.set_z(i, attribute, mismatch);
        }
    }

    /// Exhaustive index/state agreement check; returns violations.
    pub fn check_index_consistency(&self) -> Vec<String> {
        let mut violations = Vec::new();
        for (a, per_value) in self.index.by_value.iter().enumerate() {
            for (v, set) in per_value.iter().enumerate() {
                for &label in set {
                    match self.entity(label) {
                        Some(e) if e.values[a] == v => {}
                        _ => violations.push(format!(
                            "index lists entity {label} under attribute {a} value {v} wrongly"
                        )),
                    }
                }
            }
        }
        for (label, entity) in self.entities() {
            for (a, &v) in entity.values.iter().enumerate() {
                if !self.index.by_value[a][v].contains(&label) {
                    violations.push(format!(
                        "entity {label} missing from index for attribute {a} value {v}"
                    ));
                }
            }
        }
        let total: usize = self.entities().map(|(_, e)| e.size()).sum();
        if total != self.lambda.len() {
            violations.push(format!(
                "cluster sizes sum to {total}, expected {}",
                self.lambda.len()
            ));
        }
        violations
    }
}

/// Builds the initial state: each record linked to its own entity with the
/// record's attribute values copied over and no distortion; the distortion
/// probabilities and entity-attribute distributions drawn from their
/// conditionals; concentrations and Ewens-Pitman parameters at prior means.
pub fn initialize<R: Rng + ?Sized>(
    ctx: &FitContext,
    ep: &EpPrior,
    rng: &mut R,
) -> Result<ModelState> {
    ep.validate()?;
    let table = &ctx.table;
    let n = table.num_records();
    let a_count = table.num_attributes();
    let s_count = table.num_sources;

    let mut ep = ep.clone();
    match &mut ep.params {
        EpParams::FixedM { m } => {
            if *m < n {
                return Err(Error::invalid_config(format!(
                    "coupon prior population {m} is smaller than the {n} records"
                )));
            }
        }
        EpParams::KappaM { m, .. } => {
            if *m < n {
                log::debug!("raising initial m from {m} to {n} to cover the initial partition");
                *m = n;
            }
        }
        EpParams::SigmaAlpha { .. } => {}
    }

    let mut state = ModelState {
        lambda: (0..n).collect(),
        entities: Vec::with_capacity(n),
        free: Vec::new(),
        num_occupied: 0,
        z: vec![false; n * a_count],
        theta: Vec::with_capacity(s_count * a_count),
        rho: table
            .attribute_specs
            .iter()
            .map(|s| s.rho_prior.0 / s.rho_prior.1)
            .collect(),
        g: table
            .attribute_specs
            .iter()
            .map(|s| s.entity_base.clone())
            .collect(),
        ep,
        index: InvertedIndex::new(
            &table
                .attribute_specs
                .iter()
                .map(|s| s.domain.len())
                .collect::<Vec<_>>(),
        ),
        num_attributes: a_count,
    };

    for i in 0..n {
        let label = state.create_entity(table.records[i].values.clone());
        debug_assert_eq!(label, i);
        state.attach(table, i, label);
    }

    let mut theta = vec![0.0; s_count * a_count];
    for a in 0..a_count {
        for s in 0..s_count {
            let (b0, b1) = table.attribute_specs[a].distortion_prior[s];
            theta[s * a_count + a] = b0 / (b0 + b1);
        }
    }
    state.theta = theta;

    super::updates::update_theta(&mut state, ctx, rng);
    for a in 0..a_count {
        super::updates::update_entity_distribution(&mut state, ctx, a, rng);
    }
    Ok(state)
}

impl ModelState {
    /// Builds a state around a given linkage structure and entity attribute
    /// assignment, e.g. to resume a chain from a stored sample. Entities are
    /// labeled densely in order of first appearance in `lambda`;
    /// `entity_values[k]` carries the attribute values of the k-th such
    /// entity. Distortion probabilities, concentrations and entity-attribute
    /// distributions start at their prior means; the Ewens-Pitman parameters
    /// are taken from `ep` as-is.
    pub fn from_assignment(
        ctx: &FitContext,
        lambda: &[usize],
        entity_values: &[Vec<ValueId>],
        ep: &EpPrior,
    ) -> Result<Self> {
        ep.validate()?;
        let table = &ctx.table;
        let n = table.num_records();
        let a_count = table.num_attributes();
        if lambda.len() != n {
            return Err(Error::invalid_input(format!(
                "linkage length {} != record count {n}",
                lambda.len()
            )));
        }
        let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
        for &label in lambda {
            let next = dense.len();
            dense.entry(label).or_insert(next);
        }
        if dense.len() != entity_values.len() {
            return Err(Error::invalid_input(format!(
                "{} occupied entities but {} value tuples",
                dense.len(),
                entity_values.len()
            )));
        }
        for values in entity_values {
            if values.len() != a_count {
                return Err(Error::invalid_input(
                    "entity value tuple length differs from attribute count",
                ));
            }
            for (a, &v) in values.iter().enumerate() {
                if v >= table.attribute_specs[a].domain.len() {
                    return Err(Error::invalid_input(format!(
                        "entity value {v} outside domain of attribute {a}"
                    )));
                }
            }
        }

        let mut state = ModelState {
            lambda: vec![0; n],
            entities: Vec::new(),
            free: Vec::new(),
            num_occupied: 0,
            z: vec![false; n * a_count],
            theta: {
                let mut theta = vec![0.0; table.num_sources * a_count];
                for a in 0..a_count {
                    for s in 0..table.num_sources {
                        let (b0, b1) = table.attribute_specs[a].distortion_prior[s];
                        theta[s * a_count + a] = b0 / (b0 + b1);
                    }
                }
                theta
            },
            rho: table
                .attribute_specs
                .iter()
                .map(|s| s.rho_prior.0 / s.rho_prior.1)
                .collect(),
            g: table
                .attribute_specs
                .iter()
                .map(|s| s.entity_base.clone())
                .collect(),
            ep: ep.clone(),
            index: InvertedIndex::new(
                &table
                    .attribute_specs
                    .iter()
                    .map(|s| s.domain.len())
                    .collect::<Vec<_>>(),
            ),
            num_attributes: a_count,
        };
        for values in entity_values {
            state.create_entity(values.clone());
        }
        for (i, &label) in lambda.iter().enumerate() {
            state.attach(table, i, dense[&label]);
        }
        // Point-mass indicators; blink-mode sweeps redraw them anyway.
        for i in 0..n {
            let values = state.entity(state.lambda[i]).expect("occupied").values.clone();
            for (a, &y) in values.iter().enumerate() {
                state.set_z(i, a, table.value(i, a) != y);
            }
        }
        Ok(state)
    }
}

/// Redraws every distortion indicator from its conditional.
///
/// Under the corrected model the conditional is a point mass: `z_ia = 1`
/// exactly when the record disagrees with its entity. Under the blink
/// preset the base distribution keeps mass on the entity value, so a
/// matching record has a two-point conditional; those indicators are
/// Gibbs-scanned per cluster against the collapsed distortion
/// distribution's mass at the truth.
pub fn refresh_indicators<R: Rng + ?Sized>(state: &mut ModelState, ctx: &FitContext, rng: &mut R) {
    let table = &ctx.table;
    match ctx.model {
        DistortionModel::Ours => {
            for i in 0..table.num_records() {
                let label = state.lambda[i];
                let values = state.entity(label).expect("occupied entity").values.clone();
                for (a, &y) in values.iter().enumerate() {
                    state.set_z(i, a, table.value(i, a) != y);
                }
            }
        }
        DistortionModel::Blink => {
            for label in state.occupied_labels() {
                for a in 0..table.num_attributes() {
                    refresh_blink_indicators(state, ctx, label, a, rng);
                }
            }
        }
    }
}

/// Blink-mode indicator scan for one entity and attribute: mismatching
/// records are distorted with probability one; matching records draw
/// `z ~ Bern(theta h / (theta h + 1 - theta))` with `h` the collapsed
/// predictive mass of the distortion distribution at the entity value,
/// given the other records' current indicators.
fn refresh_blink_indicators<R: Rng + ?Sized>(
    state: &mut ModelState,
    ctx: &FitContext,
    label: EntityId,
    attribute: usize,
    rng: &mut R,
) {
    let table = &ctx.table;
    let entity = state.entity(label).expect("occupied entity");
    let y = entity.values[attribute];
    let members: Vec<RecordId> = entity.members.iter().copied().collect();
    let mismatches = entity.mismatch_count(attribute) as f64;
    let psi_truth = ctx.attrs[attribute].base.psi(y, y);
    let rho = state.rho[attribute];

    let mut flagged_matches = 0u32;
    let mut matched: Vec<RecordId> = Vec::new();
    for &i in &members {
        if table.value(i, attribute) != y {
            state.set_z(i, attribute, true);
        } else {
            matched.push(i);
            flagged_matches += u32::from(state.z(i, attribute));
        }
    }
    for &i in &matched {
        let others = flagged_matches - u32::from(state.z(i, attribute));
        let theta = state.theta_at(table.source(i), attribute);
        let h = (rho * psi_truth + others as f64) / (rho + mismatches + others as f64);
        let p = theta * h / (theta * h + (1.0 - theta));
        let flag = rng.gen::<f64>() < p;
        flagged_matches = flagged_matches - u32::from(state.z(i, attribute)) + u32::from(flag);
        state.set_z(i, attribute, flag);
    }
}
