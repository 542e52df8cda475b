//! Household-survey data simulator.
//!
//! Stage one generates a population of households whose members share a
//! zipcode and, for families, a last name, with correlated birth years.
//! Stage two emits distorted records for a random subset of individuals,
//! with per-attribute activation probabilities and attribute-specific
//! distortion mechanics. The generated dependencies between entities are
//! deliberately absent from the resolution model.

mod tables;

pub use tables::{FrequencyTables, WeightedValues};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::{Error, Result};

pub const ATTRIBUTE_NAMES: [&str; 7] = [
    "first_name",
    "last_name",
    "gender",
    "birth_year",
    "birth_month",
    "birth_day",
    "zipcode",
];

/// Distortion activation probabilities per attribute, in the order of
/// [`ATTRIBUTE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistortionLevel {
    Low,
    High,
}

impl DistortionLevel {
    pub fn activation(&self) -> [f64; 7] {
        match self {
            DistortionLevel::Low => [0.10, 0.10, 0.01, 0.01, 0.01, 0.01, 0.05],
            DistortionLevel::High => [0.40, 0.40, 0.01, 0.10, 0.10, 0.10, 0.10],
        }
    }
}

/// Household composition constants. Every quantity the generation narrative
/// leaves open is a named field here.
#[derive(Debug, Clone)]
pub struct HouseholdMix {
    pub single: f64,
    pub couple: f64,
    pub with_children: f64,
    pub unrelated_adults: f64,
    /// Probability the head of a family household is a couple.
    pub couple_head_given_children: f64,
    pub couple_head_given_unrelated: f64,
    /// Probability a couple shares a last name.
    pub shared_last_name: f64,
    /// Mean absolute birth-year gap within a couple (geometric).
    pub partner_year_gap_mean: f64,
    /// Child birth years sit this many years after the younger parent.
    pub child_gap_min: i32,
    pub child_gap_max: i32,
    /// Families hold 1..=3 children, geometric with this continue chance.
    pub child_continue: f64,
    /// Households with unrelated adults hold one more with this chance.
    pub second_unrelated: f64,
    /// Unrelated adults fall within this many years of the first head.
    pub unrelated_year_spread: i32,
    pub min_birth_year: i32,
    pub max_birth_year: i32,
    pub max_child_birth_year: i32,
}

impl Default for HouseholdMix {
    fn default() -> Self {
        HouseholdMix {
            single: 0.28,
            couple: 0.34,
            with_children: 0.30,
            unrelated_adults: 0.08,
            couple_head_given_children: 0.7,
            couple_head_given_unrelated: 0.5,
            shared_last_name: 0.9,
            partner_year_gap_mean: 3.0,
            child_gap_min: 18,
            child_gap_max: 45,
            child_continue: 0.45,
            second_unrelated: 0.4,
            unrelated_year_spread: 10,
            min_birth_year: 1930,
            max_birth_year: 1995,
            max_child_birth_year: 2010,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub expected_records: usize,
    pub distortion: DistortionLevel,
    /// Poisson rate for records per included individual, truncated to 1..=4.
    pub duplication_mu: f64,
    /// Probability an individual appears in the data at all.
    pub p_include: f64,
    pub seed: u64,
    pub mix: HouseholdMix,
}

impl SimConfig {
    pub fn new(expected_records: usize, distortion: DistortionLevel, mu: f64, seed: u64) -> Self {
        SimConfig {
            expected_records,
            distortion,
            duplication_mu: mu,
            p_include: 0.9,
            seed,
            mix: HouseholdMix::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.expected_records == 0 {
            return Err(Error::invalid_config("expected_records must be >= 1"));
        }
        if !(self.duplication_mu > 0.0) {
            return Err(Error::invalid_config(format!(
                "duplication rate must be positive, got {}",
                self.duplication_mu
            )));
        }
        if !(self.p_include > 0.0 && self.p_include <= 1.0) {
            return Err(Error::invalid_config(format!(
                "inclusion probability must lie in (0, 1], got {}",
                self.p_include
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Individual {
    pub first_name: String,
    pub last_name: String,
    pub gender: char,
    pub birth_year: i32,
    pub birth_month: u32,
    pub birth_day: u32,
    pub zipcode: String,
}

impl Individual {
    pub fn attribute_strings(&self) -> Vec<String> {
        vec![
            self.first_name.clone(),
            self.last_name.clone(),
            self.gender.to_string(),
            self.birth_year.to_string(),
            self.birth_month.to_string(),
            self.birth_day.to_string(),
            self.zipcode.clone(),
        ]
    }
}

#[derive(Debug, Clone)]
pub struct Household {
    pub members: Vec<Individual>,
}

/// Generated records with ground truth.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub attribute_names: Vec<String>,
    /// One row of attribute strings per record.
    pub rows: Vec<Vec<String>>,
    /// Entity (individual) id per record.
    pub truth: Vec<usize>,
    /// Distortion activation flags per record and attribute.
    pub distorted: Vec<Vec<bool>>,
    /// Total individuals in the population (including never-sampled ones).
    pub num_individuals: usize,
}

fn days_in_month(month: u32) -> u32 {
    match month {
        2 => 28,
        4 | 6 | 9 | 11 => 30,
        _ => 31,
    }
}

/// Truncated-Poisson pmf over 1..=4 records per entity: `Poisson(mu)`
/// renormalized on the support.
pub fn records_per_entity_pmf(mu: f64) -> Result<[f64; 4]> {
    if !(mu > 0.0) {
        return Err(Error::invalid_input(format!(
            "Poisson rate must be positive, got {mu}"
        )));
    }
    let log_fact = [0.0, (2.0f64).ln(), (6.0f64).ln(), (24.0f64).ln()];
    let logs: Vec<f64> = (1..=4)
        .map(|k| k as f64 * mu.ln() - log_fact[k - 1])
        .collect();
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = weights.iter().sum();
    let mut pmf = [0.0; 4];
    for (slot, w) in pmf.iter_mut().zip(&weights) {
        *slot = w / total;
    }
    Ok(pmf)
}

fn sample_truncated_poisson<R: Rng + ?Sized>(pmf: &[f64; 4], rng: &mut R) -> usize {
    let mut target = rng.gen::<f64>();
    for (k, &p) in pmf.iter().enumerate() {
        if target < p {
            return k + 1;
        }
        target -= p;
    }
    4
}

fn sample_birth_year<R: Rng + ?Sized>(mix: &HouseholdMix, rng: &mut R) -> i32 {
    rng.gen_range(mix.min_birth_year..=mix.max_birth_year)
}

fn sample_year_gap<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> i32 {
    // Geometric on {0, 1, ...} with the given mean.
    let p = 1.0 / (1.0 + mean);
    let mut gap = 0;
    while rng.gen::<f64>() > p && gap < 30 {
        gap += 1;
    }
    gap
}

struct PersonFactory<'a> {
    tables: &'a FrequencyTables,
    mix: &'a HouseholdMix,
}

impl PersonFactory<'_> {
    fn first_name<R: Rng + ?Sized>(&self, gender: char, rng: &mut R) -> String {
        match gender {
            'F' => self.tables.female_first.sample(rng).to_string(),
            _ => self.tables.male_first.sample(rng).to_string(),
        }
    }

    fn person<R: Rng + ?Sized>(
        &self,
        gender: char,
        last_name: String,
        birth_year: i32,
        zipcode: &str,
        rng: &mut R,
    ) -> Individual {
        let birth_month = rng.gen_range(1..=12);
        let birth_day = rng.gen_range(1..=days_in_month(birth_month));
        Individual {
            first_name: self.first_name(gender, rng),
            last_name,
            gender,
            birth_year: birth_year.clamp(self.mix.min_birth_year, self.mix.max_child_birth_year),
            birth_month,
            birth_day,
            zipcode: zipcode.to_string(),
        }
    }
}

/// Stage one: generates households until the expected record count implied
/// by the duplication and inclusion settings is covered.
pub fn generate_population<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Vec<Household> {
    config.validate().expect("validated config");
    let tables = FrequencyTables::bundled();
    let pmf = records_per_entity_pmf(config.duplication_mu).expect("positive rate");
    let mean_records: f64 = pmf.iter().zip(1..).map(|(&p, k)| p * k as f64).sum();
    let target_individuals =
        (config.expected_records as f64 / (config.p_include * mean_records)).round() as usize;

    let mix = &config.mix;
    let factory = PersonFactory {
        tables: &tables,
        mix,
    };
    let mut households = Vec::new();
    let mut individuals = 0usize;
    while individuals < target_individuals.max(1) {
        let household = generate_household(&factory, &tables, mix, rng);
        individuals += household.members.len();
        households.push(household);
    }
    households
}

fn generate_household<R: Rng + ?Sized>(
    factory: &PersonFactory<'_>,
    tables: &FrequencyTables,
    mix: &HouseholdMix,
    rng: &mut R,
) -> Household {
    let zipcode = tables.zipcode.sample(rng).to_string();
    let mut members = Vec::new();

    let kind = {
        let total = mix.single + mix.couple + mix.with_children + mix.unrelated_adults;
        let draw = rng.gen::<f64>() * total;
        if draw < mix.single {
            0
        } else if draw < mix.single + mix.couple {
            1
        } else if draw < mix.single + mix.couple + mix.with_children {
            2
        } else {
            3
        }
    };

    let couple_head = match kind {
        0 => false,
        1 => true,
        2 => rng.gen::<f64>() < mix.couple_head_given_children,
        _ => rng.gen::<f64>() < mix.couple_head_given_unrelated,
    };

    let head_year = sample_birth_year(mix, rng);
    let head_last = tables.last.sample(rng).to_string();
    if couple_head {
        let gap = sample_year_gap(mix.partner_year_gap_mean, rng);
        let partner_year = if rng.gen::<bool>() {
            head_year + gap
        } else {
            head_year - gap
        }
        .clamp(mix.min_birth_year, mix.max_birth_year);
        let partner_last = if rng.gen::<f64>() < mix.shared_last_name {
            head_last.clone()
        } else {
            tables.last.sample(rng).to_string()
        };
        members.push(factory.person('M', head_last.clone(), head_year, &zipcode, rng));
        members.push(factory.person('F', partner_last, partner_year, &zipcode, rng));
    } else {
        let gender = if rng.gen::<bool>() { 'F' } else { 'M' };
        members.push(factory.person(gender, head_last.clone(), head_year, &zipcode, rng));
    }

    match kind {
        2 => {
            let younger_parent_year = members
                .iter()
                .map(|m| m.birth_year)
                .max()
                .expect("household has heads");
            let mut children = 1;
            while children < 3 && rng.gen::<f64>() < mix.child_continue {
                children += 1;
            }
            for _ in 0..children {
                let gap = rng.gen_range(mix.child_gap_min..=mix.child_gap_max);
                let year = (younger_parent_year + gap).min(mix.max_child_birth_year);
                let gender = if rng.gen::<bool>() { 'F' } else { 'M' };
                members.push(factory.person(gender, head_last.clone(), year, &zipcode, rng));
            }
        }
        3 => {
            let adults = if rng.gen::<f64>() < mix.second_unrelated {
                2
            } else {
                1
            };
            for _ in 0..adults {
                let spread = mix.unrelated_year_spread;
                let year = (head_year + rng.gen_range(-spread..=spread))
                    .clamp(mix.min_birth_year, mix.max_birth_year);
                let gender = if rng.gen::<bool>() { 'F' } else { 'M' };
                let last = tables.last.sample(rng).to_string();
                members.push(factory.person(gender, last, year, &zipcode, rng));
            }
        }
        _ => {}
    }

    Household { members }
}

const TYPO_ALPHABET: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZ";

fn random_typo<R: Rng + ?Sized>(name: &str, rng: &mut R) -> String {
    let mut chars: Vec<char> = name.chars().collect();
    if chars.is_empty() {
        return (TYPO_ALPHABET[rng.gen_range(0..26)] as char).to_string();
    }
    // insert, delete, substitute, transpose; fall back when the string is
    // too short for the drawn operation.
    let mut op = rng.gen_range(0..4);
    if chars.len() == 1 && (op == 1 || op == 3) {
        op = 2;
    }
    match op {
        0 => {
            let pos = rng.gen_range(0..=chars.len());
            chars.insert(pos, TYPO_ALPHABET[rng.gen_range(0..26)] as char);
        }
        1 => {
            let pos = rng.gen_range(0..chars.len());
            chars.remove(pos);
        }
        2 => {
            let pos = rng.gen_range(0..chars.len());
            let old = chars[pos];
            let mut new = old;
            while new == old {
                new = TYPO_ALPHABET[rng.gen_range(0..26)] as char;
            }
            chars[pos] = new;
        }
        _ => {
            let pos = rng.gen_range(0..chars.len() - 1);
            chars.swap(pos, pos + 1);
        }
    }
    chars.into_iter().collect()
}

fn distort_name<R: Rng + ?Sized>(
    current: &str,
    tables: &FrequencyTables,
    redraw: impl Fn(&mut R) -> String,
    rng: &mut R,
) -> String {
    let mechanism = rng.gen::<f64>();
    if mechanism < 0.5 {
        random_typo(current, rng)
    } else if mechanism < 0.8 {
        match tables.variants.get(current) {
            Some(variants) => variants.choose(rng).expect("non-empty variants").clone(),
            None => random_typo(current, rng),
        }
    } else {
        redraw(rng)
    }
}

fn distorted_year<R: Rng + ?Sized>(year: i32, rng: &mut R) -> i32 {
    let normal = Normal::new(0.0, 2.0).expect("valid normal");
    loop {
        let shift: f64 = normal.sample(rng);
        let shift = shift.round() as i32;
        if shift != 0 {
            return year + shift;
        }
    }
}

/// Stage two: iterates over all individuals, including each with probability
/// `p_include` and emitting a truncated-Poisson number of records, each
/// distorted attribute-by-attribute in random order.
pub fn generate_records<R: Rng + ?Sized>(
    population: &[Household],
    config: &SimConfig,
    rng: &mut R,
) -> SimOutput {
    config.validate().expect("validated config");
    let tables = FrequencyTables::bundled();
    let pmf = records_per_entity_pmf(config.duplication_mu).expect("positive rate");
    let activation = config.distortion.activation();

    let mut rows = Vec::new();
    let mut truth = Vec::new();
    let mut distorted = Vec::new();
    let mut entity = 0usize;
    let mut num_individuals = 0usize;

    for household in population {
        for person in &household.members {
            let id = entity;
            entity += 1;
            num_individuals += 1;
            if rng.gen::<f64>() >= config.p_include {
                continue;
            }
            let copies = sample_truncated_poisson(&pmf, rng);
            for _ in 0..copies {
                let mut values = person.attribute_strings();
                let mut flags = vec![false; ATTRIBUTE_NAMES.len()];
                let mut order: Vec<usize> = (0..ATTRIBUTE_NAMES.len()).collect();
                order.shuffle(rng);
                for &a in &order {
                    if rng.gen::<f64>() >= activation[a] {
                        continue;
                    }
                    flags[a] = true;
                    values[a] = match a {
                        0 => {
                            let gender = person.gender;
                            distort_name(
                                &values[0],
                                &tables,
                                |r| match gender {
                                    'F' => tables.female_first.sample(r).to_string(),
                                    _ => tables.male_first.sample(r).to_string(),
                                },
                                rng,
                            )
                        }
                        1 => distort_name(
                            &values[1],
                            &tables,
                            |r| tables.last.sample(r).to_string(),
                            rng,
                        ),
                        2 => if rng.gen::<bool>() { "F" } else { "M" }.to_string(),
                        3 => distorted_year(person.birth_year, rng).to_string(),
                        4 => rng.gen_range(1..=12u32).to_string(),
                        5 => rng
                            .gen_range(1..=days_in_month(person.birth_month))
                            .to_string(),
                        _ => tables.zipcode.sample(rng).to_string(),
                    };
                }
                rows.push(values);
                truth.push(id);
                distorted.push(flags);
            }
        }
    }

    SimOutput {
        attribute_names: ATTRIBUTE_NAMES.iter().map(|s| s.to_string()).collect(),
        rows,
        truth,
        distorted,
        num_individuals,
    }
}

/// Runs both stages from the config's seed.
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let population = generate_population(config, &mut rng);
    Ok(generate_records(&population, config, &mut rng))
}
