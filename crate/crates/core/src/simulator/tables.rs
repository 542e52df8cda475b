//! Bundled frequency tables for the household simulator: rank-ordered name
//! and zipcode lists with Zipf weighting (deliberately concentrated so
//! entities collide), plus a variant-name map.

use std::collections::HashMap;

use rand::Rng;

use crate::categorical::AliasTable;

const FEMALE_FIRST: &str = include_str!("../../data/first_names_female.txt");
const MALE_FIRST: &str = include_str!("../../data/first_names_male.txt");
const LAST: &str = include_str!("../../data/last_names.txt");
const ZIPS: &str = include_str!("../../data/zipcodes.txt");
const VARIANTS: &str = include_str!("../../data/name_variants.txt");

const FIRST_NAME_ZIPF: f64 = 0.8;
const LAST_NAME_ZIPF: f64 = 0.8;
const ZIPCODE_ZIPF: f64 = 0.5;

/// A rank-ordered value list with Zipf-weighted sampling.
#[derive(Debug, Clone)]
pub struct WeightedValues {
    values: Vec<String>,
    table: AliasTable,
}

impl WeightedValues {
    fn from_ranked(text: &str, exponent: f64) -> Self {
        let values: Vec<String> = text.lines().map(|l| l.trim().to_string()).collect();
        let weights: Vec<f64> = (0..values.len())
            .map(|i| 1.0 / ((i + 1) as f64).powf(exponent))
            .collect();
        let table = AliasTable::new(&weights).expect("non-empty bundled table");
        WeightedValues { values, table }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        &self.values[self.table.sample(rng)]
    }

    pub fn values(&self) -> &[String] {
        &self.values
    }
}

/// All bundled tables used by the simulator.
#[derive(Debug, Clone)]
pub struct FrequencyTables {
    pub female_first: WeightedValues,
    pub male_first: WeightedValues,
    pub last: WeightedValues,
    pub zipcode: WeightedValues,
    pub variants: HashMap<String, Vec<String>>,
}

impl FrequencyTables {
    pub fn bundled() -> Self {
        let mut variants: HashMap<String, Vec<String>> = HashMap::new();
        for line in VARIANTS.lines() {
            let (name, variant) = line.split_once(',').expect("name,variant rows");
            variants
                .entry(name.to_string())
                .or_default()
                .push(variant.to_string());
        }
        FrequencyTables {
            female_first: WeightedValues::from_ranked(FEMALE_FIRST, FIRST_NAME_ZIPF),
            male_first: WeightedValues::from_ranked(MALE_FIRST, FIRST_NAME_ZIPF),
            last: WeightedValues::from_ranked(LAST, LAST_NAME_ZIPF),
            zipcode: WeightedValues::from_ranked(ZIPS, ZIPCODE_ZIPF),
            variants,
        }
    }
}
