//! Declarative TOML configuration for experiments and simulations.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use resolver_core::distance::{DistanceKind, DistanceMeasure, HybridWeights};
use resolver_core::model::{BaseMode, DistortionModel, EpPrior};
use resolver_core::simulator::{DistortionLevel, SimConfig};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dataset: PathBuf,
    pub output: PathBuf,
    #[serde(default = "default_distortion_model")]
    pub distortion_model: String,
    #[serde(default)]
    pub preprocess: Vec<String>,
    #[serde(default = "default_chains")]
    pub chains: usize,
    #[serde(default)]
    pub ep: Option<EpSection>,
    pub run: RunSection,
    pub attributes: BTreeMap<String, AttributeSection>,
}

fn default_distortion_model() -> String {
    "ours".to_string()
}

fn default_chains() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpSection {
    pub regime: String,
    pub zeta: Option<[f64; 2]>,
    pub chi: Option<[f64; 2]>,
    pub r: Option<f64>,
    pub nu: Option<f64>,
    pub m: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default = "default_iterations")]
    pub iterations: usize,
    #[serde(default = "default_burn_in")]
    pub burn_in: usize,
    #[serde(default = "default_thin")]
    pub thin: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub monitor: Option<Vec<String>>,
}

fn default_iterations() -> usize {
    200_000
}

fn default_burn_in() -> usize {
    100_000
}

fn default_thin() -> usize {
    10
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttributeSection {
    pub distance: String,
    pub cutoff: Option<f64>,
    #[serde(default = "default_base")]
    pub base: String,
    pub weights: Option<[f64; 3]>,
    pub separator: Option<String>,
    #[serde(default)]
    pub domain_extra: Vec<String>,
}

fn default_base() -> String {
    "softmax".to_string()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: ExperimentConfig = toml::from_str(text).context("invalid experiment config")?;
        if config.chains == 0 {
            bail!("chains must be >= 1");
        }
        config.distortion()?;
        for (name, attr) in &config.attributes {
            attr.measure()
                .with_context(|| format!("attribute `{name}`"))?;
        }
        for rule in &config.preprocess {
            if !matches!(rule.as_str(), "split-hyphens" | "strip-punctuation" | "uppercase") {
                bail!("unknown preprocessing rule `{rule}`");
            }
        }
        Ok(config)
    }

    pub fn distortion(&self) -> Result<DistortionModel> {
        match self.distortion_model.as_str() {
            "ours" => Ok(DistortionModel::Ours),
            "blink" => Ok(DistortionModel::Blink),
            other => bail!("unknown distortion model `{other}` (expected `ours` or `blink`)"),
        }
    }

    /// Resolves the linkage prior for a dataset of `n` records. `None` in the
    /// config (or regime `auto`) means the default generalized coupon prior;
    /// a `blink` distortion model without an explicit prior means the fixed
    /// coupon prior with `m = n`.
    pub fn ep_prior(&self, n: usize) -> Result<EpPrior> {
        let section = match &self.ep {
            None => {
                return if self.distortion()? == DistortionModel::Blink {
                    Ok(EpPrior::coupon_fixed(n)?)
                } else {
                    Ok(EpPrior::gen_coupon_default(n)?)
                }
            }
            Some(section) => section,
        };
        let chi = section.chi.map(|c| (c[0], c[1]));
        let zeta = section.zeta.map(|z| (z[0], z[1]));
        let prior = match section.regime.as_str() {
            "auto" => EpPrior::gen_coupon_default(n)?,
            "py" => EpPrior::pitman_yor(
                zeta.unwrap_or(resolver_core::model::DEFAULT_ZETA),
                chi.unwrap_or(resolver_core::model::DEFAULT_CHI),
            )?,
            "ewens" => EpPrior::ewens(chi.unwrap_or(resolver_core::model::DEFAULT_CHI))?,
            "gen-coupon" => {
                let (dr, dnu) = resolver_core::model::solve_coupon_hyperparameters(n)?;
                EpPrior::gen_coupon(
                    chi.unwrap_or(resolver_core::model::DEFAULT_CHI),
                    section.r.unwrap_or(dr),
                    section.nu.unwrap_or(dnu),
                )?
            }
            "coupon-fixed" => {
                let m = section.m.unwrap_or(n);
                EpPrior::coupon_fixed(m)?
            }
            other => bail!("unknown EP regime `{other}`"),
        };
        Ok(prior)
    }
}

impl AttributeSection {
    pub fn measure(&self) -> Result<DistanceMeasure> {
        let cutoff = self.cutoff.unwrap_or(f64::INFINITY);
        let kind = match self.distance.as_str() {
            "constant" => DistanceKind::Constant,
            "normalized-levenshtein" => DistanceKind::NormalizedLevenshtein,
            "hybrid" => {
                let w = self.weights.unwrap_or([1.0, 1.0, 1.0]);
                let separator = match &self.separator {
                    None => ' ',
                    Some(s) => {
                        let mut chars = s.chars();
                        let c = chars.next().context("empty separator")?;
                        if chars.next().is_some() {
                            bail!("separator must be a single character");
                        }
                        c
                    }
                };
                DistanceKind::Hybrid {
                    weights: HybridWeights {
                        insert: w[0],
                        delete: w[1],
                        substitute: w[2],
                    },
                    separator,
                }
            }
            other => bail!("unknown distance `{other}`"),
        };
        Ok(DistanceMeasure::new(kind, cutoff)?)
    }

    pub fn base_mode(&self) -> Result<BaseMode> {
        match self.base.as_str() {
            "softmax" => Ok(BaseMode::SoftmaxOverDistance),
            "frequency" => Ok(BaseMode::FrequencyWeightedUniform),
            other => bail!("unknown base distribution mode `{other}`"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub expected_records: usize,
    pub distortion: String,
    pub duplication_mu: f64,
    #[serde(default = "default_p_include")]
    pub p_include: f64,
    #[serde(default)]
    pub seed: u64,
    pub output: PathBuf,
}

fn default_p_include() -> f64 {
    0.9
}

impl SimulateConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let config: SimulateConfig = toml::from_str(text).context("invalid simulate config")?;
        config.core()?;
        Ok(config)
    }

    pub fn core(&self) -> Result<SimConfig> {
        let level = match self.distortion.as_str() {
            "low" => DistortionLevel::Low,
            "high" => DistortionLevel::High,
            other => bail!("unknown distortion level `{other}` (expected `low` or `high`)"),
        };
        let mut config = SimConfig::new(self.expected_records, level, self.duplication_mu, self.seed);
        config.p_include = self.p_include;
        config.validate()?;
        Ok(config)
    }
}
