//! `resolver simulate`: generate a household-survey dataset with ground truth.

use std::io::Write;
use std::path::Path;

use anyhow::{Context, Result};

use resolver_core::simulator::simulate;

use crate::config::SimulateConfig;
use crate::io::create_writer;

pub fn run(config_path: &Path) -> Result<()> {
    let text = std::fs::read_to_string(config_path)
        .with_context(|| format!("cannot read config {}", config_path.display()))?;
    let config = SimulateConfig::parse(&text)?;
    let core = config.core()?;
    let out = simulate(&core)?;

    let output = if config.output.is_absolute() {
        config.output.clone()
    } else {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(&config.output)
    };
    std::fs::create_dir_all(&output)
        .with_context(|| format!("cannot create {}", output.display()))?;

    let mut dataset = create_writer(&output.join("dataset.csv"))?;
    writeln!(dataset, "{}", out.attribute_names.join(","))?;
    for row in &out.rows {
        writeln!(dataset, "{}", row.join(","))?;
    }
    dataset.flush()?;

    let mut truth = create_writer(&output.join("truth.csv"))?;
    writeln!(truth, "record_id,entity_id")?;
    for (record, entity) in out.truth.iter().enumerate() {
        writeln!(truth, "{record},{entity}")?;
    }
    truth.flush()?;

    log::info!(
        "simulated {} records over {} individuals into {}",
        out.rows.len(),
        out.num_individuals,
        output.display()
    );
    Ok(())
}
