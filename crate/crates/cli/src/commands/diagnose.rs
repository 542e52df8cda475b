//! `resolver diagnose`: Geweke scores and a tidy trace export for the
//! monitored scalars of a run.

use std::path::Path;

use anyhow::{bail, Context, Result};

use resolver_core::evaluation::geweke_z_default;

use crate::io::write_csv;

pub fn run(scalars_path: &Path, output: &Path) -> Result<()> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(scalars_path)
        .with_context(|| format!("cannot read {}", scalars_path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("scalars file has no header")?
        .iter()
        .map(|h| h.to_string())
        .collect();
    if headers.first().map(String::as_str) != Some("sample_index") {
        bail!("expected a sample_index column first, got `{headers:?}`");
    }
    let names = &headers[1..];
    let mut sample_indices: Vec<String> = Vec::new();
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for row in reader.records() {
        let row = row?;
        sample_indices.push(row[0].to_string());
        for (i, cell) in row.iter().skip(1).enumerate() {
            columns[i].push(cell.parse().with_context(|| format!("bad value `{cell}`"))?);
        }
    }

    std::fs::create_dir_all(output)
        .with_context(|| format!("cannot create {}", output.display()))?;

    let mut geweke_rows = Vec::new();
    for (name, column) in names.iter().zip(&columns) {
        let (z, status) = match geweke_z_default(column) {
            None => ("".to_string(), "not-applicable"),
            Some(z) if z.abs() > 2.0 => (format!("{z}"), "flagged"),
            Some(z) => (format!("{z}"), "ok"),
        };
        geweke_rows.push(vec![name.clone(), z, status.to_string()]);
    }
    write_csv(output.join("geweke.csv"), &["scalar", "z", "status"], &geweke_rows)?;

    let mut trace_rows = Vec::new();
    for (name, column) in names.iter().zip(&columns) {
        for (idx, value) in sample_indices.iter().zip(column) {
            trace_rows.push(vec![idx.clone(), name.clone(), format!("{value}")]);
        }
    }
    write_csv(
        output.join("trace.csv"),
        &["sample_index", "scalar", "value"],
        &trace_rows,
    )?;
    log::info!(
        "diagnosed {} scalars over {} samples",
        names.len(),
        sample_indices.len()
    );
    Ok(())
}
