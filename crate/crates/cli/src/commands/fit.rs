//! `resolver fit`: run one or more chains from a declarative config.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use sha2::{Digest, Sha256};

use resolver_core::distortion::blink_variant_overrides;
use resolver_core::model::{ColumnSeed, DistortionModel, EpPrior, EpRegime, RecordTable, RunConfig};
use resolver_core::sampler::{run_chain_with, FitContext};

use crate::commands::NumericFailure;
use crate::config::ExperimentConfig;
use crate::io::{canonicalize, create_writer, maybe_gzip, read_dataset};
use crate::preprocess::apply_rules;

pub fn run(config_path: &Path, chains_override: Option<usize>) -> Result<()> {
    let start = Instant::now();
    let config_text = std::fs::read_to_string(config_path)
        .with_context(|| format!("cannot read config {}", config_path.display()))?;
    let config_hash = format!("{:x}", Sha256::digest(config_text.as_bytes()));
    let config = ExperimentConfig::parse(&config_text)?;
    let chains = chains_override.unwrap_or(config.chains).max(1);

    let dataset_path = resolve_relative(config_path, &config.dataset);
    let mut dataset = read_dataset(&dataset_path)?;
    for column in dataset.columns.iter_mut() {
        for cell in column.iter_mut() {
            *cell = apply_rules(cell, &config.preprocess);
        }
    }

    for name in &dataset.attribute_names {
        if !config.attributes.contains_key(name) {
            bail!("no attribute spec for dataset column `{name}`");
        }
    }
    for name in config.attributes.keys() {
        if !dataset.attribute_names.contains(name) {
            bail!("attribute spec `{name}` matches no dataset column");
        }
    }

    let seeds: Vec<ColumnSeed> = dataset
        .attribute_names
        .iter()
        .map(|name| {
            let section = &config.attributes[name];
            let mut seed = ColumnSeed::new(name.clone(), section.measure()?, section.base_mode()?);
            seed.extra_domain = section
                .domain_extra
                .iter()
                .map(|v| apply_rules(v, &config.preprocess))
                .collect();
            Ok(seed)
        })
        .collect::<Result<_>>()?;

    let mut table = RecordTable::from_columns(&seeds, &dataset.columns, dataset.sources.as_deref())?;
    let n = table.num_records();
    let model = config.distortion()?;
    let mut ep = config.ep_prior(n)?;
    if model == DistortionModel::Blink {
        let (specs, blink_ep) = blink_variant_overrides(&table.attribute_specs, n)?;
        table.attribute_specs = specs;
        if config.ep.is_none() {
            ep = blink_ep;
        }
    }

    log::info!(
        "fitting {} records, {} attributes, {} source(s), {} chain(s)",
        n,
        table.num_attributes(),
        table.num_sources,
        chains
    );
    let ctx = FitContext::new(table, model)?;
    let base_run = RunConfig {
        iterations: config.run.iterations,
        burn_in: config.run.burn_in,
        thin: config.run.thin,
        seed: config.run.seed,
        distortion_model: model,
        monitor: config.run.monitor.clone(),
    };
    base_run.validate()?;

    let output_root = resolve_relative(config_path, &config.output);
    std::fs::create_dir_all(&output_root)
        .with_context(|| format!("cannot create {}", output_root.display()))?;

    let thread_cap = thread_cap();
    let mut results: Vec<Result<()>> = Vec::with_capacity(chains);
    for batch in (0..chains).collect::<Vec<_>>().chunks(thread_cap) {
        let batch_results: Vec<Result<()>> = std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .iter()
                .map(|&chain| {
                    let ctx = &ctx;
                    let ep = ep.clone();
                    let run = RunConfig {
                        seed: base_run.seed.wrapping_add(chain as u64),
                        ..base_run.clone()
                    };
                    let dir = if chains == 1 {
                        output_root.clone()
                    } else {
                        output_root.join(format!("chain-{chain}"))
                    };
                    let hash = config_hash.clone();
                    scope.spawn(move || run_one_chain(ctx, &ep, &run, &dir, &hash, start))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("no panics")).collect()
        });
        results.extend(batch_results);
    }
    for result in results {
        result?;
    }
    Ok(())
}

fn thread_cap() -> usize {
    match std::env::var("RESOLVER_THREADS") {
        Ok(v) => v.parse::<usize>().unwrap_or(1).max(1),
        Err(_) => std::thread::available_parallelism().map_or(1, |n| n.get()),
    }
}

fn run_one_chain(
    ctx: &FitContext,
    ep: &EpPrior,
    run: &RunConfig,
    dir: &Path,
    config_hash: &str,
    start: Instant,
) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let links_path = dir.join("links.csv");
    let scalars_path = dir.join("scalars.csv");
    let mut links = create_writer(&links_path)?;
    let mut scalars = create_writer(&scalars_path)?;
    writeln!(links, "sample_index,record_id,entity_label")?;

    let mut nan_scalar: Option<String> = None;
    let result = run_chain_with(ctx, ep, run, |view| {
        if view.index == 0 {
            writeln!(scalars, "sample_index,{}", view.scalar_names.join(","))?;
        }
        if let Some(pos) = view.scalars.iter().position(|v| v.is_nan()) {
            nan_scalar = Some(view.scalar_names[pos].clone());
            return Err(resolver_core::Error::invalid_input("NaN in monitored scalar"));
        }
        let lambda: Vec<u32> = view.state.lambda.iter().map(|&l| l as u32).collect();
        for (record, label) in canonicalize(&lambda).iter().enumerate() {
            writeln!(links, "{},{},{}", view.index, record, label)?;
        }
        let row: Vec<String> = view.scalars.iter().map(|v| format!("{v}")).collect();
        writeln!(scalars, "{},{}", view.index, row.join(","))?;
        Ok(())
    });
    if let Some(name) = nan_scalar {
        return Err(anyhow!(NumericFailure(format!(
            "monitored scalar `{name}` became NaN"
        ))));
    }
    result?;
    links.flush()?;
    scalars.flush()?;
    drop(links);
    drop(scalars);
    maybe_gzip(&links_path)?;
    maybe_gzip(&scalars_path)?;

    let manifest = serde_json::json!({
        "seed": run.seed,
        "config_sha256": config_hash,
        "version": env!("CARGO_PKG_VERSION"),
        "wall_time_secs": start.elapsed().as_secs_f64(),
        "iterations": run.iterations,
        "burn_in": run.burn_in,
        "thin": run.thin,
        "num_samples": run.num_samples(),
        "records": ctx.num_records(),
        "attributes": ctx.table.attribute_specs.iter().map(|s| s.name.clone()).collect::<Vec<_>>(),
        "sources": ctx.table.num_sources,
        "distortion_model": match ctx.model {
            DistortionModel::Ours => "ours",
            DistortionModel::Blink => "blink",
        },
        "ep_regime": regime_name(&ep.regime),
    });
    let mut manifest_file = create_writer(&dir.join("run.json"))?;
    writeln!(manifest_file, "{}", serde_json::to_string_pretty(&manifest)?)?;
    manifest_file.flush()?;
    Ok(())
}

fn regime_name(regime: &EpRegime) -> &'static str {
    match regime {
        EpRegime::PitmanYor { .. } => "py",
        EpRegime::Ewens { .. } => "ewens",
        EpRegime::GenCoupon { .. } => "gen-coupon",
        EpRegime::CouponFixed => "coupon-fixed",
    }
}

/// Paths in a config file are taken relative to the config's directory.
fn resolve_relative(config_path: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        config_path
            .parent()
            .unwrap_or_else(|| Path::new("."))
            .join(path)
    }
}
