//! `resolver evaluate`: pairwise metrics of stored linkage samples against
//! ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use anyhow::{bail, Context, Result};

use resolver_core::evaluation::{pairwise_metrics, relative_entity_error, summarize};

use crate::io::write_csv;

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>> {
    let file = std::fs::File::open(path)
        .with_context(|| format!("cannot read {}", path.display()))?;
    if path.extension().and_then(|e| e.to_str()) == Some("gz") {
        Ok(Box::new(flate2::read::GzDecoder::new(file)))
    } else {
        Ok(Box::new(file))
    }
}

/// Reads a links CSV into per-sample linkage vectors.
fn read_links(path: &Path) -> Result<BTreeMap<u64, Vec<(usize, usize)>>> {
    let reader = BufReader::new(open_maybe_gz(path)?);
    let mut lines = reader.lines();
    let header = lines.next().context("empty links file")??;
    if header.trim() != "sample_index,record_id,entity_label" {
        bail!("unexpected links header `{header}`");
    }
    let mut samples: BTreeMap<u64, Vec<(usize, usize)>> = BTreeMap::new();
    for (idx, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let err = || format!("malformed links row {}", idx + 2);
        let sample: u64 = parts.next().context(err())?.parse().context(err())?;
        let record: usize = parts.next().context(err())?.parse().context(err())?;
        let label: usize = parts.next().context(err())?.parse().context(err())?;
        samples.entry(sample).or_default().push((record, label));
    }
    if samples.is_empty() {
        bail!("links file {} holds no samples", path.display());
    }
    Ok(samples)
}

pub fn run(links_path: &Path, truth_path: &Path, output: &Path) -> Result<()> {
    let samples = read_links(links_path)?;
    let truth = crate::io::read_truth(truth_path, expected_records(&samples)?)?;
    let n = truth.len();
    let true_entities = truth.iter().collect::<BTreeSet<_>>().len();

    let mut metric_rows = Vec::new();
    let mut precisions = Vec::new();
    let mut recalls = Vec::new();
    let mut f1s = Vec::new();
    let mut entity_counts = Vec::new();
    for (&sample_idx, rows) in &samples {
        let mut lambda = vec![usize::MAX; n];
        let mut seen = vec![false; n];
        for &(record, label) in rows {
            if record >= n || seen[record] {
                bail!("sample {sample_idx}: bad or duplicate record id {record}");
            }
            lambda[record] = label;
            seen[record] = true;
        }
        let missing: Vec<usize> = (0..n).filter(|&i| !seen[i]).collect();
        if !missing.is_empty() {
            bail!(
                "sample {sample_idx} is missing record ids: {:?}{}",
                &missing[..missing.len().min(10)],
                if missing.len() > 10 { " ..." } else { "" }
            );
        }
        let m = pairwise_metrics(&lambda, &truth)?;
        precisions.push(m.precision);
        recalls.push(m.recall);
        f1s.push(m.f1);
        entity_counts.push(m.num_entities);
        let rel = relative_entity_error(&[m.num_entities], true_entities)[0];
        metric_rows.push(vec![
            sample_idx.to_string(),
            format!("{}", m.precision),
            format!("{}", m.recall),
            format!("{}", m.f1),
            m.num_entities.to_string(),
            format!("{rel}"),
        ]);
    }

    std::fs::create_dir_all(output)
        .with_context(|| format!("cannot create {}", output.display()))?;
    write_csv(
        output.join("metrics.csv"),
        &[
            "sample_index",
            "precision",
            "recall",
            "f1",
            "num_entities",
            "rel_entity_error",
        ],
        &metric_rows,
    )?;

    let mut summary_rows = Vec::new();
    for (name, values) in [
        ("precision", &precisions),
        ("recall", &recalls),
        ("f1", &f1s),
    ] {
        let s = summarize(values)?;
        summary_rows.push(vec![
            name.to_string(),
            format!("{}", s.median),
            format!("{}", s.lower),
            format!("{}", s.upper),
        ]);
    }
    let counts: Vec<f64> = entity_counts.iter().map(|&e| e as f64).collect();
    let s = summarize(&counts)?;
    summary_rows.push(vec![
        "num_entities".to_string(),
        format!("{}", s.median),
        format!("{}", s.lower),
        format!("{}", s.upper),
    ]);
    write_csv(
        output.join("summary.csv"),
        &["metric", "median", "ci_lower", "ci_upper"],
        &summary_rows,
    )?;
    log::info!(
        "evaluated {} samples against {} records ({} true entities)",
        samples.len(),
        n,
        true_entities
    );
    Ok(())
}

fn expected_records(samples: &BTreeMap<u64, Vec<(usize, usize)>>) -> Result<usize> {
    let first = samples.values().next().context("no samples")?;
    Ok(first.len())
}
