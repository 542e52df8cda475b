//! File formats: dataset/truth CSVs, chain outputs and the run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};

/// A dataset read from CSV: attribute columns in header order plus optional
/// source ids.
#[derive(Debug)]
pub struct Dataset {
    pub attribute_names: Vec<String>,
    /// One column per attribute, aligned with `attribute_names`.
    pub columns: Vec<Vec<String>>,
    /// Dense source indices, when a `source` column is present.
    pub sources: Option<Vec<usize>>,
}

/// Reads a dataset CSV. A column named `source` carries string source ids
/// (mapped to dense indices in order of first appearance); all other columns
/// are attributes. Empty cells are missing values and rejected.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot read dataset {}", path.display()))?;
    let headers: Vec<String> = reader
        .headers()
        .context("dataset has no header row")?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let source_col = headers.iter().position(|h| h == "source");
    let attribute_names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| Some(i) != source_col)
        .map(|(_, h)| h.clone())
        .collect();
    if attribute_names.is_empty() {
        bail!("dataset {} has no attribute columns", path.display());
    }

    let mut columns: Vec<Vec<String>> = vec![Vec::new(); attribute_names.len()];
    let mut source_ids: Vec<String> = Vec::new();
    for (row_idx, row) in reader.records().enumerate() {
        let row = row.with_context(|| format!("row {}", row_idx + 1))?;
        if row.len() != headers.len() {
            bail!(
                "row {} has {} fields, expected {}",
                row_idx + 1,
                row.len(),
                headers.len()
            );
        }
        let mut attr_idx = 0;
        for (col_idx, cell) in row.iter().enumerate() {
            if Some(col_idx) == source_col {
                source_ids.push(cell.to_string());
                continue;
            }
            if cell.is_empty() {
                bail!(
                    "missing value at row {} column `{}`",
                    row_idx + 1,
                    headers[col_idx]
                );
            }
            columns[attr_idx].push(cell.to_string());
            attr_idx += 1;
        }
    }
    if columns[0].is_empty() {
        bail!("dataset {} has no records", path.display());
    }

    let sources = if source_col.is_some() {
        let mut dense: BTreeMap<String, usize> = BTreeMap::new();
        let mut next = 0usize;
        let assigned: Vec<usize> = source_ids
            .iter()
            .map(|id| {
                *dense.entry(id.clone()).or_insert_with(|| {
                    let v = next;
                    next += 1;
                    v
                })
            })
            .collect();
        Some(assigned)
    } else {
        None
    };

    Ok(Dataset {
        attribute_names,
        columns,
        sources,
    })
}

/// Reads a truth CSV with columns `record_id,entity_id`, returning entity
/// labels indexed by record id.
pub fn read_truth(path: &Path, num_records: usize) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("cannot read truth file {}", path.display()))?;
    let mut labels = vec![usize::MAX; num_records];
    let mut seen = vec![false; num_records];
    for row in reader.deserialize() {
        let (record_id, entity_id): (usize, usize) = row.context("truth row")?;
        if record_id >= num_records {
            bail!("truth record id {record_id} out of range (N = {num_records})");
        }
        labels[record_id] = entity_id;
        seen[record_id] = true;
    }
    let missing: Vec<usize> = (0..num_records).filter(|&i| !seen[i]).collect();
    if !missing.is_empty() {
        bail!(
            "truth file is missing record ids: {:?}{}",
            &missing[..missing.len().min(10)],
            if missing.len() > 10 { " ..." } else { "" }
        );
    }
    Ok(labels)
}

/// Relabels a linkage sample so each cluster is named by its smallest
/// record id, making output files stable across label permutations.
pub fn canonicalize(lambda: &[u32]) -> Vec<u32> {
    let mut smallest: BTreeMap<u32, u32> = BTreeMap::new();
    for (i, &label) in lambda.iter().enumerate() {
        smallest.entry(label).or_insert(i as u32);
    }
    lambda.iter().map(|label| smallest[label]).collect()
}

pub fn create_writer(path: &Path) -> Result<BufWriter<File>> {
    let file =
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(file))
}

const GZIP_THRESHOLD: u64 = 100 * 1024 * 1024;

/// Gzips `path` in place (appending `.gz`) when it exceeds 100 MB.
pub fn maybe_gzip(path: &Path) -> Result<()> {
    let size = std::fs::metadata(path)?.len();
    if size <= GZIP_THRESHOLD {
        return Ok(());
    }
    let gz_path = path.with_extension(format!(
        "{}.gz",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut input = File::open(path)?;
    let output = File::create(&gz_path)?;
    let mut encoder = flate2::write::GzEncoder::new(output, flate2::Compression::default());
    std::io::copy(&mut input, &mut encoder)?;
    encoder.finish()?;
    std::fs::remove_file(path)?;
    log::info!("compressed {} ({} bytes)", gz_path.display(), size);
    Ok(())
}

/// Writes a list of rows as CSV with the given header.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = create_writer(path.as_ref())?;
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_labels_use_smallest_member() {
        assert_eq!(canonicalize(&[7, 7, 3, 7, 3]), vec![0, 0, 2, 0, 2]);
        assert_eq!(canonicalize(&[5, 4, 3]), vec![0, 1, 2]);
    }
}
