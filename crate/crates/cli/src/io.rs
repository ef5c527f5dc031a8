//! CSV readers and writers for labelled matrices.
//!
//! Every table has a header row of column names and a first column of row
//! names; the top-left cell is ignored.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use grdmf::{AssociationDataset, DenseMatrix, FeatureProfile, SimilarityMatrix};

/// A parsed labelled table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub row_names: Vec<String>,
    pub col_names: Vec<String>,
    pub body: DenseMatrix,
}

#[derive(Clone, Copy, PartialEq)]
enum Cells {
    Binary,
    Real,
}

fn read_table(path: &Path, cells: Cells) -> Result<Table> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut records = reader.records();
    let header = match records.next() {
        Some(r) => r.with_context(|| format!("{}: reading header", path.display()))?,
        None => bail!("{}: empty file", path.display()),
    };
    let col_names: Vec<String> = header.iter().skip(1).map(String::from).collect();
    if col_names.is_empty() {
        bail!("{}: header has no columns", path.display());
    }
    let width = header.len();

    let mut row_names = Vec::new();
    let mut data = Vec::new();
    for record in records {
        let record = record.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != width {
            bail!(
                "{} line {line}: expected {width} fields, found {}",
                path.display(),
                record.len()
            );
        }
        let name = record[0].to_string();
        for (c, raw) in record.iter().skip(1).enumerate() {
            let value: f64 = raw.parse().map_err(|_| {
                anyhow::anyhow!(
                    "{} line {line}: cell ({name}, {}) = {raw:?} is not a number",
                    path.display(),
                    col_names[c]
                )
            })?;
            if cells == Cells::Binary && value != 0.0 && value != 1.0 {
                bail!(
                    "{} line {line}: cell ({name}, {}) = {raw:?} is not 0 or 1",
                    path.display(),
                    col_names[c]
                );
            }
            if !value.is_finite() {
                bail!(
                    "{} line {line}: cell ({name}, {}) is not finite",
                    path.display(),
                    col_names[c]
                );
            }
            data.push(value);
        }
        row_names.push(name);
    }
    if row_names.is_empty() {
        bail!("{}: no data rows", path.display());
    }
    let body = DenseMatrix::new(row_names.len(), col_names.len(), data)?;
    Ok(Table {
        row_names,
        col_names,
        body,
    })
}

/// Drugs along rows, viruses along columns, binary body.
pub fn load_association_csv(path: &Path) -> Result<AssociationDataset> {
    let t = read_table(path, Cells::Binary)?;
    let dataset = AssociationDataset::new(t.row_names, t.col_names, t.body)
        .with_context(|| format!("{}: invalid association matrix", path.display()))?;
    let (m, n) = dataset.shape();
    let known = dataset.y().as_slice().iter().filter(|&&v| v == 1.0).count();
    log::info!(
        "{}: {m} drugs x {n} viruses, {known} known associations",
        path.display()
    );
    Ok(dataset)
}

/// Entities along rows, features along columns, binary body.
pub fn load_profile_csv(path: &Path) -> Result<FeatureProfile> {
    let t = read_table(path, Cells::Binary)?;
    let profile = FeatureProfile::new(t.row_names, t.col_names, t.body)
        .with_context(|| format!("{}: invalid profile", path.display()))?;
    let empty = profile.zero_rows();
    if !empty.is_empty() {
        log::warn!(
            "{}: {} entities have no features",
            path.display(),
            empty.len()
        );
    }
    Ok(profile)
}

/// Square real table whose header and first column list the same entities.
///
/// Columns are reordered to the row order; the result is symmetrized.
pub fn load_similarity_csv(path: &Path) -> Result<SimilarityMatrix> {
    let t = read_table(path, Cells::Real)?;
    let n = t.row_names.len();
    if t.col_names.len() != n {
        bail!(
            "{}: similarity must be square, got {n} rows and {} columns",
            path.display(),
            t.col_names.len()
        );
    }
    let perm: Vec<usize> = t
        .row_names
        .iter()
        .map(|r| {
            t.col_names.iter().position(|c| c == r).with_context(|| {
                format!("{}: row entity {r:?} missing from header", path.display())
            })
        })
        .collect::<Result<_>>()?;
    let values = DenseMatrix::from_fn(n, n, |i, j| t.body[(i, perm[j])]);
    SimilarityMatrix::from_supplied(t.row_names, values)
        .with_context(|| format!("{}: invalid similarity", path.display()))
}

/// Writes a labelled matrix with full precision.
pub fn write_matrix_csv(
    path: &Path,
    corner: &str,
    row_names: &[String],
    col_names: &[String],
    body: &DenseMatrix,
) -> Result<()> {
    let mut w =
        csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(std::iter::once(corner).chain(col_names.iter().map(String::as_str)))?;
    for (i, name) in row_names.iter().enumerate() {
        let mut record = vec![name.clone()];
        record.extend(body.row(i).iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_association_csv(path: &Path, dataset: &AssociationDataset) -> Result<()> {
    write_matrix_csv(
        path,
        "drug",
        dataset.drugs(),
        dataset.viruses(),
        dataset.y(),
    )
}

/// Two-column `iteration,loss` trace; iteration 0 is the initial value.
pub fn write_trace_csv(path: &Path, loss: &[f64]) -> Result<()> {
    let mut f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    writeln!(f, "iteration,loss")?;
    for (k, l) in loss.iter().enumerate() {
        writeln!(f, "{k},{l}")?;
    }
    Ok(())
}
