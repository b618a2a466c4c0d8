//! CSV ingestion for matrices, vectors, daily-returns panels and labeled
//! feature tables. Lines starting with '#' are comments, so files produced
//! by this tool (which carry a provenance header) can be read back directly.

use std::path::Path;

use funcest::classify::Label;
use funcest::numerics::DenseMatrix;
use funcest::process::SampleMatrix;

use crate::CliError;

fn read_lines(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(text
        .lines()
        .map(|l| l.trim())
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| l.to_string())
        .collect())
}

fn parse_field(path: &Path, line_no: usize, field: &str) -> Result<f64, CliError> {
    field.trim().parse::<f64>().map_err(|_| {
        CliError::Validation(format!(
            "{}: line {}: {:?} is not a number",
            path.display(),
            line_no,
            field
        ))
    })
}

/// Numeric matrix: one row per line, comma-separated.
pub fn read_matrix(path: &Path) -> Result<DenseMatrix, CliError> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(CliError::Validation(format!("{}: no data rows", path.display())));
    }
    let mut rows = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        let row: Vec<f64> = line
            .split(',')
            .map(|f| parse_field(path, i + 1, f))
            .collect::<Result<_, _>>()?;
        if let Some(first) = rows.first() {
            let first: &Vec<f64> = first;
            if first.len() != row.len() {
                return Err(CliError::Validation(format!(
                    "{}: line {} has {} fields, expected {}",
                    path.display(),
                    i + 1,
                    row.len(),
                    first.len()
                )));
            }
        }
        rows.push(row);
    }
    Ok(DenseMatrix::from_rows(&rows))
}

/// Numeric vector: one value per line, or a single comma-separated line.
pub fn read_vector(path: &Path) -> Result<Vec<f64>, CliError> {
    let lines = read_lines(path)?;
    if lines.is_empty() {
        return Err(CliError::Validation(format!("{}: no data", path.display())));
    }
    if lines.len() == 1 && lines[0].contains(',') {
        return lines[0].split(',').map(|f| parse_field(path, 1, f)).collect();
    }
    lines
        .iter()
        .enumerate()
        .map(|(i, l)| parse_field(path, i + 1, l))
        .collect()
}

/// Daily returns: header `date,asset1,...`, then one row per day whose first
/// field (the date) is kept only for ordering and otherwise ignored.
pub fn read_returns(path: &Path) -> Result<(Vec<String>, SampleMatrix), CliError> {
    let lines = read_lines(path)?;
    if lines.len() < 2 {
        return Err(CliError::Validation(format!(
            "{}: need a header and at least one data row",
            path.display()
        )));
    }
    let header: Vec<&str> = lines[0].split(',').collect();
    if header.len() < 2 {
        return Err(CliError::Validation(format!(
            "{}: header must be date,asset1,...",
            path.display()
        )));
    }
    let assets: Vec<String> = header[1..].iter().map(|s| s.trim().to_string()).collect();
    let p = assets.len();
    let mut rows = Vec::with_capacity(lines.len() - 1);
    for (i, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p + 1 {
            return Err(CliError::Validation(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                i + 2,
                fields.len(),
                p + 1
            )));
        }
        let row: Vec<f64> = fields[1..]
            .iter()
            .map(|f| parse_field(path, i + 2, f))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((assets, SampleMatrix::new(DenseMatrix::from_rows(&rows))))
}

/// Labeled feature table: header `label,f1,...`, label values P or S.
pub fn read_labeled(path: &Path) -> Result<(Vec<Label>, SampleMatrix), CliError> {
    let lines = read_lines(path)?;
    if lines.len() < 2 {
        return Err(CliError::Validation(format!(
            "{}: need a header and at least one data row",
            path.display()
        )));
    }
    let p = lines[0].split(',').count() - 1;
    if p == 0 {
        return Err(CliError::Validation(format!(
            "{}: header must be label,f1,...",
            path.display()
        )));
    }
    let mut labels = Vec::new();
    let mut rows = Vec::new();
    for (i, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != p + 1 {
            return Err(CliError::Validation(format!(
                "{}: line {} has {} fields, expected {}",
                path.display(),
                i + 2,
                fields.len(),
                p + 1
            )));
        }
        let label = match fields[0].trim() {
            "P" | "p" => Label::P,
            "S" | "s" => Label::S,
            other => {
                return Err(CliError::Validation(format!(
                    "{}: line {}: label must be P or S, got {:?}",
                    path.display(),
                    i + 2,
                    other
                )))
            }
        };
        labels.push(label);
        let row: Vec<f64> = fields[1..]
            .iter()
            .map(|f| parse_field(path, i + 2, f))
            .collect::<Result<_, _>>()?;
        rows.push(row);
    }
    Ok((labels, SampleMatrix::new(DenseMatrix::from_rows(&rows))))
}
