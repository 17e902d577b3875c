//! Whitespace-delimited point files: one point per line, one column per
//! coordinate. Blank lines are skipped. Center files use the same format.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::dataset::{CenterSet, Dataset};
use crate::error::{Error, Result};

/// Parsed rows of a point file.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRows {
    pub values: Vec<f64>,
    pub dim: usize,
    /// Trailing integer labels, when parsed with `labeled = true`.
    pub labels: Option<Vec<i64>>,
}

/// Parse point-file text. With `labeled`, the last column must be an integer
/// label and is split off from the coordinates.
pub fn parse_rows(text: &str, labeled: bool) -> Result<PointRows> {
    let mut values = Vec::new();
    let mut labels = labeled.then(Vec::new);
    let mut dim: Option<usize> = None;
    let mut last_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let mut tokens: Vec<&str> = raw.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if let Some(labels) = labels.as_mut() {
            let tok = tokens.pop().expect("non-empty");
            let label = tok.parse::<i64>().map_err(|_| Error::Parse {
                line,
                message: format!("expected an integer label, got '{tok}'"),
            })?;
            labels.push(label);
        }
        match dim {
            None if tokens.is_empty() => {
                return Err(Error::Parse {
                    line,
                    message: "no coordinates".into(),
                })
            }
            None => dim = Some(tokens.len()),
            Some(d) if d != tokens.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {d} values, found {}", tokens.len()),
                })
            }
            Some(_) => {}
        }
        for tok in tokens {
            let v = tok.parse::<f64>().map_err(|_| Error::Parse {
                line,
                message: format!("non-numeric token '{tok}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line,
                    message: format!("non-finite value '{tok}'"),
                });
            }
            values.push(v);
        }
    }
    match dim {
        Some(dim) => Ok(PointRows {
            values,
            dim,
            labels,
        }),
        None => Err(Error::Parse {
            line: last_line.max(1),
            message: "no data rows".into(),
        }),
    }
}

pub fn parse_points(text: &str, labeled: bool) -> Result<Dataset> {
    let rows = parse_rows(text, labeled)?;
    Dataset::from_flat(rows.values, rows.dim)
}

pub fn load_points(path: impl AsRef<Path>, labeled: bool) -> Result<Dataset> {
    parse_points(&fs::read_to_string(path)?, labeled)
}

/// Ground-truth centers, one per line.
pub fn load_truth(path: impl AsRef<Path>) -> Result<CenterSet> {
    let rows = parse_rows(&fs::read_to_string(path)?, false)?;
    CenterSet::from_flat(rows.values, rows.dim)
}

/// Load centers saved with [`save_centers`].
pub fn load_centers(path: impl AsRef<Path>) -> Result<CenterSet> {
    load_truth(path)
}

/// Write rows with shortest round-trip formatting, so loading them back
/// reproduces every coordinate exactly.
pub fn write_rows<'a, W: Write>(
    mut out: W,
    rows: impl Iterator<Item = &'a [f64]>,
    labels: Option<&[usize]>,
) -> Result<()> {
    for (i, row) in rows.enumerate() {
        let mut line = row
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(" ");
        if let Some(labels) = labels {
            line.push(' ');
            line.push_str(&labels[i].to_string());
        }
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

pub fn save_points(path: impl AsRef<Path>, data: &Dataset) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    write_rows(file, data.points(), None)
}

pub fn save_labeled_points(path: impl AsRef<Path>, data: &Dataset, labels: &[usize]) -> Result<()> {
    if labels.len() != data.len() {
        return Err(Error::invalid("label count does not match point count"));
    }
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    write_rows(file, data.points(), Some(labels))
}

pub fn save_centers(path: impl AsRef<Path>, centers: &CenterSet) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    write_rows(file, centers.centers(), None)
}
