//! Result tables (one row per dataset and algorithm variant) and per-trial
//! record files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::experiment::TrialRecord;
use crate::error::{Error, Result};

/// `%.6g`-style formatting: six significant digits, trailing zeros trimmed.
pub fn fmt_sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-4..6).contains(&exp) {
        trim(format!("{:.*}", (5 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mant.to_string()))
    }
}

/// Round to six significant digits.
pub fn round_sig6(x: f64) -> f64 {
    fmt_sig6(x).parse().unwrap_or(x)
}

fn ser_f64<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(round_sig6(*x))
    } else {
        s.serialize_none()
    }
}

fn de_f64<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Aggregated statistics for one (dataset, algorithm variant).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub dataset: String,
    pub algorithm: String,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub sr_percent: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub amr: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub rho_mean: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub rho_std: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub sse_mean: f64,
    #[serde(serialize_with = "ser_f64", deserialize_with = "de_f64")]
    pub time_mean_s: f64,
    /// Successful trials (failed ones are excluded from every statistic).
    pub trials: usize,
}

impl ResultRow {
    /// Copy with every float rounded the way it is written to disk.
    pub fn rounded(&self) -> Self {
        Self {
            sr_percent: round_sig6(self.sr_percent),
            amr: round_sig6(self.amr),
            rho_mean: round_sig6(self.rho_mean),
            rho_std: round_sig6(self.rho_std),
            sse_mean: round_sig6(self.sse_mean),
            time_mean_s: round_sig6(self.time_mean_s),
            ..self.clone()
        }
    }
}

pub const CSV_HEADER: &str =
    "dataset,algorithm,sr_percent,amr,rho_mean,rho_std,sse_mean,time_mean_s,trials";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Csv,
    Json,
}

impl std::str::FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            other => Err(Error::invalid(format!("unknown output format '{other}'"))),
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            csv_field(&r.dataset),
            csv_field(&r.algorithm),
            fmt_sig6(r.sr_percent),
            fmt_sig6(r.amr),
            fmt_sig6(r.rho_mean),
            fmt_sig6(r.rho_std),
            fmt_sig6(r.sse_mean),
            fmt_sig6(r.time_mean_s),
            r.trials
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_json<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, rows)?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn read_json_table(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Parse a CSV table written by [`write_csv`].
pub fn read_csv_table(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let f = |i: usize| -> Result<f64> {
            rec[i]
                .parse()
                .map_err(|_| Error::invalid(format!("bad number '{}'", &rec[i])))
        };
        rows.push(ResultRow {
            dataset: rec[0].to_string(),
            algorithm: rec[1].to_string(),
            sr_percent: f(2)?,
            amr: f(3)?,
            rho_mean: f(4)?,
            rho_std: f(5)?,
            sse_mean: f(6)?,
            time_mean_s: f(7)?,
            trials: rec[8]
                .parse()
                .map_err(|_| Error::invalid("bad trial count"))?,
        });
    }
    Ok(rows)
}

/// Write the table to `path` in the given format.
pub fn emit_table(rows: &[ResultRow], format: TableFormat, path: impl AsRef<Path>) -> Result<()> {
    if rows.is_empty() {
        return Err(Error::invalid("refusing to write an empty result table"));
    }
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        TableFormat::Csv => write_csv(file, rows),
        TableFormat::Json => write_json(file, rows),
    }
}

/// Sibling path for per-trial records: `out.csv` -> `out.trials.csv`.
pub fn records_path(table_path: &Path, format: TableFormat) -> PathBuf {
    let stem = table_path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("results");
    let ext = match format {
        TableFormat::Csv => "csv",
        TableFormat::Json => "json",
    };
    table_path.with_file_name(format!("{stem}.trials.{ext}"))
}

/// Per-trial records at full precision. Wall time is not persisted, so
/// identical configurations give byte-identical files.
pub fn write_records(
    records: &[TrialRecord],
    format: TableFormat,
    path: impl AsRef<Path>,
) -> Result<()> {
    let file = std::io::BufWriter::new(fs::File::create(path)?);
    match format {
        TableFormat::Csv => {
            let mut w = csv::Writer::from_writer(file);
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        TableFormat::Json => {
            let mut file = file;
            serde_json::to_writer_pretty(&mut file, records)?;
            writeln!(file)?;
            file.flush()?;
        }
    }
    Ok(())
}

pub fn read_records(path: impl AsRef<Path>, format: TableFormat) -> Result<Vec<TrialRecord>> {
    match format {
        TableFormat::Csv => {
            let mut rdr = csv::Reader::from_path(path)?;
            Ok(rdr
                .deserialize()
                .collect::<std::result::Result<Vec<_>, _>>()?)
        }
        TableFormat::Json => Ok(serde_json::from_str(&fs::read_to_string(path)?)?),
    }
}
