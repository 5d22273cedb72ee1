//! Two-column CSV time series with a JSON sidecar holding the sample rate, seed and
//! free-form parameters.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::io_error;
use crate::error::{Error, Result};
use crate::mechanics::TimeSeries;

/// Relative tolerance on sample spacing.
const SPACING_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSeriesFormat {
    pub delimiter: u8,
    pub has_header: bool,
    pub time_column: usize,
    pub value_column: usize,
}

impl Default for TimeSeriesFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            has_header: true,
            time_column: 0,
            value_column: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesMeta {
    pub sample_rate: f64,
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: serde_json::Value,
}

/// `<dir>/<stem>.meta.json` next to `path`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.meta.json"))
}

pub fn export_timeseries(path: &Path, ts: &TimeSeries, params: serde_json::Value) -> Result<()> {
    let file = File::create(path).map_err(|e| io_error(path, e))?;
    let mut w = BufWriter::new(file);
    let write = |w: &mut BufWriter<File>| -> std::io::Result<()> {
        writeln!(w, "t,z")?;
        for (i, z) in ts.samples.iter().enumerate() {
            // `{}` prints the shortest string that parses back to the same f64.
            writeln!(w, "{},{}", ts.time(i), z)?;
        }
        w.flush()
    };
    write(&mut w).map_err(|e| io_error(path, e))?;
    let meta = TimeSeriesMeta {
        sample_rate: ts.sample_rate,
        seed: ts.seed,
        params,
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&meta).expect("metadata serializes");
    std::fs::write(&side, text).map_err(|e| io_error(&side, e))
}

/// Reads a series, taking the sample rate from the sidecar when present and from
/// the time column otherwise. Rows are numbered as file lines (header = line 1).
pub fn import_timeseries(path: &Path, format: &TimeSeriesFormat) -> Result<TimeSeries> {
    let file = File::open(path).map_err(|e| io_error(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(format.has_header)
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(file));
    let first_line = if format.has_header { 2 } else { 1 };

    let mut times = Vec::new();
    let mut values = Vec::new();
    for (k, record) in reader.records().enumerate() {
        let row = first_line + k;
        let record = record.map_err(|e| Error::Parse { row, msg: e.to_string() })?;
        let field = |col: usize, name: &str| -> Result<f64> {
            let raw = record.get(col).ok_or_else(|| Error::Parse {
                row,
                msg: format!("missing {name} column {col}"),
            })?;
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row,
                msg: format!("cannot parse {name} value '{raw}'"),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row,
                    msg: format!("non-finite {name} value '{raw}'"),
                });
            }
            Ok(v)
        };
        times.push(field(format.time_column, "time")?);
        values.push(field(format.value_column, "value")?);
    }
    if values.len() < 2 {
        return Err(Error::TooShort(format!(
            "{} holds {} data rows, need at least 2",
            path.display(),
            values.len()
        )));
    }

    let side = sidecar_path(path);
    let meta: Option<TimeSeriesMeta> = if side.exists() {
        let text = std::fs::read_to_string(&side).map_err(|e| io_error(&side, e))?;
        Some(serde_json::from_str(&text).map_err(|e| Error::Parse {
            row: e.line(),
            msg: format!("{}: {e}", side.display()),
        })?)
    } else {
        None
    };
    let sample_rate = match &meta {
        Some(m) => m.sample_rate,
        None => 1.0 / (times[1] - times[0]),
    };
    let expected = 1.0 / sample_rate;
    for (k, pair) in times.windows(2).enumerate() {
        let dt = pair[1] - pair[0];
        if !((dt - expected).abs() <= SPACING_TOL * expected) {
            return Err(Error::NonuniformSampling {
                row: first_line + k + 1,
                dt,
                expected,
            });
        }
    }
    TimeSeries::new(sample_rate, values, meta.and_then(|m| m.seed))
}
