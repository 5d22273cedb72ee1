//! CSV tables, time-series files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use spinlev_core::analysis::export_timeseries;
use spinlev_core::mechanics::TimeSeries;

use crate::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // Shortest representation that round-trips; stable across runs.
            Cell::Num(v) => format!("{v:e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

/// A CSV table written as `<name>.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.header.iter().position(|h| h == name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf, CliError> {
        let path = dir.join(format!("{}.csv", self.name));
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_err(&path, e))?;
        w.write_record(&self.header).map_err(|e| csv_err(&path, e))?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(|e| csv_err(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}

fn csv_err(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e.to_string()))
}

/// Everything a subcommand produces.
#[derive(Debug, Default)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    /// `(file name, script text)`
    pub scripts: Vec<(String, String)>,
    /// `(file stem, series, parameters)`, written as CSV plus sidecar.
    pub series: Vec<(String, TimeSeries, serde_json::Value)>,
    pub summary: serde_json::Value,
}

impl RunOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputFile {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub args: Vec<String>,
    pub scenario: Option<String>,
    pub seed: Option<u64>,
    pub config_sha256: String,
    pub config: String,
    pub outputs: Vec<OutputFile>,
    pub summary: serde_json::Value,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes all outputs, then `manifest.json` listing their hashes.
pub fn write_run(
    dir: &Path,
    command: &str,
    args: &[String],
    scenario: Option<&str>,
    seed: Option<u64>,
    config_text: &str,
    out: &RunOutput,
) -> Result<Manifest, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut files: Vec<PathBuf> = Vec::new();
    for t in &out.tables {
        files.push(t.write(dir)?);
    }
    for (stem, ts, params) in &out.series {
        let path = dir.join(format!("{stem}.csv"));
        export_timeseries(&path, ts, params.clone())?;
        files.push(path.clone());
        files.push(spinlev_core::analysis::sidecar_path(&path));
    }
    for (name, text) in &out.scripts {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        files.push(path);
    }
    let mut outputs = Vec::new();
    for path in files {
        let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        outputs.push(OutputFile {
            file: path.file_name().unwrap().to_string_lossy().into_owned(),
            sha256: sha256_hex(&bytes),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        args: args.to_vec(),
        scenario: scenario.map(str::to_string),
        seed,
        config_sha256: sha256_hex(config_text.as_bytes()),
        config: config_text.to_string(),
        outputs,
        summary: out.summary.clone(),
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(&path, text + "\n").map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}
