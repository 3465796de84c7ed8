use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Serialize;
use serde_json::Value;

use rqdyn::scenarios::Series;

use crate::error::{CliError, CliResult};

/// Relative tolerance used by `--validate` when comparing summaries.
pub const VALIDATE_RTOL: f64 = 1e-9;
const VALIDATE_ATOL: f64 = 1e-12;

/// Everything a subcommand produces before anything touches the disk.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub config: Value,
    pub summary: Value,
    /// `(file name, contents)`; `summary.json` and `manifest.json` are added on write.
    pub files: Vec<(String, Vec<u8>)>,
    pub report: String,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    subcommand: &'a str,
    tool: &'static str,
    version: &'static str,
    config: &'a Value,
    output_dir: String,
    files: Vec<String>,
    wall_clock_seconds: f64,
}

/// Shortest decimal that parses back to the same double.
pub fn fmt_num(v: f64) -> String {
    format!("{v:?}")
}

pub fn series_csv(series: &Series) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&series.columns).map_err(csv_err)?;
    for row in &series.rows {
        w.write_record(row.iter().map(|v| fmt_num(*v))).map_err(csv_err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Input(format!("csv: {e}")))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Input(format!("csv: {e}"))
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Input(format!("{}: {e}", path.display()))
}

/// Writes the bundle files, `summary.json` and `manifest.json` into `dir`.
pub fn write_bundle(dir: &Path, subcommand: &str, bundle: &Bundle, elapsed: Duration) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, bytes: &[u8]| -> CliResult<()> {
        let path = dir.join(name);
        fs::write(&path, bytes).map_err(|e| io_err(&path, e))?;
        written.push(path);
        Ok(())
    };
    for (name, bytes) in &bundle.files {
        put(name, bytes)?;
    }
    put("summary.json", pretty(&bundle.summary).as_bytes())?;
    let mut files: Vec<String> = bundle.files.iter().map(|(n, _)| n.clone()).collect();
    files.push("summary.json".into());
    files.push("manifest.json".into());
    let manifest = Manifest {
        subcommand,
        tool: "rqdyn",
        version: env!("CARGO_PKG_VERSION"),
        config: &bundle.config,
        output_dir: dir.display().to_string(),
        files,
        wall_clock_seconds: elapsed.as_secs_f64(),
    };
    let manifest = serde_json::to_value(&manifest).expect("manifest serializes");
    put("manifest.json", pretty(&manifest).as_bytes())?;
    Ok(written)
}

pub fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Structural comparison with numeric leaves matched to [`VALIDATE_RTOL`].
pub fn compare_summaries(expected: &Value, actual: &Value) -> Result<(), String> {
    compare_at("$", expected, actual)
}

fn compare_at(path: &str, a: &Value, b: &Value) -> Result<(), String> {
    match (a, b) {
        (Value::Number(x), Value::Number(y)) => {
            let (x, y) = (x.as_f64().unwrap_or(f64::NAN), y.as_f64().unwrap_or(f64::NAN));
            if (x - y).abs() <= VALIDATE_RTOL * x.abs().max(y.abs()) + VALIDATE_ATOL {
                Ok(())
            } else {
                Err(format!("{path}: expected {x}, recomputed {y}"))
            }
        }
        (Value::Array(x), Value::Array(y)) => {
            if x.len() != y.len() {
                return Err(format!("{path}: length {} vs {}", x.len(), y.len()));
            }
            x.iter()
                .zip(y)
                .enumerate()
                .try_for_each(|(i, (p, q))| compare_at(&format!("{path}[{i}]"), p, q))
        }
        (Value::Object(x), Value::Object(y)) => {
            if let Some(k) = x.keys().find(|k| !y.contains_key(*k)).or_else(|| y.keys().find(|k| !x.contains_key(*k))) {
                return Err(format!("{path}.{k}: present in only one summary"));
            }
            x.iter().try_for_each(|(k, v)| compare_at(&format!("{path}.{k}"), v, &y[k]))
        }
        _ if a == b => Ok(()),
        _ => Err(format!("{path}: expected {a}, recomputed {b}")),
    }
}
