//! CSV and JSON export of a sweep.
//!
//! Files written by [`export`]:
//!
//! | file             | columns                             |
//! |------------------|-------------------------------------|
//! | `heatmap.csv`    | `N,L,t,mean_E,std_E,mu,n_runs`      |
//! | `runs.csv`       | `N,L,run,seed,t,E`                  |
//! | `thresholds.csv` | `N,L_bp,L_op,r_max,v_th`            |
//! | `manifest.json`  | config, crate version, incomplete cells |
//!
//! Floats are written as the shortest decimal that parses back to the same
//! `f64`. Undefined values (`std_E` of a single run, an unreached threshold)
//! are empty fields. Lines end in `\n`. The JSON format writes the same rows as
//! arrays of objects in `heatmap.json`, `runs.json` and `thresholds.json`.
//! [`write_thresholds`] also keeps the complete reports, variance curves and
//! rank scans included, in `threshold_reports.json`.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::aggregate::{aggregate, AggregateRow};
use crate::harness::config::ExperimentConfig;
use crate::harness::grid::{write_atomic, GridDataset};
use crate::harness::thresholds::ThresholdReport;

pub const HEATMAP_COLUMNS: [&str; 7] = ["N", "L", "t", "mean_E", "std_E", "mu", "n_runs"];
pub const RUNS_COLUMNS: [&str; 6] = ["N", "L", "run", "seed", "t", "E"];
pub const THRESHOLD_COLUMNS: [&str; 5] = ["N", "L_bp", "L_op", "r_max", "v_th"];
/// Full threshold reports, kept next to the CSVs so `export` can reuse them.
pub const THRESHOLD_REPORTS: &str = "threshold_reports.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "json" => Ok(ExportFormat::Json),
            other => Err(Error::Config(format!("unknown export format '{other}' (expected csv or json)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub run: usize,
    pub seed: u64,
    pub t: usize,
    pub e: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub n_qubits: usize,
    pub l_bp: Option<usize>,
    pub l_op: Option<usize>,
    pub r_max: usize,
    pub v_th: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub version: String,
    pub config: ExperimentConfig,
    pub incomplete: Vec<(usize, usize)>,
    pub files: Vec<String>,
}

pub fn run_rows(dataset: &GridDataset) -> Vec<RunRow> {
    let mut rows = Vec::new();
    for (cell, h) in &dataset.histories {
        let seed = cell.seed(dataset.config.base_seed);
        rows.extend(h.energies.iter().enumerate().map(|(t, &e)| RunRow {
            n_qubits: cell.n_qubits,
            n_layers: cell.n_layers,
            run: cell.run,
            seed,
            t,
            e,
        }));
    }
    rows
}

pub fn threshold_rows(reports: &[ThresholdReport]) -> Vec<ThresholdRow> {
    reports
        .iter()
        .map(|r| ThresholdRow {
            n_qubits: r.n_qubits,
            l_bp: r.l_bp.layer(),
            l_op: r.l_op.layer(),
            r_max: r.r_max,
            v_th: r.v_th,
        })
        .collect()
}

/// Writes the sweep's aggregates, raw runs, thresholds and manifest into `dir`.
///
/// Returns the written paths in a fixed order.
pub fn export(
    dataset: &GridDataset,
    thresholds: &[ThresholdReport],
    dir: &Path,
    format: ExportFormat,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let table = aggregate(dataset);
    let runs = run_rows(dataset);
    let limits = threshold_rows(thresholds);
    let mut written = Vec::new();
    match format {
        ExportFormat::Csv => {
            written.push(write_file(dir, "heatmap.csv", heatmap_csv(&table.rows)?)?);
            written.push(write_file(dir, "runs.csv", runs_csv(&runs)?)?);
            written.push(write_file(dir, "thresholds.csv", thresholds_csv(&limits)?)?);
        }
        ExportFormat::Json => {
            written.push(write_file(dir, "heatmap.json", json(&table.rows)?)?);
            written.push(write_file(dir, "runs.json", json(&runs)?)?);
            written.push(write_file(dir, "thresholds.json", json(&limits)?)?);
        }
    }
    let manifest = Manifest {
        name: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config: dataset.config.clone(),
        incomplete: table.incomplete,
        files: written
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    written.push(write_file(dir, "manifest.json", json(&manifest)?)?);
    Ok(written)
}

fn write_file(dir: &Path, name: &str, bytes: Vec<u8>) -> Result<PathBuf> {
    let path = dir.join(name);
    write_atomic(&path, &bytes)?;
    Ok(path)
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Validation(e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Shortest round-trip decimal.
pub fn format_float(x: f64) -> String {
    format!("{x:?}")
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn csv_bytes<const K: usize>(header: [&str; K], records: impl Iterator<Item = [String; K]>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Error::Validation(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in records {
        w.write_record(&r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| Error::Validation(e.to_string()))
}

pub fn heatmap_csv(rows: &[AggregateRow]) -> Result<Vec<u8>> {
    csv_bytes(
        HEATMAP_COLUMNS,
        rows.iter().map(|r| {
            [
                r.n_qubits.to_string(),
                r.n_layers.to_string(),
                r.t.to_string(),
                format_float(r.mean_e),
                opt(r.std_e.map(format_float)),
                format_float(r.mu),
                r.n_runs.to_string(),
            ]
        }),
    )
}

pub fn runs_csv(rows: &[RunRow]) -> Result<Vec<u8>> {
    csv_bytes(
        RUNS_COLUMNS,
        rows.iter().map(|r| {
            [
                r.n_qubits.to_string(),
                r.n_layers.to_string(),
                r.run.to_string(),
                r.seed.to_string(),
                r.t.to_string(),
                format_float(r.e),
            ]
        }),
    )
}

pub fn thresholds_csv(rows: &[ThresholdRow]) -> Result<Vec<u8>> {
    csv_bytes(
        THRESHOLD_COLUMNS,
        rows.iter().map(|r| {
            [
                r.n_qubits.to_string(),
                opt(r.l_bp),
                opt(r.l_op),
                r.r_max.to_string(),
                format_float(r.v_th),
            ]
        }),
    )
}

/// Reads a CSV with exactly the columns `header`, returning raw records.
fn read_records<const K: usize>(path: &Path, header: [&str; K]) -> Result<Vec<csv::StringRecord>> {
    let mut r = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let found = r.headers().map_err(|e| Error::format(path, e.to_string()))?.clone();
    if let Some(missing) = header.iter().find(|h| !found.iter().any(|f| f == **h)) {
        return Err(Error::format(path, format!("missing column {missing}")));
    }
    if found.len() != K || found.iter().zip(header).any(|(f, h)| f != h) {
        return Err(Error::format(path, format!("expected columns {}", header.join(","))));
    }
    r.records()
        .map(|rec| rec.map_err(|e| Error::format(path, e.to_string())))
        .collect()
}

fn field<T: FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("");
    raw.parse()
        .map_err(|_| Error::format(path, format!("cannot parse '{raw}' in column {i}")))
}

fn optional<T: FromStr>(path: &Path, rec: &csv::StringRecord, i: usize) -> Result<Option<T>> {
    if rec.get(i).is_none_or(str::is_empty) {
        Ok(None)
    } else {
        field(path, rec, i).map(Some)
    }
}

pub fn read_heatmap_csv(path: &Path) -> Result<Vec<AggregateRow>> {
    read_records(path, HEATMAP_COLUMNS)?
        .iter()
        .map(|rec| {
            Ok(AggregateRow {
                n_qubits: field(path, rec, 0)?,
                n_layers: field(path, rec, 1)?,
                t: field(path, rec, 2)?,
                mean_e: field(path, rec, 3)?,
                std_e: optional(path, rec, 4)?,
                mu: field(path, rec, 5)?,
                n_runs: field(path, rec, 6)?,
            })
        })
        .collect()
}

pub fn read_runs_csv(path: &Path) -> Result<Vec<RunRow>> {
    read_records(path, RUNS_COLUMNS)?
        .iter()
        .map(|rec| {
            Ok(RunRow {
                n_qubits: field(path, rec, 0)?,
                n_layers: field(path, rec, 1)?,
                run: field(path, rec, 2)?,
                seed: field(path, rec, 3)?,
                t: field(path, rec, 4)?,
                e: field(path, rec, 5)?,
            })
        })
        .collect()
}

pub fn read_thresholds_csv(path: &Path) -> Result<Vec<ThresholdRow>> {
    read_records(path, THRESHOLD_COLUMNS)?
        .iter()
        .map(|rec| {
            Ok(ThresholdRow {
                n_qubits: field(path, rec, 0)?,
                l_bp: optional(path, rec, 1)?,
                l_op: optional(path, rec, 2)?,
                r_max: field(path, rec, 3)?,
                v_th: field(path, rec, 4)?,
            })
        })
        .collect()
}

/// Writes `thresholds.csv` and the full reports into `dir`.
pub fn write_thresholds(dir: &Path, reports: &[ThresholdReport]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    Ok(vec![
        write_file(dir, "thresholds.csv", thresholds_csv(&threshold_rows(reports))?)?,
        write_file(dir, THRESHOLD_REPORTS, json(reports)?)?,
    ])
}

/// Reports saved by [`write_thresholds`]; empty if `dir` has none.
pub fn read_threshold_reports(dir: &Path) -> Result<Vec<ThresholdReport>> {
    let path = dir.join(THRESHOLD_REPORTS);
    if !path.exists() {
        return Ok(Vec::new());
    }
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
}

pub fn read_manifest(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::format(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::{Threshold, VarianceCurve};
    use crate::harness::grid::run_grid;
    use std::collections::BTreeMap;

    fn config() -> ExperimentConfig {
        ExperimentConfig {
            n_qubits: vec![2, 3],
            layers: vec![2, 3],
            n_runs: 2,
            n_epochs: 4,
            ..ExperimentConfig::default()
        }
    }

    fn report(l_bp: Threshold) -> ThresholdReport {
        ThresholdReport {
            n_qubits: 2,
            v_th: 0.05,
            l_bp,
            l_op: Threshold::NotReached,
            r_max: 5,
            rank_ceiling: 6,
            saturated: false,
            variance: VarianceCurve { axis: vec![], estimates: vec![] },
            ranks: BTreeMap::new(),
            bp_sensitivity: vec![],
        }
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let d = run_grid(&config(), None).unwrap();
        let reports = [report(Threshold::Reached(3))];
        export(&d, &reports, dir.path(), ExportFormat::Csv).unwrap();
        let table = aggregate(&d);
        let back = read_heatmap_csv(&dir.path().join("heatmap.csv")).unwrap();
        assert_eq!(back, table.rows);
        assert_eq!(back.len(), 2 * 2 * (4 + 1));
        assert_eq!(read_runs_csv(&dir.path().join("runs.csv")).unwrap(), run_rows(&d));
        assert_eq!(
            read_thresholds_csv(&dir.path().join("thresholds.csv")).unwrap(),
            threshold_rows(&reports)
        );
        let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(m.config, d.config);
        assert_eq!(m.files, ["heatmap.csv", "runs.csv", "thresholds.csv"]);
    }

    #[test]
    fn empty_dataset_gives_headers_only() {
        let dir = tempfile::tempdir().unwrap();
        let d = GridDataset::empty(config());
        export(&d, &[], dir.path(), ExportFormat::Csv).unwrap();
        let read = |f: &str| fs::read_to_string(dir.path().join(f)).unwrap();
        assert_eq!(read("heatmap.csv"), "N,L,t,mean_E,std_E,mu,n_runs\n");
        assert_eq!(read("runs.csv"), "N,L,run,seed,t,E\n");
        assert_eq!(read("thresholds.csv"), "N,L_bp,L_op,r_max,v_th\n");
        let m = read_manifest(&dir.path().join("manifest.json")).unwrap();
        assert_eq!(m.incomplete.len(), 4);
    }

    #[test]
    fn undefined_values_are_empty_fields() {
        let rows = [AggregateRow {
            n_qubits: 2,
            n_layers: 2,
            t: 0,
            mean_e: 1e-15,
            std_e: None,
            mu: 8.0 / 6.0,
            n_runs: 1,
        }];
        let text = String::from_utf8(heatmap_csv(&rows).unwrap()).unwrap();
        assert_eq!(text.lines().nth(1).unwrap(), "2,2,0,1e-15,,1.3333333333333333,1");
        let t = String::from_utf8(thresholds_csv(&threshold_rows(&[report(Threshold::NotReached)])).unwrap()).unwrap();
        assert_eq!(t.lines().nth(1).unwrap(), "2,,,5,0.05");
    }

    #[test]
    fn json_export_and_bad_headers() {
        let dir = tempfile::tempdir().unwrap();
        let d = run_grid(&ExperimentConfig { n_qubits: vec![2], layers: vec![2], ..config() }, None).unwrap();
        let files = export(&d, &[], dir.path(), ExportFormat::Json).unwrap();
        assert_eq!(files.len(), 4);
        let rows: Vec<AggregateRow> =
            serde_json::from_str(&fs::read_to_string(dir.path().join("heatmap.json")).unwrap()).unwrap();
        assert_eq!(rows, aggregate(&d).rows);
        let bad = dir.path().join("bad.csv");
        fs::write(&bad, "N,L,t,mean_E\n").unwrap();
        let err = read_heatmap_csv(&bad).unwrap_err().to_string();
        assert!(err.contains("std_E"), "{err}");
        assert!("xml".parse::<ExportFormat>().is_err());
    }
}
