//! Diagnostic scans over the `(N, L)` grid of a config, one row per point.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ansatz::{Objective, ParamCircuit};
use crate::diagnostics::{frame_potential_2, gradient_variance, loss_difference_variance, qfim_rank_report, rank_ceiling};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_tlfim, extremal_eigenvalues};
use crate::harness::config::ExperimentConfig;
use crate::harness::grid::write_atomic;
use crate::seed::{cell_seed, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "L")]
    pub n_layers: usize,
    pub p: usize,
    pub rank: usize,
    pub rank_ceiling: usize,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "L")]
    pub n_layers: usize,
    pub variance: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    #[serde(rename = "L")]
    pub n_layers: usize,
    pub f2: f64,
    pub std_error: f64,
    pub f_haar: f64,
    pub normalized: f64,
    pub normalized_std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    #[serde(rename = "N")]
    pub n_qubits: usize,
    pub lambda_min: f64,
    pub lambda_max: f64,
}

fn points(config: &ExperimentConfig) -> impl Iterator<Item = (usize, usize)> + '_ {
    config
        .n_qubits
        .iter()
        .flat_map(|&n| config.layers.iter().map(move |&l| (n, l)))
}

/// Maximal QFIM rank at every grid point, at the main tolerance and each sensitivity tolerance.
pub fn qfim_rank_scan(config: &ExperimentConfig) -> Result<Vec<RankRow>> {
    let d = &config.diagnostics;
    let mut rows = Vec::new();
    for (n, l) in points(config) {
        let circuit = ParamCircuit::hea(n, l, config.entangler)?;
        let seed = cell_seed(config.base_seed, n, l, 0, Purpose::QfimRank);
        let report = qfim_rank_report(&circuit, d.qfim_samples, seed, d.rank_rel_tol, &d.rank_sensitivity)?;
        let row = |rel_tol, rank| RankRow {
            n_qubits: n,
            n_layers: l,
            p: circuit.n_params(),
            rank,
            rank_ceiling: rank_ceiling(n),
            rel_tol,
        };
        rows.push(row(report.rel_tol, report.rank));
        rows.extend(report.sensitivity.iter().map(|&(t, k)| row(t, k)));
    }
    Ok(rows)
}

fn objectives(config: &ExperimentConfig) -> Result<Vec<(usize, usize, Objective<f64>)>> {
    let mut out = Vec::new();
    for &n in &config.n_qubits {
        let h = build_tlfim::<f64>(&config.tlfim(n))?;
        let spectrum = extremal_eigenvalues(&h)?;
        for &l in &config.layers {
            let circuit = ParamCircuit::hea(n, l, config.entangler)?;
            out.push((n, l, Objective::new(circuit, h.clone(), spectrum)?));
        }
    }
    Ok(out)
}

pub fn grad_variance_scan(config: &ExperimentConfig) -> Result<Vec<VarianceRow>> {
    let d = &config.diagnostics;
    objectives(config)?
        .into_iter()
        .map(|(n, l, obj)| {
            let seed = cell_seed(config.base_seed, n, l, 0, Purpose::GradientVariance);
            let e = gradient_variance(&obj, d.grad_param, d.grad_samples, seed)?;
            Ok(VarianceRow {
                n_qubits: n,
                n_layers: l,
                variance: e.value,
                std_error: e.std_error,
                n_samples: e.n_samples,
            })
        })
        .collect()
}

pub fn loss_diff_variance_scan(config: &ExperimentConfig) -> Result<Vec<VarianceRow>> {
    let d = &config.diagnostics;
    objectives(config)?
        .into_iter()
        .map(|(n, l, obj)| {
            let seed = cell_seed(config.base_seed, n, l, 0, Purpose::LossDifference);
            let e = loss_difference_variance(&obj, d.loss_pairs, seed)?;
            Ok(VarianceRow {
                n_qubits: n,
                n_layers: l,
                variance: e.value,
                std_error: e.std_error,
                n_samples: e.n_samples,
            })
        })
        .collect()
}

pub fn frame_potential_scan(config: &ExperimentConfig) -> Result<Vec<FrameRow>> {
    let d = &config.diagnostics;
    points(config)
        .map(|(n, l)| {
            let circuit = ParamCircuit::hea(n, l, config.entangler)?;
            let seed = cell_seed(config.base_seed, n, l, 0, Purpose::FramePotential);
            let f = frame_potential_2(&circuit, d.frame_samples_a, d.frame_samples_b, seed)?;
            Ok(FrameRow {
                n_qubits: n,
                n_layers: l,
                f2: f.f2,
                std_error: f.std_error,
                f_haar: f.f_haar,
                normalized: f.normalized,
                normalized_std_error: f.normalized_std_error,
            })
        })
        .collect()
}

pub fn exact_diag_scan(config: &ExperimentConfig) -> Result<Vec<SpectrumRow>> {
    config
        .n_qubits
        .iter()
        .map(|&n| {
            let s = extremal_eigenvalues(&build_tlfim::<f64>(&config.tlfim(n))?)?;
            Ok(SpectrumRow {
                n_qubits: n,
                lambda_min: s.lambda_min,
                lambda_max: s.lambda_max,
            })
        })
        .collect()
}

/// Writes `rows` as CSV with one column per field.
pub fn write_rows_csv<R: Serialize>(path: &Path, rows: &[R]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::format(path, e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::format(path, e.to_string()))?;
    write_atomic(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> ExperimentConfig {
        let mut c = ExperimentConfig {
            n_qubits: vec![2],
            layers: vec![2, 4],
            ..ExperimentConfig::default()
        };
        c.diagnostics.grad_samples = 100;
        c.diagnostics.loss_pairs = 100;
        c.diagnostics.frame_samples_a = 100;
        c.diagnostics.frame_samples_b = 100;
        c
    }

    #[test]
    fn scans_cover_the_grid() {
        let c = config();
        let ranks = qfim_rank_scan(&c).unwrap();
        assert_eq!(ranks.len(), 2 * 3);
        assert!(ranks.iter().all(|r| r.rank <= r.p.min(r.rank_ceiling)));
        assert_eq!(grad_variance_scan(&c).unwrap().len(), 2);
        assert_eq!(loss_diff_variance_scan(&c).unwrap().len(), 2);
        assert_eq!(frame_potential_scan(&c).unwrap()[0].f_haar, 0.1);
        let s = exact_diag_scan(&c).unwrap();
        assert!((s[0].lambda_min + 1.4811943).abs() < 1e-6);
    }

    #[test]
    fn csv_headers_follow_fields() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.csv");
        write_rows_csv(&path, &exact_diag_scan(&config()).unwrap()).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("N,lambda_min,lambda_max\n2,-1.481"), "{text}");
    }
}
