//! BP and OP layer thresholds for each qubit count of a sweep.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ansatz::{Objective, ParamCircuit};
use crate::diagnostics::{bp_threshold, gradient_variance, op_threshold, qfim_rank_report, rank_ceiling};
use crate::diagnostics::{RankReport, Threshold, VarianceCurve};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_tlfim, extremal_eigenvalues};
use crate::harness::config::ExperimentConfig;
use crate::seed::{cell_seed, Purpose};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub n_qubits: usize,
    pub v_th: f64,
    /// First `L` whose gradient variance is within `v_th` of the scan minimum.
    pub l_bp: Threshold,
    /// First `L` whose maximal QFIM rank equals `r_max`.
    pub l_op: Threshold,
    /// Largest QFIM rank observed on the scan.
    pub r_max: usize,
    /// `2^{N+1} - 2`.
    pub rank_ceiling: usize,
    /// Whether `r_max` reached the ceiling.
    pub saturated: bool,
    /// `Var(dE/d theta_k)` over the layer schedule.
    pub variance: VarianceCurve,
    /// Rank reports for the scanned layer counts; the scan may stop early at the ceiling.
    pub ranks: BTreeMap<usize, RankReport>,
    /// `(v_th, L_bp)` for the alternative thresholds.
    pub bp_sensitivity: Vec<(f64, Threshold)>,
}

impl ThresholdReport {
    /// Ranks that exceed `min(p, 2^{N+1} - 2)` at any tolerance; always empty for a sound QFIM.
    pub fn rank_violations(&self) -> Vec<usize> {
        self.ranks
            .iter()
            .filter(|(&l, r)| {
                let bound = (2 * self.n_qubits * l).min(self.rank_ceiling);
                r.rank > bound || r.sensitivity.iter().any(|&(_, k)| k > bound)
            })
            .map(|(&l, _)| l)
            .collect()
    }
}

pub fn compute_thresholds(config: &ExperimentConfig) -> Result<Vec<ThresholdReport>> {
    config.validate()?;
    config.n_qubits.iter().map(|&n| thresholds_for(config, n)).collect()
}

/// Threshold report for one qubit count over the configured layer schedule.
pub fn thresholds_for(config: &ExperimentConfig, n_qubits: usize) -> Result<ThresholdReport> {
    let d = &config.diagnostics;
    let ceiling = rank_ceiling(n_qubits);
    let hamiltonian = build_tlfim::<f64>(&config.tlfim(n_qubits))?;
    let spectrum = extremal_eigenvalues(&hamiltonian)?;

    let mut estimates = Vec::with_capacity(config.layers.len());
    let mut ranks = BTreeMap::new();
    let mut scanning_ranks = true;
    for &l in &config.layers {
        let circuit = ParamCircuit::hea(n_qubits, l, config.entangler)?;
        if d.grad_param >= circuit.n_params() {
            return Err(Error::Config(format!(
                "diagnostics.grad_param = {} but L = {l} has only {} parameters",
                d.grad_param,
                circuit.n_params()
            )));
        }
        if scanning_ranks {
            let seed = cell_seed(config.base_seed, n_qubits, l, 0, Purpose::QfimRank);
            let report = qfim_rank_report(&circuit, d.qfim_samples, seed, d.rank_rel_tol, &d.rank_sensitivity)?;
            scanning_ranks = !(d.rank_stop_at_ceiling && report.rank >= ceiling);
            ranks.insert(l, report);
        }
        let objective = Objective::new(circuit, hamiltonian.clone(), spectrum)?;
        let seed = cell_seed(config.base_seed, n_qubits, l, 0, Purpose::GradientVariance);
        estimates.push(gradient_variance(&objective, d.grad_param, d.grad_samples, seed)?);
    }

    let variance = VarianceCurve {
        axis: config.layers.clone(),
        estimates,
    };
    let r_max = ranks.values().map(|r| r.rank).max().unwrap_or(0);
    let rank_by_layer: BTreeMap<usize, usize> = ranks.iter().map(|(&l, r)| (l, r.rank)).collect();
    Ok(ThresholdReport {
        n_qubits,
        v_th: d.v_th,
        l_bp: bp_threshold(&variance, d.v_th),
        l_op: op_threshold(&rank_by_layer, r_max),
        r_max,
        rank_ceiling: ceiling,
        saturated: r_max == ceiling,
        bp_sensitivity: d.v_th_sensitivity.iter().map(|&v| (v, bp_threshold(&variance, v))).collect(),
        variance,
        ranks,
    })
}
