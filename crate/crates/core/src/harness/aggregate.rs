//! Seed averages of the sweep per `(N, L, t)`.

use serde::{Deserialize, Serialize};

use crate::diagnostics::rank_ceiling;
use crate::harness::grid::GridDataset;
use crate::stats::{mean, sample_variance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub t: usize,
    pub mean_e: f64,
    /// Sample standard deviation; undefined for a single run.
    pub std_e: Option<f64>,
    pub mu: f64,
    pub n_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AggregateTable {
    pub rows: Vec<AggregateRow>,
    /// `(N, L)` pairs left out because at least one run is missing.
    pub incomplete: Vec<(usize, usize)>,
}

impl AggregateTable {
    /// `mean_E` at the last epoch for each `L` of one `N`, in schedule order.
    pub fn final_means(&self, n_qubits: usize) -> Vec<(usize, f64)> {
        let mut out: Vec<(usize, f64)> = Vec::new();
        for row in self.rows.iter().filter(|r| r.n_qubits == n_qubits) {
            match out.last_mut() {
                Some(last) if last.0 == row.n_layers => last.1 = row.mean_e,
                _ => out.push((row.n_layers, row.mean_e)),
            }
        }
        out
    }

    /// `mean_E(t)` for one `(N, L)`.
    pub fn curve(&self, n_qubits: usize, n_layers: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.n_qubits == n_qubits && r.n_layers == n_layers)
            .map(|r| r.mean_e)
            .collect()
    }
}

/// Parameter count over the maximal QFIM rank, `2NL / (2^{N+1} - 2)`.
pub fn mu(n_qubits: usize, n_layers: usize) -> f64 {
    (2 * n_qubits * n_layers) as f64 / rank_ceiling(n_qubits) as f64
}

/// Mean and sample standard deviation over runs at every epoch.
///
/// Pairs with a missing run are excluded and listed in `incomplete`.
pub fn aggregate(dataset: &GridDataset) -> AggregateTable {
    let config = &dataset.config;
    let mut table = AggregateTable::default();
    for &n in &config.n_qubits {
        for &l in &config.layers {
            let runs = dataset.runs(n, l);
            if runs.len() != config.n_runs {
                table.incomplete.push((n, l));
                continue;
            }
            let mu = mu(n, l);
            let mut column = vec![0.0; runs.len()];
            for t in 0..=config.n_epochs {
                for (slot, h) in column.iter_mut().zip(&runs) {
                    *slot = h.energies[t];
                }
                table.rows.push(AggregateRow {
                    n_qubits: n,
                    n_layers: l,
                    t,
                    mean_e: mean(&column),
                    std_e: sample_variance(&column).map(f64::sqrt),
                    mu,
                    n_runs: runs.len(),
                });
            }
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ExperimentConfig;
    use crate::harness::grid::CellId;
    use crate::optimize::{OptimizerSpec, RunHistory, RunMeta};

    fn history(energies: Vec<f64>) -> RunHistory<f64> {
        RunHistory {
            meta: RunMeta {
                n_qubits: 2,
                n_layers: 2,
                seed: 0,
                optimizer: OptimizerSpec::Gd { learning_rate: 0.1 },
                objective: "relative_residual_energy".into(),
            },
            energies,
            final_theta: vec![0.0; 8],
            orderings: Vec::new(),
        }
    }

    fn dataset(runs: Vec<Vec<f64>>) -> GridDataset {
        let config = ExperimentConfig {
            n_qubits: vec![2],
            layers: vec![2],
            n_runs: runs.len(),
            n_epochs: runs[0].len() - 1,
            ..ExperimentConfig::default()
        };
        let mut d = GridDataset::empty(config);
        for (i, e) in runs.into_iter().enumerate() {
            d.histories.insert(CellId::new(2, 2, i), history(e));
        }
        d
    }

    #[test]
    fn single_run_has_no_std() {
        let t = aggregate(&dataset(vec![vec![0.5, 0.25]]));
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1].mean_e, 0.25);
        assert_eq!(t.rows[1].std_e, None);
    }

    #[test]
    fn means_and_stds() {
        let t = aggregate(&dataset(vec![vec![0.2, 0.7], vec![0.4, 0.7]]));
        assert!((t.rows[0].mean_e - 0.3).abs() < 1e-16);
        assert_eq!(t.rows[1].std_e, Some(0.0));
        assert_eq!(t.rows[0].mu, 8.0 / 6.0);
        assert_eq!(t.curve(2, 2).len(), 2);
        assert_eq!(t.final_means(2), vec![(2, 0.7)]);
    }

    #[test]
    fn missing_runs_are_flagged() {
        let mut d = dataset(vec![vec![0.2], vec![0.4]]);
        d.histories.remove(&CellId::new(2, 2, 1));
        let t = aggregate(&d);
        assert!(t.rows.is_empty());
        assert_eq!(t.incomplete, vec![(2, 2)]);
    }

    #[test]
    fn mu_values() {
        assert_eq!(mu(4, 3), 24.0 / 30.0);
        assert_eq!(mu(2, 3), 2.0);
    }
}
