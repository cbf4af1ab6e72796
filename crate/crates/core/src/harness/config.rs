//! Experiment configuration, profiles and the TOML config-file format.
//!
//! A config file is plain TOML. Every key is optional; missing keys keep the
//! value of the selected profile:
//!
//! ```toml
//! n_qubits = [4, 6]
//! layers = [3, 5, 7, 9]
//! n_epochs = 300
//! n_runs = 10
//! optimizer = "ernft"        # or "gd"
//! learning_rate = 0.05
//! ordering = "per-epoch"     # or "per-step"
//! entangler = "circular"     # or "linear"
//! base_seed = 20240601
//! record_orderings = true
//!
//! [couplings]
//! j = 1.0
//! h_x = 1.0
//! h_z = 1.0
//!
//! [diagnostics]
//! grad_samples = 2000
//! v_th = 0.05
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::ansatz::Entangler;
use crate::diagnostics::{DEFAULT_RANK_REL_TOL, DEFAULT_RANK_SAMPLES, DEFAULT_V_TH, MIN_SAMPLES};
use crate::error::{Error, Result};
use crate::hamiltonian::{TlfimParams, MAX_DIAG_QUBITS};
use crate::optimize::{ErnftConfig, NftConfig, OptimizerSpec, OrderingMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerKind {
    #[default]
    Ernft,
    Gd,
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ernft" => Ok(OptimizerKind::Ernft),
            "gd" => Ok(OptimizerKind::Gd),
            other => Err(Error::Config(format!("unknown optimizer '{other}' (expected ernft or gd)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// `N <= 6`, reduced layer grid, 10 runs of 300 epochs.
    Desk,
    /// Full-scale grid: `N in {4, 6, 8, 10}`, 30 runs of 1000 epochs.
    Paper,
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!("unknown profile '{other}' (expected desk or paper)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Couplings {
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
}

impl Default for Couplings {
    fn default() -> Self {
        Self {
            j: 1.0,
            h_x: 1.0,
            h_z: 1.0,
        }
    }
}

/// Sample sizes and tolerances for the threshold diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DiagnosticsConfig {
    /// Random parameter points for `Var(dE/d theta_k)`.
    pub grad_samples: usize,
    /// Parameter index `k` whose gradient is sampled.
    pub grad_param: usize,
    /// Random parameter points per layer count for the QFIM rank maximum.
    pub qfim_samples: usize,
    pub rank_rel_tol: f64,
    /// Additional tolerances at which ranks are reported.
    pub rank_sensitivity: Vec<f64>,
    /// Stop evaluating QFIM ranks once the scan hits `2^{N+1} - 2`.
    pub rank_stop_at_ceiling: bool,
    pub v_th: f64,
    /// Alternative thresholds for the BP sensitivity report.
    pub v_th_sensitivity: Vec<f64>,
    pub loss_pairs: usize,
    pub frame_samples_a: usize,
    pub frame_samples_b: usize,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            grad_samples: 2000,
            grad_param: 0,
            qfim_samples: DEFAULT_RANK_SAMPLES,
            rank_rel_tol: DEFAULT_RANK_REL_TOL,
            rank_sensitivity: vec![1e-10, 1e-6],
            rank_stop_at_ceiling: true,
            v_th: DEFAULT_V_TH,
            v_th_sensitivity: vec![0.1],
            loss_pairs: 2000,
            frame_samples_a: 2000,
            frame_samples_b: 2000,
        }
    }
}

impl DiagnosticsConfig {
    fn full_scale() -> Self {
        Self {
            grad_samples: 10_000,
            loss_pairs: 10_000,
            frame_samples_a: 10_000,
            frame_samples_b: 10_000,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_qubits: Vec<usize>,
    /// Strictly increasing layer counts `L`.
    pub layers: Vec<usize>,
    pub n_epochs: usize,
    pub n_runs: usize,
    pub optimizer: OptimizerKind,
    pub learning_rate: f64,
    pub ordering: OrderingMode,
    pub entangler: Entangler,
    pub base_seed: u64,
    pub couplings: Couplings,
    pub diagnostics: DiagnosticsConfig,
    pub record_orderings: bool,
}

/// Default GD learning rate on `E`.
pub const DEFAULT_LEARNING_RATE: f64 = 0.05;
pub const DEFAULT_BASE_SEED: u64 = 20_240_601;

/// `3..=51` in steps of 2, then `61..=201` in steps of 10.
pub fn full_layer_schedule() -> Vec<usize> {
    (3..=51).step_by(2).chain((61..=201).step_by(10)).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::profile(Profile::Desk, OptimizerKind::Ernft)
    }
}

impl ExperimentConfig {
    pub fn profile(profile: Profile, optimizer: OptimizerKind) -> Self {
        let (n_qubits, layers, n_runs, diagnostics, record_orderings) = match profile {
            Profile::Desk => (
                vec![4, 6],
                (3..=21).step_by(2).collect(),
                10,
                DiagnosticsConfig::default(),
                true,
            ),
            Profile::Paper => (vec![4, 6, 8, 10], full_layer_schedule(), 30, DiagnosticsConfig::full_scale(), false),
        };
        let n_epochs = match (profile, optimizer) {
            (Profile::Desk, OptimizerKind::Ernft) => 300,
            (Profile::Desk, OptimizerKind::Gd) => 1000,
            (Profile::Paper, OptimizerKind::Ernft) => 1000,
            (Profile::Paper, OptimizerKind::Gd) => 10_000,
        };
        Self {
            n_qubits,
            layers,
            n_epochs,
            n_runs,
            optimizer,
            learning_rate: DEFAULT_LEARNING_RATE,
            ordering: OrderingMode::PerEpoch,
            entangler: Entangler::Circular,
            base_seed: DEFAULT_BASE_SEED,
            couplings: Couplings::default(),
            diagnostics,
            record_orderings,
        }
    }

    /// Overlays the keys present in `toml_text` on `base`.
    pub fn from_toml_str(toml_text: &str, base: &Self) -> Result<Self> {
        let overlay: toml::Table = toml_text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let mut merged = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
        merge_tables(&mut merged, overlay);
        let config: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path, base: &Self) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text, base)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_qubits.is_empty() || self.layers.is_empty() {
            return fail("n_qubits and layers must be non-empty".into());
        }
        if let Some(&n) = self.n_qubits.iter().find(|&&n| !(2..=MAX_DIAG_QUBITS).contains(&n)) {
            return fail(format!("N = {n} outside 2..={MAX_DIAG_QUBITS}"));
        }
        if let Some(&l) = self.layers.iter().find(|&&l| l < 2) {
            return fail(format!("L = {l} below the minimum of 2"));
        }
        if self.layers.windows(2).any(|w| w[0] >= w[1]) {
            return fail("layer schedule must be strictly increasing".into());
        }
        if self.n_qubits.windows(2).any(|w| w[0] >= w[1]) {
            return fail("qubit list must be strictly increasing".into());
        }
        if self.n_epochs == 0 || self.n_runs == 0 {
            return fail("n_epochs and n_runs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate >= 0.0) {
            return fail(format!("learning rate {} must be finite and >= 0", self.learning_rate));
        }
        let c = &self.couplings;
        if ![c.j, c.h_x, c.h_z].iter().all(|x| x.is_finite()) {
            return fail("couplings must be finite".into());
        }
        let d = &self.diagnostics;
        for (name, n) in [
            ("grad_samples", d.grad_samples),
            ("loss_pairs", d.loss_pairs),
            ("frame_samples_a", d.frame_samples_a),
            ("frame_samples_b", d.frame_samples_b),
        ] {
            if n < MIN_SAMPLES {
                return fail(format!("diagnostics.{name} = {n} below {MIN_SAMPLES}"));
            }
        }
        if d.qfim_samples == 0 {
            return fail("diagnostics.qfim_samples must be at least 1".into());
        }
        if !(d.v_th >= 0.0) || !(d.rank_rel_tol > 0.0) {
            return fail("v_th must be >= 0 and rank_rel_tol > 0".into());
        }
        Ok(())
    }

    pub fn tlfim(&self, n_qubits: usize) -> TlfimParams {
        TlfimParams {
            n_sites: n_qubits,
            j: self.couplings.j,
            h_x: self.couplings.h_x,
            h_z: self.couplings.h_z,
        }
    }

    pub fn ernft(&self) -> ErnftConfig {
        ErnftConfig {
            ordering: self.ordering,
            nft: NftConfig::default(),
            record_orderings: self.record_orderings,
        }
    }

    pub fn optimizer_spec(&self) -> OptimizerSpec {
        match self.optimizer {
            OptimizerKind::Ernft => self.ernft().spec(),
            OptimizerKind::Gd => OptimizerSpec::Gd {
                learning_rate: self.learning_rate,
            },
        }
    }
}

fn merge_tables(base: &mut toml::Table, overlay: toml::Table) {
    for (key, value) in overlay {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(inner)), toml::Value::Table(over)) => merge_tables(inner, over),
            (_, value) => {
                base.insert(key, value);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_schedule_shape() {
        let s = full_layer_schedule();
        assert_eq!(s.first(), Some(&3));
        assert_eq!(s.last(), Some(&201));
        assert_eq!(s.len(), 25 + 15);
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        let full = ExperimentConfig::profile(Profile::Paper, OptimizerKind::Ernft);
        assert_eq!((full.n_runs, full.n_epochs), (30, 1000));
        assert_eq!(ExperimentConfig::profile(Profile::Paper, OptimizerKind::Gd).n_epochs, 10_000);
        full.validate().unwrap();
    }

    #[test]
    fn file_overlays_profile() {
        let base = ExperimentConfig::default();
        let cfg = ExperimentConfig::from_toml_str(
            "n_qubits = [2]\nlayers = [3]\nn_runs = 2\n[diagnostics]\nv_th = 0.1\n",
            &base,
        )
        .unwrap();
        assert_eq!(cfg.n_qubits, vec![2]);
        assert_eq!(cfg.n_runs, 2);
        assert_eq!(cfg.n_epochs, base.n_epochs);
        assert_eq!(cfg.diagnostics.v_th, 0.1);
        assert_eq!(cfg.diagnostics.grad_samples, base.diagnostics.grad_samples);
        let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string(), &base).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = ExperimentConfig::default();
        for bad in [
            "layers = [5, 3]",
            "layers = [1]",
            "n_qubits = [1]",
            "n_runs = 0",
            "learning_rate = -0.1",
            "optimizer = \"adam\"",
            "unknown_key = 3",
            "[diagnostics]\ngrad_samples = 10",
        ] {
            assert!(ExperimentConfig::from_toml_str(bad, &base).is_err(), "{bad}");
        }
    }
}
