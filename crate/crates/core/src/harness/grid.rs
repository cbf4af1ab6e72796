//! The `(N, L, run)` optimization sweep and its on-disk shards.
//!
//! Layout of an output directory:
//!
//! ```text
//! <out>/grid.toml                  config the sweep was started with
//! <out>/cells/n4_l3_r0.json        one RunHistory per completed cell
//! ```
//!
//! Shards are written to a temporary file and renamed into place, so a crash
//! never leaves a truncated shard behind. Resuming reruns only the cells whose
//! shard is missing or unreadable.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{uniform_parameters, Objective, ParamCircuit};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_tlfim, extremal_eigenvalues, Spectrum};
use crate::harness::config::{ExperimentConfig, OptimizerKind};
use crate::optimize::{run_ernft, run_gd, RunHistory};
use crate::pauli::PauliSum;
use crate::seed::{self, cell_seed, derive_seed, Purpose};

pub const CONFIG_FILE: &str = "grid.toml";
pub const CELLS_DIR: &str = "cells";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellId {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub run: usize,
}

impl CellId {
    pub fn new(n_qubits: usize, n_layers: usize, run: usize) -> Self {
        Self {
            n_qubits,
            n_layers,
            run,
        }
    }

    /// Seed of the initial parameters; the optimizer stream is derived from it.
    pub fn seed(&self, base_seed: u64) -> u64 {
        cell_seed(base_seed, self.n_qubits, self.n_layers, self.run, Purpose::InitialParameters)
    }

    pub fn shard_name(&self) -> String {
        format!("n{}_l{}_r{}.json", self.n_qubits, self.n_layers, self.run)
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(N={}, L={}, run={})", self.n_qubits, self.n_layers, self.run)
    }
}

/// Run histories keyed by cell, plus the config that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDataset {
    pub config: ExperimentConfig,
    pub histories: BTreeMap<CellId, RunHistory<f64>>,
}

impl GridDataset {
    pub fn empty(config: ExperimentConfig) -> Self {
        Self {
            config,
            histories: BTreeMap::new(),
        }
    }

    /// Runs of one `(N, L)` pair in run order.
    pub fn runs(&self, n_qubits: usize, n_layers: usize) -> Vec<&RunHistory<f64>> {
        self.histories
            .range(CellId::new(n_qubits, n_layers, 0)..CellId::new(n_qubits, n_layers + 1, 0))
            .map(|(_, h)| h)
            .collect()
    }

    /// Configured cells without a history.
    pub fn missing(&self) -> Vec<CellId> {
        cells(&self.config)
            .into_iter()
            .filter(|c| !self.histories.contains_key(c))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }
}

/// Every cell of the sweep in `(N, L, run)` order.
pub fn cells(config: &ExperimentConfig) -> Vec<CellId> {
    let mut out = Vec::new();
    for &n in &config.n_qubits {
        for &l in &config.layers {
            for run in 0..config.n_runs {
                out.push(CellId::new(n, l, run));
            }
        }
    }
    out
}

struct Problem {
    hamiltonian: PauliSum<f64>,
    spectrum: Spectrum<f64>,
}

fn problems(config: &ExperimentConfig) -> Result<HashMap<usize, Problem>> {
    config
        .n_qubits
        .iter()
        .map(|&n| {
            let hamiltonian = build_tlfim::<f64>(&config.tlfim(n))?;
            let spectrum = extremal_eigenvalues(&hamiltonian)?;
            Ok((n, Problem { hamiltonian, spectrum }))
        })
        .collect()
}

fn optimize(config: &ExperimentConfig, problem: &Problem, cell: CellId) -> Result<RunHistory<f64>> {
    let circuit = ParamCircuit::hea(cell.n_qubits, cell.n_layers, config.entangler)?;
    let objective = Objective::new(circuit, problem.hamiltonian.clone(), problem.spectrum)?;
    let cell_seed = cell.seed(config.base_seed);
    let theta0: Vec<f64> = uniform_parameters(objective.n_params(), &mut seed::rng(cell_seed));
    let opt_seed = derive_seed(cell_seed, &[Purpose::Optimizer as u64]);
    match config.optimizer {
        OptimizerKind::Ernft => run_ernft(&objective, &theta0, config.n_epochs, opt_seed, &config.ernft()),
        OptimizerKind::Gd => run_gd(&objective, &theta0, config.n_epochs, config.learning_rate, opt_seed),
    }
}

/// Optimizes a single cell from scratch.
pub fn run_cell(config: &ExperimentConfig, cell: CellId) -> Result<RunHistory<f64>> {
    let hamiltonian = build_tlfim(&config.tlfim(cell.n_qubits))?;
    let spectrum = extremal_eigenvalues(&hamiltonian)?;
    optimize(config, &Problem { hamiltonian, spectrum }, cell).map_err(|e| cell_error(cell, e))
}

fn cell_error(cell: CellId, source: Error) -> Error {
    Error::Cell {
        n_qubits: cell.n_qubits,
        n_layers: cell.n_layers,
        run: cell.run,
        source: Box::new(source),
    }
}

/// Runs the full sweep.
///
/// With `out_dir`, every finished cell is persisted immediately and cells that
/// already have a valid shard are loaded instead of recomputed. A failing cell
/// does not stop the others; the first failure is returned once all cells have
/// been attempted.
pub fn run_grid(config: &ExperimentConfig, out_dir: Option<&Path>) -> Result<GridDataset> {
    config.validate()?;
    let mut dataset = GridDataset::empty(config.clone());
    if let Some(dir) = out_dir {
        prepare_dir(config, dir)?;
        dataset.histories = load_shards(config, dir)?;
    }
    let todo: Vec<CellId> = dataset.missing();
    let problems = problems(config)?;
    let results: Vec<(CellId, Result<RunHistory<f64>>)> = todo
        .par_iter()
        .map(|&cell| {
            let result = optimize(config, &problems[&cell.n_qubits], cell).and_then(|h| {
                if let Some(dir) = out_dir {
                    write_shard(dir, cell, &h)?;
                }
                Ok(h)
            });
            (cell, result.map_err(|e| cell_error(cell, e)))
        })
        .collect();
    let mut first_error = None;
    for (cell, result) in results {
        match result {
            Ok(h) => {
                dataset.histories.insert(cell, h);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match first_error {
        Some(e) => Err(e),
        None => Ok(dataset),
    }
}

/// Continues the sweep stored in `dir` with its recorded config.
pub fn resume(dir: &Path) -> Result<GridDataset> {
    let config = read_config(dir)?;
    run_grid(&config, Some(dir))
}

/// Loads the config and every valid shard of `dir` without running anything.
pub fn load_dataset(dir: &Path) -> Result<GridDataset> {
    let config = read_config(dir)?;
    let histories = load_shards(&config, dir)?;
    Ok(GridDataset { config, histories })
}

fn read_config(dir: &Path) -> Result<ExperimentConfig> {
    let path = dir.join(CONFIG_FILE);
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let config: ExperimentConfig = toml::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))?;
    config.validate()?;
    Ok(config)
}

fn prepare_dir(config: &ExperimentConfig, dir: &Path) -> Result<()> {
    let cells_dir = dir.join(CELLS_DIR);
    fs::create_dir_all(&cells_dir).map_err(|e| Error::io(&cells_dir, e))?;
    let path = dir.join(CONFIG_FILE);
    if path.exists() {
        let existing = read_config(dir)?;
        if &existing != config {
            return Err(Error::Config(format!(
                "{} holds a different sweep; use a fresh output directory",
                path.display()
            )));
        }
        return Ok(());
    }
    write_atomic(&path, config.to_toml_string().as_bytes())
}

fn shard_path(dir: &Path, cell: CellId) -> PathBuf {
    dir.join(CELLS_DIR).join(cell.shard_name())
}

fn write_shard(dir: &Path, cell: CellId, history: &RunHistory<f64>) -> Result<()> {
    let bytes = serde_json::to_vec(history).map_err(|e| Error::format(shard_path(dir, cell), e.to_string()))?;
    write_atomic(&shard_path(dir, cell), &bytes)
}

pub(crate) fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// A shard counts only if it parses and matches its cell and the config.
fn load_shards(config: &ExperimentConfig, dir: &Path) -> Result<BTreeMap<CellId, RunHistory<f64>>> {
    let mut out = BTreeMap::new();
    for cell in cells(config) {
        let path = shard_path(dir, cell);
        let Ok(bytes) = fs::read(&path) else { continue };
        let Ok(history) = serde_json::from_slice::<RunHistory<f64>>(&bytes) else { continue };
        let meta = &history.meta;
        let valid = meta.n_qubits == cell.n_qubits
            && meta.n_layers == cell.n_layers
            && meta.optimizer == config.optimizer_spec()
            && history.energies.len() == config.n_epochs + 1
            && history.final_theta.len() == 2 * cell.n_qubits * cell.n_layers;
        if valid {
            out.insert(cell, history);
        }
    }
    Ok(out)
}
