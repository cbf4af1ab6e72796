//! Seeded experiment grid, aggregation, threshold overlays and file export.

pub mod aggregate;
pub mod config;
pub mod export;
pub mod grid;
pub mod scans;
pub mod thresholds;

pub use aggregate::{aggregate, mu, AggregateRow, AggregateTable};
pub use config::{Couplings, DiagnosticsConfig, ExperimentConfig, OptimizerKind, Profile};
pub use export::{export, ExportFormat};
pub use grid::{load_dataset, resume, run_cell, run_grid, CellId, GridDataset};
pub use thresholds::{compute_thresholds, ThresholdReport};

use crate::error::{Error, Result};

/// Runs `f` on a dedicated pool of `workers` threads, or on the global pool for `None`.
///
/// Results never depend on the worker count.
pub fn with_workers<R: Send>(workers: Option<usize>, f: impl FnOnce() -> R + Send) -> Result<R> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Config("worker count must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start {n} workers: {e}")))?;
            Ok(pool.install(f))
        }
    }
}
