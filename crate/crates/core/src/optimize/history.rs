use serde::{Deserialize, Serialize};

/// Parameter visiting order inside an ERNFT epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderingMode {
    /// A fresh random permutation of all parameters each epoch.
    #[default]
    PerEpoch,
    /// Each step draws a parameter independently, excluding the one just optimized.
    PerStep,
}

/// Optimizer identity and hyperparameters echoed into every run record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum OptimizerSpec {
    Ernft { ordering: OrderingMode, cached: bool },
    /// Plain gradient descent on the relative residual energy `E`.
    Gd { learning_rate: f64 },
}

impl OptimizerSpec {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerSpec::Ernft { .. } => "ernft",
            OptimizerSpec::Gd { .. } => "gd",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub n_qubits: usize,
    pub n_layers: usize,
    pub seed: u64,
    pub optimizer: OptimizerSpec,
    /// Quantity the optimizer descends; always the relative residual energy.
    pub objective: String,
}

/// Per-epoch relative residual energies of one optimization run.
///
/// `energies[0]` is the cost at the initial parameters; `energies[t]` is the
/// cost after epoch `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunHistory<T> {
    pub meta: RunMeta,
    pub energies: Vec<T>,
    pub final_theta: Vec<T>,
    /// Parameter order of every ERNFT epoch; empty for GD or when not recorded.
    #[serde(default)]
    pub orderings: Vec<Vec<usize>>,
}

impl<T: Copy> RunHistory<T> {
    pub fn n_epochs(&self) -> usize {
        self.energies.len().saturating_sub(1)
    }

    pub fn final_energy(&self) -> T {
        *self.energies.last().expect("history holds the initial cost")
    }
}
