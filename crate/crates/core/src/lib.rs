//! Statevector laboratory for studying barren plateaus and
//! overparametrization of the hardware-efficient ansatz on the
//! transverse and longitudinal field Ising model.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the aliases below fix it to `f64`, which the
//! experiment harness uses throughout.

pub mod ansatz;
pub mod diagnostics;
pub mod error;
pub mod hamiltonian;
pub mod harness;
pub mod optimize;
pub mod pauli;
pub mod scalar;
pub mod seed;
pub mod statevector;
pub mod stats;

pub use ansatz::{build_hea, Entangler, GateTemplate, ParamCircuit};
pub use diagnostics::{FramePotential, RankReport, Threshold, VarianceCurve};
pub use error::{Error, Result};
pub use hamiltonian::{build_tlfim, extremal_eigenvalues, relative_residual_energy, TlfimParams};
pub use optimize::{ErnftConfig, NftConfig, OptimizerSpec, OrderingMode};
pub use pauli::PauliString;
pub use scalar::Real;
pub use statevector::{Pauli, MAX_QUBITS};
pub use stats::Estimate;

pub type Complex64 = num_complex::Complex<f64>;
pub type StateVector = statevector::StateVector<f64>;
pub type Gate = statevector::Gate<f64>;
pub type PauliSum = pauli::PauliSum<f64>;
pub type Spectrum = hamiltonian::Spectrum<f64>;
pub type Objective = ansatz::Objective<f64>;
pub type RunHistory = optimize::RunHistory<f64>;
pub type SinusoidFit = optimize::SinusoidFit<f64>;
pub type Qfim = diagnostics::Qfim<f64>;

/// Single-precision aliases.
pub mod f32 {
    pub type StateVector = crate::statevector::StateVector<f32>;
    pub type PauliSum = crate::pauli::PauliSum<f32>;
    pub type Objective = crate::ansatz::Objective<f32>;
    pub type RunHistory = crate::optimize::RunHistory<f32>;
}

#[cfg(doctest)]
#[doc = include_str!("../../../README.md")]
struct ReadmeDoctests;
