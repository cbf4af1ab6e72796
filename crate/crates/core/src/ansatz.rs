//! Hardware-efficient ansatz with alternating rotation and CNOT blocks.
//!
//! Block `l` applies `RY_n(theta[2Nl + n])` for all `n`, then
//! `RZ_n(theta[2Nl + N + n])` for all `n`. Rotation blocks are separated by
//! `L - 1` entangler blocks, so the gate order is `B_0, C, B_1, C, ..., B_{L-1}`.

use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{relative_residual_energy, Spectrum};
use crate::pauli::{expectation, PauliSum};
use crate::scalar::{Complex, Real};
use crate::statevector::{Gate, Pauli, StateVector};

/// CNOT layout of an entangler block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entangler {
    /// `CNOT(n, n+1)` for `n = 0..N-1`, including the wrap pair `(N-1, 0)`.
    #[default]
    Circular,
    /// `CNOT(n, n+1)` for `n = 0..N-2`.
    Linear,
}

impl Entangler {
    pub fn pairs(self, n_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entangler::Circular => (0..n_qubits).map(|n| (n, (n + 1) % n_qubits)).collect(),
            Entangler::Linear => (0..n_qubits - 1).map(|n| (n, n + 1)).collect(),
        }
    }
}

/// Gate with its angle either bound to a parameter slot or absent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateTemplate {
    Ry { qubit: usize, param: usize },
    Rz { qubit: usize, param: usize },
    Cnot { control: usize, target: usize },
}

impl GateTemplate {
    pub fn param(&self) -> Option<usize> {
        match *self {
            GateTemplate::Ry { param, .. } | GateTemplate::Rz { param, .. } => Some(param),
            GateTemplate::Cnot { .. } => None,
        }
    }

    fn bind<T: Real>(&self, theta: &[T]) -> Gate<T> {
        match *self {
            GateTemplate::Ry { qubit, param } => Gate::Ry { qubit, angle: theta[param] },
            GateTemplate::Rz { qubit, param } => Gate::Rz { qubit, angle: theta[param] },
            GateTemplate::Cnot { control, target } => Gate::Cnot { control, target },
        }
    }

    /// Pauli generator and qubit of a rotation.
    fn generator(&self) -> Option<(usize, Pauli)> {
        match *self {
            GateTemplate::Ry { qubit, .. } => Some((qubit, Pauli::Y)),
            GateTemplate::Rz { qubit, .. } => Some((qubit, Pauli::Z)),
            GateTemplate::Cnot { .. } => None,
        }
    }
}

/// Parametrized circuit in which every parameter drives exactly one rotation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamCircuit {
    n_qubits: usize,
    n_layers: usize,
    gates: Vec<GateTemplate>,
    /// Position in `gates` of the rotation bound to each parameter.
    param_gate: Vec<usize>,
}

/// Hardware-efficient ansatz with the circular entangler.
pub fn build_hea(n_qubits: usize, n_layers: usize) -> Result<ParamCircuit> {
    ParamCircuit::hea(n_qubits, n_layers, Entangler::Circular)
}

impl ParamCircuit {
    pub fn hea(n_qubits: usize, n_layers: usize, entangler: Entangler) -> Result<Self> {
        if n_qubits < 2 {
            return Err(Error::Parameter(format!("HEA needs N >= 2 qubits, got {n_qubits}")));
        }
        if n_layers < 2 {
            return Err(Error::Parameter(format!("HEA needs L >= 2 blocks, got {n_layers}")));
        }
        let pairs = entangler.pairs(n_qubits);
        let mut gates = Vec::with_capacity(2 * n_qubits * n_layers + pairs.len() * (n_layers - 1));
        for layer in 0..n_layers {
            if layer > 0 {
                gates.extend(pairs.iter().map(|&(control, target)| GateTemplate::Cnot { control, target }));
            }
            let base = 2 * n_qubits * layer;
            gates.extend((0..n_qubits).map(|n| GateTemplate::Ry { qubit: n, param: base + n }));
            gates.extend((0..n_qubits).map(|n| GateTemplate::Rz {
                qubit: n,
                param: base + n_qubits + n,
            }));
        }
        let mut circuit = Self::from_gates(n_qubits, gates)?;
        circuit.n_layers = n_layers;
        Ok(circuit)
    }

    /// Arbitrary circuit; parameter indices must form `0..p` with no repeats.
    pub fn from_gates(n_qubits: usize, gates: Vec<GateTemplate>) -> Result<Self> {
        let n_params = gates.iter().filter(|g| g.param().is_some()).count();
        let mut param_gate = vec![usize::MAX; n_params];
        for (pos, g) in gates.iter().enumerate() {
            let qubits: &[usize] = match g {
                GateTemplate::Ry { qubit, .. } | GateTemplate::Rz { qubit, .. } => std::slice::from_ref(qubit),
                GateTemplate::Cnot { control, target } => {
                    if control == target {
                        return Err(Error::Parameter(format!("CNOT on a single qubit {control}")));
                    }
                    &[*control, *target][..]
                }
            };
            if let Some(&q) = qubits.iter().find(|&&q| q >= n_qubits) {
                return Err(Error::Index { index: q, limit: n_qubits });
            }
            if let Some(k) = g.param() {
                if k >= n_params {
                    return Err(Error::Index { index: k, limit: n_params });
                }
                if param_gate[k] != usize::MAX {
                    return Err(Error::Parameter(format!("parameter {k} bound to two gates")));
                }
                param_gate[k] = pos;
            }
        }
        Ok(Self {
            n_qubits,
            n_layers: 0,
            gates,
            param_gate,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    /// Number of rotation blocks; zero for circuits not built as an HEA.
    pub fn n_layers(&self) -> usize {
        self.n_layers
    }

    pub fn n_params(&self) -> usize {
        self.param_gate.len()
    }

    pub fn gates(&self) -> &[GateTemplate] {
        &self.gates
    }

    /// Parameters drawn independently and uniformly from `[-pi, pi)`.
    pub fn random_parameters<T: Real, R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<T> {
        uniform_parameters(self.n_params(), rng)
    }

    /// `|psi(theta)> = U(theta)|0...0>`.
    pub fn prepare_state<T: Real>(&self, theta: &[T]) -> Result<StateVector<T>> {
        self.check_theta(theta)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        self.run(&mut state, theta, 0..self.gates.len())?;
        Ok(state)
    }

    /// Unnormalized `d|psi(theta)>/d theta_a`, obtained by inserting
    /// `(-i/2) P` right after the rotation `exp(-i theta_a P / 2)`.
    pub fn derivative_state<T: Real>(&self, theta: &[T], a: usize) -> Result<StateVector<T>> {
        self.check_theta(theta)?;
        let pos = *self.param_gate.get(a).ok_or(Error::Index {
            index: a,
            limit: self.n_params(),
        })?;
        let mut state = StateVector::zero(self.n_qubits)?;
        self.run(&mut state, theta, 0..pos + 1)?;
        state.apply_in_place(&self.derivative_factor(pos))?;
        self.run(&mut state, theta, pos + 1..self.gates.len())?;
        Ok(state)
    }

    /// The state together with all `p` derivative states, sharing the gate prefix.
    pub fn state_and_derivatives<T: Real>(
        &self,
        theta: &[T],
    ) -> Result<(StateVector<T>, Vec<StateVector<T>>)> {
        self.check_theta(theta)?;
        let mut prefix = StateVector::zero(self.n_qubits)?;
        let mut derivs: Vec<(usize, StateVector<T>)> = Vec::with_capacity(self.n_params());
        for (pos, g) in self.gates.iter().enumerate() {
            let bound = g.bind(theta);
            prefix.apply_in_place(&bound)?;
            for (_, d) in derivs.iter_mut() {
                d.apply_in_place(&bound)?;
            }
            if let Some(k) = g.param() {
                let d = prefix.apply(&self.derivative_factor(pos))?;
                derivs.push((k, d));
            }
        }
        derivs.sort_by_key(|(k, _)| *k);
        Ok((prefix, derivs.into_iter().map(|(_, d)| d).collect()))
    }

    fn derivative_factor<T: Real>(&self, pos: usize) -> Gate<T> {
        let (qubit, pauli) = self.gates[pos].generator().expect("parameter gate is a rotation");
        Gate::PauliFactor {
            qubit,
            pauli,
            scalar: Complex::new(T::zero(), T::lit(-0.5)),
        }
    }

    fn run<T: Real>(
        &self,
        state: &mut StateVector<T>,
        theta: &[T],
        range: std::ops::Range<usize>,
    ) -> Result<()> {
        for g in &self.gates[range] {
            state.apply_in_place(&g.bind(theta))?;
        }
        Ok(())
    }

    fn check_theta<T>(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.n_params() {
            return Err(Error::Shape {
                expected: self.n_params(),
                got: theta.len(),
            });
        }
        Ok(())
    }
}

/// `n` angles drawn uniformly from `[-pi, pi)` (sampled in `f64`, then converted).
pub fn uniform_parameters<T: Real, R: rand::Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<T> {
    use std::f64::consts::PI;
    (0..n).map(|_| T::lit(rng.gen_range(-PI..PI))).collect()
}

/// Relative residual energy of an ansatz against a Hamiltonian, with an
/// evaluation counter.
#[derive(Debug)]
pub struct Objective<T> {
    circuit: ParamCircuit,
    hamiltonian: PauliSum<T>,
    spectrum: Spectrum<T>,
    evaluations: AtomicUsize,
}

impl<T: Real> Clone for Objective<T> {
    fn clone(&self) -> Self {
        Self {
            circuit: self.circuit.clone(),
            hamiltonian: self.hamiltonian.clone(),
            spectrum: self.spectrum,
            evaluations: AtomicUsize::new(0),
        }
    }
}

impl<T: Real> Objective<T> {
    pub fn new(circuit: ParamCircuit, hamiltonian: PauliSum<T>, spectrum: Spectrum<T>) -> Result<Self> {
        if circuit.n_qubits() != hamiltonian.n_qubits() {
            return Err(Error::Shape {
                expected: hamiltonian.n_qubits(),
                got: circuit.n_qubits(),
            });
        }
        // surface degenerate spectra at construction
        relative_residual_energy(spectrum.lambda_min, &spectrum)?;
        Ok(Self {
            circuit,
            hamiltonian,
            spectrum,
            evaluations: AtomicUsize::new(0),
        })
    }

    pub fn circuit(&self) -> &ParamCircuit {
        &self.circuit
    }

    pub fn hamiltonian(&self) -> &PauliSum<T> {
        &self.hamiltonian
    }

    pub fn spectrum(&self) -> &Spectrum<T> {
        &self.spectrum
    }

    pub fn n_params(&self) -> usize {
        self.circuit.n_params()
    }

    /// `(energy, E)` at `theta`.
    pub fn cost(&self, theta: &[T]) -> Result<(T, T)> {
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        let state = self.circuit.prepare_state(theta)?;
        let energy = expectation(&state, &self.hamiltonian)?;
        Ok((energy, relative_residual_energy(energy, &self.spectrum)?))
    }

    /// Relative residual energy `E(theta)`.
    pub fn residual(&self, theta: &[T]) -> Result<T> {
        self.cost(theta).map(|(_, e)| e)
    }

    /// Number of cost evaluations performed so far.
    pub fn evaluations(&self) -> usize {
        self.evaluations.load(Ordering::Relaxed)
    }

    pub fn reset_evaluations(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
    }
}

/// `(energy, E)` for a single parameter vector.
pub fn cost<T: Real>(
    circuit: &ParamCircuit,
    h: &PauliSum<T>,
    spectrum: &Spectrum<T>,
    theta: &[T],
) -> Result<(T, T)> {
    let state = circuit.prepare_state(theta)?;
    let energy = expectation(&state, h)?;
    Ok((energy, relative_residual_energy(energy, spectrum)?))
}
