//! Gradient descent with exact parameter-shift gradients.

use super::history::{OptimizerSpec, RunHistory, RunMeta};
use crate::ansatz::Objective;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `dE/d theta_k = [E(theta + pi/2 e_k) - E(theta - pi/2 e_k)] / 2` for every `k`.
pub fn parameter_shift_gradient<T: Real>(objective: &Objective<T>, theta: &[T]) -> Result<Vec<T>> {
    let mut shifted = theta.to_vec();
    (0..theta.len())
        .map(|k| parameter_shift_component(objective, &mut shifted, k))
        .collect()
}

/// Single gradient component; `scratch` is restored before returning.
pub fn parameter_shift_component<T: Real>(
    objective: &Objective<T>,
    scratch: &mut [T],
    k: usize,
) -> Result<T> {
    if k >= scratch.len() {
        return Err(Error::Index {
            index: k,
            limit: scratch.len(),
        });
    }
    let x = scratch[k];
    scratch[k] = x + T::FRAC_PI_2();
    let plus = objective.residual(scratch);
    scratch[k] = x - T::FRAC_PI_2();
    let minus = objective.residual(scratch);
    scratch[k] = x;
    Ok((plus? - minus?) / T::lit(2.0))
}

/// `theta(t+1) = theta(t) - learning_rate * grad E(theta(t))`, one full-vector
/// update per epoch. `seed` is recorded in the history only.
pub fn run_gd<T: Real>(
    objective: &Objective<T>,
    theta0: &[T],
    n_epochs: usize,
    learning_rate: f64,
    seed: u64,
) -> Result<RunHistory<T>> {
    if !(learning_rate >= 0.0 && learning_rate.is_finite()) {
        return Err(Error::Parameter(format!(
            "learning rate must be finite and non-negative, got {learning_rate}"
        )));
    }
    let p = objective.n_params();
    if theta0.len() != p {
        return Err(Error::Shape {
            expected: p,
            got: theta0.len(),
        });
    }
    let eta = T::lit(learning_rate);
    let mut theta = theta0.to_vec();
    let mut energies = Vec::with_capacity(n_epochs + 1);
    let initial = objective.residual(&theta)?;
    if !initial.is_finite() {
        return Err(Error::Divergence { epoch: 0 });
    }
    energies.push(initial);
    for t in 1..=n_epochs {
        let grad = parameter_shift_gradient(objective, &theta)?;
        if grad.iter().any(|g| !g.is_finite()) {
            return Err(Error::Divergence { epoch: t });
        }
        for (x, g) in theta.iter_mut().zip(&grad) {
            *x -= eta * *g;
        }
        let e = objective.residual(&theta)?;
        if !e.is_finite() {
            return Err(Error::Divergence { epoch: t });
        }
        energies.push(e);
    }
    Ok(RunHistory {
        meta: RunMeta {
            n_qubits: objective.circuit().n_qubits(),
            n_layers: objective.circuit().n_layers(),
            seed,
            optimizer: OptimizerSpec::Gd { learning_rate },
            objective: "relative_residual_energy".into(),
        },
        energies,
        final_theta: theta,
        orderings: Vec::new(),
    })
}
