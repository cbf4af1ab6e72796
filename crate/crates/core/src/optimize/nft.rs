//! Sequential single-parameter minimization (NFT) with epoch-wise random
//! ordering (ERNFT).

use rand::seq::SliceRandom;
use rand::Rng as _;

use super::history::{OptimizerSpec, OrderingMode, RunHistory, RunMeta};
use super::sinusoid::{fit_sinusoid, wrap_angle, SinusoidFit};
use crate::ansatz::Objective;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::seed::{self, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NftConfig {
    /// Reuse the previous step's cost as `f(x0)`: two evaluations per step instead of three.
    pub cached: bool,
    /// Re-evaluate after every step and compare with the fitted minimum.
    pub verify: bool,
}

impl Default for NftConfig {
    fn default() -> Self {
        Self {
            cached: true,
            verify: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ErnftConfig {
    pub ordering: OrderingMode,
    pub nft: NftConfig,
    /// Keep the per-epoch parameter orders in the run history.
    pub record_orderings: bool,
}

impl ErnftConfig {
    pub fn spec(&self) -> OptimizerSpec {
        OptimizerSpec::Ernft {
            ordering: self.ordering,
            cached: self.nft.cached,
        }
    }
}

/// Agreement required between the fitted minimum and a fresh evaluation.
const VERIFY_TOL: f64 = 1e-9;

/// Minimizes `E` exactly along parameter `k`, in place.
///
/// Returns the new cost (the fitted minimum) and the fit.
pub fn nft_step_in_place<T: Real>(
    objective: &Objective<T>,
    theta: &mut [T],
    k: usize,
    cached_cost: Option<T>,
    verify: bool,
) -> Result<(T, SinusoidFit<T>)> {
    if k >= theta.len() {
        return Err(Error::Index {
            index: k,
            limit: theta.len(),
        });
    }
    let x0 = theta[k];
    let at_x0 = match cached_cost {
        Some(c) => c,
        None => objective.residual(theta)?,
    };
    let half_pi = T::FRAC_PI_2();
    theta[k] = x0 + half_pi;
    let at_plus = objective.residual(theta)?;
    theta[k] = x0 - half_pi;
    let at_minus = objective.residual(theta)?;

    let fit = fit_sinusoid(at_x0, at_plus, at_minus, x0);
    let new_cost = if fit.is_flat() {
        theta[k] = x0;
        at_x0
    } else {
        // move by the wrapped offset so the stored angle stays unwrapped
        theta[k] = x0 + wrap_angle(fit.argmin - x0);
        fit.minimum()
    };
    if verify {
        let check = objective.residual(theta)?;
        if (check - new_cost).abs() > T::lit(VERIFY_TOL).max(T::check_tol()) {
            return Err(Error::Validation(format!(
                "NFT step on parameter {k}: fitted minimum {new_cost} but evaluation gives {check}"
            )));
        }
    }
    Ok((new_cost, fit))
}

/// Value-semantics NFT step: returns `(theta', cost', fit)`.
pub fn nft_step<T: Real>(
    objective: &Objective<T>,
    theta: &[T],
    k: usize,
    cached_cost: Option<T>,
) -> Result<(Vec<T>, T, SinusoidFit<T>)> {
    let mut next = theta.to_vec();
    let (cost, fit) = nft_step_in_place(objective, &mut next, k, cached_cost, false)?;
    Ok((next, cost, fit))
}

/// Draws the parameter order for one epoch of `n_params` steps.
///
/// The first entry never equals `prev_last` unless there is only one parameter.
pub fn draw_ordering(
    n_params: usize,
    rng: &mut Rng,
    prev_last: Option<usize>,
    mode: OrderingMode,
) -> Vec<usize> {
    match mode {
        OrderingMode::PerEpoch => {
            let mut order: Vec<usize> = (0..n_params).collect();
            loop {
                order.shuffle(rng);
                if n_params <= 1 || prev_last.is_none() || order.first() != prev_last.as_ref() {
                    return order;
                }
            }
        }
        OrderingMode::PerStep => {
            let mut order = Vec::with_capacity(n_params);
            let mut last = prev_last;
            for _ in 0..n_params {
                let k = loop {
                    let k = rng.gen_range(0..n_params);
                    if n_params <= 1 || Some(k) != last {
                        break k;
                    }
                };
                order.push(k);
                last = Some(k);
            }
            order
        }
    }
}

/// Outcome of one ERNFT epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Epoch<T> {
    pub theta: Vec<T>,
    /// Cost after the last step of the epoch.
    pub cost: T,
    pub ordering: Vec<usize>,
    /// Cost after each step, in visiting order.
    pub step_costs: Vec<T>,
}

/// One ERNFT epoch: every parameter is NFT-stepped once in a random order.
///
/// `current_cost` is the cost at `theta` when already known.
pub fn ernft_epoch<T: Real>(
    objective: &Objective<T>,
    theta: &[T],
    rng: &mut Rng,
    prev_last: Option<usize>,
    current_cost: Option<T>,
    config: &ErnftConfig,
) -> Result<Epoch<T>> {
    let p = objective.n_params();
    if theta.len() != p {
        return Err(Error::Shape {
            expected: p,
            got: theta.len(),
        });
    }
    let ordering = draw_ordering(p, rng, prev_last, config.ordering);
    let mut theta = theta.to_vec();
    let mut cost = match (config.nft.cached, current_cost) {
        (true, Some(c)) => c,
        (true, None) => objective.residual(&theta)?,
        (false, _) => T::nan(),
    };
    let mut step_costs = Vec::with_capacity(p);
    for &k in &ordering {
        let cached = config.nft.cached.then_some(cost);
        let (next, _) = nft_step_in_place(objective, &mut theta, k, cached, config.nft.verify)?;
        cost = next;
        step_costs.push(cost);
    }
    Ok(Epoch {
        theta,
        cost,
        ordering,
        step_costs,
    })
}

/// Full ERNFT run from `theta0` for `n_epochs` epochs.
pub fn run_ernft<T: Real>(
    objective: &Objective<T>,
    theta0: &[T],
    n_epochs: usize,
    seed: u64,
    config: &ErnftConfig,
) -> Result<RunHistory<T>> {
    run_ernft_observed(objective, theta0, n_epochs, seed, config, |_, _| {})
}

/// [`run_ernft`] with a callback receiving `(epoch index starting at 1, epoch)`.
pub fn run_ernft_observed<T: Real, F>(
    objective: &Objective<T>,
    theta0: &[T],
    n_epochs: usize,
    seed: u64,
    config: &ErnftConfig,
    mut observe: F,
) -> Result<RunHistory<T>>
where
    F: FnMut(usize, &Epoch<T>),
{
    let mut rng = seed::rng(seed);
    let mut theta = theta0.to_vec();
    let initial = objective.residual(&theta)?;
    let mut energies = Vec::with_capacity(n_epochs + 1);
    energies.push(initial);
    let mut orderings = Vec::new();
    let mut cost = initial;
    let mut prev_last = None;
    for t in 1..=n_epochs {
        let epoch = ernft_epoch(objective, &theta, &mut rng, prev_last, Some(cost), config)?;
        if !epoch.cost.is_finite() {
            return Err(Error::Divergence { epoch: t });
        }
        observe(t, &epoch);
        prev_last = epoch.ordering.last().copied();
        cost = epoch.cost;
        energies.push(cost);
        theta = epoch.theta;
        if config.record_orderings {
            orderings.push(epoch.ordering);
        }
    }
    Ok(RunHistory {
        meta: RunMeta {
            n_qubits: objective.circuit().n_qubits(),
            n_layers: objective.circuit().n_layers(),
            seed,
            optimizer: config.spec(),
            objective: "relative_residual_energy".into(),
        },
        energies,
        final_theta: theta,
        orderings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{build_hea, GateTemplate, ParamCircuit};
    use crate::hamiltonian::{build_tlfim, extremal_eigenvalues, Spectrum, TlfimParams};
    use crate::pauli::{PauliString, PauliSum};
    use crate::statevector::Pauli;
    use rand::SeedableRng;
    use std::f64::consts::PI;

    fn tlfim_objective(n: usize, l: usize) -> Objective<f64> {
        let h = build_tlfim(&TlfimParams::unit(n)).unwrap();
        let s = extremal_eigenvalues(&h).unwrap();
        Objective::new(build_hea(n, l).unwrap(), h, s).unwrap()
    }

    /// 1000-point scan of `E` over parameter `k`, then a 1000-point rescan
    /// of the bracketing cell around the best point.
    fn grid_min(obj: &Objective<f64>, theta: &[f64], k: usize) -> f64 {
        let mut t = theta.to_vec();
        let mut scan = |lo: f64, step: f64| {
            (0..1000)
                .map(|i| {
                    let x = lo + step * i as f64;
                    t[k] = x;
                    (obj.residual(&t).unwrap(), x)
                })
                .fold((f64::INFINITY, 0.0), |a, b| if b.0 < a.0 { b } else { a })
        };
        let coarse = 2.0 * PI / 1000.0;
        let (_, best) = scan(-PI, coarse);
        scan(best - coarse, 2.0 * coarse / 999.0).0
    }

    #[test]
    fn step_from_zero_matches_grid_scan() {
        let obj = tlfim_objective(2, 2);
        let theta = vec![0.0; 8];
        let (next, cost, _) = nft_step(&obj, &theta, 0, None).unwrap();
        assert!((cost - grid_min(&obj, &theta, 0)).abs() < 1e-8);
        assert!((obj.residual(&next).unwrap() - cost).abs() < 1e-12);
        assert!(next.iter().skip(1).all(|&x| x == 0.0));
    }

    #[test]
    fn fitted_minimum_matches_dense_grid() {
        let obj = tlfim_objective(2, 2);
        let mut rng = seed::rng(3);
        let theta: Vec<f64> = (0..8).map(|_| rng.gen_range(-PI..PI)).collect();
        for k in 0..8 {
            let (_, cost, _) = nft_step(&obj, &theta, k, None).unwrap();
            let grid = grid_min(&obj, &theta, k);
            assert!((cost - grid).abs() < 1e-8, "k={k}: {cost} vs {grid}");
            assert!(cost <= grid + 1e-12);
        }
    }

    #[test]
    fn flat_direction_is_untouched() {
        // RZ on |0> only adds a global phase
        let circuit = ParamCircuit::from_gates(1, vec![GateTemplate::Rz { qubit: 0, param: 0 }]).unwrap();
        let h = PauliSum::new(1).with_term(1.0, PauliString::single(0, Pauli::Z)).unwrap();
        let obj = Objective::new(circuit, h, Spectrum { lambda_min: -1.0, lambda_max: 1.0 }).unwrap();
        let (next, cost, fit) = nft_step(&obj, &[0.4], 0, None).unwrap();
        assert!(fit.is_flat());
        assert_eq!(next, vec![0.4]);
        assert_eq!(cost, 1.0);
    }

    #[test]
    fn cached_steps_cost_two_evaluations() {
        let obj = tlfim_objective(2, 3);
        let theta: Vec<f64> = (0..12).map(|i| 0.3 * i as f64).collect();
        let config = ErnftConfig::default();
        obj.reset_evaluations();
        let epochs = 4;
        run_ernft(&obj, &theta, epochs, 1, &config).unwrap();
        assert_eq!(obj.evaluations(), 1 + 2 * 12 * epochs);

        let uncached = ErnftConfig {
            nft: NftConfig { cached: false, verify: true },
            ..Default::default()
        };
        obj.reset_evaluations();
        run_ernft(&obj, &theta, epochs, 1, &uncached).unwrap();
        assert_eq!(obj.evaluations(), 1 + 4 * 12 * epochs);
    }

    #[test]
    fn ordering_excludes_previous_last() {
        let mut rng = seed::rng(99);
        for mode in [OrderingMode::PerEpoch, OrderingMode::PerStep] {
            let mut prev = None;
            for _ in 0..2000 {
                let order = draw_ordering(8, &mut rng, prev, mode);
                assert_eq!(order.len(), 8);
                if let Some(p) = prev {
                    assert_ne!(order[0], p);
                }
                if mode == OrderingMode::PerEpoch {
                    let mut sorted = order.clone();
                    sorted.sort_unstable();
                    assert_eq!(sorted, (0..8).collect::<Vec<_>>());
                } else {
                    assert!(order.windows(2).all(|w| w[0] != w[1]));
                }
                prev = order.last().copied();
            }
        }
        // single parameter: exclusion cannot be honored
        assert_eq!(draw_ordering(1, &mut rng, Some(0), OrderingMode::PerEpoch), vec![0]);
        assert_eq!(draw_ordering(1, &mut rng, Some(0), OrderingMode::PerStep), vec![0]);
    }

    #[test]
    fn epochs_are_deterministic_and_monotone() {
        let obj = tlfim_objective(2, 3);
        let theta: Vec<f64> = (0..12).map(|i| (i as f64 * 0.77).sin() * 3.0).collect();
        let config = ErnftConfig::default();
        let a = ernft_epoch(&obj, &theta, &mut Rng::seed_from_u64(5), Some(3), None, &config).unwrap();
        let b = ernft_epoch(&obj, &theta, &mut Rng::seed_from_u64(5), Some(3), None, &config).unwrap();
        assert_eq!(a, b);
        let mut before = obj.residual(&theta).unwrap();
        for &c in &a.step_costs {
            assert!(c <= before + 1e-12);
            before = c;
        }
    }

    #[test]
    fn zero_epochs_returns_initial_cost() {
        let obj = tlfim_objective(2, 2);
        let theta = vec![0.1; 8];
        let h = run_ernft(&obj, &theta, 0, 0, &ErnftConfig::default()).unwrap();
        assert_eq!(h.energies, vec![obj.residual(&theta).unwrap()]);
        assert_eq!(h.final_theta, theta);
    }

    #[test]
    fn overparametrized_two_qubits_converge() {
        let obj = tlfim_objective(2, 5);
        let mut rng = seed::rng(2024);
        let theta: Vec<f64> = (0..20).map(|_| rng.gen_range(-PI..PI)).collect();
        let config = ErnftConfig { record_orderings: true, ..Default::default() };
        let h = run_ernft(&obj, &theta, 200, 17, &config).unwrap();
        assert_eq!(h.energies.len(), 201);
        assert_eq!(h.orderings.len(), 200);
        assert!(h.final_energy() < 1e-6, "final E = {}", h.final_energy());
        assert!(h.energies.windows(2).all(|w| w[1] <= w[0] + 1e-12));
        let (energy, _) = obj.cost(&h.final_theta).unwrap();
        assert!((energy - obj.spectrum().lambda_min).abs() < 1e-5);
    }

    #[test]
    fn single_precision_run() {
        let h = build_tlfim::<f32>(&TlfimParams::unit(2)).unwrap();
        let s = extremal_eigenvalues(&h).unwrap();
        let obj = Objective::new(build_hea(2, 4).unwrap(), h, s).unwrap();
        let theta = vec![0.5f32; 16];
        let hist = run_ernft(&obj, &theta, 50, 1, &ErnftConfig::default()).unwrap();
        assert!(hist.final_energy() < 1e-3);
    }
}
