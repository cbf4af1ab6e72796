//! Landscape diagnostics: quantum Fisher information rank, gradient and
//! loss-difference variances, and the second-order frame potential.
//!
//! All Monte Carlo estimators draw sample `i` from its own substream derived
//! from `(seed, i)`, so estimates do not depend on the rayon pool size.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::{uniform_parameters, Objective, ParamCircuit};
use crate::error::{Error, Result};
use crate::optimize::parameter_shift_component;
use crate::scalar::{Complex, Real};
use crate::seed::{derive_seed, sample_rng, Purpose, Rng};
use crate::statevector::{inner_product, StateVector};
use crate::stats::{mean, pairwise_sum, sample_variance, variance_estimate, Estimate};

/// Relative singular-value cutoff used for QFIM ranks.
pub const DEFAULT_RANK_REL_TOL: f64 = 1e-8;
/// Absolute singular-value floor applied on top of the relative cutoff.
pub const RANK_ABS_FLOOR: f64 = 1e-12;
/// Random parameter points per layer count when maximizing the QFIM rank.
pub const DEFAULT_RANK_SAMPLES: usize = 5;
/// Normalized-variance threshold for the barren-plateau onset.
pub const DEFAULT_V_TH: f64 = 0.05;
/// Minimum sample count accepted by the Monte Carlo estimators.
pub const MIN_SAMPLES: usize = 100;

/// Upper bound `2^{N+1} - 2` on the QFIM rank of an `N`-qubit pure-state family.
pub fn rank_ceiling(n_qubits: usize) -> usize {
    (1usize << (n_qubits + 1)) - 2
}

/// Quantum Fisher information matrix
/// `M_ab = 4 Re(<d_a psi|d_b psi> - <d_a psi|psi><psi|d_b psi>)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qfim<T> {
    pub matrix: DMatrix<T>,
    pub theta: Vec<T>,
    pub n_qubits: usize,
    pub n_layers: usize,
}

impl<T: Real> Qfim<T> {
    pub fn to_f64(&self) -> DMatrix<f64> {
        self.matrix.map(|x| x.as_f64())
    }

    pub fn max_asymmetry(&self) -> f64 {
        let m = self.to_f64();
        (&m - m.transpose()).amax()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        symmetric_eigenvalues(&self.to_f64()).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        numeric_rank(&self.matrix, rel_tol)
    }

    /// `delta^T M delta`.
    pub fn quadratic_form(&self, delta: &[f64]) -> f64 {
        let m = self.to_f64();
        let d = nalgebra::DVector::from_column_slice(delta);
        (d.transpose() * &m * &d)[(0, 0)]
    }
}

pub fn qfim<T: Real>(circuit: &ParamCircuit, theta: &[T]) -> Result<Qfim<T>> {
    let (psi, derivs) = circuit.state_and_derivatives(theta)?;
    let p = derivs.len();
    let proj: Vec<Complex<T>> = derivs
        .iter()
        .map(|d| inner_product(d, &psi))
        .collect::<Result<_>>()?;
    let four = T::lit(4.0);
    let mut matrix = DMatrix::from_element(p, p, T::zero());
    for a in 0..p {
        for b in a..p {
            let overlap = inner_product(&derivs[a], &derivs[b])?;
            // <d_a|psi><psi|d_b> = proj[a] * conj(proj[b])
            let value = four * (overlap - proj[a] * proj[b].conj()).re;
            matrix[(a, b)] = value;
            matrix[(b, a)] = value;
        }
    }
    Ok(Qfim {
        matrix,
        theta: theta.to_vec(),
        n_qubits: circuit.n_qubits(),
        n_layers: circuit.n_layers(),
    })
}

fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    m.clone().symmetric_eigenvalues().iter().copied().collect()
}

/// Number of singular values above `max(rel_tol * sigma_max, RANK_ABS_FLOOR)`.
pub fn numeric_rank<T: Real>(m: &DMatrix<T>, rel_tol: f64) -> usize {
    let m = m.map(|x| x.as_f64());
    let sym = (&m + m.transpose()) * 0.5;
    let singular: Vec<f64> = symmetric_eigenvalues(&sym).into_iter().map(f64::abs).collect();
    let sigma_max = singular.iter().copied().fold(0.0, f64::max);
    if sigma_max == 0.0 {
        return 0;
    }
    let cutoff = (rel_tol * sigma_max).max(RANK_ABS_FLOOR);
    singular.iter().filter(|&&s| s > cutoff).count()
}

/// Maximum QFIM rank over random parameter points, reported at several tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    pub rel_tol: f64,
    /// `(rel_tol, max rank)` for each requested tolerance.
    pub sensitivity: Vec<(f64, usize)>,
    pub n_theta_samples: usize,
}

pub fn max_qfim_rank(circuit: &ParamCircuit, n_theta_samples: usize, seed: u64, rel_tol: f64) -> Result<usize> {
    Ok(qfim_rank_report(circuit, n_theta_samples, seed, rel_tol, &[])?.rank)
}

pub fn qfim_rank_report(
    circuit: &ParamCircuit,
    n_theta_samples: usize,
    seed: u64,
    rel_tol: f64,
    sensitivity_tols: &[f64],
) -> Result<RankReport> {
    if n_theta_samples == 0 {
        return Err(Error::Parameter("QFIM rank needs at least one parameter sample".into()));
    }
    let seed = derive_seed(seed, &[Purpose::QfimRank as u64]);
    let mut tols = vec![rel_tol];
    tols.extend_from_slice(sensitivity_tols);
    let per_sample: Vec<Vec<usize>> = (0..n_theta_samples)
        .into_par_iter()
        .map(|i| {
            let theta: Vec<f64> = circuit.random_parameters(&mut sample_rng(seed, i));
            let q = qfim(circuit, &theta)?;
            Ok(tols.iter().map(|&t| q.rank(t)).collect())
        })
        .collect::<Result<_>>()?;
    let best = |j: usize| per_sample.iter().map(|r| r[j]).max().unwrap_or(0);
    Ok(RankReport {
        rank: best(0),
        rel_tol,
        sensitivity: sensitivity_tols.iter().enumerate().map(|(j, &t)| (t, best(j + 1))).collect(),
        n_theta_samples,
    })
}

/// Layer count at which a threshold condition first holds within a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    Reached(usize),
    /// The condition never held on the scanned grid.
    NotReached,
}

impl Threshold {
    pub fn layer(self) -> Option<usize> {
        match self {
            Threshold::Reached(l) => Some(l),
            Threshold::NotReached => None,
        }
    }
}

/// Smallest scanned `L` whose rank equals `r_max`.
pub fn op_threshold(ranks_by_layers: &BTreeMap<usize, usize>, r_max: usize) -> Threshold {
    ranks_by_layers
        .iter()
        .find(|(_, &r)| r == r_max)
        .map_or(Threshold::NotReached, |(&l, _)| Threshold::Reached(l))
}

/// Monte Carlo estimates along a scanned axis (layer or qubit counts).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceCurve {
    pub axis: Vec<usize>,
    pub estimates: Vec<Estimate>,
}

impl VarianceCurve {
    pub fn values(&self) -> Vec<f64> {
        self.estimates.iter().map(|e| e.value).collect()
    }
}

/// Smallest `L` with `(Var_L - Var_min) / Var_min < v_th`, `Var_min` taken over the curve.
///
/// The minimizing `L` itself always qualifies, so `v_th = 0` selects the argmin.
pub fn bp_threshold(curve: &VarianceCurve, v_th: f64) -> Threshold {
    let values = curve.values();
    let var_min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if !var_min.is_finite() || curve.axis.len() != values.len() {
        return Threshold::NotReached;
    }
    curve
        .axis
        .iter()
        .zip(&values)
        .find(|(_, &v)| v == var_min || (var_min > 0.0 && (v - var_min) / var_min < v_th))
        .map_or(Threshold::NotReached, |(&l, _)| Threshold::Reached(l))
}

fn check_samples(n: usize, what: &str) -> Result<()> {
    if n < MIN_SAMPLES {
        return Err(Error::Parameter(format!("{what} needs at least {MIN_SAMPLES} samples, got {n}")));
    }
    Ok(())
}

/// Per-sample values of `dE/d theta_k` at uniform random parameter points.
pub fn gradient_samples<T: Real>(objective: &Objective<T>, k: usize, n_samples: usize, seed: u64) -> Result<Vec<f64>> {
    if k >= objective.n_params() {
        return Err(Error::Index {
            index: k,
            limit: objective.n_params(),
        });
    }
    let seed = derive_seed(seed, &[Purpose::GradientVariance as u64]);
    (0..n_samples)
        .into_par_iter()
        .map(|i| {
            let mut theta: Vec<T> = objective.circuit().random_parameters(&mut sample_rng(seed, i));
            parameter_shift_component(objective, &mut theta, k).map(|g| g.as_f64())
        })
        .collect()
}

/// Variance of the parameter-shift gradient `dE/d theta_k` over uniform random parameters.
pub fn gradient_variance<T: Real>(objective: &Objective<T>, k: usize, n_samples: usize, seed: u64) -> Result<Estimate> {
    check_samples(n_samples, "gradient variance")?;
    Ok(variance_estimate(&gradient_samples(objective, k, n_samples, seed)?))
}

/// Variance of `|E(theta_A) - E(theta_B)|` over independent uniform pairs.
pub fn loss_difference_variance<T: Real>(objective: &Objective<T>, n_pairs: usize, seed: u64) -> Result<Estimate> {
    check_samples(n_pairs, "loss-difference variance")?;
    let seed = derive_seed(seed, &[Purpose::LossDifference as u64]);
    let diffs: Vec<f64> = (0..n_pairs)
        .into_par_iter()
        .map(|i| {
            let mut rng = sample_rng(seed, i);
            let a: Vec<T> = objective.circuit().random_parameters(&mut rng);
            let b: Vec<T> = objective.circuit().random_parameters(&mut rng);
            Ok((objective.residual(&a)? - objective.residual(&b)?).abs().as_f64())
        })
        .collect::<Result<_>>()?;
    Ok(variance_estimate(&diffs))
}

/// Second-order frame potential estimate and its Haar-normalized deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FramePotential {
    pub f2: f64,
    pub std_error: f64,
    pub f_haar: f64,
    /// `(F2 - F_haar) / F_haar`.
    pub normalized: f64,
    pub normalized_std_error: f64,
    pub n_a: usize,
    pub n_b: usize,
}

/// `F_haar = 2 / (d (d + 1))`, the second frame-potential moment of Haar-random states.
pub fn haar_frame_potential(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 / (d * (d + 1.0))
}

/// Mean of `|<psi(theta_A)|psi(theta_B)>|^4` over the `n_a x n_b` cross product
/// of independent uniform parameter sets.
pub fn frame_potential_2(circuit: &ParamCircuit, n_a: usize, n_b: usize, seed: u64) -> Result<FramePotential> {
    check_samples(n_a.min(n_b), "frame potential")?;
    let seed = derive_seed(seed, &[Purpose::FramePotential as u64]);
    let draw = |side: u64, n: usize| -> Result<Vec<StateVector<f64>>> {
        let seed = derive_seed(seed, &[side]);
        (0..n)
            .into_par_iter()
            .map(|i| circuit.prepare_state(&uniform_parameters::<f64, _>(circuit.n_params(), &mut sample_rng(seed, i))))
            .collect()
    };
    let a = draw(0, n_a)?;
    let b = draw(1, n_b)?;
    cross_frame_potential(&a, &b)
}

/// Haar-random pure state from normalized complex Gaussian amplitudes.
pub fn haar_random_state(n_qubits: usize, rng: &mut Rng) -> Result<StateVector<f64>> {
    let amps: Vec<Complex<f64>> = (0..1usize << n_qubits)
        .map(|_| Complex::new(StandardNormal.sample(rng), StandardNormal.sample(rng)))
        .collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    StateVector::from_amplitudes(amps.into_iter().map(|z| z / norm).collect())
}

/// Frame potential of Haar-random states by the same cross-product estimator.
pub fn haar_frame_potential_mc(n_qubits: usize, n_a: usize, n_b: usize, seed: u64) -> Result<FramePotential> {
    check_samples(n_a.min(n_b), "frame potential")?;
    let draw = |side: u64, n: usize| -> Result<Vec<StateVector<f64>>> {
        let seed = derive_seed(seed, &[Purpose::FramePotential as u64, side]);
        (0..n)
            .into_par_iter()
            .map(|i| haar_random_state(n_qubits, &mut sample_rng(seed, i)))
            .collect()
    };
    cross_frame_potential(&draw(0, n_a)?, &draw(1, n_b)?)
}

/// Two-sample estimator over all pairs; the standard error combines the
/// spread of row means and of column means.
fn cross_frame_potential(a: &[StateVector<f64>], b: &[StateVector<f64>]) -> Result<FramePotential> {
    const ROWS_PER_CHUNK: usize = 64;
    let dim = a.first().map_or(0, StateVector::dim);
    let chunks: Vec<(Vec<f64>, Vec<f64>)> = a
        .par_chunks(ROWS_PER_CHUNK)
        .map(|rows| {
            let mut row_means = Vec::with_capacity(rows.len());
            let mut col_sums = vec![0.0; b.len()];
            for psi in rows {
                let mut vals = Vec::with_capacity(b.len());
                for (j, phi) in b.iter().enumerate() {
                    let v = inner_product(psi, phi)?.norm_sqr().powi(2);
                    col_sums[j] += v;
                    vals.push(v);
                }
                row_means.push(mean(&vals));
            }
            Ok((row_means, col_sums))
        })
        .collect::<Result<_>>()?;
    let mut row_means = Vec::with_capacity(a.len());
    let mut col_sums = vec![0.0; b.len()];
    for (rows, cols) in chunks {
        row_means.extend(rows);
        for (acc, c) in col_sums.iter_mut().zip(cols) {
            *acc += c;
        }
    }
    let col_means: Vec<f64> = col_sums.iter().map(|s| s / a.len() as f64).collect();
    let f2 = pairwise_sum(&row_means) / a.len() as f64;
    let var_rows = sample_variance(&row_means).unwrap_or(0.0);
    let var_cols = sample_variance(&col_means).unwrap_or(0.0);
    let std_error = (var_rows / a.len() as f64 + var_cols / b.len() as f64).sqrt();
    let f_haar = haar_frame_potential(dim);
    Ok(FramePotential {
        f2,
        std_error,
        f_haar,
        normalized: (f2 - f_haar) / f_haar,
        normalized_std_error: std_error / f_haar,
        n_a: a.len(),
        n_b: b.len(),
    })
}
