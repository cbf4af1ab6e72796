//! Transverse and longitudinal field Ising model (TLFIM) on a periodic chain,
//! exact extremal eigenvalues, and the relative residual energy.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::{Complex, Real};
use crate::statevector::Pauli;

/// Largest register accepted by the dense eigensolver.
pub const MAX_DIAG_QUBITS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TlfimParams {
    pub n_sites: usize,
    pub j: f64,
    pub h_x: f64,
    pub h_z: f64,
}

impl TlfimParams {
    /// Unit couplings `J = h_X = h_Z = 1`.
    pub fn unit(n_sites: usize) -> Self {
        Self {
            n_sites,
            j: 1.0,
            h_x: 1.0,
            h_z: 1.0,
        }
    }
}

/// Hamiltonian density
/// `(1/N) sum_n (J Z_n Z_{n+1} + h_X X_n + h_Z Z_n)` with site `N` identified with site 0.
///
/// Terms are emitted as the `N` ZZ bonds, then the `N` X fields, then the `N` Z fields.
/// For `N = 2` both bonds `Z0 Z1` and `Z1 Z0` are kept.
pub fn build_tlfim<T: Real>(params: &TlfimParams) -> Result<PauliSum<T>> {
    let n = params.n_sites;
    if n < 2 {
        return Err(Error::Parameter(format!(
            "TLFIM needs at least 2 sites for the periodic bond, got {n}"
        )));
    }
    let inv_n = 1.0 / n as f64;
    let mut h = PauliSum::new(n);
    for site in 0..n {
        let bond = if site + 1 == n {
            // wrap bond listed as (N-1, 0); for N = 2 this coincides with Z0 Z1
            PauliString::new([(site, Pauli::Z), ((site + 1) % n, Pauli::Z)])?
        } else {
            PauliString::new([(site, Pauli::Z), (site + 1, Pauli::Z)])?
        };
        h.push(T::lit(params.j * inv_n), bond)?;
    }
    for site in 0..n {
        h.push(T::lit(params.h_x * inv_n), PauliString::single(site, Pauli::X))?;
    }
    for site in 0..n {
        h.push(T::lit(params.h_z * inv_n), PauliString::single(site, Pauli::Z))?;
    }
    Ok(h)
}

/// Smallest and largest eigenvalue of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spectrum<T> {
    pub lambda_min: T,
    pub lambda_max: T,
}

impl<T: Real> Spectrum<T> {
    pub fn width(&self) -> T {
        self.lambda_max - self.lambda_min
    }

    pub fn cast<U: Real>(&self) -> Spectrum<U> {
        Spectrum {
            lambda_min: U::lit(self.lambda_min.as_f64()),
            lambda_max: U::lit(self.lambda_max.as_f64()),
        }
    }
}

/// Exact extremal eigenvalues by dense Hermitian diagonalization in `f64`.
pub fn extremal_eigenvalues<T: Real>(h: &PauliSum<T>) -> Result<Spectrum<T>> {
    if h.n_qubits() > MAX_DIAG_QUBITS {
        return Err(Error::Size(format!(
            "dense diagonalization limited to {MAX_DIAG_QUBITS} qubits, got {}",
            h.n_qubits()
        )));
    }
    let spec = dense_extremal_eigenvalues(&h.to_dense())?;
    Ok(spec.cast())
}

/// Extremal eigenvalues of a dense matrix, which must be Hermitian.
pub fn dense_extremal_eigenvalues(m: &DMatrix<Complex<f64>>) -> Result<Spectrum<f64>> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Shape {
            expected: m.nrows(),
            got: m.ncols(),
        });
    }
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let asym = m
        .iter()
        .zip(m.adjoint().iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    if asym > 1e-12 * scale {
        return Err(Error::Validation(format!(
            "matrix is not Hermitian (max |H - H^dagger| = {asym:e})"
        )));
    }
    let eigenvalues: Vec<f64> = if m.iter().all(|z| z.im == 0.0) {
        m.map(|z| z.re).symmetric_eigenvalues().iter().copied().collect()
    } else {
        m.symmetric_eigenvalues().iter().copied().collect()
    };
    let lambda_min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(Spectrum {
        lambda_min,
        lambda_max,
    })
}

/// `(energy - lambda_min) / (lambda_max - lambda_min)`, unclamped.
pub fn relative_residual_energy<T: Real>(energy: T, spectrum: &Spectrum<T>) -> Result<T> {
    let width = spectrum.width();
    let scale = spectrum.lambda_min.abs().max(spectrum.lambda_max.abs()).max(T::one());
    if !(width > T::epsilon() * scale * T::lit(16.0)) {
        return Err(Error::DegenerateSpectrum {
            width: width.as_f64(),
        });
    }
    Ok((energy - spectrum.lambda_min) / width)
}
