//! Weighted sums of Pauli strings and their expectation values.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};
use crate::statevector::{Pauli, StateVector};

/// Tensor product of single-site Paulis; sites not listed carry the identity.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PauliString {
    sites: BTreeMap<usize, Pauli>,
    x_mask: usize,
    z_mask: usize,
    n_y: u32,
}

impl PauliString {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Builds a string from `(site, pauli)` pairs. Repeated sites are rejected.
    pub fn new(ops: impl IntoIterator<Item = (usize, Pauli)>) -> Result<Self> {
        let mut sites = BTreeMap::new();
        for (site, p) in ops {
            if sites.insert(site, p).is_some() {
                return Err(Error::Parameter(format!("site {site} repeated in Pauli string")));
            }
        }
        let mut x_mask = 0;
        let mut z_mask = 0;
        let mut n_y = 0;
        for (&site, &p) in &sites {
            if site >= usize::BITS as usize {
                return Err(Error::Index {
                    index: site,
                    limit: usize::BITS as usize,
                });
            }
            let bit = 1usize << site;
            match p {
                Pauli::X => x_mask |= bit,
                Pauli::Z => z_mask |= bit,
                Pauli::Y => {
                    x_mask |= bit;
                    z_mask |= bit;
                    n_y += 1;
                }
            }
        }
        Ok(Self {
            sites,
            x_mask,
            z_mask,
            n_y,
        })
    }

    pub fn single(site: usize, pauli: Pauli) -> Self {
        Self::new([(site, pauli)]).expect("single-site string")
    }

    pub fn sites(&self) -> &BTreeMap<usize, Pauli> {
        &self.sites
    }

    pub fn max_site(&self) -> Option<usize> {
        self.sites.keys().next_back().copied()
    }

    pub fn is_identity(&self) -> bool {
        self.sites.is_empty()
    }

    /// Returns `(j, phase)` such that `P|i> = phase |j>`.
    ///
    /// Uses `Y = i X Z` on every Y site.
    #[inline]
    fn act<T: Real>(&self, i: usize) -> (usize, Complex<T>) {
        let sign = if (i & self.z_mask).count_ones().is_multiple_of(2) {
            T::one()
        } else {
            -T::one()
        };
        let phase = match self.n_y % 4 {
            0 => Complex::new(sign, T::zero()),
            1 => Complex::new(T::zero(), sign),
            2 => Complex::new(-sign, T::zero()),
            _ => Complex::new(T::zero(), -sign),
        };
        (i ^ self.x_mask, phase)
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.sites.is_empty() {
            return write!(f, "I");
        }
        for (i, (site, p)) in self.sites.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}{}", p.symbol(), site)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm<T> {
    pub coefficient: T,
    pub string: PauliString,
}

/// Real-weighted sum of Pauli strings on `n_qubits` qubits. Hermitian by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum<T> {
    n_qubits: usize,
    terms: Vec<PauliTerm<T>>,
}

impl<T: Real> PauliSum<T> {
    pub fn new(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            terms: Vec::new(),
        }
    }

    pub fn push(&mut self, coefficient: T, string: PauliString) -> Result<()> {
        if !coefficient.is_finite() {
            return Err(Error::Parameter(format!(
                "non-finite coefficient {coefficient} on term {string}"
            )));
        }
        if let Some(site) = string.max_site() {
            if site >= self.n_qubits {
                return Err(Error::Index {
                    index: site,
                    limit: self.n_qubits,
                });
            }
        }
        self.terms.push(PauliTerm { coefficient, string });
        Ok(())
    }

    pub fn with_term(mut self, coefficient: T, string: PauliString) -> Result<Self> {
        self.push(coefficient, string)?;
        Ok(self)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm<T>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Relabels every site `n` as `(n + shift) mod n_qubits`.
    pub fn cyclic_shift(&self, shift: usize) -> Self {
        let n = self.n_qubits;
        let terms = self
            .terms
            .iter()
            .map(|t| PauliTerm {
                coefficient: t.coefficient,
                string: PauliString::new(t.string.sites().iter().map(|(&s, &p)| ((s + shift) % n, p)))
                    .expect("shift is a bijection on sites"),
            })
            .collect();
        Self { n_qubits: n, terms }
    }

    /// Dense `2^N x 2^N` matrix in `f64`.
    pub fn to_dense(&self) -> DMatrix<Complex<f64>> {
        let dim = 1usize << self.n_qubits;
        let mut m = DMatrix::from_element(dim, dim, Complex::new(0.0, 0.0));
        for term in &self.terms {
            let w = term.coefficient.as_f64();
            for i in 0..dim {
                let (j, phase) = term.string.act::<f64>(i);
                m[(j, i)] += phase * w;
            }
        }
        m
    }
}

/// `<psi|H|psi>` for a normalized state.
///
/// Fails with a validation error if the imaginary part is not negligible.
pub fn expectation<T: Real>(state: &StateVector<T>, h: &PauliSum<T>) -> Result<T> {
    if state.n_qubits() != h.n_qubits() {
        return Err(Error::Shape {
            expected: h.n_qubits(),
            got: state.n_qubits(),
        });
    }
    let amps = state.amplitudes();
    let mut total = Complex::new(T::zero(), T::zero());
    let mut scale = T::zero();
    for term in &h.terms {
        let s = &term.string;
        let value = if s.x_mask == 0 && s.n_y == 0 {
            let mut acc = T::zero();
            for (i, a) in amps.iter().enumerate() {
                let p = a.norm_sqr();
                if (i & s.z_mask).count_ones() % 2 == 0 {
                    acc += p;
                } else {
                    acc -= p;
                }
            }
            Complex::new(acc, T::zero())
        } else {
            let mut acc = Complex::new(T::zero(), T::zero());
            for (i, a) in amps.iter().enumerate() {
                let (j, phase) = s.act::<T>(i);
                acc += amps[j].conj() * phase * a;
            }
            acc
        };
        total += value * term.coefficient;
        scale += term.coefficient.abs();
    }
    if total.im.abs() > T::check_tol() * (T::one() + scale) {
        return Err(Error::Validation(format!(
            "expectation has imaginary part {}",
            total.im
        )));
    }
    Ok(total.re)
}
