//! Dense statevector engine.
//!
//! Basis index convention: qubit 0 is the least-significant bit, so the
//! amplitude of `|q_{N-1} ... q_1 q_0>` lives at index `sum_n q_n 2^n`.

use crate::error::{Error, Result};
use crate::scalar::{Complex, Real};

/// Largest register the engine will allocate.
pub const MAX_QUBITS: usize = 24;

/// Single-qubit Pauli operator label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn symbol(self) -> char {
        match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Elementary operation on a statevector.
///
/// Rotations follow `R_P(theta) = exp(-i theta P / 2)`. `PauliFactor`
/// multiplies the state by `scalar * P` on one qubit and is generally not
/// unitary; it exists so derivative states reuse the ordinary gate path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate<T> {
    Ry { qubit: usize, angle: T },
    Rz { qubit: usize, angle: T },
    Cnot { control: usize, target: usize },
    PauliFactor {
        qubit: usize,
        pauli: Pauli,
        scalar: Complex<T>,
    },
}

impl<T: Real> Gate<T> {
    fn check(&self, n_qubits: usize) -> Result<()> {
        let in_range = |q: usize| {
            if q < n_qubits {
                Ok(())
            } else {
                Err(Error::Index {
                    index: q,
                    limit: n_qubits,
                })
            }
        };
        match *self {
            Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } | Gate::PauliFactor { qubit, .. } => {
                in_range(qubit)
            }
            Gate::Cnot { control, target } => {
                in_range(control)?;
                in_range(target)?;
                if control == target {
                    return Err(Error::Parameter(format!(
                        "CNOT control and target coincide on qubit {control}"
                    )));
                }
                Ok(())
            }
        }
    }
}

/// Pure state of `n_qubits` qubits stored as `2^n_qubits` complex amplitudes.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T> {
    n_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

/// `|0...0>` on `n_qubits` qubits.
pub fn zero_state<T: Real>(n_qubits: usize) -> Result<StateVector<T>> {
    StateVector::zero(n_qubits)
}

impl<T: Real> StateVector<T> {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_size(n_qubits)?;
        let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << n_qubits];
        amplitudes[0] = Complex::new(T::one(), T::zero());
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Wraps raw amplitudes. No normalization is applied or checked.
    pub fn from_amplitudes(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Size(format!(
                "amplitude count {len} is not a power of two >= 2"
            )));
        }
        let n_qubits = len.trailing_zeros() as usize;
        check_size(n_qubits)?;
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    /// Computational basis state `|index>`.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        let mut state = Self::zero(n_qubits)?;
        if index >= state.dim() {
            return Err(Error::Index {
                index,
                limit: state.dim(),
            });
        }
        state.amplitudes[0] = Complex::new(T::zero(), T::zero());
        state.amplitudes[index] = Complex::new(T::one(), T::zero());
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex<T>> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> T {
        self.norm_sqr().sqrt()
    }

    /// Value-semantics gate application.
    pub fn apply(&self, gate: &Gate<T>) -> Result<Self> {
        let mut out = self.clone();
        out.apply_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_in_place(&mut self, gate: &Gate<T>) -> Result<()> {
        gate.check(self.n_qubits)?;
        match *gate {
            Gate::Ry { qubit, angle } => {
                let half = angle / T::lit(2.0);
                let (s, c) = half.sin_cos();
                self.for_each_pair(qubit, |a0, a1| {
                    let (x0, x1) = (*a0, *a1);
                    *a0 = x0 * c - x1 * s;
                    *a1 = x0 * s + x1 * c;
                });
            }
            Gate::Rz { qubit, angle } => {
                let half = angle / T::lit(2.0);
                let (s, c) = half.sin_cos();
                let lower = Complex::new(c, -s);
                let upper = Complex::new(c, s);
                self.for_each_pair(qubit, |a0, a1| {
                    *a0 *= lower;
                    *a1 *= upper;
                });
            }
            Gate::Cnot { control, target } => {
                let cbit = 1usize << control;
                let tbit = 1usize << target;
                for i in 0..self.amplitudes.len() {
                    if i & cbit != 0 && i & tbit == 0 {
                        self.amplitudes.swap(i, i | tbit);
                    }
                }
            }
            Gate::PauliFactor {
                qubit,
                pauli,
                scalar,
            } => {
                let i = Complex::new(T::zero(), T::one());
                match pauli {
                    Pauli::X => self.for_each_pair(qubit, |a0, a1| {
                        let (x0, x1) = (*a0, *a1);
                        *a0 = scalar * x1;
                        *a1 = scalar * x0;
                    }),
                    Pauli::Y => self.for_each_pair(qubit, |a0, a1| {
                        let (x0, x1) = (*a0, *a1);
                        *a0 = -(scalar * i * x1);
                        *a1 = scalar * i * x0;
                    }),
                    Pauli::Z => self.for_each_pair(qubit, |a0, a1| {
                        *a0 *= scalar;
                        *a1 = -(*a1 * scalar);
                    }),
                }
            }
        }
        Ok(())
    }

    /// Calls `f(a_i, a_{i | 2^qubit})` for every index `i` with the qubit bit clear.
    #[inline]
    fn for_each_pair<F>(&mut self, qubit: usize, mut f: F)
    where
        F: FnMut(&mut Complex<T>, &mut Complex<T>),
    {
        let stride = 1usize << qubit;
        for block in self.amplitudes.chunks_exact_mut(2 * stride) {
            let (lo, hi) = block.split_at_mut(stride);
            for (a0, a1) in lo.iter_mut().zip(hi.iter_mut()) {
                f(a0, a1);
            }
        }
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        inner_product(self, other)
    }
}

/// `<a|b> = sum_i conj(a_i) b_i`.
pub fn inner_product<T: Real>(a: &StateVector<T>, b: &StateVector<T>) -> Result<Complex<T>> {
    if a.dim() != b.dim() {
        return Err(Error::Shape {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let mut acc = Complex::new(T::zero(), T::zero());
    for (x, y) in a.amplitudes.iter().zip(&b.amplitudes) {
        acc += x.conj() * y;
    }
    Ok(acc)
}

/// Value-semantics wrapper around [`StateVector::apply`].
pub fn apply_gate<T: Real>(state: &StateVector<T>, gate: &Gate<T>) -> Result<StateVector<T>> {
    state.apply(gate)
}

fn check_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(Error::Size(format!(
            "n_qubits = {n_qubits} outside 1..={MAX_QUBITS}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    type C = Complex<f64>;

    fn c(re: f64, im: f64) -> C {
        C::new(re, im)
    }

    fn assert_close(a: &[C], b: &[C], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).norm() < tol, "{x} vs {y}");
        }
    }

    // Dense operator for a single-qubit matrix on `qubit`, built by Kronecker
    // products with qubit 0 as the rightmost factor.
    fn embed(single: &DMatrix<C>, qubit: usize, n: usize) -> DMatrix<C> {
        let eye = DMatrix::<C>::identity(2, 2);
        let mut m = DMatrix::<C>::identity(1, 1);
        for q in (0..n).rev() {
            m = m.kronecker(if q == qubit { single } else { &eye });
        }
        m
    }

    fn dense_gate(gate: &Gate<f64>, n: usize) -> DMatrix<C> {
        match *gate {
            Gate::Ry { qubit, angle } => {
                let (s, co) = (angle / 2.0).sin_cos();
                let m = DMatrix::from_row_slice(2, 2, &[c(co, 0.), c(-s, 0.), c(s, 0.), c(co, 0.)]);
                embed(&m, qubit, n)
            }
            Gate::Rz { qubit, angle } => {
                let m = DMatrix::from_row_slice(
                    2,
                    2,
                    &[C::from_polar(1.0, -angle / 2.0), c(0., 0.), c(0., 0.), C::from_polar(1.0, angle / 2.0)],
                );
                embed(&m, qubit, n)
            }
            Gate::Cnot { control, target } => {
                let p0 = DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
                let p1 = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., 0.), c(0., 0.), c(1., 0.)]);
                let x = DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]);
                embed(&p0, control, n) + embed(&p1, control, n) * embed(&x, target, n)
            }
            Gate::PauliFactor { qubit, pauli, scalar } => {
                let m = match pauli {
                    Pauli::X => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]),
                    Pauli::Y => DMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]),
                    Pauli::Z => DMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]),
                };
                embed(&m, qubit, n) * scalar
            }
        }
    }

    #[test]
    fn zero_state_examples() {
        let s1 = zero_state::<f64>(1).unwrap();
        assert_eq!(s1.amplitudes(), &[c(1., 0.), c(0., 0.)]);
        let s2 = zero_state::<f64>(2).unwrap();
        assert_eq!(s2.amplitudes(), &[c(1., 0.), c(0., 0.), c(0., 0.), c(0., 0.)]);
        assert!(matches!(zero_state::<f64>(0), Err(Error::Size(_))));
        assert!(matches!(zero_state::<f64>(MAX_QUBITS + 1), Err(Error::Size(_))));
    }

    #[test]
    fn gate_examples() {
        let s = zero_state::<f64>(1).unwrap();
        let flipped = s.apply(&Gate::Ry { qubit: 0, angle: PI }).unwrap();
        assert_close(flipped.amplitudes(), &[c(0., 0.), c(1., 0.)], 1e-15);

        let s = StateVector::<f64>::basis(2, 1).unwrap();
        let out = s.apply(&Gate::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(out, StateVector::basis(2, 3).unwrap());

        let s = zero_state::<f64>(1).unwrap();
        let out = s.apply(&Gate::Rz { qubit: 0, angle: PI / 2.0 }).unwrap();
        assert_close(out.amplitudes(), &[C::from_polar(1.0, -PI / 4.0), c(0., 0.)], 1e-15);
    }

    #[test]
    fn gate_index_errors() {
        let s = zero_state::<f64>(2).unwrap();
        assert!(matches!(
            s.apply(&Gate::Ry { qubit: 2, angle: 0.1 }),
            Err(Error::Index { index: 2, limit: 2 })
        ));
        assert!(matches!(
            s.apply(&Gate::Cnot { control: 0, target: 5 }),
            Err(Error::Index { .. })
        ));
        assert!(matches!(
            s.apply(&Gate::Cnot { control: 1, target: 1 }),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn inner_product_examples() {
        let zero = zero_state::<f64>(1).unwrap();
        let one = StateVector::<f64>::basis(1, 1).unwrap();
        assert_eq!(inner_product(&zero, &one).unwrap(), c(0., 0.));
        let plus = StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.), c(FRAC_1_SQRT_2, 0.)]).unwrap();
        assert!((inner_product(&zero, &plus).unwrap() - c(FRAC_1_SQRT_2, 0.)).norm() < 1e-15);
        assert!((inner_product(&plus, &plus).unwrap() - c(1., 0.)).norm() < 1e-10);
        let two = zero_state::<f64>(2).unwrap();
        assert!(matches!(inner_product(&zero, &two), Err(Error::Shape { .. })));
    }

    #[test]
    fn pauli_factor_matches_definition() {
        let s = zero_state::<f64>(1).unwrap();
        let y = s
            .apply(&Gate::PauliFactor { qubit: 0, pauli: Pauli::Y, scalar: c(0., -0.5) })
            .unwrap();
        // (-i/2) Y |0> = (-i/2)(i|1>) = |1>/2
        assert_close(y.amplitudes(), &[c(0., 0.), c(0.5, 0.)], 1e-15);
    }

    #[test]
    fn single_precision_state_stays_normalized() {
        let mut s = zero_state::<f32>(3).unwrap();
        for q in 0..3 {
            s.apply_in_place(&Gate::Ry { qubit: q, angle: 0.7 }).unwrap();
            s.apply_in_place(&Gate::Rz { qubit: q, angle: -1.3 }).unwrap();
        }
        s.apply_in_place(&Gate::Cnot { control: 2, target: 0 }).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-6);
    }

    fn arb_gate(n: usize) -> impl Strategy<Value = Gate<f64>> {
        let angle = -10.0..10.0f64;
        prop_oneof![
            (0..n, angle.clone()).prop_map(|(qubit, angle)| Gate::Ry { qubit, angle }),
            (0..n, angle).prop_map(|(qubit, angle)| Gate::Rz { qubit, angle }),
            (0..n, 1..n).prop_map(move |(control, off)| Gate::Cnot { control, target: (control + off) % n }),
            (0..n, prop_oneof![Just(Pauli::X), Just(Pauli::Y), Just(Pauli::Z)], -2.0..2.0f64, -2.0..2.0f64)
                .prop_map(|(qubit, pauli, re, im)| Gate::PauliFactor { qubit, pauli, scalar: c(re, im) }),
        ]
    }

    proptest! {
        #[test]
        fn gates_match_dense_kronecker_oracle((n, gate) in (2usize..=4).prop_flat_map(|n| (Just(n), arb_gate(n)))) {
            let dense = dense_gate(&gate, n);
            for basis in 0..(1usize << n) {
                let s = StateVector::<f64>::basis(n, basis).unwrap();
                let out = s.apply(&gate).unwrap();
                let col = dense.column(basis);
                for (i, amp) in out.amplitudes().iter().enumerate() {
                    prop_assert!((amp - col[i]).norm() < 1e-12);
                }
            }
        }

        #[test]
        fn unitary_gates_preserve_norm(
            gates in proptest::collection::vec(arb_gate(4), 1..30)
        ) {
            let mut s = zero_state::<f64>(4).unwrap();
            for g in gates.iter().filter(|g| !matches!(g, Gate::PauliFactor { .. })) {
                let before = s.norm();
                s.apply_in_place(g).unwrap();
                prop_assert!((s.norm() - before).abs() < 1e-12);
            }
        }

        #[test]
        fn inner_product_is_conjugate_symmetric(
            a in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8),
            b in proptest::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 8),
        ) {
            let sa = StateVector::from_amplitudes(a.iter().map(|&(r, i)| c(r, i)).collect()).unwrap();
            let sb = StateVector::from_amplitudes(b.iter().map(|&(r, i)| c(r, i)).collect()).unwrap();
            let ab = inner_product(&sa, &sb).unwrap();
            let ba = inner_product(&sb, &sa).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-14);
        }
    }
}
