//! Dense quantum states and the linear algebra shared by every other module.
//!
//! # Register convention
//!
//! Registers are big-endian: in an `n`-qubit register, qubit `0` is the most
//! significant bit of a basis index and qubit `n - 1` the least significant.
//! The basis state `|q0 q1 ... q(n-1)>` therefore has index
//! `sum_k q_k * 2^(n - 1 - k)`. Operators acting on a list of target qubits
//! follow the same rule: `targets[0]` is the most significant bit of the
//! operator's own index. Every embedding, partial trace and measurement
//! routine in the crate goes through [`bit_position`] and [`gather_index`].

mod channel;
mod measures;
pub mod random;

pub use channel::{apply_channel, KrausChannel};
pub(crate) use measures::hermitian_eigen;
pub use measures::{
    concurrence, entropy_of_spectrum, fidelity, hermitian_eigenvalues, shannon_entropy,
    trace_distance, von_neumann_entropy, LogBase,
};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const NORM_TOL: f64 = 1e-12;
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Shift of `qubit` inside an `n`-qubit basis index.
#[inline]
pub fn bit_position(qubit: usize, num_qubits: usize) -> usize {
    num_qubits - 1 - qubit
}

/// Reads the bits of `qubits` (in the given order, first = most significant)
/// out of a full register index.
#[inline]
pub fn gather_index(index: usize, qubits: &[usize], num_qubits: usize) -> usize {
    qubits.iter().fold(0, |acc, &q| {
        (acc << 1) | ((index >> bit_position(q, num_qubits)) & 1)
    })
}

/// Writes the bits of `sub` into the positions of `qubits` of `base`.
#[inline]
pub fn scatter_index(base: usize, sub: usize, qubits: &[usize], num_qubits: usize) -> usize {
    let k = qubits.len();
    qubits.iter().enumerate().fold(base, |acc, (j, &q)| {
        let bit = (sub >> (k - 1 - j)) & 1;
        acc | (bit << bit_position(q, num_qubits))
    })
}

pub(crate) fn qubit_mask(qubits: &[usize], num_qubits: usize) -> usize {
    qubits
        .iter()
        .fold(0, |m, &q| m | (1 << bit_position(q, num_qubits)))
}

/// Checks that `qubits` is non-empty, duplicate-free and in range.
pub fn check_qubits(qubits: &[usize], num_qubits: usize) -> Result<()> {
    if qubits.is_empty() {
        return Err(Error::EmptyQubitList);
    }
    let mut seen = 0u64;
    for &q in qubits {
        if q >= num_qubits {
            return Err(Error::QubitOutOfRange {
                index: q,
                num_qubits,
            });
        }
        if seen & (1 << q) != 0 {
            return Err(Error::DuplicateQubit(q));
        }
        seen |= 1 << q;
    }
    Ok(())
}

fn log2_dim(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::InvalidState(format!(
            "dimension {len} is not a power of two"
        )));
    }
    Ok(len.trailing_zeros() as usize)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

pub fn pauli_x() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> CMatrix {
    let i = C64::new(0.0, 1.0);
    CMatrix::from_row_slice(2, 2, &[ZERO, -i, i, ZERO])
}

pub fn pauli_z() -> CMatrix {
    CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// Kronecker product with the left factor on the more significant bits.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Dense complex product `a b`; a plain column-major loop that beats the
/// generic nalgebra path for complex scalars by a wide margin.
pub(crate) fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (m, k, n) = (a.nrows(), a.ncols(), b.ncols());
    assert_eq!(k, b.nrows(), "matmul shape mismatch");
    let mut out = CMatrix::zeros(m, n);
    let (a_s, b_s) = (a.as_slice(), b.as_slice());
    for (c, col) in out.as_mut_slice().chunks_mut(m).enumerate() {
        for (kk, a_col) in a_s.chunks(m).enumerate() {
            let bv = b_s[c * k + kk];
            for (o, x) in col.iter_mut().zip(a_col) {
                *o += x * bv;
            }
        }
    }
    out
}

/// Applies `op` (dimension `2^targets.len()`) to a state vector in place.
pub(crate) fn apply_op_to_vector(
    amps: &mut [C64],
    num_qubits: usize,
    op: &CMatrix,
    targets: &[usize],
) {
    let k = targets.len();
    let sub = 1usize << k;
    debug_assert_eq!(op.nrows(), sub);
    let mask = qubit_mask(targets, num_qubits);
    let offsets: Vec<usize> = (0..sub)
        .map(|j| scatter_index(0, j, targets, num_qubits))
        .collect();
    let mut buf = vec![ZERO; sub];
    for base in 0..amps.len() {
        if base & mask != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = ZERO;
            for (c, b) in buf.iter().enumerate() {
                acc += op[(r, c)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

/// `m <- (op ⊗ I) m (op ⊗ I)^dag` on the given targets.
pub(crate) fn conjugate_in_place(
    m: &mut CMatrix,
    num_qubits: usize,
    op: &CMatrix,
    targets: &[usize],
) {
    let dim = m.nrows();
    for col in m.as_mut_slice().chunks_mut(dim) {
        apply_op_to_vector(col, num_qubits, op, targets);
    }
    m.adjoint_mut();
    for col in m.as_mut_slice().chunks_mut(dim) {
        apply_op_to_vector(col, num_qubits, op, targets);
    }
    m.adjoint_mut();
}

/// A normalized pure state over an ordered qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amps: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes, rejecting non power-of-two lengths and norms that
    /// deviate from one by more than [`NORM_TOL`].
    pub fn new(amps: Vec<C64>) -> Result<Self> {
        let num_qubits = log2_dim(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!(
                "state norm is {norm}, expected 1"
            )));
        }
        Ok(Self { num_qubits, amps })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn from_unnormalized(mut amps: Vec<C64>) -> Result<Self> {
        let num_qubits = log2_dim(amps.len())?;
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-300 || !norm.is_finite() {
            return Err(Error::InvalidState("zero or non-finite norm".into()));
        }
        amps.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { num_qubits, amps })
    }

    /// `|0...0>` on `num_qubits` qubits.
    pub fn zero(num_qubits: usize) -> Self {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: usize) -> Self {
        let mut amps = vec![ZERO; 1 << num_qubits];
        amps[index] = ONE;
        Self { num_qubits, amps }
    }

    /// Tensor product of single-qubit states, factor 0 being qubit 0.
    pub fn product(factors: &[[C64; 2]]) -> Result<Self> {
        let mut amps = vec![ONE];
        for f in factors {
            amps = amps
                .iter()
                .flat_map(|a| [a * f[0], a * f[1]])
                .collect();
        }
        Self::new(amps)
    }

    pub(crate) fn from_raw(num_qubits: usize, amps: Vec<C64>) -> Self {
        debug_assert_eq!(amps.len(), 1 << num_qubits);
        Self { num_qubits, amps }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`
    pub fn inner(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn fidelity(&self, other: &PureState) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Applies `op` to `targets` without re-validating the norm.
    pub fn apply(&mut self, op: &CMatrix, targets: &[usize]) -> Result<()> {
        check_qubits(targets, self.num_qubits)?;
        let sub = 1usize << targets.len();
        if op.nrows() != sub || op.ncols() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: op.nrows(),
            });
        }
        apply_op_to_vector(&mut self.amps, self.num_qubits, op, targets);
        Ok(())
    }

    /// Relabels qubits: qubit `q` of `self` becomes qubit `perm[q]` of the
    /// result.
    pub fn permute_qubits(&self, perm: &[usize]) -> Result<PureState> {
        let n = self.num_qubits;
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        check_qubits(perm, n)?;
        let mut out = vec![ZERO; self.dim()];
        for (idx, a) in self.amps.iter().enumerate() {
            let mut target = 0;
            for (q, &p) in perm.iter().enumerate() {
                let bit = (idx >> bit_position(q, n)) & 1;
                target |= bit << bit_position(p, n);
            }
            out[target] = *a;
        }
        Ok(PureState::from_raw(n, out))
    }

    pub fn to_density(&self) -> DensityMatrix {
        let v = nalgebra::DVector::from_column_slice(&self.amps);
        DensityMatrix {
            num_qubits: self.num_qubits,
            mat: &v * v.adjoint(),
        }
    }
}

/// A density matrix: Hermitian, unit trace, positive semidefinite within the
/// crate tolerances.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    num_qubits: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps a matrix.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch {
                expected: mat.nrows(),
                found: mat.ncols(),
            });
        }
        let num_qubits = log2_dim(mat.nrows())?;
        let rho = Self { num_qubits, mat };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_raw(num_qubits: usize, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.nrows(), 1 << num_qubits);
        Self { num_qubits, mat }
    }

    pub fn maximally_mixed(num_qubits: usize) -> Self {
        let d = 1usize << num_qubits;
        Self {
            num_qubits,
            mat: CMatrix::identity(d, d) / C64::from(d as f64),
        }
    }

    pub fn from_diagonal(probs: &[f64]) -> Result<Self> {
        let mat = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            probs.len(),
            probs.iter().map(|&p| C64::from(p)),
        ));
        Self::new(mat)
    }

    /// Checks the Hermiticity, trace and positivity invariants.
    pub fn validate(&self) -> Result<()> {
        let dev = (&self.mat - self.mat.adjoint())
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (deviation {dev:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace is {tr}, expected 1")));
        }
        let min = hermitian_eigenvalues(&self.mat)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn purity(&self) -> f64 {
        (&self.mat * &self.mat).trace().re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.mat)
    }

    /// `<i|rho|j>`
    pub fn element(&self, i: usize, j: usize) -> C64 {
        self.mat[(i, j)]
    }

    /// `U rho U^dag` with `U` acting on `targets`.
    pub fn conjugate(&self, op: &CMatrix, targets: &[usize]) -> Result<DensityMatrix> {
        check_qubits(targets, self.num_qubits)?;
        let sub = 1usize << targets.len();
        if op.nrows() != sub || op.ncols() != sub {
            return Err(Error::DimensionMismatch {
                expected: sub,
                found: op.nrows(),
            });
        }
        let mut mat = self.mat.clone();
        conjugate_in_place(&mut mat, self.num_qubits, op, targets);
        Ok(Self::from_raw(self.num_qubits, mat))
    }

    pub(crate) fn conjugate_mut(&mut self, op: &CMatrix, targets: &[usize]) {
        conjugate_in_place(&mut self.mat, self.num_qubits, op, targets);
    }
}

/// Anything that can be reduced onto a subset of its qubits or measured in
/// a product basis.
pub trait QuantumState {
    fn num_qubits(&self) -> usize;

    /// Reduced density matrix on `keep`, in ascending register order.
    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix>;

    /// Joint outcome distribution of measuring `qubits` (in that order) in
    /// the product basis whose single-qubit bases are the columns of
    /// `bases[k]` (column 0 = outcome 0). All other qubits are ignored.
    ///
    /// Outcome index uses `qubits[0]` as the most significant bit.
    fn basis_probabilities(&self, qubits: &[usize], bases: &[CMatrix]) -> Result<Vec<f64>>;

    /// The state vector, when the representation is pure.
    fn as_pure(&self) -> Option<&PureState> {
        None
    }
}

fn check_bases(qubits: &[usize], bases: &[CMatrix]) -> Result<()> {
    if qubits.len() != bases.len() {
        return Err(Error::DimensionMismatch {
            expected: qubits.len(),
            found: bases.len(),
        });
    }
    for b in bases {
        if b.nrows() != 2 || b.ncols() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: b.nrows(),
            });
        }
    }
    Ok(())
}

impl QuantumState for PureState {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn as_pure(&self) -> Option<&PureState> {
        Some(self)
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_qubits(keep, self.num_qubits)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let n = self.num_qubits;
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dr = 1usize << rest.len();
        // amplitude matrix A[k, r]; rho = A A^dag
        let mut a = CMatrix::zeros(dk, dr);
        for (idx, amp) in self.amps.iter().enumerate() {
            let k = gather_index(idx, &keep, n);
            let r = gather_index(idx, &rest, n);
            a[(k, r)] = *amp;
        }
        let mat = &a * a.adjoint();
        Ok(DensityMatrix::from_raw(keep.len(), mat))
    }

    fn basis_probabilities(&self, qubits: &[usize], bases: &[CMatrix]) -> Result<Vec<f64>> {
        check_qubits(qubits, self.num_qubits)?;
        check_bases(qubits, bases)?;
        let mut amps = self.amps.clone();
        for (q, b) in qubits.iter().zip(bases) {
            apply_op_to_vector(&mut amps, self.num_qubits, &b.adjoint(), &[*q]);
        }
        let mut probs = vec![0.0; 1 << qubits.len()];
        for (idx, a) in amps.iter().enumerate() {
            probs[gather_index(idx, qubits, self.num_qubits)] += a.norm_sqr();
        }
        Ok(probs)
    }
}

impl QuantumState for DensityMatrix {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        check_qubits(keep, self.num_qubits)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let n = self.num_qubits;
        if keep.len() == n {
            return Ok(self.clone());
        }
        let rest: Vec<usize> = (0..n).filter(|q| !keep.contains(q)).collect();
        let dk = 1usize << keep.len();
        let dr = 1usize << rest.len();
        let full: Vec<Vec<usize>> = (0..dk)
            .map(|k| {
                (0..dr)
                    .map(|r| scatter_index(scatter_index(0, k, &keep, n), r, &rest, n))
                    .collect()
            })
            .collect();
        let mut mat = CMatrix::zeros(dk, dk);
        for i in 0..dk {
            for j in 0..dk {
                let mut acc = ZERO;
                for r in 0..dr {
                    acc += self.mat[(full[i][r], full[j][r])];
                }
                mat[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix::from_raw(keep.len(), mat))
    }

    fn basis_probabilities(&self, qubits: &[usize], bases: &[CMatrix]) -> Result<Vec<f64>> {
        check_qubits(qubits, self.num_qubits)?;
        check_bases(qubits, bases)?;
        let mut sorted: Vec<(usize, usize)> =
            qubits.iter().enumerate().map(|(k, &q)| (q, k)).collect();
        sorted.sort_unstable();
        let keep: Vec<usize> = sorted.iter().map(|&(q, _)| q).collect();
        let mut red = self.reduced(&keep)?;
        let m = keep.len();
        for (pos, &(_, k)) in sorted.iter().enumerate() {
            red.conjugate_mut(&bases[k].adjoint(), &[pos]);
        }
        // position of qubits[k] inside the reduced register
        let order: Vec<usize> = {
            let mut o = vec![0; m];
            for (pos, &(_, k)) in sorted.iter().enumerate() {
                o[k] = pos;
            }
            o
        };
        let mut probs = vec![0.0; 1 << m];
        for i in 0..(1 << m) {
            probs[gather_index(i, &order, m)] += red.mat[(i, i)].re.max(0.0);
        }
        Ok(probs)
    }
}

/// Reduced state on `keep` (ascending register order, trace one).
pub fn partial_trace<S: QuantumState + ?Sized>(state: &S, keep: &[usize]) -> Result<DensityMatrix> {
    state.reduced(keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn bell() -> PureState {
        PureState::new(vec![c(FRAC_1_SQRT_2), ZERO, ZERO, c(FRAC_1_SQRT_2)]).unwrap()
    }

    #[test]
    fn matmul_matches_nalgebra() {
        let a = CMatrix::from_fn(3, 4, |i, j| C64::new(i as f64 - 0.5, j as f64 * 0.3));
        let b = CMatrix::from_fn(4, 2, |i, j| C64::new(0.2 * j as f64, i as f64 + 1.0));
        assert!((matmul(&a, &b) - &a * &b).norm() < 1e-12);
    }

    #[test]
    fn index_helpers_are_big_endian() {
        // |q0 q1 q2> = |1 0 0> has index 4
        assert_eq!(gather_index(4, &[0], 3), 1);
        assert_eq!(gather_index(4, &[2], 3), 0);
        assert_eq!(gather_index(0b110, &[2, 0], 3), 0b01);
        assert_eq!(scatter_index(0, 0b10, &[0, 2], 3), 0b100);
    }

    #[test]
    fn pure_state_rejects_bad_norm_and_length() {
        assert!(PureState::new(vec![c(1.0), c(1.0)]).is_err());
        assert!(PureState::new(vec![c(1.0), ZERO, ZERO]).is_err());
    }

    #[test]
    fn bell_reduces_to_maximally_mixed() {
        let rho = partial_trace(&bell(), &[0]).unwrap();
        assert_abs_diff_eq!(rho.element(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(1, 1).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(0, 1).norm(), 0.0, epsilon = 1e-15);
        let rho_d = partial_trace(&bell().to_density(), &[1]).unwrap();
        assert!((rho_d.matrix() - rho.matrix()).norm() < 1e-15);
    }

    #[test]
    fn product_state_factorizes() {
        let h = FRAC_1_SQRT_2;
        let psi = PureState::product(&[[ONE, ZERO], [c(h), c(h)]]).unwrap();
        let rho = partial_trace(&psi, &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_abs_diff_eq!(rho.element(i, j).re, 0.5, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn partial_trace_errors() {
        assert!(matches!(
            partial_trace(&bell(), &[]),
            Err(Error::EmptyQubitList)
        ));
        assert!(matches!(
            partial_trace(&bell(), &[2]),
            Err(Error::QubitOutOfRange { .. })
        ));
        assert!(matches!(
            partial_trace(&bell(), &[1, 1]),
            Err(Error::DuplicateQubit(1))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let bad = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.5), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(bad).is_err());
        let neg = CMatrix::from_row_slice(2, 2, &[c(1.2), ZERO, ZERO, c(-0.2)]);
        assert!(DensityMatrix::new(neg).is_err());
        assert!(DensityMatrix::from_diagonal(&[0.25, 0.75]).is_ok());
    }

    #[test]
    fn basis_probabilities_agree_between_representations() {
        let h = FRAC_1_SQRT_2;
        let hadamard = CMatrix::from_row_slice(2, 2, &[c(h), c(h), c(h), c(-h)]);
        let psi = bell();
        let bases = [hadamard.clone(), identity(2)];
        let p_pure = psi.basis_probabilities(&[1, 0], &bases).unwrap();
        let p_mixed = psi.to_density().basis_probabilities(&[1, 0], &bases).unwrap();
        for (a, b) in p_pure.iter().zip(&p_mixed) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-14);
        }
        for p in p_pure {
            assert_abs_diff_eq!(p, 0.25, epsilon = 1e-14);
        }
    }

    #[test]
    fn permute_qubits_moves_bits() {
        // |10> -> swap -> |01>
        let psi = PureState::basis(2, 0b10);
        let out = psi.permute_qubits(&[1, 0]).unwrap();
        assert_eq!(out.amplitudes()[0b01], ONE);
    }
}
