use serde::{Deserialize, Serialize};

use super::{pauli_y, CMatrix, DensityMatrix, C64};
use crate::{Error, Result};

/// Eigenvalues below this are treated as exact zeros in `0 log 0`.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// Logarithm base for entropies and mutual informations. Bits by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LogBase {
    #[default]
    Bits,
    Nats,
}

impl LogBase {
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogBase::Bits => x.log2(),
            LogBase::Nats => x.ln(),
        }
    }

    /// Multiplier taking a value in `self` units to `other` units.
    pub fn convert_to(self, other: LogBase) -> f64 {
        match (self, other) {
            (LogBase::Bits, LogBase::Nats) => std::f64::consts::LN_2,
            (LogBase::Nats, LogBase::Bits) => std::f64::consts::LOG2_E,
            _ => 1.0,
        }
    }
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigen-decomposition of the Hermitian part of `m`.
pub(crate) fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let h = (m + m.adjoint()) * C64::from(0.5);
    let eig = h.symmetric_eigen();
    (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
}

/// `f(h)` for Hermitian `h` via its eigenbasis.
pub(crate) fn hermitian_map(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (vals, vecs) = hermitian_eigen(m);
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        vals.len(),
        vals.iter().map(|&v| C64::from(f(v))),
    ));
    &vecs * d * vecs.adjoint()
}

/// `-sum p log p` over entries above [`EIGEN_CUTOFF`].
pub fn entropy_of_spectrum(spectrum: &[f64], base: LogBase) -> f64 {
    spectrum
        .iter()
        .filter(|&&p| p > EIGEN_CUTOFF)
        .map(|&p| -p * base.log(p))
        .sum()
}

/// Shannon entropy of a (not necessarily normalized) probability vector.
pub fn shannon_entropy(probs: &[f64], base: LogBase) -> f64 {
    entropy_of_spectrum(probs, base)
}

pub fn von_neumann_entropy(rho: &DensityMatrix, base: LogBase) -> f64 {
    if rho.dim() == 1 {
        return 0.0;
    }
    entropy_of_spectrum(&rho.eigenvalues(), base)
}

fn same_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(())
}

/// `||a - b||_1 / 2` from the singular values of the difference.
pub fn trace_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dims(a, b)?;
    let diff = a.matrix() - b.matrix();
    let sv = diff.singular_values();
    Ok((0.5 * sv.iter().sum::<f64>()).clamp(0.0, 1.0))
}

/// Eigenvector of `rho` when it is pure to within `1e-12` in its top
/// eigenvalue.
fn pure_vector(rho: &DensityMatrix) -> Option<nalgebra::DVector<C64>> {
    let (vals, vecs) = hermitian_eigen(rho.matrix());
    let (k, &top) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    (top >= 1.0 - 1e-12).then(|| vecs.column(k).into_owned())
}

/// Uhlmann fidelity `(Tr sqrt(sqrt(a) b sqrt(a)))^2`.
///
/// A pure argument takes the exact `<psi|b|psi>` form; square roots of
/// rounding-level eigenvalues would otherwise leak `~1e-8` errors.
pub fn fidelity(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    same_dims(a, b)?;
    for (p, other) in [(a, b), (b, a)] {
        if let Some(v) = pure_vector(p) {
            let f = v.dotc(&(other.matrix() * &v)).re;
            return Ok(f.clamp(0.0, 1.0));
        }
    }
    let sqrt_a = hermitian_map(a.matrix(), |v| v.max(0.0).sqrt());
    let inner = &sqrt_a * b.matrix() * &sqrt_a;
    let root_sum: f64 = hermitian_eigenvalues(&inner)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .sum();
    Ok((root_sum * root_sum).clamp(0.0, 1.0))
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.num_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let yy = pauli_y().kronecker(&pauli_y());
    let tilde = &yy * rho.matrix().conjugate() * &yy;
    // sqrt(rho) tilde sqrt(rho) is Hermitian and shares its spectrum with
    // rho tilde.
    let sqrt_rho = hermitian_map(rho.matrix(), |v| v.max(0.0).sqrt());
    let r = &sqrt_rho * tilde * &sqrt_rho;
    let mut lambdas: Vec<f64> = hermitian_eigenvalues(&r)
        .into_iter()
        .map(|v| v.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|x, y| y.total_cmp(x));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}
