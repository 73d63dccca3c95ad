//! Random states and unitaries for property tests and benchmarks.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{CMatrix, DensityMatrix, PureState, C64};

fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-random unitary (QR of a Ginibre matrix with the phase fix).
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(dim, dim, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::from(1.0) };
        for i in 0..dim {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn random_pure<R: Rng + ?Sized>(num_qubits: usize, rng: &mut R) -> PureState {
    let amps: Vec<C64> = ginibre(1 << num_qubits, 1, rng).iter().copied().collect();
    PureState::from_unnormalized(amps).expect("gaussian vector is non-zero")
}

/// Random mixed state `G G^dag / Tr` with `G` of shape `2^n x rank`.
pub fn random_density<R: Rng + ?Sized>(num_qubits: usize, rank: usize, rng: &mut R) -> DensityMatrix {
    let g = ginibre(1 << num_qubits, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = m.trace();
    let mat = m / tr;
    // enforce exact Hermiticity after the division
    let mat = (&mat + mat.adjoint()) * C64::from(0.5);
    DensityMatrix::from_raw(num_qubits, mat)
}
