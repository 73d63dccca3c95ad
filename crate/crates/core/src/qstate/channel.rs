use super::{check_qubits, conjugate_in_place, identity, pauli_x, pauli_y, pauli_z, CMatrix, DensityMatrix, C64, ZERO};
use crate::{Error, Result};

const COMPLETENESS_TOL: f64 = 1e-10;

/// A CPTP map in Kraus form. Optional weights are folded into the operators
/// as `sqrt(w_i) K_i` at construction.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
    num_qubits: usize,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>, weights: Option<&[f64]>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one operator".into()))?;
        let dim = first.nrows();
        if !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "operator dimension {dim} is not a power of two"
            )));
        }
        for op in &ops {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: op.nrows().max(op.ncols()),
                });
            }
        }
        let ops = match weights {
            None => ops,
            Some(w) => {
                if w.len() != ops.len() {
                    return Err(Error::DimensionMismatch {
                        expected: ops.len(),
                        found: w.len(),
                    });
                }
                if w.iter().any(|&x| !(x >= 0.0)) {
                    return Err(Error::InvalidParameter("negative channel weight".into()));
                }
                ops.into_iter()
                    .zip(w)
                    .map(|(k, &x)| k * C64::from(x.sqrt()))
                    .collect()
            }
        };
        let ch = Self {
            num_qubits: dim.trailing_zeros() as usize,
            ops,
        };
        let dev = ch.completeness_deviation();
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(ch)
    }

    /// Single collision map `rho -> (K rho K^dag + K^dag rho K) / 2` with
    /// `K = diag(e^{-i theta/2}, e^{i theta/2})`.
    pub fn collision(theta: f64) -> Self {
        let k = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            C64::from_polar(1.0, -theta / 2.0),
            C64::from_polar(1.0, theta / 2.0),
        ]));
        let kd = k.adjoint();
        Self::new(vec![k, kd], Some(&[0.5, 0.5])).expect("collision map is unital and CPTP")
    }

    pub fn unitary(u: CMatrix) -> Result<Self> {
        Self::new(vec![u], None)
    }

    /// `rho -> (1-p) rho + p I/2^k` on `k` qubits, via the Pauli twirl.
    pub fn depolarizing(p: f64, num_qubits: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "depolarizing probability {p} outside [0, 1]"
            )));
        }
        let paulis = [identity(2), pauli_x(), pauli_y(), pauli_z()];
        let count = 4usize.pow(num_qubits as u32);
        let mut ops = Vec::with_capacity(count);
        let mut weights = Vec::with_capacity(count);
        for idx in 0..count {
            let mut op = CMatrix::from_element(1, 1, C64::from(1.0));
            for k in (0..num_qubits).rev() {
                op = op.kronecker(&paulis[(idx >> (2 * k)) & 3]);
            }
            ops.push(op);
            let w = p / count as f64 + if idx == 0 { 1.0 - p } else { 0.0 };
            weights.push(w);
        }
        Self::new(ops, Some(&weights))
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!(
                "damping probability {gamma} outside [0, 1]"
            )));
        }
        let k0 = CMatrix::from_row_slice(
            2,
            2,
            &[C64::from(1.0), ZERO, ZERO, C64::from((1.0 - gamma).sqrt())],
        );
        let k1 = CMatrix::from_row_slice(2, 2, &[ZERO, C64::from(gamma.sqrt()), ZERO, ZERO]);
        Self::new(vec![k0, k1], None)
    }

    pub fn operators(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// `max |sum_i K_i^dag K_i - I|` elementwise.
    pub fn completeness_deviation(&self) -> f64 {
        let dim = 1usize << self.num_qubits;
        let sum = self
            .ops
            .iter()
            .fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        (sum - identity(dim))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }
}

/// Applies `ch` to the `targets` of `rho`: `sum_i (K_i ⊗ I) rho (K_i ⊗ I)^dag`.
pub fn apply_channel(rho: &DensityMatrix, ch: &KrausChannel, targets: &[usize]) -> Result<DensityMatrix> {
    check_qubits(targets, rho.num_qubits())?;
    if targets.len() != ch.num_qubits {
        return Err(Error::DimensionMismatch {
            expected: 1 << targets.len(),
            found: 1 << ch.num_qubits,
        });
    }
    let dim = rho.dim();
    let mut out = CMatrix::zeros(dim, dim);
    for k in &ch.ops {
        let mut term = rho.matrix().clone();
        conjugate_in_place(&mut term, rho.num_qubits(), k, targets);
        out += term;
    }
    Ok(DensityMatrix::from_raw(rho.num_qubits(), out))
}
