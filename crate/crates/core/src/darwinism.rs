//! Mutual informations between the system and environment fractions:
//! quantum (QMI), classical over measurement bases (CMI) and the Holevo
//! bound, plus the BLP non-monotonicity witness for coherence curves.

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qstate::{
    check_qubits, entropy_of_spectrum, hermitian_eigenvalues, shannon_entropy, CMatrix,
    DensityMatrix, LogBase, QuantumState,
};
use crate::scm::{Scenario, ScmParams};
use crate::simulator::{angle_basis, MeasSetting, Pauli};
use crate::{Error, Result};

/// Slack for values that are non-negative in exact arithmetic.
pub const INFO_SLACK: f64 = 1e-9;
pub const DEFAULT_GRID_STEPS: usize = 61;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    PerQubit,
    PerPair,
    AncillaeOnly,
}

impl std::str::FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "PerQubit" | "per-qubit" | "per_qubit" => Ok(SchemeKind::PerQubit),
            "PerPair" | "per-pair" | "per_pair" => Ok(SchemeKind::PerPair),
            "AncillaeOnly" | "ancillae-only" | "ancillae_only" => Ok(SchemeKind::AncillaeOnly),
            _ => Err(Error::InvalidParameter(format!("unknown partition scheme `{s}`"))),
        }
    }
}

/// Environment units over which fractions are drawn. Qubits in `traced`
/// belong to no unit and never enter an analysis.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionScheme {
    pub kind: SchemeKind,
    units: Vec<Vec<usize>>,
    traced: Vec<usize>,
}

impl PartitionScheme {
    pub fn new(kind: SchemeKind, units: Vec<Vec<usize>>, traced: Vec<usize>) -> Result<Self> {
        if units.is_empty() || units.iter().any(Vec::is_empty) {
            return Err(Error::InvalidParameter("partition needs non-empty units".into()));
        }
        let mut seen = BTreeSet::new();
        for &q in units.iter().flatten().chain(&traced) {
            if !seen.insert(q) {
                return Err(Error::OverlappingSets(q));
            }
        }
        Ok(Self {
            kind,
            units,
            traced,
        })
    }

    /// Scheme over the environment of the model register (system on qubit
    /// 0; full layout `E_i = 1+2i`, `A_i = 2+2i`; condensed pair `i` on
    /// `1+i`). The condensed register only supports per-pair units, which
    /// are then single qubits and equal to per-qubit units.
    pub fn for_model(kind: SchemeKind, params: &ScmParams) -> Result<Self> {
        let n = params.n;
        match (params.scenario, kind) {
            (Scenario::Full, SchemeKind::PerQubit) => {
                Self::new(kind, (1..=2 * n).map(|q| vec![q]).collect(), vec![])
            }
            (Scenario::Full, SchemeKind::PerPair) => {
                Self::new(kind, (0..n).map(|i| vec![1 + 2 * i, 2 + 2 * i]).collect(), vec![])
            }
            (Scenario::Full, SchemeKind::AncillaeOnly) => Self::new(
                kind,
                (0..n).map(|i| vec![2 + 2 * i]).collect(),
                (0..n).map(|i| 1 + 2 * i).collect(),
            ),
            (Scenario::Condensed, SchemeKind::PerQubit | SchemeKind::PerPair) => {
                Self::new(kind, (1..=n).map(|q| vec![q]).collect(), vec![])
            }
            (Scenario::Condensed, SchemeKind::AncillaeOnly) => Err(Error::InvalidParameter(
                "the condensed register has no separate ancilla qubits".into(),
            )),
        }
    }

    pub fn units(&self) -> &[Vec<usize>] {
        &self.units
    }

    pub fn traced(&self) -> &[usize] {
        &self.traced
    }

    pub fn num_units(&self) -> usize {
        self.units.len()
    }

    /// Qubits of the units selected by `subset`, ascending.
    pub fn qubits_of(&self, subset: &[usize]) -> Vec<usize> {
        let mut qs: Vec<usize> = subset.iter().flat_map(|&u| self.units[u].iter().copied()).collect();
        qs.sort_unstable();
        qs
    }
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if k <= n {
        rec(0, n, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MiPoint {
    pub f: usize,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiCurve {
    pub points: Vec<MiPoint>,
}

impl MiCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("f,value,stderr\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{:?},{:?}", p.f, p.value, p.stderr);
        }
        out
    }

    pub fn value_at(&self, f: usize) -> Option<f64> {
        self.points.iter().find(|p| p.f == f).map(|p| p.value)
    }
}

/// Mean and standard error of the mean (sample standard deviation with
/// `N - 1`; zero for a single value).
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_disjoint(a: &[usize], b: &[usize], num_qubits: usize) -> Result<()> {
    check_qubits(a, num_qubits)?;
    check_qubits(b, num_qubits)?;
    if let Some(&q) = a.iter().find(|q| b.contains(q)) {
        return Err(Error::OverlappingSets(q));
    }
    Ok(())
}

fn union(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
    u.sort_unstable();
    u
}

/// Von Neumann entropy of the reduced state on `qubits`, in bits.
pub fn subsystem_entropy<S: QuantumState + ?Sized>(state: &S, qubits: &[usize]) -> Result<f64> {
    let rho = state.reduced(qubits)?;
    if rho.dim() == 1 {
        return Ok(0.0);
    }
    Ok(entropy_of_spectrum(&hermitian_eigenvalues(rho.matrix()), LogBase::Bits))
}

/// `I(S:F) = H(S) + H(F) - H(SF)` in bits.
pub fn qmi<S: QuantumState + ?Sized>(state: &S, sys: &[usize], frac: &[usize]) -> Result<f64> {
    check_disjoint(sys, frac, state.num_qubits())?;
    Ok(subsystem_entropy(state, sys)? + subsystem_entropy(state, frac)?
        - subsystem_entropy(state, &union(sys, frac))?)
}

/// QMI averaged over every fraction of `f` units, for `f = 1..=num_units`.
pub fn averaged_qmi<S: QuantumState + Sync + ?Sized>(
    state: &S,
    sys: &[usize],
    scheme: &PartitionScheme,
) -> Result<MiCurve> {
    averaged_over_fractions(scheme, |frac| qmi(state, sys, frac))
}

fn averaged_over_fractions(
    scheme: &PartitionScheme,
    eval: impl Fn(&[usize]) -> Result<f64> + Sync,
) -> Result<MiCurve> {
    let m = scheme.num_units();
    let points = (1..=m)
        .map(|f| {
            let values = combinations(m, f)
                .into_par_iter()
                .map(|subset| eval(&scheme.qubits_of(&subset)))
                .collect::<Result<Vec<f64>>>()?;
            let (value, stderr) = mean_stderr(&values);
            Ok(MiPoint { f, value, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MiCurve { points })
}

fn shannon_mi(joint: &[f64], sys_bits: usize, frac_bits: usize) -> f64 {
    let df = 1usize << frac_bits;
    let mut ps = vec![0.0; 1 << sys_bits];
    let mut pf = vec![0.0; df];
    for (i, &p) in joint.iter().enumerate() {
        ps[i / df] += p;
        pf[i % df] += p;
    }
    shannon_entropy(&ps, LogBase::Bits) + shannon_entropy(&pf, LogBase::Bits)
        - shannon_entropy(joint, LogBase::Bits)
}

/// Shannon mutual information of the exact joint outcome distribution of
/// `sys` measured in `sys_basis` and `frac` in `env_basis`, in bits.
pub fn cmi_joint<S: QuantumState + ?Sized>(
    state: &S,
    sys: &[usize],
    frac: &[usize],
    sys_basis: &MeasSetting,
    env_basis: &MeasSetting,
) -> Result<f64> {
    check_disjoint(sys, frac, state.num_qubits())?;
    for (set, basis) in [(sys, sys_basis), (frac, env_basis)] {
        if set.len() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: set.len(),
                found: basis.len(),
            });
        }
    }
    let qubits: Vec<usize> = sys.iter().chain(frac).copied().collect();
    let bases: Vec<CMatrix> = sys_basis.bases().into_iter().chain(env_basis.bases()).collect();
    let joint = state.basis_probabilities(&qubits, &bases)?;
    Ok(shannon_mi(&joint, sys.len(), frac.len()))
}

/// CMI on the `phi x xi` grid, `phi` spanning `[0, pi]` inclusive and `xi`
/// spanning `[0, 2 pi)`. `values[i][j]` belongs to `(phis[i], xis[j])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisGrid {
    pub phi_steps: usize,
    pub xi_steps: usize,
    pub phis: Vec<f64>,
    pub xis: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPeak {
    pub phi_index: usize,
    pub xi_index: usize,
    pub phi: f64,
    pub xi: f64,
    pub value: f64,
}

impl BasisGrid {
    pub fn max(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// First cell in row-major order within `1e-12` of the maximum.
    pub fn argmax(&self) -> GridPeak {
        let best = self.max();
        for (i, row) in self.values.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v >= best - 1e-12 {
                    return GridPeak {
                        phi_index: i,
                        xi_index: j,
                        phi: self.phis[i],
                        xi: self.xis[j],
                        value: v,
                    };
                }
            }
        }
        unreachable!("grid is never empty")
    }

    pub fn phi_spacing(&self) -> f64 {
        PI / (self.phi_steps - 1) as f64
    }

    pub fn xi_spacing(&self) -> f64 {
        2.0 * PI / self.xi_steps as f64
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi,xi,value\n");
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(out, "{:?},{:?},{:?}", self.phis[i], self.xis[j], v);
            }
        }
        out
    }
}

/// The system is measured in the computational basis; every qubit of
/// `frac` in the same `(phi, xi)` basis.
pub fn cmi_grid<S: QuantumState + Sync + ?Sized>(
    state: &S,
    sys: &[usize],
    frac: &[usize],
    phi_steps: usize,
    xi_steps: usize,
) -> Result<BasisGrid> {
    if phi_steps < 2 || xi_steps < 2 {
        return Err(Error::InvalidParameter("grid needs at least 2 steps per axis".into()));
    }
    check_disjoint(sys, frac, state.num_qubits())?;
    let phis: Vec<f64> = (0..phi_steps).map(|i| PI * i as f64 / (phi_steps - 1) as f64).collect();
    let xis: Vec<f64> = (0..xi_steps).map(|j| 2.0 * PI * j as f64 / xi_steps as f64).collect();

    // mixed inputs are reduced once onto the measured qubits
    let reduced;
    let (target, sys_q, frac_q): (&(dyn QuantumState + Sync), Vec<usize>, Vec<usize>) = match state.as_pure() {
        Some(psi) => (psi, sys.to_vec(), frac.to_vec()),
        None => {
            let all = union(sys, frac);
            reduced = state.reduced(&all)?;
            let pos = |q: &usize| all.iter().position(|a| a == q).expect("member");
            (&reduced, sys.iter().map(pos).collect(), frac.iter().map(pos).collect())
        }
    };
    let qubits: Vec<usize> = sys_q.iter().chain(&frac_q).copied().collect();
    let sys_bases = vec![CMatrix::identity(2, 2); sys.len()];
    let values = phis
        .par_iter()
        .map(|&phi| {
            xis.iter()
                .map(|&xi| {
                    let b = angle_basis(phi, xi);
                    let bases: Vec<CMatrix> = sys_bases
                        .iter()
                        .cloned()
                        .chain(std::iter::repeat_n(b, frac.len()))
                        .collect();
                    let joint = target.basis_probabilities(&qubits, &bases)?;
                    Ok(shannon_mi(&joint, sys.len(), frac.len()))
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BasisGrid {
        phi_steps,
        xi_steps,
        phis,
        xis,
        values,
    })
}

/// Holevo quantity of the ensemble of `frac` states conditioned on the
/// computational outcomes of `sys`, in bits. Zero-probability outcomes are
/// dropped.
pub fn holevo_bound<S: QuantumState + ?Sized>(state: &S, sys: &[usize], frac: &[usize]) -> Result<f64> {
    check_disjoint(sys, frac, state.num_qubits())?;
    let all = union(sys, frac);
    let rho = state.reduced(&all)?;
    let m = all.len();
    let sys_pos: Vec<usize> = all.iter().enumerate().filter(|(_, q)| sys.contains(q)).map(|(i, _)| i).collect();
    let frac_pos: Vec<usize> = all.iter().enumerate().filter(|(_, q)| frac.contains(q)).map(|(i, _)| i).collect();
    let df = 1usize << frac.len();
    let mut average = CMatrix::zeros(df, df);
    let mut conditional_entropy = 0.0;
    for s in 0..(1usize << sys.len()) {
        let idx = |f: usize| {
            let base = crate::qstate::scatter_index(0, s, &sys_pos, m);
            crate::qstate::scatter_index(base, f, &frac_pos, m)
        };
        let block = CMatrix::from_fn(df, df, |i, j| rho.element(idx(i), idx(j)));
        let p = block.trace().re;
        if p <= 1e-14 {
            continue;
        }
        let spectrum: Vec<f64> = hermitian_eigenvalues(&block).iter().map(|v| v / p).collect();
        conditional_entropy += p * entropy_of_spectrum(&spectrum, LogBase::Bits);
        average += block;
    }
    let avg_entropy = entropy_of_spectrum(&hermitian_eigenvalues(&average), LogBase::Bits);
    Ok(avg_entropy - conditional_entropy)
}

/// Mean CMI over every fraction for one Pauli setting pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanEntry {
    pub sys_setting: String,
    pub env_setting: String,
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliScan {
    pub frac_size: usize,
    pub entries: Vec<ScanEntry>,
}

impl PauliScan {
    pub fn max(&self) -> f64 {
        self.entries.iter().map(|e| e.value).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sys_setting,env_setting,value,stderr\n");
        for e in &self.entries {
            let _ = writeln!(out, "{},{},{:?},{:?}", e.sys_setting, e.env_setting, e.value, e.stderr);
        }
        out
    }
}

fn pauli_words(len: usize) -> Vec<Vec<Pauli>> {
    let mut words = vec![vec![]];
    for _ in 0..len {
        words = words
            .into_iter()
            .flat_map(|w| {
                Pauli::ALL.iter().map(move |&p| {
                    let mut w = w.clone();
                    w.push(p);
                    w
                })
            })
            .collect();
    }
    words
}

/// CMI for every Pauli setting of the system and of fractions made of
/// `frac_size` unordered units, averaged over the fractions. All fractions
/// of a given size must span the same number of qubits.
pub fn pauli_cmi_scan<S: QuantumState + Sync + ?Sized>(
    state: &S,
    sys: &[usize],
    frac_size: usize,
    scheme: &PartitionScheme,
) -> Result<PauliScan> {
    if !(1..=2).contains(&frac_size) || frac_size > scheme.num_units() {
        return Err(Error::InvalidParameter(format!("fraction size {frac_size} is not 1 or 2")));
    }
    let fractions: Vec<Vec<usize>> = combinations(scheme.num_units(), frac_size)
        .iter()
        .map(|s| scheme.qubits_of(s))
        .collect();
    let width = fractions[0].len();
    if fractions.iter().any(|f| f.len() != width) {
        return Err(Error::InvalidParameter("fractions of one size differ in qubit count".into()));
    }
    let mut entries = Vec::new();
    for sw in pauli_words(sys.len()) {
        let sys_setting = MeasSetting::pauli(&sw);
        for ew in pauli_words(width) {
            let env_setting = MeasSetting::pauli(&ew);
            let values = fractions
                .par_iter()
                .map(|frac| cmi_joint(state, sys, frac, &sys_setting, &env_setting))
                .collect::<Result<Vec<_>>>()?;
            let (value, stderr) = mean_stderr(&values);
            entries.push(ScanEntry {
                sys_setting: sys_setting.to_string(),
                env_setting: env_setting.to_string(),
                value,
                stderr,
            });
        }
    }
    Ok(PauliScan { frac_size, entries })
}

/// QMI, Holevo quantity and grid-maximal CMI for one fraction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoTriple {
    pub qmi: f64,
    pub holevo: f64,
    pub cmi_max: f64,
}

pub fn info_triple<S: QuantumState + Sync + ?Sized>(
    state: &S,
    sys: &[usize],
    frac: &[usize],
    grid_steps: usize,
) -> Result<InfoTriple> {
    Ok(InfoTriple {
        qmi: qmi(state, sys, frac)?,
        holevo: holevo_bound(state, sys, frac)?,
        cmi_max: cmi_grid(state, sys, frac, grid_steps, grid_steps)?.max(),
    })
}

/// BLP witness `sum_i max(0, |c_{i+1}| - |c_i|)` of a sampled coherence
/// curve with ascending times.
pub fn blp_witness(curve: &[(f64, f64)]) -> Result<f64> {
    if curve.len() < 2 {
        return Err(Error::InvalidParameter("witness needs at least two points".into()));
    }
    if curve.windows(2).any(|w| !(w[1].0 > w[0].0)) {
        return Err(Error::InvalidParameter("times must be strictly ascending".into()));
    }
    Ok(curve
        .windows(2)
        .map(|w| (w[1].1.abs() - w[0].1.abs()).max(0.0))
        .sum())
}

/// Converts a density matrix view for callers holding a concrete type.
pub fn as_density<S: QuantumState + ?Sized>(state: &S) -> Result<DensityMatrix> {
    let all: Vec<usize> = (0..state.num_qubits()).collect();
    state.reduced(&all)
}
