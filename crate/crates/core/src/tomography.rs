//! Diluted maximum-likelihood state reconstruction and single-qubit
//! linear-inversion tomography.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::qstate::{conjugate_in_place, hermitian_eigen, identity, matmul, trace_distance, CMatrix, DensityMatrix, C64};
use crate::simulator::{MeasRecord, MeasSetting, Pauli};
use crate::{Error, Result};

pub const DEFAULT_DILUTION: f64 = 0.1;
pub const DEFAULT_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITERS: usize = 5000;
/// Predicted probabilities below this count as zero.
pub const PROB_FLOOR: f64 = 1e-12;
/// Largest `f / p` ratio fed into the R operator.
pub const RATIO_CAP: f64 = 1e12;

/// All `3^n` Pauli words, lexicographic with `X < Y < Z` and qubit 0
/// varying slowest.
pub fn pauli_settings(num_qubits: usize) -> Result<Vec<MeasSetting>> {
    if num_qubits == 0 {
        return Err(Error::InvalidParameter("tomography needs at least one qubit".into()));
    }
    let total = 3usize
        .checked_pow(num_qubits as u32)
        .ok_or_else(|| Error::InvalidParameter("too many qubits".into()))?;
    Ok((0..total)
        .map(|mut k| {
            let mut word = vec![Pauli::X; num_qubits];
            for slot in word.iter_mut().rev() {
                *slot = Pauli::ALL[k % 3];
                k /= 3;
            }
            MeasSetting::pauli(&word)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MleOptions {
    pub dilution: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for MleOptions {
    fn default() -> Self {
        Self {
            dilution: DEFAULT_DILUTION,
            max_iters: DEFAULT_MAX_ITERS,
            tol: DEFAULT_TOL,
        }
    }
}

impl MleOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dilution > 0.0 && self.dilution <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "dilution {} is outside (0, 1]",
                self.dilution
            )));
        }
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::InvalidParameter("tol and max_iters must be positive".into()));
        }
        Ok(())
    }
}

/// Frequencies for one measurement setting, indexed by outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct SettingData {
    pub setting: MeasSetting,
    pub weights: Vec<f64>,
}

/// A complete Pauli tomography data set.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyJob {
    num_qubits: usize,
    data: Vec<SettingData>,
    pub options: MleOptions,
}

impl TomographyJob {
    /// Checks that every Pauli setting appears exactly once with equal
    /// shots, and that some outcome was observed.
    pub fn from_records(num_qubits: usize, records: &[MeasRecord]) -> Result<Self> {
        let shots = records
            .first()
            .map(|r| r.shots)
            .ok_or_else(|| Error::Tomography("no measurement records".into()))?;
        if records.iter().any(|r| r.shots != shots) {
            return Err(Error::Tomography("shots differ across settings".into()));
        }
        let data = records
            .iter()
            .map(|r| {
                let counts = r.count_vector()?;
                Ok(SettingData {
                    setting: r.setting.clone(),
                    weights: counts.into_iter().map(|c| c as f64).collect(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_frequencies(num_qubits, data)
    }

    /// Same checks for weights that need not be integers, such as exact
    /// Born probabilities.
    pub fn from_frequencies(num_qubits: usize, data: Vec<SettingData>) -> Result<Self> {
        let expected = pauli_settings(num_qubits)?;
        let mut ordered: Vec<Option<SettingData>> = vec![None; expected.len()];
        for d in data {
            let pos = expected
                .iter()
                .position(|s| *s == d.setting)
                .ok_or_else(|| Error::Tomography(format!("unexpected setting {}", d.setting)))?;
            if d.weights.len() != 1 << num_qubits {
                return Err(Error::DimensionMismatch {
                    expected: 1 << num_qubits,
                    found: d.weights.len(),
                });
            }
            if d.weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(Error::Tomography(format!("bad weights for {}", d.setting)));
            }
            if ordered[pos].replace(d).is_some() {
                return Err(Error::Tomography(format!("setting {} repeated", expected[pos])));
            }
        }
        if let Some(i) = ordered.iter().position(Option::is_none) {
            return Err(Error::Tomography(format!("missing setting {}", expected[i])));
        }
        let data: Vec<SettingData> = ordered.into_iter().flatten().collect();
        let total: f64 = data.iter().flat_map(|d| &d.weights).sum();
        if total <= 0.0 {
            return Err(Error::Tomography("all counts are zero".into()));
        }
        Ok(Self {
            num_qubits,
            data,
            options: MleOptions::default(),
        })
    }

    pub fn with_options(mut self, options: MleOptions) -> Self {
        self.options = options;
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn data(&self) -> &[SettingData] {
        &self.data
    }
}

#[derive(Debug, Clone)]
pub struct MleReport {
    pub state: DensityMatrix,
    /// Log-likelihood (natural log, per unit total weight) of every iterate,
    /// starting with `I / 2^n`.
    pub log_likelihood: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-setting basis rotations, cached once per job.
struct Prepared {
    n: usize,
    bases: Vec<Vec<CMatrix>>,
    adjoints: Vec<Vec<CMatrix>>,
    freqs: Vec<Vec<f64>>,
    /// Every outcome vector as a column, settings in order, for small
    /// registers.
    projectors: Option<(CMatrix, CMatrix)>,
}

/// Registers up to this size keep all `6^n` outcome vectors in memory.
const DENSE_PROJECTOR_QUBITS: usize = 5;

impl Prepared {
    fn new(job: &TomographyJob) -> Self {
        let total: f64 = job.data.iter().flat_map(|d| &d.weights).sum();
        let bases: Vec<Vec<CMatrix>> = job.data.iter().map(|d| d.setting.bases()).collect();
        let adjoints = bases
            .iter()
            .map(|bs| bs.iter().map(|b| b.adjoint()).collect())
            .collect();
        let projectors = (job.num_qubits <= DENSE_PROJECTOR_QUBITS).then(|| {
            let dim = 1usize << job.num_qubits;
            let mut v = CMatrix::zeros(dim, dim * bases.len());
            for (s, bs) in bases.iter().enumerate() {
                let u = bs[1..].iter().fold(bs[0].clone(), |acc, b| acc.kronecker(b));
                v.columns_mut(s * dim, dim).copy_from(&u);
            }
            let v_adj = v.adjoint();
            (v, v_adj)
        });
        Self {
            n: job.num_qubits,
            bases,
            adjoints,
            projectors,
            freqs: job
                .data
                .iter()
                .map(|d| d.weights.iter().map(|w| w / total).collect())
                .collect(),
        }
    }

    /// Outcome probabilities of setting `s`.
    fn probabilities(&self, rho: &CMatrix, s: usize) -> Vec<f64> {
        let mut m = rho.clone();
        for (q, b) in self.adjoints[s].iter().enumerate() {
            conjugate_in_place(&mut m, self.n, b, &[q]);
        }
        (0..m.nrows()).map(|i| m[(i, i)].re).collect()
    }

    /// `R` term and log-likelihood contribution of setting `s`.
    fn setting_term(&self, rho: &CMatrix, s: usize) -> (CMatrix, f64) {
        let dim = rho.nrows();
        let probs = self.probabilities(rho, s);
        let mut diag = CMatrix::zeros(dim, dim);
        let mut ll = 0.0;
        for (j, (&f, &p)) in self.freqs[s].iter().zip(&probs).enumerate() {
            if f == 0.0 {
                continue;
            }
            let ratio = (f / p.max(PROB_FLOOR)).min(RATIO_CAP);
            diag[(j, j)] = C64::from(ratio);
            ll += f * p.max(PROB_FLOOR).ln();
        }
        for (q, b) in self.bases[s].iter().enumerate() {
            conjugate_in_place(&mut diag, self.n, b, &[q]);
        }
        (diag, ll)
    }

    /// `(R(rho), log-likelihood of rho)`. Settings are summed in fixed
    /// chunks, in order, so the result does not depend on thread count.
    fn r_operator(&self, rho: &CMatrix) -> (CMatrix, f64) {
        if let Some((v, v_adj)) = &self.projectors {
            return self.r_operator_dense(rho, v, v_adj);
        }
        const CHUNK: usize = 9;
        let dim = rho.nrows();
        let idx: Vec<usize> = (0..self.freqs.len()).collect();
        let partial: Vec<(CMatrix, f64)> = idx
            .par_chunks(CHUNK)
            .map(|chunk| {
                chunk.iter().fold((CMatrix::zeros(dim, dim), 0.0), |(a, la), &s| {
                    let (b, lb) = self.setting_term(rho, s);
                    (a + b, la + lb)
                })
            })
            .collect();
        partial
            .into_iter()
            .fold((CMatrix::zeros(dim, dim), 0.0), |(a, la), (b, lb)| (a + b, la + lb))
    }
}

impl Prepared {
    fn r_operator_dense(&self, rho: &CMatrix, v: &CMatrix, v_adj: &CMatrix) -> (CMatrix, f64) {
        let rv = matmul(rho, v);
        let mut scaled = v.clone();
        let mut ll = 0.0;
        for (col, &f) in self.freqs.iter().flatten().enumerate() {
            if f == 0.0 {
                scaled.column_mut(col).fill(C64::from(0.0));
                continue;
            }
            let p = v.column(col).dotc(&rv.column(col)).re;
            let ratio = (f / p.max(PROB_FLOOR)).min(RATIO_CAP);
            scaled.column_mut(col).scale_mut(ratio);
            ll += f * p.max(PROB_FLOOR).ln();
        }
        (matmul(&scaled, v_adj), ll)
    }
}

fn normalized_hermitian(m: CMatrix) -> CMatrix {
    let h = (&m + m.adjoint()) * C64::from(0.5);
    let tr = h.trace().re;
    h / C64::from(tr)
}

/// Diluted iteration `rho <- N[(I + eps R) rho (I + eps R)]` from `I/2^n`.
///
/// Frequencies are normalised over the whole data set so that `R = I` at
/// the likelihood maximum. Stops once an update moves the state by less than
/// `tol` in trace distance.
pub fn mle_reconstruct(job: &TomographyJob) -> Result<MleReport> {
    job.options.validate()?;
    let prep = Prepared::new(job);
    let dim = 1usize << job.num_qubits;
    let eps = C64::from(job.options.dilution);
    let mut rho = DensityMatrix::maximally_mixed(job.num_qubits);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;
    while iterations < job.options.max_iters {
        let (r, ll) = prep.r_operator(rho.matrix());
        trace.push(ll);
        let m = identity(dim) + r * eps;
        let next = normalized_hermitian(matmul(&matmul(&m, rho.matrix()), &m));
        if !next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Tomography("iteration diverged".into()));
        }
        let next = DensityMatrix::from_raw(job.num_qubits, next);
        let step = trace_distance(&rho, &next)?;
        rho = next;
        iterations += 1;
        if step < job.options.tol {
            converged = true;
            break;
        }
    }
    trace.push(prep.r_operator(rho.matrix()).1);
    Ok(MleReport {
        state: rho,
        log_likelihood: trace,
        iterations,
        converged,
    })
}

fn pauli_mean(weights: &[f64]) -> Result<f64> {
    let total = weights[0] + weights[1];
    if total <= 0.0 {
        return Err(Error::Tomography("empty single-qubit record".into()));
    }
    Ok((weights[0] - weights[1]) / total)
}

/// Linear inversion from Bloch-vector components, clipped onto the PSD cone.
pub fn qubit_state_from_bloch(r: [f64; 3]) -> DensityMatrix {
    let [x, y, z] = r;
    let raw = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::from((1.0 + z) / 2.0),
            C64::new(x / 2.0, -y / 2.0),
            C64::new(x / 2.0, y / 2.0),
            C64::from((1.0 - z) / 2.0),
        ],
    );
    let (vals, vecs) = hermitian_eigen(&raw);
    if vals.iter().all(|&v| v >= 0.0) {
        return DensityMatrix::from_raw(1, raw);
    }
    let clipped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let d = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        2,
        clipped.iter().map(|v| C64::from(v / total)),
    ));
    DensityMatrix::from_raw(1, &vecs * d * vecs.adjoint())
}

/// Single-qubit tomography from X, Y and Z records (any order).
pub fn qubit_tomography(records: &[MeasRecord]) -> Result<DensityMatrix> {
    let mut r = [None; 3];
    for rec in records {
        let paulis = rec.setting.as_paulis().filter(|p| p.len() == 1).ok_or_else(|| {
            Error::Tomography(format!("`{}` is not a single-qubit Pauli setting", rec.setting))
        })?;
        let counts: Vec<f64> = rec.count_vector()?.into_iter().map(|c| c as f64).collect();
        r[paulis[0] as usize] = Some(pauli_mean(&counts)?);
    }
    let mut bloch = [0.0; 3];
    for (k, p) in Pauli::ALL.iter().enumerate() {
        bloch[k] = r[k].ok_or_else(|| Error::Tomography(format!("missing {p:?} record")))?;
    }
    Ok(qubit_state_from_bloch(bloch))
}

/// Signed coherence factor `2 Re <0|rho|1>` of a qubit.
pub fn coherence_from_tomo(rho_s: &DensityMatrix) -> Result<f64> {
    if rho_s.num_qubits() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho_s.dim(),
        });
    }
    Ok(2.0 * rho_s.element(0, 1).re)
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    num_qubits: usize,
    records: Vec<String>,
}

/// Writes one JSON file per record plus `manifest.json` into `dir`.
pub fn write_records(dir: &Path, num_qubits: usize, records: &[MeasRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut names = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        let name = format!("record_{i:05}.json");
        fs::write(dir.join(&name), serde_json::to_string_pretty(rec)? + "\n")?;
        names.push(name);
    }
    let manifest = Manifest {
        num_qubits,
        records: names,
    };
    fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

/// Reads a record directory written by [`write_records`].
pub fn read_records(dir: &Path) -> Result<(usize, Vec<MeasRecord>)> {
    let manifest: Manifest = serde_json::from_str(&fs::read_to_string(dir.join("manifest.json"))?)?;
    let records = manifest
        .records
        .iter()
        .map(|name| {
            let rec: MeasRecord = serde_json::from_str(&fs::read_to_string(dir.join(name))?)?;
            rec.validate()?;
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((manifest.num_qubits, records))
}

/// Plain-text matrix: `# dim D` header then one row per line of `re im`
/// pairs.
pub fn matrix_to_text(m: &CMatrix) -> String {
    let mut out = format!("# dim {}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| format!("{:?} {:?}", m[(i, j)].re, m[(i, j)].im))
            .collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn matrix_from_text(text: &str) -> Result<CMatrix> {
    let mut dim = None;
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(d) = rest.trim().strip_prefix("dim") {
                dim = Some(d.trim().parse::<usize>().map_err(|_| err("bad dim".into()))?);
            }
            continue;
        }
        let vals = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() % 2 != 0 {
            return Err(err("odd number of fields".into()));
        }
        rows.push(vals.chunks(2).map(|c| C64::new(c[0], c[1])).collect());
    }
    let d = dim.unwrap_or(rows.len());
    if rows.len() != d || rows.iter().any(|r| r.len() != d) {
        return Err(Error::Parse {
            line: 1,
            msg: format!("expected a {d}x{d} matrix"),
        });
    }
    Ok(CMatrix::from_fn(d, d, |i, j| rows[i][j]))
}
