//! Exact statevector runs, noisy density-matrix runs and seeded shot
//! sampling in product bases.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::distr::{Bernoulli, Distribution};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::qstate::{
    apply_channel, gather_index, CMatrix, DensityMatrix, KrausChannel, PureState, QuantumState, C64,
};
use crate::{Error, Result};

pub const STATEVECTOR_MAX_QUBITS: usize = 16;
pub const DENSITY_MAX_QUBITS: usize = 10;

/// Per-gate noise. Channels act after each gate on that gate's qubits;
/// with `idle` set, qubits the gate does not touch get the one-qubit
/// depolarizing and damping channels too.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseModel {
    pub depol_1q: f64,
    pub depol_2q: f64,
    pub amp_damp_gamma: f64,
    pub readout_flip: f64,
    pub idle: bool,
}

impl NoiseModel {
    pub fn ideal() -> Self {
        Self::default()
    }

    /// Placeholder rates for qualitative comparisons.
    pub fn placeholder() -> Self {
        Self {
            depol_1q: 0.001,
            depol_2q: 0.01,
            amp_damp_gamma: 0.0,
            readout_flip: 0.02,
            idle: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("depol_1q", self.depol_1q),
            ("depol_2q", self.depol_2q),
            ("amp_damp_gamma", self.amp_damp_gamma),
            ("readout_flip", self.readout_flip),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// True when no channel acts on the state (readout is not counted).
    pub fn is_gate_noiseless(&self) -> bool {
        self.depol_1q == 0.0 && self.depol_2q == 0.0 && self.amp_damp_gamma == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// Single-qubit measurement basis.
///
/// `Angles { phi, xi }` measures in `|0'> = cos(phi/2)|0> + e^{i xi} sin(phi/2)|1>`,
/// `|1'> = sin(phi/2)|0> - e^{i xi} cos(phi/2)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BasisSpec {
    Pauli(Pauli),
    Angles { phi: f64, xi: f64 },
}

/// Basis matrix for angles `(phi, xi)`; columns are `|0'>` and `|1'>`.
pub fn angle_basis(phi: f64, xi: f64) -> CMatrix {
    let (s, c) = (phi / 2.0).sin_cos();
    let e = C64::from_polar(1.0, xi);
    CMatrix::from_row_slice(2, 2, &[C64::from(c), C64::from(s), e * s, -e * c])
}

impl BasisSpec {
    pub fn matrix(&self) -> CMatrix {
        use std::f64::consts::FRAC_PI_2;
        match *self {
            BasisSpec::Pauli(Pauli::X) => angle_basis(FRAC_PI_2, 0.0),
            BasisSpec::Pauli(Pauli::Y) => angle_basis(FRAC_PI_2, FRAC_PI_2),
            BasisSpec::Pauli(Pauli::Z) => CMatrix::identity(2, 2),
            BasisSpec::Angles { phi, xi } => angle_basis(phi, xi),
        }
    }

    pub fn as_pauli(&self) -> Option<Pauli> {
        match *self {
            BasisSpec::Pauli(p) => Some(p),
            BasisSpec::Angles { .. } => None,
        }
    }
}

/// One basis per qubit of the measured register, qubit 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MeasSetting(pub Vec<BasisSpec>);

impl MeasSetting {
    pub fn pauli(ps: &[Pauli]) -> Self {
        Self(ps.iter().copied().map(BasisSpec::Pauli).collect())
    }

    pub fn uniform(spec: BasisSpec, num_qubits: usize) -> Self {
        Self(vec![spec; num_qubits])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bases(&self) -> Vec<CMatrix> {
        self.0.iter().map(BasisSpec::matrix).collect()
    }

    /// The Pauli word if every basis is a Pauli.
    pub fn as_paulis(&self) -> Option<Vec<Pauli>> {
        self.0.iter().map(BasisSpec::as_pauli).collect()
    }
}

impl fmt::Display for MeasSetting {
    /// Pauli words print as `XZY`; anything else as space-separated
    /// `phi:xi` pairs with Paulis spelled by letter.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(ps) = self.as_paulis() {
            return ps.iter().try_for_each(|p| write!(f, "{p:?}"));
        }
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            match b {
                BasisSpec::Pauli(p) => write!(f, "{p:?}")?,
                BasisSpec::Angles { phi, xi } => write!(f, "{phi}:{xi}")?,
            }
        }
        Ok(())
    }
}

impl FromStr for MeasSetting {
    type Err = Error;

    /// Pauli words such as `XZY`.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::InvalidParameter(format!("bad Pauli word `{s}`"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(|ps| Self::pauli(&ps))
    }
}

/// Outcome counts for one setting. Bitstring keys list qubit 0 first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasRecord {
    pub setting: MeasSetting,
    pub shots: u64,
    pub seed: u64,
    pub counts: BTreeMap<String, u64>,
}

impl MeasRecord {
    pub fn validate(&self) -> Result<()> {
        let n = self.setting.len();
        let mut total = 0u64;
        for (k, &v) in &self.counts {
            if k.len() != n || !k.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(Error::InvalidParameter(format!(
                    "outcome `{k}` does not match a {n}-qubit setting"
                )));
            }
            total += v;
        }
        if total != self.shots {
            return Err(Error::InvalidParameter(format!(
                "counts sum to {total} but shots = {}",
                self.shots
            )));
        }
        Ok(())
    }

    /// Count per outcome index (qubit 0 is the most significant bit).
    pub fn count_vector(&self) -> Result<Vec<u64>> {
        self.validate()?;
        let mut v = vec![0u64; 1 << self.setting.len()];
        for (k, &c) in &self.counts {
            v[usize::from_str_radix(k, 2).unwrap_or(0)] += c;
        }
        Ok(v)
    }

    pub fn frequencies(&self) -> Result<Vec<f64>> {
        let shots = self.shots.max(1) as f64;
        Ok(self.count_vector()?.into_iter().map(|c| c as f64 / shots).collect())
    }

    /// Record from a dense count vector indexed by outcome.
    pub fn from_counts(setting: MeasSetting, counts: &[u64], seed: u64) -> Result<Self> {
        let n = setting.len();
        if counts.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: counts.len(),
            });
        }
        let map = counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (bitstring(i, n), c))
            .collect();
        Ok(Self {
            setting,
            shots: counts.iter().sum(),
            seed,
            counts: map,
        })
    }
}

pub fn bitstring(index: usize, width: usize) -> String {
    format!("{index:0width$b}")
}

fn guard(what: &'static str, max: usize, found: usize) -> Result<()> {
    if found > max {
        return Err(Error::SizeGuard { what, max, found });
    }
    Ok(())
}

pub fn run_statevector(c: &Circuit) -> Result<PureState> {
    guard("statevector simulation", STATEVECTOR_MAX_QUBITS, c.num_qubits())?;
    let mut psi = PureState::zero(c.num_qubits());
    c.apply_to(&mut psi)?;
    Ok(psi)
}

struct NoiseChannels {
    depol_1q: Option<KrausChannel>,
    depol_2q: Option<KrausChannel>,
    damping: Option<KrausChannel>,
}

impl NoiseChannels {
    fn new(noise: &NoiseModel) -> Result<Self> {
        let some_if = |p: f64, f: &dyn Fn() -> Result<KrausChannel>| -> Result<Option<KrausChannel>> {
            if p > 0.0 {
                f().map(Some)
            } else {
                Ok(None)
            }
        };
        Ok(Self {
            depol_1q: some_if(noise.depol_1q, &|| KrausChannel::depolarizing(noise.depol_1q, 1))?,
            depol_2q: some_if(noise.depol_2q, &|| KrausChannel::depolarizing(noise.depol_2q, 2))?,
            damping: some_if(noise.amp_damp_gamma, &|| {
                KrausChannel::amplitude_damping(noise.amp_damp_gamma)
            })?,
        })
    }

    fn single_qubit(&self, rho: DensityMatrix, q: usize) -> Result<DensityMatrix> {
        let mut rho = rho;
        if let Some(ch) = &self.depol_1q {
            rho = apply_channel(&rho, ch, &[q])?;
        }
        if let Some(ch) = &self.damping {
            rho = apply_channel(&rho, ch, &[q])?;
        }
        Ok(rho)
    }
}

/// Density-matrix run from `|0...0>` with per-gate noise.
pub fn run_density(c: &Circuit, noise: &NoiseModel) -> Result<DensityMatrix> {
    guard("density-matrix simulation", DENSITY_MAX_QUBITS, c.num_qubits())?;
    noise.validate()?;
    let n = c.num_qubits();
    let channels = NoiseChannels::new(noise)?;
    let mut rho = PureState::zero(n).to_density();
    for g in c.gates() {
        let qs = g.qubits();
        rho.conjugate_mut(&g.matrix(), &qs);
        if qs.len() == 2 {
            if let Some(ch) = &channels.depol_2q {
                rho = apply_channel(&rho, ch, &qs)?;
            }
            if let Some(ch) = &channels.damping {
                for &q in &qs {
                    rho = apply_channel(&rho, ch, &[q])?;
                }
            }
        } else {
            rho = channels.single_qubit(rho, qs[0])?;
        }
        if noise.idle {
            for q in (0..n).filter(|q| !qs.contains(q)) {
                rho = channels.single_qubit(rho, q)?;
            }
        }
    }
    Ok(rho)
}

/// Outcome distribution of measuring every qubit of `state` in `setting`.
pub fn born_probabilities<S: QuantumState + ?Sized>(state: &S, setting: &MeasSetting) -> Result<Vec<f64>> {
    let n = state.num_qubits();
    if setting.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: setting.len(),
        });
    }
    let qubits: Vec<usize> = (0..n).collect();
    state.basis_probabilities(&qubits, &setting.bases())
}

/// Distribution after independent per-bit flips with probability `flip`.
pub fn apply_readout_flip(probs: &[f64], num_bits: usize, flip: f64) -> Vec<f64> {
    let mut p = probs.to_vec();
    if flip == 0.0 {
        return p;
    }
    for bit in 0..num_bits {
        let mask = 1usize << bit;
        for i in 0..p.len() {
            if i & mask == 0 {
                let (a, b) = (p[i], p[i | mask]);
                p[i] = (1.0 - flip) * a + flip * b;
                p[i | mask] = flip * a + (1.0 - flip) * b;
            }
        }
    }
    p
}

/// Draws `shots` i.i.d. outcomes from a ChaCha8 stream seeded with `seed`,
/// then flips each bit with probability `readout_flip`.
pub fn sample<S: QuantumState + ?Sized>(
    state: &S,
    setting: &MeasSetting,
    shots: u64,
    seed: u64,
    readout_flip: f64,
) -> Result<MeasRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter("shots must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&readout_flip) {
        return Err(Error::InvalidParameter(format!(
            "readout_flip = {readout_flip} is outside [0, 1]"
        )));
    }
    let n = setting.len();
    let probs = born_probabilities(state, setting)?;
    let dist = WeightedIndex::new(probs.iter().map(|p| p.max(0.0)))
        .map_err(|e| Error::InvalidState(format!("bad outcome distribution: {e}")))?;
    let flip = Bernoulli::new(readout_flip)
        .map_err(|e| Error::InvalidParameter(format!("readout_flip: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u64; 1 << n];
    for _ in 0..shots {
        let mut outcome = dist.sample(&mut rng);
        if readout_flip > 0.0 {
            for bit in 0..n {
                if flip.sample(&mut rng) {
                    outcome ^= 1 << bit;
                }
            }
        }
        counts[outcome] += 1;
    }
    MeasRecord::from_counts(setting.clone(), &counts, seed)
}

/// Marginal counts of `qubits` (in that order) from a full-register record.
pub fn marginal_counts(record: &MeasRecord, qubits: &[usize]) -> Result<Vec<u64>> {
    let n = record.setting.len();
    crate::qstate::check_qubits(qubits, n)?;
    let full = record.count_vector()?;
    let mut out = vec![0u64; 1 << qubits.len()];
    for (i, c) in full.into_iter().enumerate() {
        out[gather_index(i, qubits, n)] += c;
    }
    Ok(out)
}

/// SplitMix64 mixing of a base seed with a stream index, for per-item seeds.
pub fn derive_seed(base: u64, stream: u64) -> u64 {
    let mut z = base
        .wrapping_add(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(stream.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_circuit, Gate};
    use crate::scm::{canonical_times, ideal_global_state, Scenario, ScmParams};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn max_dev(a: &CMatrix, b: &CMatrix) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn hadamard_gives_plus() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let psi = run_statevector(&c).unwrap();
        assert_abs_diff_eq!(psi.amplitudes()[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_abs_diff_eq!(psi.amplitudes()[1].re, FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn full_circuit_matches_oracle() {
        let t = canonical_times().0;
        let p = ScmParams::non_entangling(3, Scenario::Full);
        let psi = run_statevector(&build_circuit(t, &p).unwrap()).unwrap();
        assert_abs_diff_eq!((psi.norm() - 1.0), 0.0, epsilon = 1e-12);
        let ideal = ideal_global_state(t, &p).unwrap();
        assert_abs_diff_eq!(psi.fidelity(&ideal).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn condensed_six_system_coherence_at_t_rec() {
        let t = canonical_times().2;
        let p = ScmParams::non_entangling(6, Scenario::Condensed);
        let psi = run_statevector(&build_circuit(t, &p).unwrap()).unwrap();
        let rho_s = psi.reduced(&[0]).unwrap();
        let oracle = (-2.0f64 / 3.0).powi(6) / 2.0;
        assert_abs_diff_eq!(rho_s.element(0, 1).re, oracle, epsilon = 1e-12);
        assert_abs_diff_eq!(rho_s.element(0, 1).im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn size_guards() {
        assert!(matches!(
            run_statevector(&Circuit::new(17)),
            Err(Error::SizeGuard { .. })
        ));
        assert!(matches!(
            run_density(&Circuit::new(11), &NoiseModel::ideal()),
            Err(Error::SizeGuard { .. })
        ));
        let bad = NoiseModel {
            depol_2q: 1.5,
            ..NoiseModel::ideal()
        };
        assert!(run_density(&Circuit::new(1), &bad).is_err());
    }

    #[test]
    fn noiseless_density_matches_statevector() {
        let t = canonical_times().1;
        for (n, sc) in [(2, Scenario::Full), (3, Scenario::Full), (6, Scenario::Condensed)] {
            let c = build_circuit(t, &ScmParams::non_entangling(n, sc)).unwrap();
            let rho = run_density(&c, &NoiseModel::ideal()).unwrap();
            let psi = run_statevector(&c).unwrap().to_density();
            assert!(max_dev(rho.matrix(), psi.matrix()) < 1e-10);
        }
    }

    #[test]
    fn full_single_qubit_depolarization() {
        let mut c = Circuit::new(1);
        c.push(Gate::H(0)).unwrap();
        let noise = NoiseModel {
            depol_1q: 1.0,
            ..NoiseModel::ideal()
        };
        let rho = run_density(&c, &noise).unwrap();
        assert!(max_dev(rho.matrix(), DensityMatrix::maximally_mixed(1).matrix()) < 1e-12);
    }

    #[test]
    fn noisy_trace_stays_one() {
        let c = build_circuit(0.5, &ScmParams::non_entangling(2, Scenario::Full)).unwrap();
        let noise = NoiseModel {
            depol_1q: 0.05,
            depol_2q: 0.1,
            amp_damp_gamma: 0.05,
            readout_flip: 0.0,
            idle: true,
        };
        let rho = run_density(&c, &noise).unwrap();
        assert_abs_diff_eq!(rho.trace(), 1.0, epsilon = 1e-9);
        rho.validate().unwrap();
    }

    #[test]
    fn angle_basis_conventions() {
        let plus = PureState::new(vec![C64::from(FRAC_1_SQRT_2); 2]).unwrap();
        let px = born_probabilities(&plus, &"X".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(px[0], 1.0, epsilon = 1e-14);
        let y_plus = PureState::new(vec![C64::from(FRAC_1_SQRT_2), C64::new(0.0, FRAC_1_SQRT_2)]).unwrap();
        let py = born_probabilities(&y_plus, &"Y".parse().unwrap()).unwrap();
        assert_abs_diff_eq!(py[0], 1.0, epsilon = 1e-14);
        // phi = 0 is the computational basis
        let b = angle_basis(0.0, 1.3);
        assert!(max_dev(&b, &CMatrix::from_row_slice(2, 2, &[C64::from(1.0), C64::from(0.0), C64::from(0.0), -C64::from_polar(1.0, 1.3)])) < 1e-15);
    }

    #[test]
    fn zero_state_all_counts_on_zero() {
        let rec = sample(&PureState::zero(1), &"Z".parse().unwrap(), 1000, 3, 0.0).unwrap();
        assert_eq!(rec.counts.get("0"), Some(&1000));
        assert_eq!(rec.counts.len(), 1);
        rec.validate().unwrap();
    }

    #[test]
    fn sampling_is_deterministic_and_checks_arity() {
        let psi = PureState::new(vec![C64::from(0.6), C64::from(0.8)]).unwrap();
        let s: MeasSetting = "X".parse().unwrap();
        assert_eq!(sample(&psi, &s, 500, 11, 0.1).unwrap(), sample(&psi, &s, 500, 11, 0.1).unwrap());
        assert!(sample(&psi, &"XZ".parse().unwrap(), 10, 0, 0.0).is_err());
        assert!(sample(&psi, &s, 0, 0, 0.0).is_err());
    }

    #[test]
    fn readout_flip_distribution() {
        let p = apply_readout_flip(&[1.0, 0.0, 0.0, 0.0], 2, 0.1);
        assert_abs_diff_eq!(p[0], 0.81, epsilon = 1e-15);
        assert_abs_diff_eq!(p[1], 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(p[2], 0.09, epsilon = 1e-15);
        assert_abs_diff_eq!(p[3], 0.01, epsilon = 1e-15);
    }

    #[test]
    fn record_json_roundtrip() {
        let psi = PureState::zero(2);
        let setting = MeasSetting(vec![BasisSpec::Pauli(Pauli::X), BasisSpec::Angles { phi: 0.5, xi: 1.0 }]);
        let rec = sample(&psi, &setting, 64, 9, 0.0).unwrap();
        let json = serde_json::to_string(&rec).unwrap();
        assert!(json.contains("\"setting\":[\"X\",{\"phi\":0.5,\"xi\":1.0}]"));
        let back: MeasRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        let bad = r#"{"setting":["Z"],"shots":3,"seed":0,"counts":{"0":1}}"#;
        let rec: MeasRecord = serde_json::from_str(bad).unwrap();
        assert!(rec.validate().is_err());
    }

    #[test]
    fn marginals_sum_counts() {
        let setting: MeasSetting = "ZZ".parse().unwrap();
        let rec = MeasRecord::from_counts(setting, &[1, 2, 3, 4], 0).unwrap();
        assert_eq!(marginal_counts(&rec, &[0]).unwrap(), vec![3, 7]);
        assert_eq!(marginal_counts(&rec, &[1]).unwrap(), vec![4, 6]);
        assert_eq!(marginal_counts(&rec, &[1, 0]).unwrap(), vec![1, 3, 2, 4]);
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::BTreeSet<u64> = (0..100).map(|i| derive_seed(7, i)).collect();
        assert_eq!(seeds.len(), 100);
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }
}
