//! Closed-form analytics of the stochastic collision model.
//!
//! Every ancilla starts in `|0>` and collides with the system once, at a
//! Poisson-distributed time with rate `lambda`, so at time `t` it has collided
//! with probability `p(t) = 1 - exp(-lambda t)`. A collision of strength
//! `theta` acts on the system through the single-collision map
//! [`KrausChannel::collision`](crate::qstate::KrausChannel::collision).
//! Times are dimensionless (`lambda = 1` units in every experiment).
//!
//! Global-state register layout:
//!
//! * `Full`: qubit 0 is the system, then one `(emitter, ancilla)` pair per
//!   collision: emitter `i` is qubit `1 + 2i`, ancilla `i` is qubit `2 + 2i`.
//! * `Condensed`: qubit 0 is the system, pair `i` is qubit `1 + i`.

use std::f64::consts::{FRAC_1_SQRT_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::qstate::{PureState, C64};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Every ancilla and its emitter are separate qubits.
    Full,
    /// Each emitter-ancilla pair is remapped onto one qubit (`theta = pi`).
    Condensed,
}

/// How the finite-`n` coherence factor scales the collision probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateConvention {
    /// Each ancilla collides with probability `1 - exp(-lambda t)`.
    #[default]
    PerAncilla,
    /// The rate is shared between the `n` ancillae: `1 - exp(-lambda t / n)`.
    Shared,
}

/// Parameters of one collision model.
///
/// `theta` is the limit of `tau * eta` (collision duration times coupling);
/// neither factor appears on its own anywhere downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScmParams {
    pub theta: f64,
    pub lam: f64,
    pub n: usize,
    pub scenario: Scenario,
}

const THETA_PI_TOL: f64 = 1e-12;

impl ScmParams {
    pub fn new(theta: f64, lam: f64, n: usize, scenario: Scenario) -> Result<Self> {
        let p = Self {
            theta,
            lam,
            n,
            scenario,
        };
        p.validate()?;
        Ok(p)
    }

    /// Non-entangling (`theta = pi`) model with unit rate.
    pub fn non_entangling(n: usize, scenario: Scenario) -> Self {
        Self::new(PI, 1.0, n, scenario).expect("valid non-entangling parameters")
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lam > 0.0) || !self.lam.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "rate lambda must be positive, got {}",
                self.lam
            )));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(0.0..TAU).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 2pi), got {}",
                self.theta
            )));
        }
        if self.scenario == Scenario::Condensed && !self.is_non_entangling() {
            return Err(Error::InvalidParameter(
                "the condensed scenario requires theta = pi".into(),
            ));
        }
        Ok(())
    }

    pub fn is_non_entangling(&self) -> bool {
        (self.theta - PI).abs() < THETA_PI_TOL
    }

    /// Qubits in the global register: system plus environment.
    pub fn num_qubits(&self) -> usize {
        match self.scenario {
            Scenario::Full => 1 + 2 * self.n,
            Scenario::Condensed => 1 + self.n,
        }
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Ascending, non-negative sample times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TimeGrid(Vec<f64>);

impl TimeGrid {
    pub fn new(times: Vec<f64>) -> Result<Self> {
        for &t in &times {
            check_time(t)?;
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "times must be strictly increasing".into(),
            ));
        }
        Ok(Self(times))
    }

    /// `points` evenly spaced times on `[start, stop]`, both included.
    pub fn linspace(start: f64, stop: f64, points: usize) -> Result<Self> {
        match points {
            0 => Self::new(Vec::new()),
            1 => Self::new(vec![start]),
            _ => {
                let step = (stop - start) / (points - 1) as f64;
                Self::new((0..points).map(|k| start + step * k as f64).collect())
            }
        }
    }

    pub fn times(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl TryFrom<Vec<f64>> for TimeGrid {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<TimeGrid> for Vec<f64> {
    fn from(g: TimeGrid) -> Self {
        g.0
    }
}

/// `1 - exp(-lambda t)`.
pub fn collision_probability(t: f64, p: &ScmParams) -> Result<f64> {
    check_time(t)?;
    Ok(-(-p.lam * t).exp_m1())
}

/// Preparation angle `alpha = arccos(exp(-lambda t / 2))`; a pair prepared
/// with `Ry(2 alpha)` has collided with amplitude `sin(alpha)`.
pub fn prep_angle(t: f64, p: &ScmParams) -> Result<f64> {
    check_time(t)?;
    Ok((-p.lam * t / 2.0).exp().acos())
}

/// Infinite-environment coherence factor `exp(-lambda (1 - cos theta) t)`.
pub fn coherence_markovian(t: f64, p: &ScmParams) -> f64 {
    (-p.lam * (1.0 - p.theta.cos()) * t).exp()
}

/// Finite-`n` coherence factor `[1 + (cos theta - 1) p(t)]^n` with the
/// per-ancilla collision probability. Signed.
pub fn coherence_finite(t: f64, p: &ScmParams) -> f64 {
    coherence_finite_with(t, p, RateConvention::PerAncilla)
}

pub fn coherence_finite_with(t: f64, p: &ScmParams, convention: RateConvention) -> f64 {
    let rate = match convention {
        RateConvention::PerAncilla => p.lam,
        RateConvention::Shared => p.lam / p.n as f64,
    };
    let prob = -(-rate * t).exp_m1();
    (1.0 + (p.theta.cos() - 1.0) * prob).powi(p.n as i32)
}

/// `(t_max, t_close, t_rec) = (ln 2, ln(2/1.3), ln 6)`.
pub fn canonical_times() -> (f64, f64, f64) {
    (2f64.ln(), (2.0f64 / 1.3).ln(), 6f64.ln())
}

/// Exact global state at time `t` for the layout described in the module
/// docs, system initially `|+>`, ancillae in `|0>`.
///
/// In the full scenario each pair contributes, for system branch `s`,
/// `sqrt(1-p)|1>_E|0>_A + i sqrt(p) cos(theta/2)|0>_E|0>_A
///  + (-1)^s sqrt(p) sin(theta/2)|0>_E|1>_A`; the emitted branch keeps its
/// global factor `i` so the state is phase-exact for every `theta`.
pub fn ideal_global_state(t: f64, p: &ScmParams) -> Result<PureState> {
    p.validate()?;
    let prob = collision_probability(t, p)?;
    let stay = (1.0 - prob).sqrt();
    let go = prob.sqrt();
    let half = p.theta / 2.0;
    // per-pair local factors indexed by (s, local basis index)
    let factors: Vec<[Vec<C64>; 2]> = match p.scenario {
        Scenario::Full => {
            // pair basis |e a>: index 2e + a
            let branch = |s: usize| {
                let sign = if s == 0 { 1.0 } else { -1.0 };
                vec![
                    C64::new(0.0, go * half.cos()),
                    C64::from(sign * go * half.sin()),
                    C64::from(stay),
                    C64::from(0.0),
                ]
            };
            (0..p.n).map(|_| [branch(0), branch(1)]).collect()
        }
        Scenario::Condensed => {
            let branch = |s: usize| {
                let sign = if s == 0 { 1.0 } else { -1.0 };
                vec![C64::from(stay), C64::from(sign * go)]
            };
            (0..p.n).map(|_| [branch(0), branch(1)]).collect()
        }
    };
    let mut amps = Vec::with_capacity(1 << p.num_qubits());
    for s in 0..2 {
        let mut branch = vec![C64::from(FRAC_1_SQRT_2)];
        for f in &factors {
            branch = branch
                .iter()
                .flat_map(|a| f[s].iter().map(move |b| a * b))
                .collect();
        }
        amps.extend(branch);
    }
    PureState::from_unnormalized(amps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{partial_trace, QuantumState};
    use approx::assert_abs_diff_eq;

    fn cond(n: usize) -> ScmParams {
        ScmParams::non_entangling(n, Scenario::Condensed)
    }

    fn full(n: usize) -> ScmParams {
        ScmParams::non_entangling(n, Scenario::Full)
    }

    #[test]
    fn params_validation() {
        assert!(ScmParams::new(PI, 0.0, 3, Scenario::Full).is_err());
        assert!(ScmParams::new(PI, 1.0, 0, Scenario::Full).is_err());
        assert!(ScmParams::new(TAU, 1.0, 1, Scenario::Full).is_err());
        assert!(ScmParams::new(1.0, 1.0, 3, Scenario::Condensed).is_err());
        assert!(ScmParams::new(1.0, 1.0, 3, Scenario::Full).is_ok());
    }

    #[test]
    fn time_grid_validation() {
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::new(vec![-0.1, 1.0]).is_err());
        let g = TimeGrid::linspace(0.0, 6f64.ln(), 31).unwrap();
        assert_eq!(g.len(), 31);
        assert_abs_diff_eq!(g.times()[30], 6f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn collision_probability_examples() {
        let p = cond(1);
        assert_eq!(collision_probability(0.0, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(collision_probability(2f64.ln(), &p).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            collision_probability(6f64.ln(), &p).unwrap(),
            5.0 / 6.0,
            epsilon = 1e-15
        );
        assert!(collision_probability(-1.0, &p).is_err());
    }

    #[test]
    fn prep_angle_examples() {
        let p = cond(1);
        assert_eq!(prep_angle(0.0, &p).unwrap(), 0.0);
        assert_abs_diff_eq!(prep_angle(2f64.ln(), &p).unwrap(), PI / 4.0, epsilon = 1e-15);
        let oracle = (1.0 / 6f64.sqrt()).acos();
        assert_abs_diff_eq!(prep_angle(6f64.ln(), &p).unwrap(), oracle, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle, 1.150_261_991_510_931_6, epsilon = 1e-12);
        assert!(prep_angle(-1e-3, &p).is_err());
        for t in [0.1, 0.7, 2.0, 5.0] {
            let a = prep_angle(t, &p).unwrap();
            assert_abs_diff_eq!(a.sin().powi(2), collision_probability(t, &p).unwrap(), epsilon = 1e-14);
        }
    }

    #[test]
    fn markovian_examples() {
        let p = cond(1);
        assert_eq!(coherence_markovian(0.0, &p), 1.0);
        assert_abs_diff_eq!(coherence_markovian(1.0, &p), (-2.0f64).exp(), epsilon = 1e-15);
        let q = ScmParams::new(PI / 2.0, 1.0, 1, Scenario::Full).unwrap();
        assert_abs_diff_eq!(coherence_markovian(1.0, &q), (-1.0f64).exp(), epsilon = 1e-15);
    }

    #[test]
    fn finite_examples() {
        let p = cond(6);
        assert_abs_diff_eq!(coherence_finite(2f64.ln(), &p), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            coherence_finite((2.0f64 / 1.3).ln(), &p),
            0.3f64.powi(6),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(coherence_finite(6f64.ln(), &p), 64.0 / 729.0, epsilon = 1e-15);
        for t in [0.0, 0.3, 1.2] {
            assert_abs_diff_eq!(
                coherence_finite(t, &p),
                (2.0 * (-t).exp() - 1.0).powi(6),
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn shared_rate_converges_to_markovian() {
        // [1 + (cos θ - 1)(1 - e^{-λt/n})]^n -> exp(-λ(1 - cos θ)t)
        for theta in [PI, PI / 2.0, 0.7] {
            let p = ScmParams::new(theta, 1.0, 1000, Scenario::Full).unwrap();
            for k in 0..=30 {
                let t = 3.0 * k as f64 / 30.0;
                let diff = (coherence_finite_with(t, &p, RateConvention::Shared)
                    - coherence_markovian(t, &p))
                .abs();
                assert!(diff < 1e-3, "theta={theta} t={t} diff={diff}");
            }
        }
    }

    #[test]
    fn canonical_times_values() {
        let (a, b, c) = canonical_times();
        assert_abs_diff_eq!(a, 0.693_147_180_559_945_3, epsilon = 1e-15);
        assert_abs_diff_eq!(b, 0.430_782_916_092_454_1, epsilon = 1e-15);
        assert_abs_diff_eq!(c, 1.791_759_469_228_055, epsilon = 1e-15);
    }

    #[test]
    fn condensed_state_at_zero_is_plus_and_zeros() {
        for n in [1, 3, 6] {
            let psi = ideal_global_state(0.0, &cond(n)).unwrap();
            let amps = psi.amplitudes();
            let top = 1usize << n;
            assert_abs_diff_eq!(amps[0].re, FRAC_1_SQRT_2, epsilon = 1e-15);
            assert_abs_diff_eq!(amps[top].re, FRAC_1_SQRT_2, epsilon = 1e-15);
            let rest: f64 = amps
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != 0 && *i != top)
                .map(|(_, a)| a.norm())
                .sum();
            assert!(rest < 1e-15);
        }
    }

    #[test]
    fn condensed_at_t_max_is_ghz_in_pm_basis() {
        let n = 6;
        let psi = ideal_global_state(2f64.ln(), &cond(n)).unwrap();
        let h = FRAC_1_SQRT_2;
        let plus = [C64::from(h), C64::from(h)];
        let minus = [C64::from(h), C64::from(-h)];
        let mut a = vec![[C64::from(1.0), C64::from(0.0)]];
        a.extend(std::iter::repeat(plus).take(n));
        let mut b = vec![[C64::from(0.0), C64::from(1.0)]];
        b.extend(std::iter::repeat(minus).take(n));
        let pa = PureState::product(&a).unwrap();
        let pb = PureState::product(&b).unwrap();
        let ghz: Vec<C64> = pa
            .amplitudes()
            .iter()
            .zip(pb.amplitudes())
            .map(|(x, y)| (x + y) * h)
            .collect();
        let ghz = PureState::new(ghz).unwrap();
        assert_abs_diff_eq!(psi.fidelity(&ghz).unwrap(), 1.0, epsilon = 1e-12);
        let rho_s = partial_trace(&psi, &[0]).unwrap();
        assert_abs_diff_eq!(rho_s.element(0, 0).re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rho_s.element(0, 1).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn full_single_pair_at_t_max() {
        // (|+>|10> + |->|01>)/sqrt2 in register order S, E, A
        let psi = ideal_global_state(2f64.ln(), &full(1)).unwrap();
        let h = FRAC_1_SQRT_2;
        let mut expect = vec![C64::from(0.0); 8];
        // |+>|10>: s=0 idx 0b010, s=1 idx 0b110
        expect[0b010] += C64::from(h * h);
        expect[0b110] += C64::from(h * h);
        // |->|01>
        expect[0b001] += C64::from(h * h);
        expect[0b101] += C64::from(-h * h);
        for (a, b) in psi.amplitudes().iter().zip(&expect) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn full_single_pair_matches_three_branch_form() {
        // sqrt(1-p)|1>|0>|+> + i sqrt(p)(cos(θ/2)|0>|0>|+> - i sin(θ/2)|0>|1>|->)
        // written in S,E,A order
        let theta = 1.3;
        let t = 0.8;
        let p = ScmParams::new(theta, 1.0, 1, Scenario::Full).unwrap();
        let psi = ideal_global_state(t, &p).unwrap();
        let prob = 1.0 - (-t).exp();
        let h = FRAC_1_SQRT_2;
        let i = C64::new(0.0, 1.0);
        let mut expect = vec![C64::from(0.0); 8];
        for s in 0..2 {
            let sgn = if s == 0 { 1.0 } else { -1.0 };
            expect[(s << 2) | 0b10] += C64::from((1.0 - prob).sqrt() * h);
            expect[(s << 2) | 0b00] += i * prob.sqrt() * (theta / 2.0).cos() * h;
            expect[(s << 2) | 0b01] += i * (-i) * prob.sqrt() * (theta / 2.0).sin() * h * sgn;
        }
        for (a, b) in psi.amplitudes().iter().zip(&expect) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn full_state_at_pi_reduces_to_maximally_mixed() {
        let psi = ideal_global_state(2f64.ln(), &full(1)).unwrap();
        let rho = psi.reduced(&[0]).unwrap();
        assert_abs_diff_eq!(rho.element(0, 0).re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rho.element(0, 1).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn scenario_mismatch_is_an_error() {
        let bad = ScmParams {
            theta: 1.0,
            lam: 1.0,
            n: 2,
            scenario: Scenario::Condensed,
        };
        assert!(ideal_global_state(0.5, &bad).is_err());
    }
}
