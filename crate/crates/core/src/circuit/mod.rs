//! Gate-level IR, circuit builders for both scenarios, coupling maps, SWAP
//! routing and the `|0>`-aware SWAP peephole.

mod coupling;
mod peephole;
mod routing;

pub use coupling::CouplingMap;
pub use peephole::{initial_zero_set, peephole_zero_swap, zero_dataflow};
pub use routing::{
    embed_state, layout_permutation, placement_costs, route, route_with_layout,
    routing_isometry_deviation, RoutedCircuit, EXHAUSTIVE_LIMIT,
};

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::qstate::{apply_op_to_vector, CMatrix, PureState, C64, ONE, ZERO};
use crate::scm::{prep_angle, Scenario, ScmParams};
use crate::{Error, Result};

/// Largest register [`unitary_of`] will build densely.
pub const UNITARY_MAX_QUBITS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    X(usize),
    H(usize),
    /// `exp(-i angle sigma_y / 2)`
    Ry(usize, f64),
    /// control, target
    Cnot(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

impl Gate {
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::X(q) | Gate::H(q) | Gate::Ry(q, _) => vec![q],
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => vec![a, b],
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Cnot(..) | Gate::Cz(..) | Gate::Swap(..))
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::X(_) => "X",
            Gate::H(_) => "H",
            Gate::Ry(..) => "RY",
            Gate::Cnot(..) => "CNOT",
            Gate::Cz(..) => "CZ",
            Gate::Swap(..) => "SWAP",
        }
    }

    /// CNOTs after decomposition; SWAP is three.
    pub fn cnot_cost(&self) -> usize {
        match self {
            Gate::X(_) | Gate::H(_) | Gate::Ry(..) => 0,
            Gate::Cnot(..) | Gate::Cz(..) => 1,
            Gate::Swap(..) => 3,
        }
    }

    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Gate {
        match *self {
            Gate::X(q) => Gate::X(f(q)),
            Gate::H(q) => Gate::H(f(q)),
            Gate::Ry(q, a) => Gate::Ry(f(q), a),
            Gate::Cnot(a, b) => Gate::Cnot(f(a), f(b)),
            Gate::Cz(a, b) => Gate::Cz(f(a), f(b)),
            Gate::Swap(a, b) => Gate::Swap(f(a), f(b)),
        }
    }

    /// Unitary on `self.qubits()`, first listed qubit most significant.
    pub fn matrix(&self) -> CMatrix {
        let r = |x: f64| C64::from(x);
        match *self {
            Gate::X(_) => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Gate::H(_) => {
                let h = r(FRAC_1_SQRT_2);
                CMatrix::from_row_slice(2, 2, &[h, h, h, -h])
            }
            Gate::Ry(_, a) => {
                let (s, c) = (a / 2.0).sin_cos();
                CMatrix::from_row_slice(2, 2, &[r(c), r(-s), r(s), r(c)])
            }
            Gate::Cnot(..) => CMatrix::from_row_slice(
                4,
                4,
                &[
                    ONE, ZERO, ZERO, ZERO, //
                    ZERO, ONE, ZERO, ZERO, //
                    ZERO, ZERO, ZERO, ONE, //
                    ZERO, ZERO, ONE, ZERO,
                ],
            ),
            Gate::Cz(..) => CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                ONE, ONE, ONE, -ONE,
            ])),
            Gate::Swap(..) => CMatrix::from_row_slice(
                4,
                4,
                &[
                    ONE, ZERO, ZERO, ZERO, //
                    ZERO, ZERO, ONE, ZERO, //
                    ZERO, ONE, ZERO, ZERO, //
                    ZERO, ZERO, ZERO, ONE,
                ],
            ),
        }
    }

    /// Applies the gate to raw amplitudes of an `num_qubits` register.
    pub(crate) fn apply_to_amplitudes(&self, amps: &mut [C64], num_qubits: usize) {
        apply_op_to_vector(amps, num_qubits, &self.matrix(), &self.qubits());
    }

    fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for &q in &qs {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange {
                    index: q,
                    num_qubits,
                });
            }
        }
        if qs.len() == 2 && qs[0] == qs[1] {
            return Err(Error::DuplicateQubit(qs[0]));
        }
        if let Gate::Ry(_, a) = self {
            if !a.is_finite() {
                return Err(Error::InvalidParameter("non-finite rotation angle".into()));
            }
        }
        Ok(())
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::X(q) | Gate::H(q) => write!(f, "{} {q}", self.name()),
            // `{:?}` on f64 is the shortest representation that round-trips
            Gate::Ry(q, a) => write!(f, "RY {q} {a:?}"),
            Gate::Cnot(a, b) | Gate::Cz(a, b) | Gate::Swap(a, b) => {
                write!(f, "{} {a} {b}", self.name())
            }
        }
    }
}

/// What a qubit stands for in the simulated model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    System,
    Ancilla(usize),
    Emitter(usize),
    Pair(usize),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::System => write!(f, "S"),
            Role::Ancilla(i) => write!(f, "A{i}"),
            Role::Emitter(i) => write!(f, "E{i}"),
            Role::Pair(i) => write!(f, "P{i}"),
        }
    }
}

impl std::str::FromStr for Role {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "S" {
            return Ok(Role::System);
        }
        let (head, tail) = s.split_at(1.min(s.len()));
        let idx: usize = tail.parse().map_err(|_| format!("bad role `{s}`"))?;
        match head {
            "A" => Ok(Role::Ancilla(idx)),
            "E" => Ok(Role::Emitter(idx)),
            "P" => Ok(Role::Pair(idx)),
            _ => Err(format!("bad role `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<Gate>,
    labels: BTreeMap<usize, Role>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Self {
            num_qubits,
            gates: Vec::new(),
            labels: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, gate: Gate) -> Result<&mut Self> {
        gate.validate(self.num_qubits)?;
        self.gates.push(gate);
        Ok(self)
    }

    pub fn extend<I: IntoIterator<Item = Gate>>(&mut self, gates: I) -> Result<&mut Self> {
        for g in gates {
            self.push(g)?;
        }
        Ok(self)
    }

    /// Attaches a role to a qubit. At most one qubit may be the system.
    pub fn set_label(&mut self, qubit: usize, role: Role) -> Result<()> {
        if qubit >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                index: qubit,
                num_qubits: self.num_qubits,
            });
        }
        if role == Role::System {
            if let Some(s) = self.system_qubit() {
                if s != qubit {
                    return Err(Error::InvalidParameter(format!(
                        "qubit {s} is already the system"
                    )));
                }
            }
        }
        self.labels.insert(qubit, role);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn labels(&self) -> &BTreeMap<usize, Role> {
        &self.labels
    }

    pub fn system_qubit(&self) -> Option<usize> {
        self.labels
            .iter()
            .find(|(_, r)| **r == Role::System)
            .map(|(q, _)| *q)
    }

    pub fn qubit_with_role(&self, role: Role) -> Option<usize> {
        self.labels.iter().find(|(_, r)| **r == role).map(|(q, _)| *q)
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().map(Gate::cnot_cost).sum()
    }

    pub fn count_where(&self, pred: impl Fn(&Gate) -> bool) -> usize {
        self.gates.iter().filter(|g| pred(g)).count()
    }

    /// Runs the circuit on `state` in place.
    pub fn apply_to(&self, state: &mut PureState) -> Result<()> {
        if state.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.num_qubits,
                found: state.num_qubits(),
            });
        }
        let n = self.num_qubits;
        let amps = state.amplitudes_mut();
        for g in &self.gates {
            g.apply_to_amplitudes(amps, n);
        }
        Ok(())
    }

    /// Line-oriented text form: `# qubits N`, `# label Q ROLE` headers, then
    /// one `KIND q0 [q1] [angle]` line per gate.
    pub fn to_text(&self) -> String {
        let mut out = format!("# qubits {}\n", self.num_qubits);
        for (q, r) in &self.labels {
            out.push_str(&format!("# label {q} {r}\n"));
        }
        for g in &self.gates {
            out.push_str(&g.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses [`Circuit::to_text`] output. Without a `# qubits` header the
    /// register is sized to the largest qubit index used.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut declared: Option<usize> = None;
        let mut labels = Vec::new();
        let mut gates = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| Error::Parse { line: line_no, msg };
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                let parts: Vec<&str> = comment.split_whitespace().collect();
                match parts.as_slice() {
                    ["qubits", n] => {
                        declared = Some(n.parse().map_err(|_| err(format!("bad qubit count `{n}`")))?)
                    }
                    ["label", q, role] => {
                        let q: usize = q.parse().map_err(|_| err(format!("bad qubit `{q}`")))?;
                        let role: Role = role.parse().map_err(err)?;
                        labels.push((q, role));
                    }
                    _ => {}
                }
                continue;
            }
            let parts: Vec<&str> = line.split_whitespace().collect();
            let q = |k: usize| -> Result<usize> {
                parts
                    .get(k)
                    .ok_or_else(|| err(format!("missing operand {k}")))?
                    .parse()
                    .map_err(|_| err(format!("bad qubit `{}`", parts[k])))
            };
            let arity = |n: usize| -> Result<()> {
                if parts.len() != n {
                    return Err(err(format!("`{}` expects {} fields", parts[0], n)));
                }
                Ok(())
            };
            let gate = match parts[0].to_ascii_uppercase().as_str() {
                "X" => {
                    arity(2)?;
                    Gate::X(q(1)?)
                }
                "H" => {
                    arity(2)?;
                    Gate::H(q(1)?)
                }
                "RY" => {
                    arity(3)?;
                    let a: f64 = parts[2]
                        .parse()
                        .map_err(|_| err(format!("bad angle `{}`", parts[2])))?;
                    Gate::Ry(q(1)?, a)
                }
                "CNOT" | "CX" => {
                    arity(3)?;
                    Gate::Cnot(q(1)?, q(2)?)
                }
                "CZ" => {
                    arity(3)?;
                    Gate::Cz(q(1)?, q(2)?)
                }
                "SWAP" => {
                    arity(3)?;
                    Gate::Swap(q(1)?, q(2)?)
                }
                other => return Err(err(format!("unknown gate `{other}`"))),
            };
            gates.push((line_no, gate));
        }
        let used = gates
            .iter()
            .flat_map(|(_, g)| g.qubits())
            .chain(labels.iter().map(|(q, _)| *q))
            .max()
            .map_or(0, |m| m + 1);
        let n = declared.unwrap_or(used);
        let mut c = Circuit::new(n);
        for (line, g) in gates {
            c.push(g).map_err(|e| Error::Parse {
                line,
                msg: e.to_string(),
            })?;
        }
        for (q, r) in labels {
            c.set_label(q, r)?;
        }
        Ok(c)
    }
}

fn require_non_entangling(p: &ScmParams, scenario: Scenario) -> Result<()> {
    p.validate()?;
    if p.scenario != scenario {
        return Err(Error::InvalidParameter(format!(
            "expected a {scenario:?} scenario, got {:?}",
            p.scenario
        )));
    }
    if !p.is_non_entangling() {
        return Err(Error::InvalidParameter(
            "circuits exist only for non-entangling collisions (theta = pi)".into(),
        ));
    }
    Ok(())
}

/// Purified circuit: system, then `(emitter, ancilla)` per pair.
///
/// Each pair is prepared as `sqrt(1-p)|10> + sqrt(p)|01>` by `Ry(2 alpha)` on
/// the emitter, `CNOT(emitter -> ancilla)` and `X` on the emitter; then `H`
/// on the system and one `CZ(system, ancilla)` per pair.
pub fn build_full_circuit(t: f64, p: &ScmParams) -> Result<Circuit> {
    require_non_entangling(p, Scenario::Full)?;
    let alpha = prep_angle(t, p)?;
    let mut c = Circuit::new(p.num_qubits());
    c.set_label(0, Role::System)?;
    for i in 0..p.n {
        let (e, a) = (1 + 2 * i, 2 + 2 * i);
        c.set_label(e, Role::Emitter(i))?;
        c.set_label(a, Role::Ancilla(i))?;
        c.extend([Gate::Ry(e, 2.0 * alpha), Gate::Cnot(e, a), Gate::X(e)])?;
    }
    c.push(Gate::H(0))?;
    for i in 0..p.n {
        c.push(Gate::Cz(0, 2 + 2 * i))?;
    }
    Ok(c)
}

/// Condensed circuit: one qubit per pair, prepared by `Ry(2 alpha)`, then `H`
/// on the system and `CZ(system, pair)` for every pair.
pub fn build_condensed_circuit(t: f64, p: &ScmParams) -> Result<Circuit> {
    require_non_entangling(p, Scenario::Condensed)?;
    let alpha = prep_angle(t, p)?;
    let mut c = Circuit::new(p.num_qubits());
    c.set_label(0, Role::System)?;
    for i in 0..p.n {
        c.set_label(1 + i, Role::Pair(i))?;
        c.push(Gate::Ry(1 + i, 2.0 * alpha))?;
    }
    c.push(Gate::H(0))?;
    for i in 0..p.n {
        c.push(Gate::Cz(0, 1 + i))?;
    }
    Ok(c)
}

/// Builder dispatch on the scenario.
pub fn build_circuit(t: f64, p: &ScmParams) -> Result<Circuit> {
    match p.scenario {
        Scenario::Full => build_full_circuit(t, p),
        Scenario::Condensed => build_condensed_circuit(t, p),
    }
}

/// Dense unitary of the whole circuit.
pub fn unitary_of(c: &Circuit) -> Result<CMatrix> {
    let n = c.num_qubits();
    if n > UNITARY_MAX_QUBITS {
        return Err(Error::SizeGuard {
            what: "unitary_of",
            max: UNITARY_MAX_QUBITS,
            found: n,
        });
    }
    let dim = 1usize << n;
    let mut u = CMatrix::identity(dim, dim);
    for col in u.as_mut_slice().chunks_mut(dim) {
        for g in c.gates() {
            g.apply_to_amplitudes(col, n);
        }
    }
    Ok(u)
}
