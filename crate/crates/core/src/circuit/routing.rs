use rayon::prelude::*;
use serde::Serialize;

use super::{Circuit, CouplingMap, Gate};
use crate::qstate::{bit_position, CMatrix, PureState, C64, ZERO};
use crate::{Error, Result};

/// Devices up to this many physical qubits get an exhaustive placement search.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// A circuit rewritten onto physical qubits.
///
/// Logical qubit `q` starts on `initial_layout[q]` and ends on
/// `final_layout[q]`; physical qubits outside the layout start in `|0>`.
/// Labels of the routed circuit follow the final layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoutedCircuit {
    pub circuit: Circuit,
    pub initial_layout: Vec<usize>,
    pub final_layout: Vec<usize>,
    /// SWAPs inserted by the router.
    pub swap_count: usize,
    /// CNOTs of the current gate list after decomposition.
    pub cnot_count: usize,
}

impl RoutedCircuit {
    pub fn logical_qubits(&self) -> usize {
        self.initial_layout.len()
    }

    /// True when every two-qubit gate sits on an edge of `map`.
    pub fn is_conformant(&self, map: &CouplingMap) -> bool {
        self.circuit.gates().iter().all(|g| {
            let q = g.qubits();
            q.len() < 2 || map.are_adjacent(q[0], q[1])
        })
    }
}

struct Layout {
    l2p: Vec<usize>,
    p2l: Vec<Option<usize>>,
}

impl Layout {
    fn new(l2p: &[usize], num_physical: usize) -> Self {
        let mut p2l = vec![None; num_physical];
        for (l, &p) in l2p.iter().enumerate() {
            p2l[p] = Some(l);
        }
        Self {
            l2p: l2p.to_vec(),
            p2l,
        }
    }

    fn swap_physical(&mut self, a: usize, b: usize) {
        let (la, lb) = (self.p2l[a], self.p2l[b]);
        self.p2l[a] = lb;
        self.p2l[b] = la;
        if let Some(l) = la {
            self.l2p[l] = b;
        }
        if let Some(l) = lb {
            self.l2p[l] = a;
        }
    }
}

fn check_layout(c: &Circuit, map: &CouplingMap, layout: &[usize]) -> Result<()> {
    if layout.len() != c.num_qubits() {
        return Err(Error::DimensionMismatch {
            expected: c.num_qubits(),
            found: layout.len(),
        });
    }
    let mut seen = vec![false; map.num_physical()];
    for &p in layout {
        if p >= map.num_physical() {
            return Err(Error::QubitOutOfRange {
                index: p,
                num_qubits: map.num_physical(),
            });
        }
        if seen[p] {
            return Err(Error::Routing(format!("layout places two qubits on {p}")));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Sum of physical distances of the two-qubit gates in `rest`.
fn lookahead_cost(rest: &[Gate], l2p: &[usize], map: &CouplingMap) -> usize {
    rest.iter()
        .filter(|g| g.is_two_qubit())
        .map(|g| {
            let q = g.qubits();
            map.distance(l2p[q[0]], l2p[q[1]])
        })
        .sum()
}

/// Greedy shortest-path SWAP insertion from a fixed initial layout.
///
/// For a non-adjacent gate the router walks one operand along a shortest
/// path until it neighbours the other; it moves whichever operand leaves the
/// remaining two-qubit gates closer together, preferring the second operand
/// on ties.
pub fn route_with_layout(c: &Circuit, map: &CouplingMap, layout: &[usize]) -> Result<RoutedCircuit> {
    check_layout(c, map, layout)?;
    let mut lay = Layout::new(layout, map.num_physical());
    let mut out = Circuit::new(map.num_physical());
    let mut swaps = 0;
    let gates = c.gates();
    for (i, g) in gates.iter().enumerate() {
        if g.is_two_qubit() {
            let q = g.qubits();
            let (pa, pb) = (lay.l2p[q[0]], lay.l2p[q[1]]);
            if !map.are_adjacent(pa, pb) {
                let move_b = map.shortest_path(pb, pa);
                let move_a = map.shortest_path(pa, pb);
                let cost_of = |path: &[usize]| {
                    let mut l2p = lay.l2p.clone();
                    let mut trial = Layout::new(&l2p, map.num_physical());
                    for w in path[..path.len() - 1].windows(2) {
                        trial.swap_physical(w[0], w[1]);
                    }
                    l2p.copy_from_slice(&trial.l2p);
                    lookahead_cost(&gates[i + 1..], &l2p, map)
                };
                let path = if cost_of(&move_a) < cost_of(&move_b) {
                    move_a
                } else {
                    move_b
                };
                for w in path[..path.len() - 1].windows(2) {
                    out.push(Gate::Swap(w[0], w[1]))?;
                    lay.swap_physical(w[0], w[1]);
                    swaps += 1;
                }
            }
        }
        out.push(g.map_qubits(|l| lay.l2p[l]))?;
    }
    for (&l, &role) in c.labels() {
        out.set_label(lay.l2p[l], role)?;
    }
    let cnot_count = out.cnot_count();
    Ok(RoutedCircuit {
        circuit: out,
        initial_layout: layout.to_vec(),
        final_layout: lay.l2p,
        swap_count: swaps,
        cnot_count,
    })
}

/// Injective maps of `k` logical qubits onto `m` physical ones, in
/// lexicographic order.
fn placements(k: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(k: usize, m: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for p in 0..m {
            if !used[p] {
                used[p] = true;
                cur.push(p);
                rec(k, m, cur, used, out);
                cur.pop();
                used[p] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(k, m, &mut Vec::with_capacity(k), &mut vec![false; m], &mut out);
    out
}

fn check_fits(c: &Circuit, map: &CouplingMap) -> Result<()> {
    if c.num_qubits() > map.num_physical() {
        return Err(Error::Routing(format!(
            "circuit needs {} qubits but the device has {}",
            c.num_qubits(),
            map.num_physical()
        )));
    }
    Ok(())
}

/// Post-decomposition CNOT count of the greedy routing from every injective
/// placement, in lexicographic placement order.
pub fn placement_costs(c: &Circuit, map: &CouplingMap) -> Result<Vec<(Vec<usize>, usize)>> {
    check_fits(c, map)?;
    if map.num_physical() > EXHAUSTIVE_LIMIT {
        return Err(Error::SizeGuard {
            what: "exhaustive placement",
            max: EXHAUSTIVE_LIMIT,
            found: map.num_physical(),
        });
    }
    placements(c.num_qubits(), map.num_physical())
        .into_par_iter()
        .map(|layout| {
            let cost = route_with_layout(c, map, &layout)?.cnot_count;
            Ok((layout, cost))
        })
        .collect()
}

/// Routes `c` onto `map`.
///
/// Devices with at most [`EXHAUSTIVE_LIMIT`] qubits are searched over every
/// injective placement; the lowest CNOT count wins and ties go to the
/// lexicographically smallest placement. Larger devices use the trivial
/// placement `q -> q`.
pub fn route(c: &Circuit, map: &CouplingMap) -> Result<RoutedCircuit> {
    check_fits(c, map)?;
    if map.num_physical() > EXHAUSTIVE_LIMIT {
        let trivial: Vec<usize> = (0..c.num_qubits()).collect();
        return route_with_layout(c, map, &trivial);
    }
    let costs = placement_costs(c, map)?;
    let (best, _) = costs
        .iter()
        .enumerate()
        .min_by_key(|(i, (_, cost))| (*cost, *i))
        .map(|(_, pc)| pc)
        .ok_or_else(|| Error::Routing("no placement available".into()))?;
    route_with_layout(c, map, best)
}

/// Places logical qubit `q` of `state` on physical qubit `layout[q]` of an
/// `num_physical` register; other physical qubits are `|0>`.
pub fn embed_state(state: &PureState, layout: &[usize], num_physical: usize) -> Result<PureState> {
    let k = state.num_qubits();
    if layout.len() != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            found: layout.len(),
        });
    }
    let mut amps = vec![ZERO; 1 << num_physical];
    for (idx, a) in state.amplitudes().iter().enumerate() {
        let mut target = 0;
        for (q, &p) in layout.iter().enumerate() {
            let bit = (idx >> bit_position(q, k)) & 1;
            target |= bit << bit_position(p, num_physical);
        }
        amps[target] = *a;
    }
    PureState::new(amps)
}

/// Permutation matrix taking logical basis states to physical ones
/// (`layout` must be a bijection).
pub fn layout_permutation(layout: &[usize]) -> Result<CMatrix> {
    let n = layout.len();
    crate::qstate::check_qubits(layout, n)?;
    let dim = 1usize << n;
    let mut p = CMatrix::zeros(dim, dim);
    for x in 0..dim {
        let mut y = 0;
        for (q, &ph) in layout.iter().enumerate() {
            y |= ((x >> bit_position(q, n)) & 1) << bit_position(ph, n);
        }
        p[(y, x)] = C64::from(1.0);
    }
    Ok(p)
}

/// Max elementwise deviation between the routed circuit and the original
/// over every logical basis input: `R |embed_init(x)>` against
/// `embed_final(U |x>)`. When the device is fully occupied this is the full
/// unitary comparison `R = P_final U P_init^T`.
pub fn routing_isometry_deviation(original: &Circuit, routed: &RoutedCircuit) -> Result<f64> {
    let k = original.num_qubits();
    let m = routed.circuit.num_qubits();
    if m > 12 {
        return Err(Error::SizeGuard {
            what: "routing equivalence check",
            max: 12,
            found: m,
        });
    }
    let mut worst = 0.0f64;
    for x in 0..(1usize << k) {
        let mut logical = PureState::basis(k, x);
        let mut start = embed_state(&logical, &routed.initial_layout, m)?;
        original.apply_to(&mut logical)?;
        let expected = embed_state(&logical, &routed.final_layout, m)?;
        routed.circuit.apply_to(&mut start)?;
        for (a, b) in start.amplitudes().iter().zip(expected.amplitudes()) {
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}
