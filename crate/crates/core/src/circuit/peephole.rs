use std::collections::BTreeSet;

use super::{Circuit, Gate, RoutedCircuit};
use crate::{Error, Result};

/// Forward dataflow of "provably `|0>`" flags.
///
/// Entry `i` of the result holds the flags *before* gate `i`; the last entry
/// holds the flags after the final gate.
pub fn zero_dataflow(c: &Circuit, initially_zero: &BTreeSet<usize>) -> Result<Vec<Vec<bool>>> {
    let n = c.num_qubits();
    if let Some(&q) = initially_zero.iter().find(|&&q| q >= n) {
        return Err(Error::QubitOutOfRange {
            index: q,
            num_qubits: n,
        });
    }
    let mut zero: Vec<bool> = (0..n).map(|q| initially_zero.contains(&q)).collect();
    let mut out = Vec::with_capacity(c.len() + 1);
    for g in c.gates() {
        out.push(zero.clone());
        match *g {
            Gate::X(q) | Gate::H(q) => zero[q] = false,
            Gate::Ry(q, angle) => {
                if angle != 0.0 {
                    zero[q] = false;
                }
            }
            Gate::Cnot(ctl, tgt) => {
                if !zero[ctl] {
                    zero[tgt] = false;
                }
            }
            Gate::Cz(..) => {}
            Gate::Swap(a, b) => zero.swap(a, b),
        }
    }
    out.push(zero);
    Ok(out)
}

/// Replaces every SWAP that has a provably `|0>` operand by two CNOTs.
///
/// With `z` in `|0>`, the CNOT controlled by `z` that opens the usual
/// three-CNOT SWAP acts trivially and is dropped, leaving
/// `CNOT(o -> z), CNOT(z -> o)`. `known_zero` lists physical qubits that
/// start in `|0>`; the swap count is kept and the CNOT count recomputed.
pub fn peephole_zero_swap(rc: &RoutedCircuit, known_zero: &BTreeSet<usize>) -> Result<RoutedCircuit> {
    let flags = zero_dataflow(&rc.circuit, known_zero)?;
    let mut out = Circuit::new(rc.circuit.num_qubits());
    for (g, zero) in rc.circuit.gates().iter().zip(&flags) {
        match *g {
            Gate::Swap(a, b) if zero[a] || zero[b] => {
                let (z, o) = if zero[b] { (b, a) } else { (a, b) };
                out.push(Gate::Cnot(o, z))?;
                out.push(Gate::Cnot(z, o))?;
            }
            _ => {
                out.push(*g)?;
            }
        }
    }
    for (&q, &role) in rc.circuit.labels() {
        out.set_label(q, role)?;
    }
    let cnot_count = out.cnot_count();
    Ok(RoutedCircuit {
        circuit: out,
        initial_layout: rc.initial_layout.clone(),
        final_layout: rc.final_layout.clone(),
        swap_count: rc.swap_count,
        cnot_count,
    })
}

/// Physical qubits that start in `|0>` under the routed layout: every
/// unoccupied qubit plus the images of `logical_zero`.
pub fn initial_zero_set(rc: &RoutedCircuit, logical_zero: &BTreeSet<usize>) -> BTreeSet<usize> {
    let m = rc.circuit.num_qubits();
    let occupied: BTreeSet<usize> = rc.initial_layout.iter().copied().collect();
    (0..m)
        .filter(|p| !occupied.contains(p))
        .chain(logical_zero.iter().map(|&l| rc.initial_layout[l]))
        .collect()
}
