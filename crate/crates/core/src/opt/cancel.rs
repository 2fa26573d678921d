//! Toffoli-pair cancellation and commuting inverse removal.

use std::f64::consts::FRAC_PI_2;

use super::lower::{decompose_toffoli, lower_cphase, toffoli_k};
use crate::gates::{Circuit, GateInstance, GateKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Basis {
    Z,
    X,
    Other,
}

/// How `g` acts on qubit `q`: diagonal (Z), diagonal in the X basis, or
/// anything else.
fn action_on(g: &GateInstance, q: usize) -> Basis {
    if g.is_control(q) {
        return Basis::Z;
    }
    match g.kind {
        GateKind::X => Basis::X,
        k if k.is_diagonal() => Basis::Z,
        _ => Basis::Other,
    }
}

/// Sufficient condition for `a·b = b·a`: on every shared qubit both gates
/// are diagonal in the same basis.
pub fn commutes(a: &GateInstance, b: &GateInstance) -> bool {
    a.qubits().all(|q| {
        if !b.touches(q) {
            return true;
        }
        let (x, y) = (action_on(a, q), action_on(b, q));
        x == y && x != Basis::Other
    })
}

/// Remove pairs of mutually inverse gates separated only by gates that
/// commute with the first. Repeats until nothing changes.
pub fn cancel_inverses(circuit: &Circuit) -> Circuit {
    let mut gates: Vec<Option<GateInstance>> = circuit.gates().iter().cloned().map(Some).collect();
    loop {
        let mut changed = false;
        for i in 0..gates.len() {
            let Some(gi) = gates[i].clone() else { continue };
            for j in i + 1..gates.len() {
                let Some(gj) = &gates[j] else { continue };
                if gi.is_inverse_of(gj) {
                    gates[i] = None;
                    gates[j] = None;
                    changed = true;
                    break;
                }
                if !commutes(&gi, gj) {
                    break;
                }
            }
        }
        if !changed {
            break;
        }
    }
    circuit.with_gates(gates.into_iter().flatten().collect())
}

fn is_toffoli(g: &GateInstance) -> bool {
    g.kind == GateKind::X && g.controls.len() == 2 && g.controls.iter().all(|c| c.on_one)
}

fn same_wiring(a: &GateInstance, b: &GateInstance) -> bool {
    let key = |g: &GateInstance| {
        let mut c: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
        c.sort_unstable();
        (c, g.targets[0])
    };
    key(a) == key(b)
}

/// Toffoli pairs `(i, j)` with identical wiring whose in-between gates use
/// the two controls only as controls.
pub fn find_toffoli_pairs(circuit: &Circuit) -> Vec<(usize, usize)> {
    let gates = circuit.gates();
    let mut partner = vec![None; gates.len()];
    let mut pairs = Vec::new();
    for i in 0..gates.len() {
        if !is_toffoli(&gates[i]) || partner[i].is_some() {
            continue;
        }
        let ctrl: Vec<usize> = gates[i].controls.iter().map(|c| c.qubit).collect();
        for j in i + 1..gates.len() {
            let g = &gates[j];
            if partner[j].is_none() && is_toffoli(g) && same_wiring(&gates[i], g) {
                partner[i] = Some(j);
                partner[j] = Some(i);
                pairs.push((i, j));
                break;
            }
            if ctrl.iter().any(|&q| g.touches(q) && !g.is_control(q)) {
                break;
            }
        }
    }
    pairs
}

/// Decompose paired Toffolis so that their control-side phases cancel.
///
/// The first member of each pair is emitted as `K` followed by `CP(π/2)` on
/// its controls and the second as `CP(−π/2)` followed by `K†`. The phases
/// commute with everything in between and annihilate; unpaired Toffolis get
/// the standard decomposition. The result contains only 1-qubit gates and
/// CNOTs.
pub fn cancel_toffoli_pairs(circuit: &Circuit) -> Circuit {
    let pairs = find_toffoli_pairs(circuit);
    let mut role = vec![0u8; circuit.len()];
    for &(i, j) in &pairs {
        role[i] = 1;
        role[j] = 2;
    }
    let mut out = Vec::new();
    for (g, r) in circuit.gates().iter().zip(role) {
        if !is_toffoli(g) {
            out.push(g.clone());
            continue;
        }
        let (a, b, c) = (g.controls[0].qubit, g.controls[1].qubit, g.targets[0]);
        match r {
            1 => {
                out.extend(toffoli_k(a, b, c));
                out.push(GateInstance::cphase(a, b, FRAC_PI_2));
            }
            2 => {
                out.push(GateInstance::cphase(a, b, -FRAC_PI_2));
                out.extend(toffoli_k(a, b, c).iter().rev().map(|x| x.dagger()));
            }
            _ => out.extend(decompose_toffoli(a, b, c)),
        }
    }
    lower_cphase(&cancel_inverses(&circuit.with_gates(out)))
}
