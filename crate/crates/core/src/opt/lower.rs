//! Lowering of multi-controlled gates.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::gates::{build_mcry_routed, Circuit, Control, GateInstance, GateKind, Mat2, Role};

/// Routing groups derived from the register roles: consecutive pairs of
/// system qubits, each paired with one work ancilla.
pub fn routing_groups(circuit: &Circuit) -> Vec<(Vec<usize>, usize)> {
    let system = circuit.qubits_with_role(Role::System);
    let anc = circuit.qubits_with_role(Role::Ancilla);
    system
        .chunks(2)
        .zip(anc)
        .map(|(pair, a)| (pair.to_vec(), a))
        .collect()
}

fn expand_gate(
    g: &GateInstance,
    circuit: &Circuit,
    groups: &[(Vec<usize>, usize)],
    out: &mut Vec<GateInstance>,
) -> Result<()> {
    let GateKind::Ry(theta) = g.kind else {
        out.push(g.clone());
        return Ok(());
    };
    let target = g.targets[0];
    let all_system = g.controls.iter().all(|c| circuit.role(c.qubit) == Role::System);
    if circuit.role(target) == Role::Readout && !g.controls.is_empty() && all_system {
        out.extend(build_mcry_routed(&g.controls, target, theta, groups)?);
    } else if g.controls.len() >= 2 {
        let flip = GateInstance::controlled(GateKind::X, g.controls.clone(), target);
        out.push(GateInstance::ry(target, theta / 2.0));
        out.push(flip.clone());
        out.push(GateInstance::ry(target, -theta / 2.0));
        out.push(flip);
    } else {
        out.push(g.clone());
    }
    Ok(())
}

/// Expand multi-controlled rotations.
///
/// A rotation on a readout qubit controlled by system qubits goes through
/// the ancilla ladder. Any other rotation with two or more controls becomes
/// `Ry(θ/2), C^kX, Ry(−θ/2), C^kX`. Multi-controlled NOTs are kept.
pub fn expand_multicontrolled(circuit: &Circuit) -> Result<Circuit> {
    let groups = routing_groups(circuit);
    let mut out = Vec::with_capacity(circuit.len());
    for g in circuit.gates() {
        expand_gate(g, circuit, &groups, &mut out)?;
    }
    Ok(circuit.with_gates(out))
}

/// `U = e^{iα} Rz(β) Ry(γ) Rz(δ)`.
pub fn zyz(m: &Mat2) -> (f64, f64, f64, f64) {
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let alpha = det.arg() / 2.0;
    let ph = Complex64::from_polar(1.0, -alpha);
    let a = m[0][0] * ph;
    let b = m[1][0] * ph;
    let gamma = 2.0 * b.norm().atan2(a.norm());
    let sum = if a.norm() > 1e-12 { -2.0 * a.arg() } else { 0.0 };
    let diff = if b.norm() > 1e-12 { 2.0 * b.arg() } else { 0.0 };
    let beta = (sum + diff) / 2.0;
    let delta = (sum - diff) / 2.0;
    (alpha, beta, gamma, delta)
}

/// Singly-controlled 1-qubit gate as CNOTs and 1-qubit gates.
fn lower_controlled(kind: GateKind, c: usize, t: usize) -> Vec<GateInstance> {
    let cx = GateInstance::cx(c, t);
    let on_t = |k: GateKind| GateInstance::single(k, t);
    match kind {
        GateKind::X => vec![cx],
        GateKind::Z => vec![GateInstance::h(t), cx, GateInstance::h(t)],
        GateKind::Ry(a) => vec![on_t(GateKind::Ry(a / 2.0)), cx.clone(), on_t(GateKind::Ry(-a / 2.0)), cx],
        GateKind::Rz(a) => vec![on_t(GateKind::Rz(a / 2.0)), cx.clone(), on_t(GateKind::Rz(-a / 2.0)), cx],
        GateKind::Phase(a) => vec![
            GateInstance::single(GateKind::Phase(a / 2.0), c),
            on_t(GateKind::Phase(a / 2.0)),
            cx.clone(),
            on_t(GateKind::Phase(-a / 2.0)),
            cx,
        ],
        other => {
            let m = other.matrix().expect("single-target kind");
            let (alpha, beta, gamma, delta) = zyz(&m);
            vec![
                on_t(GateKind::Rz((delta - beta) / 2.0)),
                cx.clone(),
                on_t(GateKind::Rz(-(delta + beta) / 2.0)),
                on_t(GateKind::Ry(-gamma / 2.0)),
                cx,
                on_t(GateKind::Ry(gamma / 2.0)),
                on_t(GateKind::Rz(beta)),
                GateInstance::single(GateKind::Phase(alpha), c),
            ]
        }
    }
}

fn clean_ancilla(circuit: &Circuit, g: &GateInstance) -> Option<usize> {
    circuit
        .qubits_with_role(Role::Ancilla)
        .into_iter()
        .find(|&q| !g.touches(q))
}

fn is_native(g: &GateInstance) -> bool {
    match g.controls.len() {
        0 => g.kind != GateKind::Swap,
        1 | 2 => g.kind == GateKind::X && g.controls.iter().all(|c| c.on_one),
        _ => false,
    }
}

/// Rewrite into 1-qubit gates, CNOT and Toffoli.
///
/// Three-control NOTs borrow a clean work ancilla. Open controls are
/// conjugated by X.
pub fn lower_to_native(circuit: &Circuit) -> Result<Circuit> {
    let expanded = expand_multicontrolled(circuit)?;
    let mut out = Vec::with_capacity(expanded.len() * 2);
    for g in expanded.gates() {
        if is_native(g) {
            out.push(g.clone());
            continue;
        }
        if g.kind == GateKind::Swap {
            if !g.controls.is_empty() {
                return Err(Error::UnsupportedGate("controlled swap".into()));
            }
            let (a, b) = (g.targets[0], g.targets[1]);
            out.extend([GateInstance::cx(a, b), GateInstance::cx(b, a), GateInstance::cx(a, b)]);
            continue;
        }
        let wrap: Vec<GateInstance> = g
            .controls
            .iter()
            .filter(|c| !c.on_one)
            .map(|c| GateInstance::x(c.qubit))
            .collect();
        let ctrl: Vec<usize> = g.controls.iter().map(|c| c.qubit).collect();
        let t = g.targets[0];
        out.extend(wrap.iter().cloned());
        match (g.kind, ctrl.as_slice()) {
            (GateKind::X, [a, b]) => out.push(GateInstance::ccx(*a, *b, t)),
            (GateKind::X, [a, b, c]) => {
                let anc = clean_ancilla(&expanded, g).ok_or(Error::InsufficientAncilla {
                    needed: 1,
                    available: 0,
                })?;
                let half = GateInstance::ccx(*a, *b, anc);
                out.extend([half.clone(), GateInstance::ccx(anc, *c, t), half]);
            }
            (k, [c]) => out.extend(lower_controlled(k, *c, t)),
            (k, cs) => {
                return Err(Error::UnsupportedGate(format!(
                    "{} with {} controls",
                    k.name(),
                    cs.len()
                )))
            }
        }
        out.extend(wrap);
    }
    Ok(expanded.with_gates(out))
}

/// Target-side half `K` of the standard Toffoli: `Toffoli = P·K` with
/// `P = CP(π/2)` on the two controls.
pub fn toffoli_k(a: usize, b: usize, c: usize) -> Vec<GateInstance> {
    use GateKind::{Tdg, T};
    vec![
        GateInstance::h(c),
        GateInstance::cx(b, c),
        GateInstance::single(Tdg, c),
        GateInstance::cx(a, c),
        GateInstance::single(T, c),
        GateInstance::cx(b, c),
        GateInstance::single(Tdg, c),
        GateInstance::cx(a, c),
        GateInstance::single(T, c),
        GateInstance::h(c),
    ]
}

/// Controlled-S between the controls, in native form.
pub fn toffoli_p(a: usize, b: usize) -> Vec<GateInstance> {
    use GateKind::{Tdg, T};
    vec![
        GateInstance::single(T, b),
        GateInstance::cx(a, b),
        GateInstance::single(T, a),
        GateInstance::single(Tdg, b),
        GateInstance::cx(a, b),
    ]
}

/// Standard six-CNOT Toffoli.
pub fn decompose_toffoli(a: usize, b: usize, c: usize) -> Vec<GateInstance> {
    let mut v = toffoli_k(a, b, c);
    v.extend(toffoli_p(a, b));
    v
}

/// Replace every Toffoli by the standard decomposition.
pub fn decompose_all_toffolis(circuit: &Circuit) -> Circuit {
    let mut out = Vec::new();
    for g in circuit.gates() {
        if g.kind == GateKind::X && g.controls.len() == 2 && g.controls.iter().all(|c| c.on_one) {
            out.extend(decompose_toffoli(g.controls[0].qubit, g.controls[1].qubit, g.targets[0]));
        } else {
            out.push(g.clone());
        }
    }
    circuit.with_gates(out)
}

/// `CP(θ)` lowered to CNOTs, as used after pair cancellation.
pub fn lower_cphase(circuit: &Circuit) -> Circuit {
    let mut out = Vec::new();
    for g in circuit.gates() {
        match (g.kind, g.controls.as_slice()) {
            (GateKind::Phase(a), [Control { qubit, on_one: true }]) => {
                if (a - FRAC_PI_2).abs() < 1e-12 {
                    out.extend(toffoli_p(*qubit, g.targets[0]));
                } else {
                    out.extend(lower_controlled(g.kind, *qubit, g.targets[0]));
                }
            }
            _ => out.push(g.clone()),
        }
    }
    circuit.with_gates(out)
}
