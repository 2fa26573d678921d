//! OpenQASM 2.0 export and re-import of the same dialect.
//!
//! Registers: `q` holds system qubits, `qa` work ancillas, `qr` readout
//! qubits, each in ascending circuit order. Gate subset:
//!
//! | circuit gate | QASM |
//! |---|---|
//! | X Y Z H S S† T T† | `x y z h s sdg t tdg` |
//! | Ry, Rz, phase | `ry(θ)`, `rz(θ)`, `u1(θ)` |
//! | SWAP | `swap` |
//! | one positive control on X Y Z H Ry Rz phase | `cx cy cz ch cry(θ) crz(θ) cu1(θ)` |
//! | two positive controls on X | `ccx` |
//!
//! Angles are printed with the shortest round-trip decimal form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::gates::{Circuit, Control, GateInstance, GateKind, Role};

fn reg_name(role: Role) -> &'static str {
    match role {
        Role::System => "q",
        Role::Ancilla => "qa",
        Role::Readout => "qr",
    }
}

const ROLE_ORDER: [Role; 3] = [Role::System, Role::Ancilla, Role::Readout];

fn mnemonic(g: &GateInstance) -> Result<(String, Option<f64>)> {
    use GateKind::*;
    let unsupported = || {
        Error::UnsupportedGate(format!(
            "{} with {} controls",
            g.kind.name(),
            g.controls.len()
        ))
    };
    if g.controls.iter().any(|c| !c.on_one) {
        return Err(unsupported());
    }
    let base = match g.kind {
        X => "x",
        Y => "y",
        Z => "z",
        H => "h",
        S => "s",
        Sdg => "sdg",
        T => "t",
        Tdg => "tdg",
        Ry(_) => "ry",
        Rz(_) => "rz",
        Phase(_) => "u1",
        Swap => "swap",
        Unitary(_) => return Err(unsupported()),
    };
    let param = match g.kind {
        Ry(a) | Rz(a) | Phase(a) => Some(a),
        _ => None,
    };
    let name = match (g.controls.len(), g.kind) {
        (0, _) => base.to_string(),
        (1, X | Y | Z | H | Ry(_) | Rz(_) | Phase(_)) => format!("c{base}"),
        (2, X) => "ccx".to_string(),
        _ => return Err(unsupported()),
    };
    Ok((name, param))
}

/// Render a lowered circuit. Fails on gates outside the dialect.
pub fn export_qasm(circuit: &Circuit) -> Result<String> {
    let mut local = vec![(Role::System, 0usize); circuit.num_qubits()];
    let mut text = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    for role in ROLE_ORDER {
        let qs = circuit.qubits_with_role(role);
        for (i, &q) in qs.iter().enumerate() {
            local[q] = (role, i);
        }
        if !qs.is_empty() {
            writeln!(text, "qreg {}[{}];", reg_name(role), qs.len()).unwrap();
        }
    }
    for g in circuit.gates() {
        let (name, param) = mnemonic(g)?;
        text.push_str(&name);
        if let Some(a) = param {
            write!(text, "({a})").unwrap();
        }
        let args: Vec<String> = g
            .controls
            .iter()
            .map(|c| c.qubit)
            .chain(g.targets.iter().copied())
            .map(|q| {
                let (r, i) = local[q];
                format!("{}[{}]", reg_name(r), i)
            })
            .collect();
        writeln!(text, " {};", args.join(",")).unwrap();
    }
    Ok(text)
}

fn parse_kind(name: &str, param: Option<f64>) -> Option<(GateKind, usize)> {
    use GateKind::*;
    let (base, controls) = match name {
        "ccx" => ("x", 2),
        "swap" => ("swap", 0),
        n if n.starts_with('c') && n.len() > 1 => (&n[1..], 1),
        n => (n, 0),
    };
    let kind = match (base, param) {
        ("x", None) => X,
        ("y", None) => Y,
        ("z", None) => Z,
        ("h", None) => H,
        ("s", None) if controls == 0 => S,
        ("sdg", None) if controls == 0 => Sdg,
        ("t", None) if controls == 0 => T,
        ("tdg", None) if controls == 0 => Tdg,
        ("swap", None) => Swap,
        ("ry", Some(a)) => Ry(a),
        ("rz", Some(a)) => Rz(a),
        ("u1", Some(a)) => Phase(a),
        _ => return None,
    };
    Some((kind, controls))
}

/// Parse text produced by [`export_qasm`].
pub fn parse_qasm(text: &str) -> Result<Circuit> {
    let mut regs: Vec<(String, Role, usize, usize)> = Vec::new();
    let mut roles = Vec::new();
    let mut gates = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let line_no = ln + 1;
        let err = |msg: &str| Error::QasmParse {
            line: line_no,
            msg: msg.to_string(),
        };
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() || line.starts_with("OPENQASM") || line.starts_with("include") {
            continue;
        }
        let body = line.strip_suffix(';').ok_or_else(|| err("missing ';'"))?.trim();
        if let Some(decl) = body.strip_prefix("qreg ") {
            let (name, size) = parse_ref(decl.trim()).ok_or_else(|| err("bad qreg"))?;
            let role = ROLE_ORDER
                .into_iter()
                .find(|&r| reg_name(r) == name)
                .ok_or_else(|| err("unknown register name"))?;
            regs.push((name.to_string(), role, roles.len(), size));
            roles.extend(std::iter::repeat_n(role, size));
            continue;
        }
        let (head, args) = body.split_once(' ').ok_or_else(|| err("missing operands"))?;
        let (name, param) = match head.split_once('(') {
            Some((n, p)) => {
                let p = p.strip_suffix(')').ok_or_else(|| err("unclosed parameter"))?;
                let v: f64 = p.trim().parse().map_err(|_| err("bad angle"))?;
                (n, Some(v))
            }
            None => (head, None),
        };
        let (kind, ncontrols) = parse_kind(name, param).ok_or_else(|| err("unsupported gate"))?;
        let qubits: Vec<usize> = args
            .split(',')
            .map(|a| {
                let (r, i) = parse_ref(a.trim())?;
                let (_, _, offset, size) = regs.iter().find(|x| x.0 == r)?;
                (i < *size).then_some(offset + i)
            })
            .collect::<Option<_>>()
            .ok_or_else(|| err("bad operand"))?;
        if qubits.len() != ncontrols + kind.num_targets() {
            return Err(err("wrong operand count"));
        }
        let (ctrl, tgt) = qubits.split_at(ncontrols);
        gates.push(GateInstance::new(
            kind,
            tgt.to_vec(),
            ctrl.iter().map(|&q| Control::on(q)).collect(),
        ));
    }
    let mut c = Circuit::with_roles(roles);
    c.extend(gates);
    c.validate()?;
    Ok(c)
}

fn parse_ref(s: &str) -> Option<(&str, usize)> {
    let (name, rest) = s.split_once('[')?;
    let idx = rest.strip_suffix(']')?.parse().ok()?;
    Some((name, idx))
}
