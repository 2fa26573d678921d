//! Gate instances, circuits and the structured builders used by the pipeline.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::statevector::StateVector;

pub type Mat2 = [[Complex64; 2]; 2];

const UNITARY_TOL: f64 = 1e-10;

/// Reduce an angle into the canonical window `(-4π, 4π]`.
///
/// Every rotation used here is periodic in 4π, so the reduction leaves the
/// unitary unchanged.
pub fn canonical_angle(theta: f64) -> f64 {
    let period = 8.0 * PI;
    let mut a = theta % period;
    if a <= -4.0 * PI {
        a += period;
    } else if a > 4.0 * PI {
        a -= period;
    }
    a
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GateKind {
    X,
    Y,
    Z,
    H,
    S,
    Sdg,
    T,
    Tdg,
    Ry(f64),
    Rz(f64),
    /// `diag(1, e^{iθ})`.
    Phase(f64),
    Swap,
    Unitary(Mat2),
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl GateKind {
    pub fn name(&self) -> &'static str {
        match self {
            GateKind::X => "x",
            GateKind::Y => "y",
            GateKind::Z => "z",
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Sdg => "sdg",
            GateKind::T => "t",
            GateKind::Tdg => "tdg",
            GateKind::Ry(_) => "ry",
            GateKind::Rz(_) => "rz",
            GateKind::Phase(_) => "phase",
            GateKind::Swap => "swap",
            GateKind::Unitary(_) => "unitary",
        }
    }

    pub fn num_targets(&self) -> usize {
        match self {
            GateKind::Swap => 2,
            _ => 1,
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            GateKind::Ry(a) | GateKind::Rz(a) | GateKind::Phase(a) => vec![a],
            _ => Vec::new(),
        }
    }

    /// The 2×2 matrix of a single-target kind; `None` for SWAP.
    pub fn matrix(&self) -> Option<Mat2> {
        let z = c(0.0, 0.0);
        let o = c(1.0, 0.0);
        let h = c(FRAC_1_SQRT_2, 0.0);
        let m = match *self {
            GateKind::X => [[z, o], [o, z]],
            GateKind::Y => [[z, c(0.0, -1.0)], [c(0.0, 1.0), z]],
            GateKind::Z => [[o, z], [z, -o]],
            GateKind::H => [[h, h], [h, -h]],
            GateKind::S => [[o, z], [z, c(0.0, 1.0)]],
            GateKind::Sdg => [[o, z], [z, c(0.0, -1.0)]],
            GateKind::T => [[o, z], [z, Complex64::from_polar(1.0, PI / 4.0)]],
            GateKind::Tdg => [[o, z], [z, Complex64::from_polar(1.0, -PI / 4.0)]],
            GateKind::Ry(a) => {
                let (s, co) = (a / 2.0).sin_cos();
                [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
            }
            GateKind::Rz(a) => [
                [Complex64::from_polar(1.0, -a / 2.0), z],
                [z, Complex64::from_polar(1.0, a / 2.0)],
            ],
            GateKind::Phase(a) => [[o, z], [z, Complex64::from_polar(1.0, a)]],
            GateKind::Unitary(m) => m,
            GateKind::Swap => return None,
        };
        Some(m)
    }

    pub fn dagger(&self) -> GateKind {
        match *self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Ry(a) => GateKind::Ry(canonical_angle(-a)),
            GateKind::Rz(a) => GateKind::Rz(canonical_angle(-a)),
            GateKind::Phase(a) => GateKind::Phase(canonical_angle(-a)),
            GateKind::Unitary(m) => GateKind::Unitary([
                [m[0][0].conj(), m[1][0].conj()],
                [m[0][1].conj(), m[1][1].conj()],
            ]),
            k => k,
        }
    }

    /// Diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        match self {
            GateKind::Z
            | GateKind::S
            | GateKind::Sdg
            | GateKind::T
            | GateKind::Tdg
            | GateKind::Rz(_)
            | GateKind::Phase(_) => true,
            GateKind::Unitary(m) => m[0][1].norm() == 0.0 && m[1][0].norm() == 0.0,
            _ => false,
        }
    }

    /// Max-abs deviation of `M†M` from the identity.
    pub fn unitarity_error(&self) -> f64 {
        let Some(m) = self.matrix() else { return 0.0 };
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let mut s = c(0.0, 0.0);
                for k in 0..2 {
                    s += m[k][i].conj() * m[k][j];
                }
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        worst
    }

    fn approx_eq(&self, other: &GateKind) -> bool {
        const TOL: f64 = 1e-12;
        let same_angle = |a: f64, b: f64, period: f64| {
            let d = (a - b).rem_euclid(period);
            d < TOL || period - d < TOL
        };
        match (*self, *other) {
            (GateKind::Ry(a), GateKind::Ry(b)) | (GateKind::Rz(a), GateKind::Rz(b)) => {
                same_angle(a, b, 4.0 * PI)
            }
            (GateKind::Phase(a), GateKind::Phase(b)) => same_angle(a, b, 2.0 * PI),
            (GateKind::Unitary(a), GateKind::Unitary(b)) => a
                .iter()
                .flatten()
                .zip(b.iter().flatten())
                .all(|(x, y)| (x - y).norm() < TOL),
            (a, b) => a == b,
        }
    }
}

/// A control qubit with its polarity: `on_one = true` is a solid dot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Control {
    pub qubit: usize,
    pub on_one: bool,
}

impl Control {
    pub fn on(qubit: usize) -> Self {
        Control { qubit, on_one: true }
    }

    pub fn off(qubit: usize) -> Self {
        Control {
            qubit,
            on_one: false,
        }
    }

    pub fn new(qubit: usize, on_one: bool) -> Self {
        Control { qubit, on_one }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateInstance {
    pub kind: GateKind,
    pub targets: Vec<usize>,
    pub controls: Vec<Control>,
}

impl GateInstance {
    pub fn new(kind: GateKind, targets: Vec<usize>, controls: Vec<Control>) -> Self {
        let kind = match kind {
            GateKind::Ry(a) => GateKind::Ry(canonical_angle(a)),
            GateKind::Rz(a) => GateKind::Rz(canonical_angle(a)),
            GateKind::Phase(a) => GateKind::Phase(canonical_angle(a)),
            k => k,
        };
        GateInstance {
            kind,
            targets,
            controls,
        }
    }

    pub fn single(kind: GateKind, target: usize) -> Self {
        Self::new(kind, vec![target], Vec::new())
    }

    pub fn controlled(kind: GateKind, controls: Vec<Control>, target: usize) -> Self {
        Self::new(kind, vec![target], controls)
    }

    pub fn x(q: usize) -> Self {
        Self::single(GateKind::X, q)
    }

    pub fn h(q: usize) -> Self {
        Self::single(GateKind::H, q)
    }

    pub fn ry(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry(theta), q)
    }

    pub fn rz(q: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz(theta), q)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::controlled(GateKind::X, vec![Control::on(control)], target)
    }

    pub fn cz(a: usize, b: usize) -> Self {
        Self::controlled(GateKind::Z, vec![Control::on(a)], b)
    }

    pub fn ccx(a: usize, b: usize, target: usize) -> Self {
        Self::controlled(GateKind::X, vec![Control::on(a), Control::on(b)], target)
    }

    pub fn cphase(control: usize, target: usize, theta: f64) -> Self {
        Self::controlled(GateKind::Phase(theta), vec![Control::on(control)], target)
    }

    pub fn swap(a: usize, b: usize) -> Self {
        Self::new(GateKind::Swap, vec![a, b], Vec::new())
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.controls
            .iter()
            .map(|c| c.qubit)
            .chain(self.targets.iter().copied())
    }

    pub fn arity(&self) -> usize {
        self.targets.len() + self.controls.len()
    }

    pub fn touches(&self, q: usize) -> bool {
        self.qubits().any(|x| x == q)
    }

    pub fn is_control(&self, q: usize) -> bool {
        self.controls.iter().any(|c| c.qubit == q)
    }

    /// Controlled NOT with `k` controls, any polarity.
    pub fn is_mcx(&self, k: usize) -> bool {
        self.kind == GateKind::X && self.controls.len() == k
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        if self.targets.len() != self.kind.num_targets() {
            return Err(Error::Arity(self.kind.name(), self.kind.num_targets()));
        }
        let mut seen = 0u64;
        for q in self.qubits() {
            if q >= num_qubits {
                return Err(Error::QubitOutOfRange { qubit: q, num_qubits });
            }
            if seen & (1 << q) != 0 {
                return Err(Error::IndexCollision(q));
            }
            seen |= 1 << q;
        }
        if let GateKind::Unitary(_) = self.kind {
            let e = self.kind.unitarity_error();
            if e > UNITARY_TOL {
                return Err(Error::NonUnitary(e));
            }
        }
        Ok(())
    }

    pub fn dagger(&self) -> Self {
        GateInstance {
            kind: self.kind.dagger(),
            targets: self.targets.clone(),
            controls: self.controls.clone(),
        }
    }

    /// True when `self · other = I` as operators (same wiring, inverse kinds).
    pub fn is_inverse_of(&self, other: &GateInstance) -> bool {
        let same_targets = match self.kind {
            GateKind::Swap => {
                let mut a = self.targets.clone();
                let mut b = other.targets.clone();
                a.sort_unstable();
                b.sort_unstable();
                a == b
            }
            _ => self.targets == other.targets,
        };
        if !same_targets || self.controls.len() != other.controls.len() {
            return false;
        }
        let mut ca = self.controls.clone();
        let mut cb = other.controls.clone();
        ca.sort();
        cb.sort();
        ca == cb && self.kind.approx_eq(&other.kind.dagger())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// `q`: the system register.
    System,
    /// `q′`: work ancillas for multi-controlled gates.
    Ancilla,
    /// `q″` and any other flag or readout qubits.
    Readout,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    gates: Vec<GateInstance>,
    roles: Vec<Role>,
}

impl Circuit {
    pub fn new(num_qubits: usize) -> Self {
        Circuit {
            num_qubits,
            gates: Vec::new(),
            roles: vec![Role::System; num_qubits],
        }
    }

    pub fn with_roles(roles: Vec<Role>) -> Self {
        Circuit {
            num_qubits: roles.len(),
            gates: Vec::new(),
            roles,
        }
    }

    pub fn from_gates(num_qubits: usize, gates: Vec<GateInstance>) -> Self {
        let mut c = Circuit::new(num_qubits);
        c.gates = gates;
        c
    }

    /// Same register, different gate list.
    pub fn with_gates(&self, gates: Vec<GateInstance>) -> Self {
        Circuit {
            num_qubits: self.num_qubits,
            gates,
            roles: self.roles.clone(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[GateInstance] {
        &self.gates
    }

    pub fn into_gates(self) -> Vec<GateInstance> {
        self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn roles(&self) -> &[Role] {
        &self.roles
    }

    pub fn role(&self, q: usize) -> Role {
        self.roles[q]
    }

    pub fn qubits_with_role(&self, role: Role) -> Vec<usize> {
        (0..self.num_qubits)
            .filter(|&q| self.roles[q] == role)
            .collect()
    }

    pub fn push(&mut self, gate: GateInstance) {
        self.gates.push(gate);
    }

    pub fn extend<I: IntoIterator<Item = GateInstance>>(&mut self, gates: I) {
        self.gates.extend(gates);
    }

    pub fn append(&mut self, other: &Circuit) {
        self.gates.extend(other.gates.iter().cloned());
    }

    pub fn inverse(&self) -> Circuit {
        self.with_gates(self.gates.iter().rev().map(|g| g.dagger()).collect())
    }

    pub fn validate(&self) -> Result<()> {
        self.gates
            .iter()
            .try_for_each(|g| g.validate(self.num_qubits))
    }
}

/// Dense `2^n × 2^n` matrix of one gate embedded in an `n`-qubit register.
pub fn unitary_of(gate: &GateInstance, num_qubits: usize) -> Result<DMatrix<Complex64>> {
    circuit_unitary(&Circuit::from_gates(num_qubits, vec![gate.clone()]))
}

/// Dense matrix of a whole circuit, built column by column.
pub fn circuit_unitary(circuit: &Circuit) -> Result<DMatrix<Complex64>> {
    circuit.validate()?;
    let n = circuit.num_qubits();
    let dim = 1usize << n;
    let cols = crate::par::map_range(dim, |j| {
        let mut s = StateVector::basis(n, j).expect("validated size");
        s.apply_circuit(circuit).expect("validated circuit");
        s.into_amplitudes()
    });
    Ok(DMatrix::from_fn(dim, dim, |i, j| cols[j][i]))
}

/// Fermionic Fourier transform on one spin pair `(a, b)`.
///
/// In the `|ab⟩` basis the block is
/// `[[1,0,0,0],[0,s,s,0],[0,s,-s,0],[0,0,0,-1]]` with `s = 1/√2`: it maps a
/// single particle onto the antibonding (`|10⟩`) and bonding (`|01⟩`)
/// orbitals, and adds the exchange sign on double occupation. This is the
/// particle-conserving transform that diagonalizes the hopping term.
pub fn build_qft_pair(a: usize, b: usize) -> Vec<GateInstance> {
    vec![
        GateInstance::cx(a, b),
        GateInstance::controlled(GateKind::H, vec![Control::on(b)], a),
        GateInstance::cx(a, b),
        GateInstance::cz(a, b),
    ]
}

/// Textbook two-qubit QFT: `(1/2)·[i^{jk}]` with `a` the high bit.
pub fn build_dft_pair(a: usize, b: usize) -> Vec<GateInstance> {
    vec![
        GateInstance::h(a),
        GateInstance::cphase(b, a, FRAC_PI_2),
        GateInstance::h(b),
        GateInstance::swap(a, b),
    ]
}

/// Open controls are flipped to solid ones by conjugating with X.
fn polarity_wrap(controls: &[Control]) -> Vec<GateInstance> {
    controls
        .iter()
        .filter(|c| !c.on_one)
        .map(|c| GateInstance::x(c.qubit))
        .collect()
}

/// `Ry(θ)` controlled on one or two solid controls as `Ry, C^kX, Ry, C^kX`.
fn core_cry(ctrl: &[usize], target: usize, theta: f64) -> Vec<GateInstance> {
    let flip = GateInstance::controlled(
        GateKind::X,
        ctrl.iter().map(|&q| Control::on(q)).collect(),
        target,
    );
    vec![
        GateInstance::ry(target, theta / 2.0),
        flip.clone(),
        GateInstance::ry(target, -theta / 2.0),
        flip,
    ]
}

/// Compute the AND of `group` (solid controls) into `anc`.
fn feed(group: &[usize], anc: usize) -> GateInstance {
    match group {
        [a] => GateInstance::cx(*a, anc),
        [a, b] => GateInstance::ccx(*a, *b, anc),
        _ => unreachable!("feed groups hold one or two controls"),
    }
}

fn ladder(groups: &[(Vec<usize>, usize)], target: usize, theta: f64) -> Vec<GateInstance> {
    let feeds: Vec<GateInstance> = groups.iter().map(|(g, anc)| feed(g, *anc)).collect();
    let core: Vec<usize> = groups.iter().map(|(_, anc)| *anc).collect();
    let mut out = feeds.clone();
    out.extend(core_cry(&core, target, theta));
    out.extend(feeds.into_iter().rev());
    out
}

/// Multi-controlled `Ry(θ)` from NOT, Ry and Toffoli gates.
///
/// One or two controls are handled directly. Three or four controls are
/// split into two halves, each computed into an ancilla, followed by a
/// doubly-controlled core. Ancillas must start in `|0⟩` and are restored.
pub fn build_mcry(
    controls: &[Control],
    target: usize,
    theta: f64,
    ancillas: &[usize],
) -> Result<Vec<GateInstance>> {
    let k = controls.len();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "multi-controlled rotation needs at least one control".into(),
        ));
    }
    if k > 4 {
        return Err(Error::UnsupportedGate(format!("Ry with {k} controls")));
    }
    let wrap = polarity_wrap(controls);
    let qs: Vec<usize> = controls.iter().map(|c| c.qubit).collect();
    let body = if k <= 2 {
        core_cry(&qs, target, theta)
    } else {
        let needed = if k == 3 { 1 } else { 2 };
        if ancillas.len() < needed {
            return Err(Error::InsufficientAncilla {
                needed,
                available: ancillas.len(),
            });
        }
        if k == 3 {
            let f = feed(&qs[..2], ancillas[0]);
            let mut v = vec![f.clone()];
            v.extend(core_cry(&[ancillas[0], qs[2]], target, theta));
            v.push(f);
            v
        } else {
            ladder(
                &[
                    (qs[..2].to_vec(), ancillas[0]),
                    (qs[2..].to_vec(), ancillas[1]),
                ],
                target,
                theta,
            )
        }
    };
    let mut out = wrap.clone();
    out.extend(body);
    out.extend(wrap);
    Ok(out)
}

/// Multi-controlled `Ry(θ)` routed through fixed ancillas.
///
/// `groups[i] = (members, ancilla)`: every control belonging to `members` is
/// ANDed into that ancilla, and the rotation itself is controlled only by
/// ancillas. With the system pairs wired to their own ancilla this keeps
/// every two-qubit interaction on a tree-shaped coupling map.
pub fn build_mcry_routed(
    controls: &[Control],
    target: usize,
    theta: f64,
    groups: &[(Vec<usize>, usize)],
) -> Result<Vec<GateInstance>> {
    if controls.is_empty() {
        return Ok(vec![GateInstance::ry(target, theta)]);
    }
    let mut active = Vec::new();
    for c in controls {
        if !groups.iter().any(|(m, _)| m.contains(&c.qubit)) {
            return Err(Error::InvalidArgument(format!(
                "control qubit {} belongs to no routing group",
                c.qubit
            )));
        }
    }
    for (members, anc) in groups {
        let mut g: Vec<usize> = controls
            .iter()
            .map(|c| c.qubit)
            .filter(|q| members.contains(q))
            .collect();
        g.sort_unstable();
        if g.len() > 2 {
            return Err(Error::UnsupportedGate(format!(
                "{} controls routed through one ancilla",
                g.len()
            )));
        }
        if !g.is_empty() {
            active.push((g, *anc));
        }
    }
    if active.len() > 2 {
        return Err(Error::UnsupportedGate(format!(
            "{} active routing groups",
            active.len()
        )));
    }
    let wrap = polarity_wrap(controls);
    let mut out = wrap.clone();
    out.extend(ladder(&active, target, theta));
    out.extend(wrap);
    Ok(out)
}

/// The two-level rotations that mix the exchange-coupled states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialRotation {
    /// Mixes `|0110⟩` and `|1001⟩`.
    R69,
    /// Mixes `|0101⟩` and `|1010⟩`.
    R510,
}

impl SpecialRotation {
    /// The mixed basis indices `(a, b)` with `a < b`.
    pub fn pair(self) -> (usize, usize) {
        match self {
            SpecialRotation::R69 => (6, 9),
            SpecialRotation::R510 => (5, 10),
        }
    }
}

/// Two-level rotation acting on basis states `a < b` of the 4-qubit
/// register `qubits` (high bit first).
///
/// Column `a` maps to `cos θ|a⟩ + sin θ|b⟩` and column `b` to
/// `-sin θ|a⟩ + cos θ|b⟩`; every other basis state is untouched. The pair is
/// reduced to a one-bit difference with a CNOT fan out of the highest
/// differing bit, rotated there under three controls, then the fan is undone.
pub fn build_two_level_rotation(
    a: usize,
    b: usize,
    theta: f64,
    qubits: &[usize],
) -> Result<Vec<GateInstance>> {
    let n = qubits.len();
    if a >= b || b >= 1 << n {
        return Err(Error::InvalidArgument(format!(
            "two-level rotation needs a < b < {}, got ({a}, {b})",
            1 << n
        )));
    }
    let bit = |x: usize, i: usize| (x >> (n - 1 - i)) & 1 == 1;
    let diff: Vec<usize> = (0..n).filter(|&i| bit(a, i) != bit(b, i)).collect();
    let pivot = diff[0];
    let fan: Vec<GateInstance> = diff[1..]
        .iter()
        .map(|&i| GateInstance::cx(qubits[pivot], qubits[i]))
        .collect();
    let controls = (0..n)
        .filter(|&i| i != pivot)
        .map(|i| Control::new(qubits[i], bit(a, i)))
        .collect();
    let mut out = fan.clone();
    out.push(GateInstance::controlled(
        GateKind::Ry(2.0 * theta),
        controls,
        qubits[pivot],
    ));
    out.extend(fan);
    Ok(out)
}

pub fn build_special_rotation(
    which: SpecialRotation,
    theta: f64,
    qubits: [usize; 4],
) -> Vec<GateInstance> {
    let (a, b) = which.pair();
    build_two_level_rotation(a, b, theta, &qubits).expect("fixed valid pair")
}
