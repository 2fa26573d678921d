//! Property tests for the gate library and the statevector kernels.

use std::f64::consts::PI;

use hubbard_pt::gates::{circuit_unitary, unitary_of, Circuit, Control, GateInstance, GateKind, Mat2};
use hubbard_pt::linalg::{equal_up_to_phase, unitarity_error, CMatrix};
use hubbard_pt::opt::{lower_to_native, zyz};
use hubbard_pt::statevector::StateVector;
use hubbard_pt::Complex64;
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = GateKind> {
    let angle = -4.0 * PI..4.0 * PI;
    prop_oneof![
        Just(GateKind::X),
        Just(GateKind::Y),
        Just(GateKind::Z),
        Just(GateKind::H),
        Just(GateKind::S),
        Just(GateKind::Sdg),
        Just(GateKind::T),
        Just(GateKind::Tdg),
        angle.clone().prop_map(GateKind::Ry),
        angle.clone().prop_map(GateKind::Rz),
        angle.prop_map(GateKind::Phase),
    ]
}

/// A single-target gate with up to `n - 1` controls of random polarity.
fn gate_strategy(n: usize) -> impl Strategy<Value = GateInstance> {
    (
        kind_strategy(),
        Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
        0..n,
        proptest::collection::vec(any::<bool>(), n),
    )
        .prop_map(|(kind, order, nctrl, pol)| {
            let target = order[0];
            let controls = order[1..=nctrl.min(order.len() - 1)]
                .iter()
                .zip(&pol)
                .map(|(&q, &p)| Control::new(q, p))
                .collect();
            GateInstance::controlled(kind, controls, target)
        })
}

fn state_strategy(n: usize) -> impl Strategy<Value = StateVector> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1 << n).prop_filter_map(
        "nonzero state",
        |v| {
            let amps: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
            let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-3 {
                return None;
            }
            StateVector::from_amplitudes(amps.into_iter().map(|a| a / norm).collect()).ok()
        },
    )
}

/// Controlled single-target matrix assembled entry by entry from the 2x2
/// block, without touching the simulator.
fn explicit_matrix(g: &GateInstance, n: usize) -> CMatrix {
    let m = g.kind.matrix().unwrap();
    let bit = |idx: usize, q: usize| (idx >> (n - 1 - q)) & 1;
    let t = g.targets[0];
    let dim = 1 << n;
    let mut out = CMatrix::zeros(dim, dim);
    for j in 0..dim {
        let active = g.controls.iter().all(|c| bit(j, c.qubit) == c.on_one as usize);
        if !active {
            out[(j, j)] = Complex64::new(1.0, 0.0);
            continue;
        }
        let tj = bit(j, t);
        for b in 0..2 {
            let i = (j & !(1 << (n - 1 - t))) | (b << (n - 1 - t));
            out[(i, j)] = m[b][tj];
        }
    }
    out
}

fn random_unitary(a: f64, b: f64, c: f64, d: f64) -> Mat2 {
    let circuit = Circuit::from_gates(
        1,
        vec![
            GateInstance::rz(0, d),
            GateInstance::ry(0, c),
            GateInstance::rz(0, b),
        ],
    );
    let u = circuit_unitary(&circuit).unwrap() * Complex64::from_polar(1.0, a);
    [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn every_kind_is_unitary(kind in kind_strategy()) {
        prop_assert!(kind.unitarity_error() < 1e-12);
        let u = unitary_of(&GateInstance::single(kind, 0), 1).unwrap();
        prop_assert!(unitarity_error(&u) < 1e-12);
    }

    #[test]
    fn controlled_matches_explicit_expansion(
        (n, g) in (1usize..=4).prop_flat_map(|n| (Just(n), gate_strategy(n)))
    ) {
        let got = unitary_of(&g, n).unwrap();
        let want = explicit_matrix(&g, n);
        prop_assert!((got - want).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn gates_preserve_norm(
        (s, gates) in (1usize..=8).prop_flat_map(|n| (
            state_strategy(n),
            proptest::collection::vec(gate_strategy(n), 1..12),
        ))
    ) {
        let mut s = s;
        for g in &gates {
            s.apply_gate(g).unwrap();
        }
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn inverse_circuit_undoes(
        (s, gates) in (1usize..=6).prop_flat_map(|n| (
            state_strategy(n),
            proptest::collection::vec(gate_strategy(n), 1..10),
        ))
    ) {
        let n = s.num_qubits();
        let c = Circuit::from_gates(n, gates);
        let mut t = s.clone();
        t.apply_circuit(&c).unwrap();
        t.apply_circuit(&c.inverse()).unwrap();
        let overlap = s.inner(&t).norm();
        prop_assert!((overlap - 1.0).abs() < 1e-10);
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn parallel_kernel_is_bit_identical(
        (s, gates) in (1usize..=10).prop_flat_map(|n| (
            state_strategy(n),
            proptest::collection::vec(gate_strategy(n), 1..8),
        ))
    ) {
        let mut a = s.clone();
        let mut b = s;
        for g in &gates {
            a.apply_gate_seq(g).unwrap();
            b.apply_gate_par(g).unwrap();
        }
        prop_assert_eq!(a.amplitudes(), b.amplitudes());
    }

    #[test]
    fn zyz_reassembles(a in -PI..PI, b in -PI..PI, c in 0.0..PI, d in -PI..PI) {
        let m = random_unitary(a, b, c, d);
        let (alpha, beta, gamma, delta) = zyz(&m);
        let rebuilt = random_unitary(alpha, beta, gamma, delta);
        for i in 0..2 {
            for j in 0..2 {
                prop_assert!((rebuilt[i][j] - m[i][j]).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn lowering_one_control_preserves_unitary(kind in kind_strategy(), pol in any::<bool>()) {
        let g = GateInstance::controlled(kind, vec![Control::new(0, pol)], 1);
        let c = Circuit::from_gates(2, vec![g]);
        let low = lower_to_native(&c).unwrap();
        prop_assert!(low.gates().iter().all(|g| g.controls.len() <= 1));
        let a = circuit_unitary(&c).unwrap();
        let b = circuit_unitary(&low).unwrap();
        prop_assert!(equal_up_to_phase(&a, &b, 1e-10));
    }

    #[test]
    fn lowering_general_unitary(a in -PI..PI, b in -PI..PI, c in 0.0..PI, d in -PI..PI) {
        let m = random_unitary(a, b, c, d);
        let g = GateInstance::controlled(GateKind::Unitary(m), vec![Control::on(1)], 0);
        let circ = Circuit::from_gates(2, vec![g]);
        let low = lower_to_native(&circ).unwrap();
        let want = circuit_unitary(&circ).unwrap();
        let got = circuit_unitary(&low).unwrap();
        prop_assert!(want.iter().zip(got.iter()).all(|(x, y)| (x - y).norm() < 1e-9));
    }
}

#[test]
fn hadamard_on_zero() {
    let mut s = StateVector::new_zero_state(1).unwrap();
    s.apply_gate(&GateInstance::h(0)).unwrap();
    let r = 1.0 / 2f64.sqrt();
    assert!((s.amplitude(0).re - r).abs() < 1e-15);
    assert!((s.amplitude(1).re - r).abs() < 1e-15);
}

#[test]
fn bell_pair() {
    let mut s = StateVector::new_zero_state(2).unwrap();
    s.apply_gate(&GateInstance::h(0)).unwrap();
    s.apply_gate(&GateInstance::cx(0, 1)).unwrap();
    assert!((s.probability(0) - 0.5).abs() < 1e-15);
    assert!((s.probability(3) - 0.5).abs() < 1e-15);
    assert!(s.probability(1) < 1e-30 && s.probability(2) < 1e-30);
}

#[test]
fn msb_ordering() {
    let mut s = StateVector::new_zero_state(3).unwrap();
    s.apply_gate(&GateInstance::x(0)).unwrap();
    assert_eq!(s.probability(0b100), 1.0);
}

#[test]
fn bad_gates_are_rejected() {
    use hubbard_pt::Error;
    let mut s = StateVector::new_zero_state(2).unwrap();
    assert!(matches!(
        s.apply_gate(&GateInstance::x(2)),
        Err(Error::QubitOutOfRange { qubit: 2, num_qubits: 2 })
    ));
    assert!(matches!(s.apply_gate(&GateInstance::cx(1, 1)), Err(Error::IndexCollision(1))));
    assert!(matches!(StateVector::new_zero_state(0), Err(Error::SizeOutOfRange(0))));
    assert!(matches!(StateVector::new_zero_state(25), Err(Error::SizeOutOfRange(25))));
}

#[cfg(feature = "parallel")]
#[test]
fn parallel_kernel_on_wide_register() {
    let n = 15;
    let mut a = StateVector::new_zero_state(n).unwrap();
    for q in 0..n {
        a.apply_gate_seq(&GateInstance::ry(q, 0.1 + q as f64 * 0.2)).unwrap();
    }
    let mut b = a.clone();
    let gates = [
        GateInstance::h(0),
        GateInstance::h(n - 1),
        GateInstance::controlled(GateKind::Ry(0.7), vec![Control::on(3), Control::off(9)], 0),
        GateInstance::controlled(GateKind::Rz(-1.1), vec![Control::on(0)], 14),
        GateInstance::cx(1, 7),
        GateInstance::swap(0, 14),
        GateInstance::single(GateKind::T, 2),
    ];
    for g in &gates {
        a.apply_gate_seq(g).unwrap();
        b.apply_gate_par(g).unwrap();
    }
    assert_eq!(a.amplitudes(), b.amplitudes());
}
