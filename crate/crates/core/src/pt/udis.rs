//! State preparation and the disentangling unitary.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use crate::gates::{build_qft_pair, build_special_rotation, Circuit, GateInstance, SpecialRotation};
use crate::hubbard::HubbardParams;

/// Mixing angle of the doubly-occupied bond-orbital pair:
/// `α = -2·arccos((2t + r) / sqrt(U²/4 + (2t + r)²))` with `r = sqrt(U²/4 + 4t²)`.
pub fn dis_angle(t: f64, u: f64) -> f64 {
    let r = (u * u / 4.0 + 4.0 * t * t).sqrt();
    let num = 2.0 * t + r;
    -2.0 * (num / (u * u / 4.0 + num * num).sqrt()).acos()
}

/// X on every set bit of the 4-bit label `k`.
pub fn build_u_in(k: usize, system: [usize; 4]) -> Vec<GateInstance> {
    (0..4)
        .filter(|&i| k & (1 << (3 - i)) != 0)
        .map(|i| GateInstance::x(system[i]))
        .collect()
}

/// `U_dis|n⟩ = |ψ_n⁰⟩` for every label `n`.
///
/// The antibonding bits are flipped first, the two `U`-coupled pairs are
/// rotated, and each spin pair is Fourier transformed into site orbitals.
pub fn build_u_dis(params: &HubbardParams, system: [usize; 4]) -> Vec<GateInstance> {
    let alpha = dis_angle(params.t, params.u);
    let mut g = vec![GateInstance::x(system[0]), GateInstance::x(system[2])];
    g.extend(build_special_rotation(
        SpecialRotation::R510,
        FRAC_PI_2 + alpha / 2.0,
        system,
    ));
    g.extend(build_special_rotation(SpecialRotation::R69, FRAC_PI_4, system));
    g.extend(build_qft_pair(system[0], system[1]));
    g.extend(build_qft_pair(system[2], system[3]));
    g
}

pub fn u_dis_circuit(params: &HubbardParams) -> Circuit {
    Circuit::from_gates(4, build_u_dis(params, [0, 1, 2, 3]))
}
