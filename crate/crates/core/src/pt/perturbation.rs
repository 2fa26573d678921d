//! Circuits for `exp(±iλV̂)` and the rotated perturbation `Ṽ`.

use crate::gates::{Control, GateInstance, GateKind};

/// Qubit pairs `(1σ, 2σ′)` of the inter-site `σᶻσᶻ` sum.
pub const ZZ_PAIRS: [(usize, usize); 4] = [(0, 1), (0, 3), (2, 1), (2, 3)];

/// `exp(i·sign·λ·Σσᶻσᶻ)`; the terms commute, so the product is exact.
pub fn build_exp_v(lambda: f64, sign: f64, system: [usize; 4]) -> Vec<GateInstance> {
    ZZ_PAIRS
        .iter()
        .flat_map(|&(a, b)| {
            let (a, b) = (system[a], system[b]);
            [
                GateInstance::cx(a, b),
                GateInstance::rz(b, -2.0 * sign * lambda),
                GateInstance::cx(a, b),
            ]
        })
        .collect()
}

/// Selects `exp(i·s₀·λ/2·V̂)` when `anc` is `|0⟩` and `exp(-i·s₀·λ/2·V̂)`
/// when it is `|1⟩`, with `s₀ = zero_sign`.
pub fn build_branch_exp_v(
    lambda: f64,
    zero_sign: f64,
    anc: usize,
    system: [usize; 4],
) -> Vec<GateInstance> {
    ZZ_PAIRS
        .iter()
        .flat_map(|&(a, b)| {
            let (a, b) = (system[a], system[b]);
            [
                GateInstance::cx(a, b),
                GateInstance::rz(b, -zero_sign * lambda),
                GateInstance::controlled(
                    GateKind::Rz(2.0 * zero_sign * lambda),
                    vec![Control::on(anc)],
                    b,
                ),
                GateInstance::cx(a, b),
            ]
        })
        .collect()
}

/// `Ṽ = U_dis† exp(iλV̂) U_dis` (or its inverse for `sign = -1`).
pub fn build_v_tilde(
    u_dis: &[GateInstance],
    lambda: f64,
    sign: f64,
    system: [usize; 4],
) -> Vec<GateInstance> {
    let mut g = u_dis.to_vec();
    g.extend(build_exp_v(lambda, sign, system));
    g.extend(u_dis.iter().rev().map(|x| x.dagger()));
    g
}

/// Linear combination `(U₊ - U₋)/2` on the `anc = |1⟩` branch, where
/// `U± = U_dis† exp(±iλV̂/2) U_dis`. With `adjoint` the branches swap and the
/// block realizes the adjoint combination.
pub fn build_v_tilde_difference(
    u_dis: &[GateInstance],
    lambda: f64,
    anc: usize,
    adjoint: bool,
    system: [usize; 4],
) -> Vec<GateInstance> {
    let zero_sign = if adjoint { -1.0 } else { 1.0 };
    let mut g = u_dis.to_vec();
    g.push(GateInstance::h(anc));
    g.extend(build_branch_exp_v(lambda, zero_sign, anc, system));
    g.push(GateInstance::h(anc));
    g.extend(u_dis.iter().rev().map(|x| x.dagger()));
    g
}
