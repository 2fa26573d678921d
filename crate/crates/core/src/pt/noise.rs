//! Noisy execution of `U_e` fragments, comparing a naive compilation with
//! the Toffoli-pair optimized one.
//!
//! Each fragment is a uniform superposition of the system register followed
//! by a single `U_e` rotation. The readout covers the four system qubits
//! and the flag.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ue::plan_u_e;
use super::{Layout, FLAG, SYSTEM};
use crate::error::{Error, Result};
use crate::gates::{Circuit, GateInstance};
use crate::hubbard::SpectrumTable;
use crate::opt::{
    cancel_toffoli_pairs, decompose_all_toffolis, lower_to_native, route_with_swaps,
    CouplingMap,
};
use crate::par::map_range;
use crate::statevector::{apply_noisy_gate, apply_readout_flips, NoiseParams, StateVector};

/// A named fragment: `H⊗4` on the system, then one `U_e` rotation.
#[derive(Debug, Clone)]
pub struct PartCircuit {
    pub name: String,
    pub circuit: Circuit,
}

fn readout_qubits() -> Vec<usize> {
    let mut q = SYSTEM.to_vec();
    q.push(FLAG);
    q
}

fn fragment(rot: GateInstance) -> Circuit {
    let mut c = Circuit::with_roles(Layout::new(0, false).roles());
    c.extend(SYSTEM.iter().map(|&q| GateInstance::h(q)));
    c.push(rot);
    c
}

/// The four fragments: the two widest subcube rotations of the plan, the
/// fully-controlled rotation that restores the target label, and the
/// fully-controlled rotation for the highest level.
pub fn part_circuits(spectrum: &SpectrumTable, k: usize, c: f64) -> Result<Vec<PartCircuit>> {
    let plan = plan_u_e(spectrum, k, c)?;
    let mut parts = Vec::new();
    let mut groups: Vec<_> = plan
        .iter()
        .filter(|r| !r.fixed.is_empty() && r.fixed.len() < 4)
        .collect();
    groups.sort_by_key(|r| r.fixed.len());
    for r in groups.into_iter().take(2) {
        let mut tally = vec![0usize; spectrum.levels.len()];
        for n in (0..16).filter(|&n| n != k && r.contains(n)) {
            tally[spectrum.level_of(n)] += 1;
        }
        let level = (0..tally.len()).max_by_key(|&l| (tally[l], usize::MAX - l)).unwrap_or(0);
        let e = spectrum.levels[level].energy;
        parts.push(PartCircuit {
            name: format!("group E={e:.4}"),
            circuit: fragment(r.to_gate(SYSTEM, FLAG)),
        });
    }
    let full: Vec<_> = plan.iter().filter(|r| r.fixed.len() == 4).collect();
    let label_of = |r: &&super::ue::CubeRotation| (0..16).find(|&n| r.contains(n)).unwrap_or(0);
    if let Some(r) = full.iter().find(|r| label_of(r) == k) {
        parts.push(PartCircuit {
            name: format!("target n={k}"),
            circuit: fragment(r.to_gate(SYSTEM, FLAG)),
        });
    }
    if let Some(r) = full
        .iter()
        .filter(|r| label_of(r) != k)
        .max_by(|a, b| spectrum.energy(label_of(a)).total_cmp(&spectrum.energy(label_of(b))))
    {
        let n = label_of(r);
        parts.push(PartCircuit {
            name: format!("top n={n}"),
            circuit: fragment(r.to_gate(SYSTEM, FLAG)),
        });
    }
    Ok(parts)
}

/// Every Toffoli decomposed in full, then SWAP-routed onto `map`.
pub fn compile_naive(circuit: &Circuit, map: &CouplingMap) -> Result<Circuit> {
    route_with_swaps(&decompose_all_toffolis(&lower_to_native(circuit)?), map)
}

/// Toffoli pairs cancelled; routing is only applied if something is still
/// off the map.
pub fn compile_optimized(circuit: &Circuit, map: &CouplingMap) -> Result<Circuit> {
    route_with_swaps(&cancel_toffoli_pairs(&lower_to_native(circuit)?), map)
}

/// Noiseless readout distribution over system qubits and flag.
pub fn ideal_distribution(circuit: &Circuit) -> Result<Vec<f64>> {
    let mut s = StateVector::new_zero_state(circuit.num_qubits())?;
    s.apply_circuit(circuit)?;
    s.marginal(&readout_qubits())
}

/// Readout distribution averaged over `trajectories` Pauli-noise runs,
/// with readout flips folded in exactly. Trajectory `i` uses stream `i` of
/// a generator seeded with `seed`.
pub fn noisy_distribution(
    circuit: &Circuit,
    noise: &NoiseParams,
    trajectories: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    noise.validate()?;
    if trajectories == 0 {
        return Err(Error::InvalidArgument("at least one trajectory is needed".into()));
    }
    let qs = readout_qubits();
    let runs = map_range(trajectories, |i| -> Result<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut s = StateVector::new_zero_state(circuit.num_qubits())?;
        for g in circuit.gates() {
            apply_noisy_gate(&mut s, g, noise, &mut rng)?;
        }
        s.marginal(&qs)
    });
    let mut acc = vec![0.0; 1 << qs.len()];
    for r in runs {
        for (a, p) in acc.iter_mut().zip(r?) {
            *a += p;
        }
    }
    let avg: Vec<f64> = acc.iter().map(|a| a / trajectories as f64).collect();
    Ok(apply_readout_flips(&avg, qs.len(), noise.readout_flip))
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

#[derive(Debug, Clone, Serialize)]
pub struct NoiseComparison {
    pub name: String,
    pub naive_two_qubit: usize,
    pub optimized_two_qubit: usize,
    pub ideal: Vec<f64>,
    pub naive: Vec<f64>,
    pub optimized: Vec<f64>,
    pub tv_naive: f64,
    pub tv_optimized: f64,
}

fn two_qubit_count(c: &Circuit) -> usize {
    c.gates().iter().filter(|g| g.arity() == 2).count()
}

/// Ideal, naive and optimized distributions for one fragment.
pub fn compare_part(
    part: &PartCircuit,
    map: &CouplingMap,
    noise: &NoiseParams,
    trajectories: usize,
    seed: u64,
) -> Result<NoiseComparison> {
    let ideal = ideal_distribution(&part.circuit)?;
    let naive_c = compile_naive(&part.circuit, map)?;
    let opt_c = compile_optimized(&part.circuit, map)?;
    let naive = noisy_distribution(&naive_c, noise, trajectories, seed)?;
    let optimized = noisy_distribution(&opt_c, noise, trajectories, seed)?;
    Ok(NoiseComparison {
        name: part.name.clone(),
        naive_two_qubit: two_qubit_count(&naive_c),
        optimized_two_qubit: two_qubit_count(&opt_c),
        tv_naive: total_variation(&naive, &ideal),
        tv_optimized: total_variation(&optimized, &ideal),
        ideal,
        naive,
        optimized,
    })
}
