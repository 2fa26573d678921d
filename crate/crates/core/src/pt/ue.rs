//! The energy-denominator network `U_e`.
//!
//! On input `|n⟩|0⟩` it leaves the flag at `|0⟩` for `n = k` and writes
//! amplitude `C/(E_k − E_n)` on flag `|1⟩` for every other label. All gates
//! are `Ry` rotations on the flag controlled by system bits, so their
//! angles add on each basis input.

use crate::error::{Error, Result};
use crate::gates::{Control, GateInstance, GateKind};
use crate::hubbard::{SpectrumTable, DIM, LEVEL_TOL};

/// `C = E_k − E_near`, where `E_near` is the closest other level. This is the
/// largest `|C|` for which every flag amplitude stays within `[-1, 1]`.
pub fn nearest_gap_constant(spectrum: &SpectrumTable, k: usize) -> f64 {
    let ek = spectrum.energy(k);
    spectrum
        .levels
        .iter()
        .map(|l| l.energy)
        .filter(|e| (e - ek).abs() > LEVEL_TOL)
        .min_by(|a, b| (a - ek).abs().total_cmp(&(b - ek).abs()))
        .map(|e| ek - e)
        .unwrap_or(1.0)
}

/// Target flag amplitude for every label.
pub fn flag_amplitudes(spectrum: &SpectrumTable, k: usize, c: f64) -> Result<Vec<f64>> {
    let ek = spectrum.energy(k);
    (0..DIM)
        .map(|n| {
            let gap = ek - spectrum.energy(n);
            if gap.abs() <= LEVEL_TOL {
                return Ok(0.0);
            }
            let a = c / gap;
            if a.abs() > 1.0 + 1e-12 {
                return Err(Error::ConstantTooLarge {
                    c,
                    index: n,
                    ratio: a.abs(),
                });
            }
            Ok(a.clamp(-1.0, 1.0))
        })
        .collect()
}

/// `Θ_n = 2·asin(a_n)`: the total flag rotation each label must receive.
pub fn flag_angles(spectrum: &SpectrumTable, k: usize, c: f64) -> Result<Vec<f64>> {
    Ok(flag_amplitudes(spectrum, k, c)?
        .into_iter()
        .map(|a| 2.0 * a.asin())
        .collect())
}

/// A flag rotation controlled on a subcube of labels.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeRotation {
    /// `(bit position 0..4, required value)`, bit 0 being the high bit.
    pub fixed: Vec<(usize, bool)>,
    pub theta: f64,
}

impl CubeRotation {
    pub fn contains(&self, n: usize) -> bool {
        self.fixed
            .iter()
            .all(|&(i, v)| (n >> (3 - i)) & 1 == v as usize)
    }

    pub fn to_gate(&self, system: [usize; 4], flag: usize) -> GateInstance {
        GateInstance::controlled(
            GateKind::Ry(self.theta),
            self.fixed
                .iter()
                .map(|&(i, v)| Control::new(system[i], v))
                .collect(),
            flag,
        )
    }
}

fn full_cube(n: usize) -> Vec<(usize, bool)> {
    (0..4).map(|i| (i, (n >> (3 - i)) & 1 == 1)).collect()
}

const ANGLE_TOL: f64 = 1e-12;

/// All 81 subcubes of the 4-bit label space.
fn all_cubes() -> Vec<Vec<(usize, bool)>> {
    (0..81)
        .map(|mut code| {
            let mut fixed = Vec::new();
            for i in 0..4 {
                match code % 3 {
                    1 => fixed.push((i, false)),
                    2 => fixed.push((i, true)),
                    _ => {}
                }
                code /= 3;
            }
            fixed
        })
        .collect()
}

/// Layered construction.
///
/// 1. An unconditional rotation sets every label to the angle of the
///    largest level.
/// 2. Remaining levels (most members first, then farthest from the target
///    energy) are covered by subcube rotations, cheapest first. A cube qualifies if every
///    pending member inside it needs the same correction; its cost is its
///    control count plus four for every already-correct label it knocks out
///    of place, divided by the members it fixes. A lone fully-controlled
///    rotation always qualifies.
/// 3. Fully-controlled fix-ups, in label order, repair anything still off,
///    including the target label whose flag must stay at `|0⟩`.
pub fn plan_u_e(spectrum: &SpectrumTable, k: usize, c: f64) -> Result<Vec<CubeRotation>> {
    let theta = flag_angles(spectrum, k, c)?;
    let target_level = spectrum.level_of(k);
    let ek = spectrum.energy(k);
    let mut order: Vec<usize> = (0..spectrum.levels.len())
        .filter(|&l| l != target_level)
        .collect();
    order.sort_by(|&a, &b| {
        let (la, lb) = (&spectrum.levels[a], &spectrum.levels[b]);
        lb.degeneracy
            .cmp(&la.degeneracy)
            .then((lb.energy - ek).abs().total_cmp(&(la.energy - ek).abs()))
    });

    let mut plan = Vec::new();
    let mut current = vec![0.0; DIM];
    let ok = |cur: &[f64], n: usize| (cur[n] - theta[n]).abs() < ANGLE_TOL;

    let Some((&default, rest)) = order.split_first() else {
        return Ok(plan);
    };
    let t0 = theta[spectrum.levels[default].members[0]];
    plan.push(CubeRotation {
        fixed: Vec::new(),
        theta: t0,
    });
    current.iter_mut().for_each(|x| *x = t0);

    let cubes = all_cubes();
    for &l in rest {
        let members = &spectrum.levels[l].members;
        loop {
            let pending: Vec<usize> =
                members.iter().copied().filter(|&n| !ok(&current, n)).collect();
            if pending.is_empty() {
                break;
            }
            // (cost per member, members fixed, controls, cube index, delta)
            let mut best: Option<(f64, usize, usize, usize, f64)> = None;
            for (ci, fixed) in cubes.iter().enumerate() {
                let rot = CubeRotation {
                    fixed: fixed.clone(),
                    theta: 0.0,
                };
                let inside: Vec<usize> = pending.iter().copied().filter(|&n| rot.contains(n)).collect();
                let Some(&first) = inside.first() else { continue };
                let delta = theta[first] - current[first];
                if inside
                    .iter()
                    .any(|&n| (theta[n] - current[n] - delta).abs() >= ANGLE_TOL)
                {
                    continue;
                }
                let broken = (0..DIM)
                    .filter(|&n| rot.contains(n) && !inside.contains(&n) && ok(&current, n))
                    .count();
                let cost = (fixed.len() + 4 * broken) as f64 / inside.len() as f64;
                let key = (cost, inside.len(), fixed.len());
                let better = match best {
                    None => true,
                    Some((bc, bn, bf, _, _)) => {
                        key.0 < bc - 1e-12
                            || ((key.0 - bc).abs() <= 1e-12
                                && (key.1 > bn || (key.1 == bn && key.2 < bf)))
                    }
                };
                if better {
                    best = Some((key.0, key.1, key.2, ci, delta));
                }
            }
            let (_, _, _, ci, delta) = best.expect("a full cube always qualifies");
            let rot = CubeRotation {
                fixed: cubes[ci].clone(),
                theta: delta,
            };
            for n in 0..DIM {
                if rot.contains(n) {
                    current[n] += delta;
                }
            }
            plan.push(rot);
        }
    }

    for n in 0..DIM {
        if !ok(&current, n) {
            let d = theta[n] - current[n];
            current[n] += d;
            plan.push(CubeRotation {
                fixed: full_cube(n),
                theta: d,
            });
        }
    }
    Ok(plan)
}

pub fn build_u_e(
    spectrum: &SpectrumTable,
    k: usize,
    c: f64,
    system: [usize; 4],
    flag: usize,
) -> Result<Vec<GateInstance>> {
    Ok(plan_u_e(spectrum, k, c)?
        .iter()
        .map(|r| r.to_gate(system, flag))
        .collect())
}

/// Every subset `S` of the four system bits gets its own positively
/// controlled rotation; label `n` then sees `Σ_{S ⊆ ones(n)} α_S`.
///
/// `alphas[s]` is indexed by the subset mask `s` (bit 3 = first qubit), and
/// is the Möbius inverse of the target angles.
#[derive(Debug, Clone)]
pub struct FullDecomposition {
    pub alphas: Vec<f64>,
    pub gates: Vec<GateInstance>,
}

pub fn mobius_angles(theta: &[f64]) -> Vec<f64> {
    (0..DIM)
        .map(|s| {
            subsets(s)
                .map(|t| {
                    let sign = if (s ^ t).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                    sign * theta[t]
                })
                .sum()
        })
        .collect()
}

/// All submasks of `s`, including 0 and `s`.
pub fn subsets(s: usize) -> impl Iterator<Item = usize> {
    let mut next = Some(s);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & s) };
        Some(cur)
    })
}

pub fn build_u_e_full_decomposition(
    spectrum: &SpectrumTable,
    k: usize,
    c: f64,
    system: [usize; 4],
    flag: usize,
) -> Result<FullDecomposition> {
    let theta = flag_angles(spectrum, k, c)?;
    Ok(full_decomposition_from_angles(&theta, system, flag))
}

pub fn full_decomposition_from_angles(
    theta: &[f64],
    system: [usize; 4],
    flag: usize,
) -> FullDecomposition {
    let alphas = mobius_angles(theta);
    let mut masks: Vec<usize> = (0..DIM).collect();
    masks.sort_by_key(|m| (m.count_ones(), std::cmp::Reverse(*m)));
    let gates = masks
        .into_iter()
        .map(|s| {
            let controls = (0..4)
                .filter(|i| s & (1 << (3 - i)) != 0)
                .map(|i| Control::on(system[i]))
                .collect();
            GateInstance::controlled(GateKind::Ry(alphas[s]), controls, flag)
        })
        .collect();
    FullDecomposition { alphas, gates }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hubbard::{make_spectrum_table, HubbardParams};

    #[test]
    fn subset_enumeration() {
        let mut s: Vec<usize> = subsets(0b1010).collect();
        s.sort_unstable();
        assert_eq!(s, vec![0, 2, 8, 10]);
        assert_eq!(subsets(0).collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn mobius_round_trip() {
        let theta: Vec<f64> = (0..DIM).map(|n| 0.1 * n as f64 - 0.3).collect();
        let a = mobius_angles(&theta);
        for n in 0..DIM {
            let back: f64 = subsets(n).map(|s| a[s]).sum();
            assert!((back - theta[n]).abs() < 1e-12);
        }
    }

    #[test]
    fn plan_shape_for_ground_state() {
        let s = make_spectrum_table(&HubbardParams::default()).unwrap();
        let c = nearest_gap_constant(&s, 0);
        let plan = plan_u_e(&s, 0, c).unwrap();
        assert!(plan[0].fixed.is_empty());
        let groups: Vec<&CubeRotation> = plan.iter().filter(|r| r.fixed.len() == 2).collect();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].fixed, vec![(0, false), (2, false)]);
        assert_eq!(groups[1].fixed, vec![(0, true), (2, true)]);
        let count = |k: usize| plan.iter().filter(|r| r.fixed.len() == k).count();
        assert_eq!((count(3), count(4)), (2, 3));
        assert_eq!(plan.len(), 8);
    }

    #[test]
    fn oversized_constant_is_refused() {
        let s = make_spectrum_table(&HubbardParams::default()).unwrap();
        let c = 1.0 / (s.energy(0) - (-1.0));
        assert!(matches!(
            flag_amplitudes(&s, 0, c),
            Err(Error::ConstantTooLarge { .. })
        ));
    }
}
