//! Classical reference for the two-site Hubbard dimer.
//!
//! Modes are ordered `(1↑, 2↑, 1↓, 2↓)` and mapped to qubits 0..3 by
//! Jordan–Wigner. Same-spin neighbours are adjacent in that order, so the
//! hopping terms carry no parity strings and read `(XX + YY)/2`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub const NUM_MODES: usize = 4;
pub const DIM: usize = 1 << NUM_MODES;

/// Energies closer than this are one level.
pub const LEVEL_TOL: f64 = 1e-9;
/// Gaps between `LEVEL_TOL` and this are refused as ambiguous.
pub const LEVEL_AMBIGUITY: f64 = 1e-6;

/// Mode occupation `m` of basis label `n`: the two antibonding bits are
/// flipped so that label 0 is the ground state.
pub const LABEL_FLIP: usize = 0b1010;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HubbardParams {
    pub t: f64,
    pub u: f64,
    /// Inter-site density–density amplitude.
    pub w: f64,
}

impl Default for HubbardParams {
    fn default() -> Self {
        HubbardParams {
            t: 1.0,
            u: 1.0,
            w: 1.0,
        }
    }
}

impl HubbardParams {
    /// `λ = W/4`, the coefficient of the `σᶻσᶻ` sum.
    pub fn lambda(&self) -> f64 {
        self.w / 4.0
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t.is_finite() || self.t <= 0.0 || !self.u.is_finite() || !self.w.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "need t > 0 and finite U, W; got t={}, U={}, W={}",
                self.t, self.u, self.w
            )));
        }
        Ok(())
    }
}

fn mode_mask(j: usize) -> usize {
    1 << (NUM_MODES - 1 - j)
}

/// `c†_j` with the Jordan–Wigner sign `(-1)^{#occupied modes before j}`.
pub fn creation(j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(DIM, DIM);
    let mj = mode_mask(j);
    for x in 0..DIM {
        if x & mj != 0 {
            continue;
        }
        let before = (0..j).filter(|&i| x & mode_mask(i) != 0).count();
        let sign = if before % 2 == 0 { 1.0 } else { -1.0 };
        m[(x | mj, x)] = sign;
    }
    m
}

pub fn number(j: usize) -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |r, c| {
        if r == c && r & mode_mask(j) != 0 {
            1.0
        } else {
            0.0
        }
    })
}

pub fn total_number() -> DMatrix<f64> {
    (0..NUM_MODES).map(number).fold(DMatrix::zeros(DIM, DIM), |a, b| a + b)
}

/// `H₀ = -t Σ_σ (c†₁σ c₂σ + h.c.) + U (n₁↑n₁↓ + n₂↑n₂↓)`.
pub fn build_h0(params: &HubbardParams) -> DMatrix<f64> {
    let cd: Vec<DMatrix<f64>> = (0..NUM_MODES).map(creation).collect();
    let c: Vec<DMatrix<f64>> = cd.iter().map(|m| m.transpose()).collect();
    let n: Vec<DMatrix<f64>> = (0..NUM_MODES).map(number).collect();
    let mut h = DMatrix::zeros(DIM, DIM);
    for (a, b) in [(0, 1), (2, 3)] {
        h -= params.t * (&cd[a] * &c[b] + &cd[b] * &c[a]);
    }
    h += params.u * (&n[0] * &n[2] + &n[1] * &n[3]);
    h
}

/// `V = (n₁↑ + n₁↓)(n₂↑ + n₂↓)`: the inter-site interaction per unit `W`.
pub fn build_v() -> DMatrix<f64> {
    let n = |j| number(j);
    (n(0) + n(2)) * (n(1) + n(3))
}

/// Inter-site `σᶻσᶻ` sum over the pairs `(1σ, 2σ′)`.
///
/// `4·V = Σσᶻσᶻ + 4N − 4`, so at fixed particle number this differs from
/// `4·V` by a constant and generates the same corrections apart from `E1`.
pub fn build_v_zz() -> DMatrix<f64> {
    DMatrix::from_fn(DIM, DIM, |r, c| {
        if r != c {
            return 0.0;
        }
        let z = |j: usize| if r & mode_mask(j) != 0 { -1.0 } else { 1.0 };
        [(0, 1), (0, 3), (2, 1), (2, 3)]
            .iter()
            .map(|&(a, b)| z(a) * z(b))
            .sum()
    })
}

/// Energy shift between `W·V` and `λ·Σσᶻσᶻ` at particle number `n`.
pub fn zz_offset(lambda: f64, particles: usize) -> f64 {
    lambda * (4.0 * particles as f64 - 4.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub degeneracy: usize,
    pub members: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct SpectrumTable {
    pub levels: Vec<Level>,
    /// Column `n` is the eigenvector assigned to basis label `n`.
    pub vectors: DMatrix<f64>,
    /// Energy of each label.
    pub energies: Vec<f64>,
}

impl SpectrumTable {
    pub fn level_of(&self, n: usize) -> usize {
        self.levels
            .iter()
            .position(|l| l.members.contains(&n))
            .expect("every label belongs to a level")
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.energies[n]
    }

    pub fn ground_energy(&self) -> f64 {
        self.levels[0].energy
    }

    /// `V` expressed in the labelled eigenbasis.
    pub fn in_eigenbasis(&self, v: &DMatrix<f64>) -> DMatrix<f64> {
        self.vectors.transpose() * v * &self.vectors
    }
}

fn mode_creation(j: usize) -> DMatrix<f64> {
    // Antibonding on the first mode of each pair, bonding on the second.
    let (a, b) = if j < 2 { (0, 1) } else { (2, 3) };
    let s = FRAC_1_SQRT_2;
    if j.is_multiple_of(2) {
        (creation(b) - creation(a)) * s
    } else {
        (creation(a) + creation(b)) * s
    }
}

/// Slater determinant of the orbital occupation `m`.
fn mode_state(m: usize, ops: &[DMatrix<f64>]) -> nalgebra::DVector<f64> {
    let mut v = nalgebra::DVector::zeros(DIM);
    v[0] = 1.0;
    for j in (0..NUM_MODES).rev() {
        if m & mode_mask(j) != 0 {
            v = &ops[j] * v;
        }
    }
    v
}

/// Pairs of orbital occupations that the interaction `U` couples.
const MIXED: [(usize, usize); 2] = [(0b0101, 0b1010), (0b0110, 0b1001)];

/// Labelled eigenbasis from the orbital picture.
///
/// Each label is a Slater determinant of the bond orbitals, except for the
/// two pairs of determinants coupled by `U`; those are diagonalized as 2×2
/// blocks, the lower eigenvector going to the smaller label. Signs are
/// fixed so the coefficient on the label's own determinant is positive.
pub fn eigenbasis(h0: &DMatrix<f64>) -> DMatrix<f64> {
    let ops: Vec<DMatrix<f64>> = (0..NUM_MODES).map(mode_creation).collect();
    let det: Vec<nalgebra::DVector<f64>> = (0..DIM).map(|m| mode_state(m, &ops)).collect();
    let mut basis = DMatrix::zeros(DIM, DIM);
    for n in 0..DIM {
        let m = n ^ LABEL_FLIP;
        let col = match MIXED.iter().find(|(a, b)| m == *a || m == *b) {
            None => det[m].clone(),
            Some(&(a, b)) => {
                let pa = &det[a];
                let pb = &det[b];
                let block = DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        pa.dot(&(h0 * pa)),
                        pa.dot(&(h0 * pb)),
                        pb.dot(&(h0 * pa)),
                        pb.dot(&(h0 * pb)),
                    ],
                );
                let eig = SymmetricEigen::new(block);
                let (lo, hi) = if eig.eigenvalues[0] <= eig.eigenvalues[1] {
                    (0, 1)
                } else {
                    (1, 0)
                };
                let partner = (if m == a { b } else { a }) ^ LABEL_FLIP;
                let pick = if n < partner { lo } else { hi };
                let (ca, cb) = (eig.eigenvectors[(0, pick)], eig.eigenvectors[(1, pick)]);
                let own = if m == a { ca } else { cb };
                let s = if own < 0.0 { -1.0 } else { 1.0 };
                (pa * ca + pb * cb) * s
            }
        };
        basis.set_column(n, &col);
    }
    basis
}

/// Group sorted `(energy, label)` pairs into levels.
pub fn group_levels(energies: &[f64]) -> Result<Vec<Level>> {
    let mut order: Vec<usize> = (0..energies.len()).collect();
    order.sort_by(|&a, &b| energies[a].total_cmp(&energies[b]).then(a.cmp(&b)));
    let mut levels: Vec<Level> = Vec::new();
    for n in order {
        let e = energies[n];
        match levels.last_mut() {
            Some(l) if (e - l.energy).abs() <= LEVEL_TOL => {
                l.members.push(n);
                l.degeneracy += 1;
            }
            Some(l) if (e - l.energy).abs() < LEVEL_AMBIGUITY => {
                return Err(Error::DegeneracySplit((e - l.energy).abs()));
            }
            _ => levels.push(Level {
                energy: e,
                degeneracy: 1,
                members: vec![n],
            }),
        }
    }
    for l in &mut levels {
        l.members.sort_unstable();
    }
    Ok(levels)
}

pub fn make_spectrum_table(params: &HubbardParams) -> Result<SpectrumTable> {
    params.validate()?;
    let h0 = build_h0(params);
    let vectors = eigenbasis(&h0);
    let energies: Vec<f64> = (0..DIM)
        .map(|n| {
            let v = vectors.column(n);
            v.dot(&(&h0 * v))
        })
        .collect();
    for n in 0..DIM {
        let v = vectors.column(n);
        let residual = (&h0 * v - v * energies[n]).norm();
        if residual > 1e-8 {
            return Err(Error::NotEigenvector { index: n, residual });
        }
    }
    let levels = group_levels(&energies)?;
    let exact = SymmetricEigen::new(h0).eigenvalues;
    let mut exact: Vec<f64> = exact.iter().copied().collect();
    exact.sort_by(f64::total_cmp);
    let mut ours = energies.clone();
    ours.sort_by(f64::total_cmp);
    if let Some((i, _)) = exact
        .iter()
        .zip(&ours)
        .enumerate()
        .find(|(_, (a, b))| (*a - *b).abs() > 1e-8)
    {
        return Err(Error::NotEigenvector {
            index: i,
            residual: (exact[i] - ours[i]).abs(),
        });
    }
    Ok(SpectrumTable {
        levels,
        vectors,
        energies,
    })
}

/// Rayleigh–Schrödinger corrections for label `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PtReference {
    pub k: usize,
    pub e0: f64,
    pub e1: f64,
    /// First-order state correction in label coordinates.
    pub psi1: Vec<Complex64>,
    pub e2: f64,
}

pub fn pt_corrections(spectrum: &SpectrumTable, v: &DMatrix<f64>, k: usize) -> Result<PtReference> {
    if k >= DIM {
        return Err(Error::InvalidArgument(format!("label {k} out of range")));
    }
    let level = &spectrum.levels[spectrum.level_of(k)];
    if level.degeneracy > 1 {
        return Err(Error::DegenerateTarget {
            index: k,
            energy: level.energy,
            degeneracy: level.degeneracy,
        });
    }
    let vk = spectrum.in_eigenbasis(v);
    let ek = spectrum.energy(k);
    let mut psi1 = vec![Complex64::new(0.0, 0.0); DIM];
    let mut e2 = 0.0;
    for m in 0..DIM {
        let gap = ek - spectrum.energy(m);
        if gap.abs() <= LEVEL_TOL {
            continue;
        }
        psi1[m] = Complex64::new(vk[(m, k)] / gap, 0.0);
        e2 += vk[(m, k)] * vk[(m, k)] / gap;
    }
    Ok(PtReference {
        k,
        e0: ek,
        e1: vk[(k, k)],
        psi1,
        e2,
    })
}

/// `⟨ψ_k⁰|V†|ψ_k¹⟩`, the second-order energy rebuilt from the state correction.
pub fn e2_from_psi1(spectrum: &SpectrumTable, v: &DMatrix<f64>, reference: &PtReference) -> f64 {
    let vk = spectrum.in_eigenbasis(v);
    (0..DIM)
        .map(|m| vk[(reference.k, m)] * reference.psi1[m].re)
        .sum()
}

/// Lowest eigenvalue of `H₀ + λV` for each `λ`, in grid order.
pub fn exact_eigen_sweep(
    h0: &DMatrix<f64>,
    v: &DMatrix<f64>,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("empty lambda grid".into()));
    }
    Ok(crate::par::map_ordered(grid, |&lam| {
        let h = h0 + v * lam;
        let e = SymmetricEigen::new(h)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        (lam, e)
    }))
}
