//! End-to-end acceptance checks. Prints one `[PASS]`/`[FAIL]` line per
//! criterion and exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use hubbard_pt::gates::{circuit_unitary, Circuit};
use hubbard_pt::hubbard::{
    build_h0, build_v_zz, e2_from_psi1, exact_eigen_sweep, make_spectrum_table, pt_corrections,
    HubbardParams, DIM,
};
use hubbard_pt::linalg::{phase_overlap, CMatrix};
use hubbard_pt::opt::{
    cancel_toffoli_pairs, check_coupling, decompose_all_toffolis, expand_multicontrolled,
    gate_census, lower_to_native, CouplingMap,
};
use hubbard_pt::pt::noise::{compare_part, part_circuits};
use hubbard_pt::pt::perturbation::build_v_tilde;
use hubbard_pt::pt::protocol::{calibration_distribution, base_register_circuit};
use hubbard_pt::pt::udis::u_dis_circuit;
use hubbard_pt::pt::ue::{build_u_e_full_decomposition, nearest_gap_constant};
use hubbard_pt::pt::{
    calibrate_u_e, least_squares, Pipeline, ReadoutMode, VMode, FLAG, SYSTEM,
};
use hubbard_pt::statevector::NoiseParams;
use hubbard_pt::Complex64;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

type Check = Result<String, String>;

/// Reference quantities straight from a dense eigensolver, independent of
/// the labelled spectrum table.
struct Oracle {
    energies: DVector<f64>,
    vectors: DMatrix<f64>,
    ground: usize,
    v: DMatrix<f64>,
}

impl Oracle {
    fn new(params: &HubbardParams) -> Self {
        let eig = SymmetricEigen::new(build_h0(params));
        let ground = eig.eigenvalues.imin();
        Oracle {
            energies: eig.eigenvalues,
            vectors: eig.eigenvectors,
            ground,
            v: build_v_zz(),
        }
    }

    fn e0(&self) -> f64 {
        self.energies[self.ground]
    }

    fn phi0(&self) -> DVector<f64> {
        self.vectors.column(self.ground).into_owned()
    }

    fn e1(&self) -> f64 {
        let p = self.phi0();
        (p.transpose() * &self.v * &p)[(0, 0)]
    }

    /// `Σ_{E_m ≠ E_0} |⟨φ_m|V|φ_0⟩|² / (E_0 − E_m)`.
    fn e2(&self) -> f64 {
        let vp = &self.v * self.phi0();
        (0..DIM)
            .filter(|&m| (self.energies[m] - self.e0()).abs() > 1e-9)
            .map(|m| {
                let a = self.vectors.column(m).dot(&vp);
                a * a / (self.e0() - self.energies[m])
            })
            .sum()
    }

    /// First-order state as a Hilbert-space vector, via the reduced resolvent.
    fn psi1(&self) -> DVector<f64> {
        let vp = &self.v * self.phi0();
        let mut out = DVector::zeros(DIM);
        for m in 0..DIM {
            let gap = self.e0() - self.energies[m];
            if gap.abs() > 1e-9 {
                let col = self.vectors.column(m);
                out += col * (col.dot(&vp) / gap);
            }
        }
        out
    }
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

fn ensure(cond: bool, msg: String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn setup() -> (HubbardParams, Pipeline) {
    let p = HubbardParams::default();
    let s = make_spectrum_table(&p).expect("spectrum");
    let c = nearest_gap_constant(&s, 0);
    (p, Pipeline::with_spectrum(&p, s, 0, c).expect("pipeline"))
}

fn ac1() -> Check {
    let t = Instant::now();
    let p = HubbardParams::default();
    let h0 = build_h0(&p).map(|x| Complex64::new(x, 0.0));
    let s = make_spectrum_table(&p).map_err(err)?;
    let u = circuit_unitary(&u_dis_circuit(&p)).map_err(err)?;
    let oracle = Oracle::new(&p);
    let mut sorted_ours: Vec<f64> = s.energies.clone();
    let mut sorted_ref: Vec<f64> = oracle.energies.iter().copied().collect();
    sorted_ours.sort_by(f64::total_cmp);
    sorted_ref.sort_by(f64::total_cmp);
    let spec_gap = sorted_ours
        .iter()
        .zip(&sorted_ref)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    ensure(spec_gap < 1e-10, format!("label energies differ from eigensolver by {spec_gap:e}"))?;
    let mut worst: f64 = 0.0;
    for n in 0..DIM {
        let col = u.column(n).into_owned();
        let r = &h0 * &col - col * Complex64::new(s.energy(n), 0.0);
        worst = worst.max(r.norm());
    }
    let dt = t.elapsed().as_secs_f64();
    ensure(worst <= 1e-8, format!("max residual {worst:e}"))?;
    ensure(dt < 1.0, format!("took {dt:.2}s"))?;
    Ok(format!("max residual {worst:.2e}, {dt:.3}s"))
}

fn ac2() -> Check {
    let t = Instant::now();
    let (p, pipe) = setup();
    let oracle = Oracle::new(&p);
    let circuit = base_register_circuit(&pipe.u_e);
    let exact = calibrate_u_e(&circuit, &pipe.spectrum, 0, pipe.c, &ReadoutMode::ExactAmplitude)
        .map_err(err)?;
    ensure(exact.len() == 6, format!("{} levels", exact.len()))?;
    let mut worst: f64 = 0.0;
    for row in &exact {
        let gap = oracle.e0() - row.energy;
        let want = if gap.abs() < 1e-9 { 0.0 } else { pipe.c * pipe.c / (gap * gap) };
        worst = worst.max((row.measured - want).abs());
    }
    ensure(worst <= 1e-10, format!("exact deviation {worst:e}"))?;
    let target = &exact[pipe.spectrum.level_of(0)];
    ensure(target.measured.abs() <= 1e-10, format!("target level {}", target.measured))?;
    let shots = calibrate_u_e(
        &circuit,
        &pipe.spectrum,
        0,
        pipe.c,
        &ReadoutMode::Shots { shots: 32000, seed: 2024 },
    )
    .map_err(err)?;
    let mut zmax: f64 = 0.0;
    for (row, ex) in shots.iter().zip(&exact) {
        if row.sigma == 0.0 {
            ensure(row.measured == ex.measured, format!("level {} has no variance but moved", row.level))?;
            continue;
        }
        zmax = zmax.max((row.measured - ex.predicted).abs() / row.sigma);
    }
    let dt = t.elapsed().as_secs_f64();
    ensure(zmax <= 3.0, format!("shots deviation {zmax:.2}σ"))?;
    ensure(dt < 5.0, format!("took {dt:.2}s"))?;
    Ok(format!("exact dev {worst:.1e}, shots max {zmax:.2}σ, {dt:.3}s"))
}

fn ac3() -> Check {
    let p = HubbardParams::default();
    let ud = circuit_unitary(&u_dis_circuit(&p)).map_err(err)?;
    let v = build_v_zz().map(|x| Complex64::new(x, 0.0));
    let v_eig: CMatrix = ud.adjoint() * v * &ud;
    let u_dis = hubbard_pt::pt::udis::build_u_dis(&p, SYSTEM);
    let grid = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
    let mut devs = Vec::new();
    for &lam in &grid {
        let vt = circuit_unitary(&Circuit::from_gates(4, build_v_tilde(&u_dis, lam, 1.0, SYSTEM)))
            .map_err(err)?;
        let first = CMatrix::identity(DIM, DIM) + &v_eig * Complex64::new(0.0, lam);
        devs.push((vt - first).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }
    let slope = loglog_slope(&grid, &devs);
    ensure((slope - 2.0).abs() <= 0.2, format!("slope {slope:.3}"))?;
    Ok(format!("slope {slope:.3}"))
}

fn ac4() -> Check {
    let (p, pipe) = setup();
    let e1 = Oracle::new(&p).e1();
    let grid = [0.01, 0.02, 0.05, 0.1, 0.2];
    let mut errs = Vec::new();
    for &lam in &grid {
        let est = pipe.e1(lam, VMode::PlainExp, &ReadoutMode::ExactAmplitude).map_err(err)?;
        errs.push((est - e1).abs());
    }
    let slope = loglog_slope(&grid, &errs);
    let rel = errs[2] / e1.abs();
    ensure(slope >= 1.0, format!("error slope {slope:.3}"))?;
    ensure(rel <= 0.05, format!("relative error at 0.05 is {:.3}%", 100.0 * rel))?;
    Ok(format!("slope {slope:.3}, rel err at λ=0.05 {:.3}%", 100.0 * rel))
}

fn ac5() -> Check {
    let (p, pipe) = setup();
    let oracle = Oracle::new(&p);
    let ud = circuit_unitary(&u_dis_circuit(&p)).map_err(err)?;
    let mut phi0 = oracle.phi0();
    if ud[(0, 0)].re * phi0[0] + (1..DIM).map(|i| ud[(i, 0)].re * phi0[i]).sum::<f64>() < 0.0 {
        phi0 = -phi0;
    }
    let sign = if phi0 == oracle.phi0() { 1.0 } else { -1.0 };
    let reference = oracle.psi1() * sign;
    let lam = 0.1;
    let est = pipe
        .psi1(lam, VMode::Difference, &ReadoutMode::ExactAmplitude)
        .map_err(err)?;
    let coeffs = DVector::from_vec(est.psi1.clone());
    let state = &ud * coeffs;
    let diff: f64 = state
        .iter()
        .zip(reference.iter())
        .map(|(a, b)| (a - Complex64::new(*b, 0.0)).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let rel = diff / reference.norm();
    // Spurious part: the flag amplitude's real component, i.e. the imaginary
    // part of the rescaled estimate times the scale.
    let scale = lam * pipe.c * 0.5;
    let spurious = est
        .psi1
        .iter()
        .map(|z| (z.im * scale).abs())
        .fold(0.0, f64::max);
    ensure(rel <= 0.05, format!("relative error {:.3}%", 100.0 * rel))?;
    ensure(spurious <= lam * lam, format!("spurious real amplitude {spurious:e}"))?;
    Ok(format!(
        "rel err {:.3}%, spurious real amplitude {spurious:.1e} (λ² = {:.0e})",
        100.0 * rel,
        lam * lam
    ))
}

fn ac6() -> Check {
    let t = Instant::now();
    let (p, pipe) = setup();
    let e2 = Oracle::new(&p).e2();
    let grid = [0.02, 0.05, 0.1, 0.15, 0.2];
    let mut report = Vec::new();
    let mut failures = Vec::new();
    let mut equiv: f64 = 0.0;
    for &lam in &grid {
        for mode in [VMode::PlainExp, VMode::Difference] {
            let a = pipe.e2(lam, mode, &ReadoutMode::ExactAmplitude).map_err(err)?;
            let b = pipe.e2_no_rus(lam, mode, &ReadoutMode::ExactAmplitude).map_err(err)?;
            equiv = equiv.max((a.e2 - b.e2).abs());
            let rel = (a.e2 - e2) / e2.abs();
            if mode == VMode::PlainExp {
                report.push(format!("{lam}:{:+.2}%", 100.0 * rel));
            }
            if rel.abs() > 0.05 {
                failures.push(format!("λ={lam} {mode:?} {:+.2}%", 100.0 * rel));
            }
        }
    }
    let dt = t.elapsed().as_secs_f64();
    ensure(equiv <= 1e-10, format!("RUS vs measurement-free differ by {equiv:e}"))?;
    ensure(dt < 30.0, format!("took {dt:.1}s"))?;
    ensure(
        failures.is_empty(),
        format!("outside 5%: {} (sweep {})", failures.join(", "), report.join(" ")),
    )?;
    Ok(format!("sweep {}, equivalence {equiv:.1e}, {dt:.2}s", report.join(" ")))
}

fn ac7() -> Check {
    let (_, pipe) = setup();
    let full = build_u_e_full_decomposition(&pipe.spectrum, 0, pipe.c, SYSTEM, FLAG).map_err(err)?;
    let mut by_controls = [0usize; 5];
    for g in &full.gates {
        by_controls[g.controls.len()] += 1;
    }
    ensure(by_controls == [1, 4, 6, 4, 1], format!("gate shape {by_controls:?}"))?;
    let probs = calibration_distribution(&base_register_circuit(&full.gates), SYSTEM, FLAG).map_err(err)?;
    let ek = pipe.spectrum.energy(0);
    let mut worst: f64 = 0.0;
    for n in 0..DIM {
        // Sum of α_S over subsets S of the ones of n.
        let angle: f64 = (0..DIM).filter(|s| s & !n == 0).map(|s| full.alphas[s]).sum();
        let table = (angle / 2.0).sin().powi(2) / 16.0;
        let gap = ek - pipe.spectrum.energy(n);
        let direct = if gap.abs() < 1e-9 { 0.0 } else { (pipe.c / gap).powi(2) / 16.0 };
        worst = worst.max((probs[2 * n + 1] - table).abs()).max((table - direct).abs());
    }
    ensure(worst <= 1e-10, format!("max deviation {worst:e}"))?;
    Ok(format!("16 outcomes, max deviation {worst:.1e}"))
}

fn ac8() -> Check {
    let (_, pipe) = setup();
    let abstract_ue = base_register_circuit(&pipe.u_e);
    let lowered = lower_to_native(&abstract_ue).map_err(err)?;
    let naive = decompose_all_toffolis(&lowered);
    let optimized = cancel_toffoli_pairs(&lowered);
    let ul = circuit_unitary(&lowered).map_err(err)?;
    let uo = circuit_unitary(&optimized).map_err(err)?;
    let infidelity = 1.0 - phase_overlap(&ul, &uo);
    let two = |c: &Circuit| c.gates().iter().filter(|g| g.arity() == 2).count();
    let (n2, o2) = (two(&naive), two(&optimized));
    let map = CouplingMap::seven_qubit_tree();
    let viol = check_coupling(&optimized, &map).map_err(err)?;
    let naive_viol = check_coupling(&naive, &map).map_err(err)?;
    ensure(infidelity.abs() <= 1e-10, format!("1 - overlap = {infidelity:e}"))?;
    ensure(o2 < n2, format!("2-qubit count {o2} vs naive {n2}"))?;
    ensure(viol.is_empty(), format!("{} coupling violations", viol.len()))?;
    Ok(format!(
        "1-overlap {:.1e}, 2q {n2} -> {o2}, violations naive {} / optimized 0",
        infidelity.abs(),
        naive_viol.len()
    ))
}

fn ac9() -> Check {
    let (_, pipe) = setup();
    let mut parts = Vec::new();
    for mode in [VMode::Difference, VMode::PlainExp] {
        let c = expand_multicontrolled(&pipe.psi1_circuit(0.1, mode)).map_err(err)?;
        let g = gate_census(&c);
        let ok = g.one_qubit as f64 > 80.0 * 0.7
            && (35..=65).contains(&g.two_qubit)
            && (27..=49).contains(&g.toffoli)
            && (8..=16).contains(&g.cccnot)
            && g.other == 0;
        let line = format!(
            "{mode:?}: 1q {} 2q {} ccx {} cccx {} other {}",
            g.one_qubit, g.two_qubit, g.toffoli, g.cccnot, g.other
        );
        ensure(ok, format!("out of band: {line}"))?;
        parts.push(line);
    }
    Ok(parts.join("; "))
}

fn ac10() -> Check {
    let (_, pipe) = setup();
    let map = CouplingMap::seven_qubit_tree();
    let noise = NoiseParams::default();
    let mut lines = Vec::new();
    for part in part_circuits(&pipe.spectrum, 0, pipe.c).map_err(err)? {
        let r = compare_part(&part, &map, &noise, 2000, 11).map_err(err)?;
        let line = format!("{}: naive {:.4} opt {:.4}", r.name, r.tv_naive, r.tv_optimized);
        ensure(r.tv_naive > r.tv_optimized, format!("ordering violated, {line}"))?;
        lines.push(line);
    }
    ensure(lines.len() == 4, format!("{} fragments", lines.len()))?;
    Ok(lines.join("; "))
}

fn ac11() -> Check {
    let p = HubbardParams::default();
    let s = make_spectrum_table(&p).map_err(err)?;
    let v = build_v_zz();
    let r = pt_corrections(&s, &v, 0).map_err(err)?;
    let rebuilt = e2_from_psi1(&s, &v, &r);
    let self_gap = (r.e2 - rebuilt).abs();
    ensure(self_gap <= 1e-12, format!("E2 vs <V|psi1> differ by {self_gap:e}"))?;
    let oracle = Oracle::new(&p);
    ensure(
        (oracle.e1() - r.e1).abs() < 1e-12 && (oracle.e2() - r.e2).abs() < 1e-12,
        "labelled reference disagrees with eigensolver oracle".into(),
    )?;
    let grid: Vec<f64> = (1..=10).map(|i| 1e-4 * i as f64).collect();
    let sweep = exact_eigen_sweep(&build_h0(&p), &v, &grid).map_err(err)?;
    let ys: Vec<f64> = sweep.iter().map(|(_, e)| e - r.e0).collect();
    let fit = least_squares(&grid, &ys, &[1, 2, 3]).map_err(err)?;
    let (f1, f2) = (fit.coeffs[0], fit.coeffs[1]);
    let (d1, d2) = ((f1 - r.e1).abs() / r.e1.abs(), (f2 - r.e2).abs() / r.e2.abs());
    ensure(d1 <= 1e-3 && d2 <= 1e-3, format!("fit E1 {f1} ({d1:e}), E2 {f2} ({d2:e})"))?;
    Ok(format!(
        "self-consistency {self_gap:.1e}; fit E1 rel {d1:.1e}, E2 rel {d2:.1e}"
    ))
}

fn main() -> ExitCode {
    let checks: [(&str, fn() -> Check); 11] = [
        ("AC1", ac1),
        ("AC2", ac2),
        ("AC3", ac3),
        ("AC4", ac4),
        ("AC5", ac5),
        ("AC6", ac6),
        ("AC7", ac7),
        ("AC8", ac8),
        ("AC9", ac9),
        ("AC10", ac10),
        ("AC11", ac11),
    ];
    let mut failed = 0;
    for (name, f) in checks {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] {name} {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] {name} {detail}");
            }
        }
    }
    println!("{} of 11 criteria passed", 11 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
