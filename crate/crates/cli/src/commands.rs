//! The six verbs. Each returns the bytes to write.

use hubbard_pt::gates::Circuit;
use hubbard_pt::hubbard::{
    build_h0, build_v_zz, exact_eigen_sweep, make_spectrum_table, pt_corrections, SpectrumTable,
};
use hubbard_pt::opt::{
    cancel_toffoli_pairs, check_coupling, decompose_all_toffolis, expand_multicontrolled,
    export_qasm, gate_census, lower_to_native, CensusBands, CouplingMap, GateCensus,
};
use hubbard_pt::par::map_ordered;
use hubbard_pt::pt::noise::{compare_part, part_circuits};
use hubbard_pt::pt::protocol::base_register_circuit;
use hubbard_pt::pt::udis::build_u_dis;
use hubbard_pt::pt::ue::nearest_gap_constant;
use hubbard_pt::pt::{calibrate_u_e, Pipeline, ReadoutMode};
use hubbard_pt::Complex64;
use serde::Serialize;

use crate::config::{CircuitArg, CompileArg, ModeArg, RunConfig};
use crate::Failure;

fn setup(cfg: &RunConfig) -> Result<(SpectrumTable, Pipeline), Failure> {
    let params = cfg.params();
    let spectrum = make_spectrum_table(&params)?;
    let c = cfg.c.unwrap_or_else(|| nearest_gap_constant(&spectrum, cfg.k));
    let mut pipe = Pipeline::with_spectrum(&params, spectrum.clone(), cfg.k, c)?;
    pipe.rus_max_attempts = cfg.rus_max_attempts;
    Ok((spectrum, pipe))
}

fn csv_bytes<T: Serialize>(rows: &[T]) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Failure::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Failure::Io(e.to_string()))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>, Failure> {
    let mut v = serde_json::to_vec_pretty(value).map_err(|e| Failure::Io(e.to_string()))?;
    v.push(b'\n');
    Ok(v)
}

/// One λ point. Energies are for `H₀ + λ·Σσᶻσᶻ`; the `exact_ground_delta`
/// column is the shift of the lowest eigenvalue.
#[derive(Debug, Serialize)]
struct SweepRow {
    lambda: f64,
    exact_ground_delta: f64,
    pt_first: f64,
    pt_second: f64,
    pt_total: f64,
    e1_oracle: f64,
    e1_est: f64,
    e1_rel_err: f64,
    e2_oracle: f64,
    e2_est: f64,
    e2_rel_err: f64,
    e2_sign_ambiguous: bool,
    psi1_rel_err: f64,
    success_prob: f64,
    rus_attempts: u64,
}

fn rel(est: f64, want: f64) -> f64 {
    if want == 0.0 {
        (est - want).abs()
    } else {
        (est - want).abs() / want.abs()
    }
}

/// Relative distance between two state corrections, best global sign.
/// Sampled readout only sees magnitudes, so those are compared instead.
fn psi1_error(est: &[Complex64], want: &[Complex64], magnitudes: bool) -> f64 {
    let norm = want.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let dist = |sign: f64| -> f64 {
        est.iter()
            .zip(want)
            .map(|(a, b)| {
                if magnitudes {
                    (a.norm() - b.norm()).powi(2)
                } else {
                    (a - b * sign).norm_sqr()
                }
            })
            .sum::<f64>()
            .sqrt()
    };
    let d = dist(1.0).min(dist(-1.0));
    if norm == 0.0 {
        d
    } else {
        d / norm
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    let (spectrum, pipe) = setup(cfg)?;
    let v = build_v_zz();
    let oracle = pt_corrections(&spectrum, &v, cfg.k)?;
    let mut grid = cfg.lambdas.clone();
    grid.sort_by(f64::total_cmp);
    let exact = exact_eigen_sweep(&build_h0(&cfg.params()), &v, &grid)?;
    let e_gs = spectrum.ground_energy();
    let readout = cfg.readout_mode();
    let shots = matches!(readout, ReadoutMode::Shots { .. });
    let mode = cfg.v_mode.into();
    let rows = map_ordered(&exact, |&(lambda, e)| -> Result<SweepRow, Failure> {
        let r = pipe.estimate(lambda, mode, &readout)?;
        let e2_cmp = if r.e2_sign_ambiguous { oracle.e2.abs() } else { oracle.e2 };
        Ok(SweepRow {
            lambda,
            exact_ground_delta: e - e_gs,
            pt_first: lambda * oracle.e1,
            pt_second: lambda * lambda * oracle.e2,
            pt_total: lambda * oracle.e1 + lambda * lambda * oracle.e2,
            e1_oracle: oracle.e1,
            e1_est: r.e1_est,
            e1_rel_err: rel(r.e1_est, oracle.e1),
            e2_oracle: oracle.e2,
            e2_est: r.e2_est,
            e2_rel_err: rel(r.e2_est, e2_cmp),
            e2_sign_ambiguous: r.e2_sign_ambiguous,
            psi1_rel_err: psi1_error(&r.psi1_est, &oracle.psi1, shots),
            success_prob: r.success_prob,
            rus_attempts: r.rus_attempts,
        })
    });
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    csv_bytes(&rows)
}

#[derive(Debug, Serialize)]
struct CalibrationCsv {
    level: usize,
    energy: f64,
    gap: f64,
    measured: f64,
    predicted: f64,
    sigma: f64,
}

pub fn calibrate(cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    let (spectrum, pipe) = setup(cfg)?;
    let rows = calibrate_u_e(
        &base_register_circuit(&pipe.u_e),
        &spectrum,
        cfg.k,
        pipe.c,
        &cfg.readout_mode(),
    )?;
    let rows: Vec<CalibrationCsv> = rows
        .into_iter()
        .map(|r| CalibrationCsv {
            level: r.level,
            energy: r.energy,
            gap: r.gap,
            measured: r.measured,
            predicted: r.predicted,
            sigma: r.sigma,
        })
        .collect();
    csv_bytes(&rows)
}

#[derive(Debug, Serialize)]
struct LevelJson {
    energy: f64,
    degeneracy: usize,
    members: Vec<usize>,
}

#[derive(Debug, Serialize)]
struct Corrections {
    e1: f64,
    e2: f64,
    /// `[re, im]` per basis label.
    psi1: Vec<[f64; 2]>,
}

#[derive(Debug, Serialize)]
struct OracleJson {
    t: f64,
    u: f64,
    w: f64,
    lambda: f64,
    k: usize,
    e_gs: f64,
    e_h: f64,
    e_k: f64,
    levels: Vec<LevelJson>,
    energies: Vec<f64>,
    /// Corrections per unit λ of `λ·Σσᶻσᶻ`.
    coefficients: Corrections,
    /// Corrections of the actual perturbation at `λ = W/4`: first order
    /// `λ·E1`, second order `λ²·E2`, state `λ·ψ¹`.
    scaled: Corrections,
}

fn pairs(v: &[Complex64], s: f64) -> Vec<[f64; 2]> {
    v.iter().map(|a| [a.re * s, a.im * s]).collect()
}

pub fn oracle(cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    let params = cfg.params();
    let s = make_spectrum_table(&params)?;
    let r = pt_corrections(&s, &build_v_zz(), cfg.k)?;
    let lam = params.lambda();
    let out = OracleJson {
        t: params.t,
        u: params.u,
        w: params.w,
        lambda: lam,
        k: cfg.k,
        e_gs: s.ground_energy(),
        e_h: s.levels.last().map(|l| l.energy).unwrap_or(f64::NAN),
        e_k: r.e0,
        levels: s
            .levels
            .iter()
            .map(|l| LevelJson {
                energy: l.energy,
                degeneracy: l.degeneracy,
                members: l.members.clone(),
            })
            .collect(),
        energies: s.energies.clone(),
        coefficients: Corrections {
            e1: r.e1,
            e2: r.e2,
            psi1: pairs(&r.psi1, 1.0),
        },
        scaled: Corrections {
            e1: lam * r.e1,
            e2: lam * lam * r.e2,
            psi1: pairs(&r.psi1, lam),
        },
    };
    json_bytes(&out)
}

fn chosen_circuit(cfg: &RunConfig, pipe: &Pipeline) -> Circuit {
    let mode = cfg.v_mode.into();
    match cfg.circuit {
        CircuitArg::Psi1 => pipe.psi1_circuit(cfg.lambda, mode),
        CircuitArg::UE => base_register_circuit(&pipe.u_e),
        // The three-control rotations lower through a work ancilla, so this
        // goes on the full register rather than the bare system qubits.
        CircuitArg::UDis => base_register_circuit(&build_u_dis(&cfg.params(), [0, 1, 2, 3])),
        CircuitArg::E2NoRus => pipe.e2_no_rus_circuit(cfg.lambda, mode),
    }
}

fn compile(c: &Circuit, how: CompileArg) -> Result<Circuit, Failure> {
    let native = lower_to_native(c)?;
    Ok(match how {
        CompileArg::Native => native,
        CompileArg::Naive => decompose_all_toffolis(&native),
        CompileArg::Optimized => cancel_toffoli_pairs(&native),
    })
}

pub fn export(cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    let (_, pipe) = setup(cfg)?;
    let c = compile(&chosen_circuit(cfg, &pipe), cfg.compile)?;
    Ok(export_qasm(&c)?.into_bytes())
}

#[derive(Debug, Serialize)]
struct CensusJson {
    circuit: CircuitArg,
    lambda: f64,
    v_mode: ModeArg,
    /// Multi-controlled rotations expanded, multi-controlled NOTs kept.
    expanded: GateCensus,
    native: GateCensus,
    naive: GateCensus,
    optimized: GateCensus,
    /// Two-qubit gates off the seven-qubit tree after each compilation.
    naive_violations: Option<usize>,
    optimized_violations: Option<usize>,
    bands: Option<CensusBands>,
    within_bands: Option<bool>,
}

/// The census document and whether it sits inside its bands (always true
/// when no bands apply).
pub fn census(cfg: &RunConfig) -> Result<(Vec<u8>, bool), Failure> {
    let (_, pipe) = setup(cfg)?;
    let c = chosen_circuit(cfg, &pipe);
    let expanded = gate_census(&expand_multicontrolled(&c)?);
    let map = CouplingMap::seven_qubit_tree();
    let mut counts = Vec::new();
    let mut violations = Vec::new();
    for how in [CompileArg::Native, CompileArg::Naive, CompileArg::Optimized] {
        let compiled = compile(&c, how)?;
        counts.push(gate_census(&compiled));
        if how != CompileArg::Native {
            // The tree only has nodes for the seven-qubit register; wider
            // circuits report no count.
            violations.push(check_coupling(&compiled, &map).ok().map(|v| v.len()));
        }
    }
    let bands = (cfg.circuit == CircuitArg::Psi1).then_some(CensusBands::PSI1);
    let within = bands.map(|b| b.contains(&expanded));
    let doc = CensusJson {
        circuit: cfg.circuit,
        lambda: cfg.lambda,
        v_mode: cfg.v_mode,
        expanded,
        native: counts[0],
        naive: counts[1],
        optimized: counts[2],
        naive_violations: violations[0],
        optimized_violations: violations[1],
        bands,
        within_bands: within,
    };
    Ok((json_bytes(&doc)?, within.unwrap_or(true)))
}

#[derive(Debug, Serialize)]
struct NoiseRow {
    part: String,
    outcome: String,
    ideal: f64,
    naive: f64,
    optimized: f64,
    tv_naive: f64,
    tv_optimized: f64,
    naive_two_qubit: usize,
    optimized_two_qubit: usize,
}

pub fn noise_run(cfg: &RunConfig) -> Result<Vec<u8>, Failure> {
    if cfg.noise && cfg.seed.is_none() {
        return Err(Failure::Config("noisy runs need an explicit seed".into()));
    }
    let (spectrum, pipe) = setup(cfg)?;
    let map = CouplingMap::seven_qubit_tree();
    let noise = cfg.noise_model();
    let mut rows = Vec::new();
    for part in part_circuits(&spectrum, cfg.k, pipe.c)? {
        let r = compare_part(&part, &map, &noise, cfg.trajectories, cfg.seed.unwrap_or(0))?;
        for (i, ideal) in r.ideal.iter().enumerate() {
            rows.push(NoiseRow {
                part: r.name.clone(),
                outcome: format!("{i:05b}"),
                ideal: *ideal,
                naive: r.naive[i],
                optimized: r.optimized[i],
                tv_naive: r.tv_naive,
                tv_optimized: r.tv_optimized,
                naive_two_qubit: r.naive_two_qubit,
                optimized_two_qubit: r.optimized_two_qubit,
            });
        }
    }
    csv_bytes(&rows)
}
