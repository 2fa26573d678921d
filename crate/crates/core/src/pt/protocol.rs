//! Repeat-until-success, the estimators and the `U_e` calibration.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::perturbation::{build_v_tilde, build_v_tilde_difference, ZZ_PAIRS};
use super::udis::{build_u_dis, build_u_in};
use super::ue::{build_u_e, flag_amplitudes};
use super::{Layout, PtConfig, ReadoutMode, VMode};
use crate::error::{Error, Result};
use crate::gates::{Circuit, Control, GateInstance, GateKind, Role};
use crate::hubbard::{make_spectrum_table, HubbardParams, SpectrumTable, DIM, LEVEL_TOL};
use crate::statevector::{sample_distribution, StateVector, COLLAPSE_THRESHOLD};

/// One λ point of the estimator pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimateRecord {
    pub lambda: f64,
    pub e1_est: f64,
    pub psi1_est: Vec<Complex64>,
    pub e2_est: f64,
    /// Set when `e2_est` is a magnitude whose sign the readout cannot see.
    pub e2_sign_ambiguous: bool,
    pub rus_attempts: u64,
    pub success_prob: f64,
}

#[derive(Debug, Clone)]
pub struct RusOutcome {
    /// Post-selected, renormalized state.
    pub state: StateVector,
    pub attempts: u64,
    pub success_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Psi1Estimate {
    pub psi1: Vec<Complex64>,
    pub attempts: u64,
    pub success_prob: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2Estimate {
    pub e2: f64,
    pub sign_ambiguous: bool,
    pub attempts: u64,
    pub success_prob: f64,
}

fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Probability that every qubit in `flags` reads 1.
fn flags_probability(state: &StateVector, flags: &[usize]) -> f64 {
    let n = state.num_qubits();
    let mask: usize = flags.iter().map(|&q| 1 << (n - 1 - q)).sum();
    state
        .amplitudes()
        .iter()
        .enumerate()
        .filter(|(i, _)| i & mask == mask)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Repeat preparation and measurement of `flags` until all read 1.
///
/// The prepared state is computed once; each attempt is a Bernoulli trial
/// with the branch probability. In shot mode `shots` successes are
/// collected and `success_prob` is the observed success frequency. In exact
/// mode the branch is projected directly and counts as one attempt.
pub fn run_rus(
    prepared: &StateVector,
    flags: &[usize],
    readout: &ReadoutMode,
    max_attempts: u64,
) -> Result<RusOutcome> {
    let p = flags_probability(prepared, flags);
    let (attempts, success_prob) = match *readout {
        ReadoutMode::ExactAmplitude => {
            if p < COLLAPSE_THRESHOLD {
                return Err(Error::PostselectionFailure(p));
            }
            (1, p)
        }
        ReadoutMode::Shots { shots, seed } => {
            let mut rng = rng_stream(seed, 0);
            let mut total = 0u64;
            for _ in 0..shots {
                let mut tries = 0u64;
                loop {
                    tries += 1;
                    if rng.random::<f64>() < p {
                        break;
                    }
                    if tries >= max_attempts {
                        return Err(Error::RusExhausted(max_attempts));
                    }
                }
                total += tries;
            }
            (total, shots as f64 / total as f64)
        }
    };
    let mut state = prepared.clone();
    for &q in flags {
        state.project(q, true)?;
    }
    Ok(RusOutcome {
        state,
        attempts,
        success_prob,
    })
}

/// Precomputed spectrum and fixed sub-circuits for one `(params, k, C)`.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub params: HubbardParams,
    pub spectrum: SpectrumTable,
    pub k: usize,
    pub c: f64,
    pub u_dis: Vec<GateInstance>,
    pub u_e: Vec<GateInstance>,
    pub rus_max_attempts: u64,
}

impl Pipeline {
    pub fn new(params: &HubbardParams, k: usize, c: f64) -> Result<Self> {
        let spectrum = make_spectrum_table(params)?;
        Self::with_spectrum(params, spectrum, k, c)
    }

    pub fn with_spectrum(
        params: &HubbardParams,
        spectrum: SpectrumTable,
        k: usize,
        c: f64,
    ) -> Result<Self> {
        if k >= DIM {
            return Err(Error::InvalidArgument(format!("target label {k} out of range")));
        }
        let level = &spectrum.levels[spectrum.level_of(k)];
        if level.degeneracy > 1 {
            return Err(Error::DegenerateTarget {
                index: k,
                energy: level.energy,
                degeneracy: level.degeneracy,
            });
        }
        flag_amplitudes(&spectrum, k, c)?;
        let u_e = build_u_e(&spectrum, k, c, super::SYSTEM, super::FLAG)?;
        Ok(Pipeline {
            params: *params,
            u_dis: build_u_dis(params, super::SYSTEM),
            spectrum,
            k,
            c,
            u_e,
            rus_max_attempts: super::DEFAULT_RUS_MAX_ATTEMPTS,
        })
    }

    pub fn from_config(cfg: &PtConfig) -> Result<Self> {
        cfg.validate()?;
        let mut p = Self::new(&cfg.params, cfg.k, cfg.c)?;
        p.rus_max_attempts = cfg.rus_max_attempts;
        Ok(p)
    }

    fn layout(v_mode: VMode, blocks: usize, readout: bool) -> Layout {
        match v_mode {
            VMode::PlainExp => Layout::new(0, readout),
            VMode::Difference => Layout::new(blocks, readout),
        }
    }

    fn perturbation(&self, layout: &Layout, lambda: f64, v_mode: VMode, adjoint: bool) -> Vec<GateInstance> {
        match v_mode {
            VMode::PlainExp => {
                let sign = if adjoint { -1.0 } else { 1.0 };
                build_v_tilde(&self.u_dis, lambda, sign, layout.system)
            }
            VMode::Difference => {
                let anc = layout.lcu[adjoint as usize];
                build_v_tilde_difference(&self.u_dis, lambda, anc, adjoint, layout.system)
            }
        }
    }

    fn flags(layout: &Layout, blocks: usize) -> Vec<usize> {
        std::iter::once(layout.flag)
            .chain(layout.lcu.iter().take(blocks).copied())
            .collect()
    }

    /// Index with system label `label`, `q′ = 00` and `ones` set.
    fn index_with(layout: &Layout, label: usize, ones: &[usize]) -> usize {
        let n = layout.num_qubits();
        ones.iter()
            .fold(label << (n - 4), |acc, &q| acc | 1 << (n - 1 - q))
    }

    /// `U_in`, the perturbation block, then `U_e`.
    fn psi1_gates(&self, layout: &Layout, lambda: f64, v_mode: VMode) -> Vec<GateInstance> {
        let mut g = build_u_in(self.k, layout.system);
        g.extend(self.perturbation(layout, lambda, v_mode, false));
        g.extend(self.u_e.iter().cloned());
        g
    }

    /// The first-order state circuit up to the flag measurement.
    pub fn psi1_circuit(&self, lambda: f64, v_mode: VMode) -> Circuit {
        let layout = Self::layout(v_mode, 1, false);
        let mut c = Circuit::with_roles(layout.roles());
        c.extend(self.psi1_gates(&layout, lambda, v_mode));
        c
    }

    /// Measurement-free second-order circuit ending in a multi-controlled
    /// NOT onto the readout qubit.
    pub fn e2_no_rus_circuit(&self, lambda: f64, v_mode: VMode) -> Circuit {
        let layout = Self::layout(v_mode, 2, true);
        let readout = layout.readout.expect("layout has a readout qubit");
        let mut c = Circuit::with_roles(layout.roles());
        c.extend(self.psi1_gates(&layout, lambda, v_mode));
        c.extend(self.perturbation(&layout, lambda, v_mode, true));
        c.extend(build_u_in(self.k, layout.system).into_iter().rev());
        let mut controls: Vec<Control> = layout.system.iter().map(|&q| Control::off(q)).collect();
        controls.extend(Self::flags(&layout, layout.lcu.len()).into_iter().map(Control::on));
        c.push(GateInstance::controlled(GateKind::X, controls, readout));
        c
    }

    fn run(&self, layout: &Layout, gates: &[GateInstance]) -> Result<StateVector> {
        let mut s = StateVector::new_zero_state(layout.num_qubits())?;
        for g in gates {
            s.apply_gate(g)?;
        }
        Ok(s)
    }

    /// Scale between the flag amplitude and `λ·C·ψ¹`.
    fn psi1_scale(&self, lambda: f64, v_mode: VMode) -> f64 {
        let half = if v_mode == VMode::Difference { 0.5 } else { 1.0 };
        lambda * self.c * half
    }

    pub fn e1(&self, lambda: f64, v_mode: VMode, readout: &ReadoutMode) -> Result<f64> {
        let half = if v_mode == VMode::Difference { 0.5 } else { 1.0 };
        match *readout {
            ReadoutMode::ExactAmplitude => {
                let layout = Self::layout(v_mode, 1, false);
                let mut g = build_u_in(self.k, layout.system);
                g.extend(self.perturbation(&layout, lambda, v_mode, false));
                let s = self.run(&layout, &g)?;
                let ones: Vec<usize> = layout.lcu.clone();
                let amp = s.amplitude(Self::index_with(&layout, self.k, &ones));
                Ok(amp.im / (lambda * half))
            }
            ReadoutMode::Shots { shots, seed } => match v_mode {
                VMode::PlainExp => Ok(self.hadamard_test_im(lambda, shots, seed, 1)? / lambda),
                VMode::Difference => {
                    let plus = self.hadamard_test_im(lambda / 2.0, shots, seed, 1)?;
                    let minus = self.hadamard_test_im(-lambda / 2.0, shots, seed, 2)?;
                    Ok((plus - minus) / 2.0 / (lambda * half))
                }
            },
        }
    }

    /// Sampled `Im⟨k|U_dis† exp(iμV̂) U_dis|k⟩` from a Hadamard test.
    fn hadamard_test_im(&self, mu: f64, shots: u64, seed: u64, stream: u64) -> Result<f64> {
        let sys = super::SYSTEM;
        let test = 4;
        let mut g = build_u_in(self.k, sys);
        g.push(GateInstance::h(test));
        g.extend(self.u_dis.iter().cloned());
        for &(a, b) in &ZZ_PAIRS {
            g.push(GateInstance::cx(a, b));
            g.push(GateInstance::controlled(
                GateKind::Rz(-2.0 * mu),
                vec![Control::on(test)],
                b,
            ));
            g.push(GateInstance::cx(a, b));
        }
        g.extend(self.u_dis.iter().rev().map(|x| x.dagger()));
        g.push(GateInstance::single(GateKind::Sdg, test));
        g.push(GateInstance::h(test));
        let mut s = StateVector::new_zero_state(5)?;
        for x in &g {
            s.apply_gate(x)?;
        }
        let p0 = s.qubit_probability(test, false)?;
        let mut rng = rng_stream(seed, 16 + stream);
        let zeros = (0..shots).filter(|_| rng.random::<f64>() < p0).count();
        Ok(2.0 * zeros as f64 / shots as f64 - 1.0)
    }

    pub fn psi1(&self, lambda: f64, v_mode: VMode, readout: &ReadoutMode) -> Result<Psi1Estimate> {
        let layout = Self::layout(v_mode, 1, false);
        let prepared = self.run(&layout, &self.psi1_gates(&layout, lambda, v_mode))?;
        let flags = Self::flags(&layout, layout.lcu.len());
        let rus = run_rus(&prepared, &flags, readout, self.rus_max_attempts)?;
        let scale = self.psi1_scale(lambda, v_mode);
        let psi1 = match *readout {
            ReadoutMode::ExactAmplitude => (0..DIM)
                .map(|m| {
                    let amp = prepared.amplitude(Self::index_with(&layout, m, &flags));
                    amp / (Complex64::i() * scale)
                })
                .collect(),
            ReadoutMode::Shots { shots, seed } => {
                let probs = rus.state.marginal(&layout.system)?;
                let mut rng = rng_stream(seed, 1);
                let counts = sample_distribution(&probs, shots, &mut rng);
                counts
                    .iter()
                    .map(|&c| {
                        let amp = (c as f64 / shots as f64 * rus.success_prob).sqrt();
                        Complex64::new(amp / scale.abs(), 0.0)
                    })
                    .collect()
            }
        };
        Ok(Psi1Estimate {
            psi1,
            attempts: rus.attempts,
            success_prob: rus.success_prob,
        })
    }

    fn e2_scale(&self, lambda: f64, v_mode: VMode) -> f64 {
        let quarter = if v_mode == VMode::Difference { 0.25 } else { 1.0 };
        self.c * lambda * lambda * quarter
    }

    /// Second-order energy through repeat-until-success.
    pub fn e2(&self, lambda: f64, v_mode: VMode, readout: &ReadoutMode) -> Result<E2Estimate> {
        let layout = Self::layout(v_mode, 2, false);
        let prepared = self.run(&layout, &self.psi1_gates(&layout, lambda, v_mode))?;
        let first = Self::flags(&layout, layout.lcu.len().min(1));
        let rus = run_rus(&prepared, &first, readout, self.rus_max_attempts)?;
        let mut s = rus.state;
        for g in self.perturbation(&layout, lambda, v_mode, true) {
            s.apply_gate(&g)?;
        }
        for g in build_u_in(self.k, layout.system).into_iter().rev() {
            s.apply_gate(&g)?;
        }
        let all = Self::flags(&layout, layout.lcu.len());
        let a_norm = s.amplitude(Self::index_with(&layout, 0, &all));
        let scale = self.e2_scale(lambda, v_mode);
        let (e2, ambiguous) = match *readout {
            ReadoutMode::ExactAmplitude => ((a_norm * rus.success_prob.sqrt()).re / scale, false),
            ReadoutMode::Shots { shots, seed } => {
                let p = a_norm.norm_sqr();
                let mut rng = rng_stream(seed, 2);
                let hits = (0..shots).filter(|_| rng.random::<f64>() < p).count();
                let a = (hits as f64 / shots as f64 * rus.success_prob).sqrt();
                (a / scale.abs(), true)
            }
        };
        Ok(E2Estimate {
            e2,
            sign_ambiguous: ambiguous,
            attempts: rus.attempts,
            success_prob: rus.success_prob,
        })
    }

    /// Second-order energy without a mid-circuit measurement.
    pub fn e2_no_rus(&self, lambda: f64, v_mode: VMode, readout: &ReadoutMode) -> Result<E2Estimate> {
        let circuit = self.e2_no_rus_circuit(lambda, v_mode);
        let layout = Self::layout(v_mode, 2, true);
        let readout_q = layout.readout.expect("layout has a readout qubit");
        let mut s = StateVector::new_zero_state(circuit.num_qubits())?;
        s.apply_circuit(&circuit)?;
        let mut ones = Self::flags(&layout, layout.lcu.len());
        ones.push(readout_q);
        let amp = s.amplitude(Self::index_with(&layout, 0, &ones));
        let scale = self.e2_scale(lambda, v_mode);
        let (e2, ambiguous, attempts) = match *readout {
            ReadoutMode::ExactAmplitude => (amp.re / scale, false, 1),
            ReadoutMode::Shots { shots, seed } => {
                let p = s.qubit_probability(readout_q, true)?;
                let mut rng = rng_stream(seed, 3);
                let hits = (0..shots).filter(|_| rng.random::<f64>() < p).count();
                ((hits as f64 / shots as f64).sqrt() / scale.abs(), true, shots)
            }
        };
        Ok(E2Estimate {
            e2,
            sign_ambiguous: ambiguous,
            attempts,
            success_prob: 1.0,
        })
    }

    pub fn estimate(&self, lambda: f64, v_mode: VMode, readout: &ReadoutMode) -> Result<EstimateRecord> {
        let e1 = self.e1(lambda, v_mode, readout)?;
        let psi = self.psi1(lambda, v_mode, readout)?;
        let e2 = self.e2(lambda, v_mode, readout)?;
        Ok(EstimateRecord {
            lambda,
            e1_est: e1,
            psi1_est: psi.psi1,
            e2_est: e2.e2,
            e2_sign_ambiguous: e2.sign_ambiguous,
            rus_attempts: psi.attempts,
            success_prob: psi.success_prob,
        })
    }
}

/// Run the full estimator chain for one configuration.
pub fn estimate(cfg: &PtConfig) -> Result<EstimateRecord> {
    Pipeline::from_config(cfg)?.estimate(cfg.lambda, cfg.v_mode, &cfg.readout)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRow {
    pub level: usize,
    pub energy: f64,
    /// `E_n − E_k`.
    pub gap: f64,
    /// `16·P_n`, averaged over the level's members.
    pub measured: f64,
    /// `C²/(E_k − E_n)²`, zero on the target level.
    pub predicted: f64,
    /// One standard deviation of `measured`; zero in exact mode.
    pub sigma: f64,
}

/// Joint distribution of the four system qubits and the flag after a
/// uniform superposition is pushed through `u_e`. Index `label·2 + flag`.
pub fn calibration_distribution(u_e: &Circuit, system: [usize; 4], flag: usize) -> Result<Vec<f64>> {
    let mut s = StateVector::new_zero_state(u_e.num_qubits())?;
    for &q in &system {
        s.apply_gate(&GateInstance::h(q))?;
    }
    s.apply_circuit(u_e)?;
    let mut qs = system.to_vec();
    qs.push(flag);
    s.marginal(&qs)
}

/// Aggregate a `label·2 + flag` distribution into per-level rows. With
/// `shots`, the distribution is sampled first.
pub fn calibration_rows(
    probs: &[f64],
    spectrum: &SpectrumTable,
    k: usize,
    c: f64,
    shots: Option<(u64, u64)>,
) -> Vec<CalibrationRow> {
    let p1: Vec<f64> = match shots {
        None => (0..DIM).map(|n| probs[2 * n + 1]).collect(),
        Some((shots, seed)) => {
            let mut rng = rng_stream(seed, 4);
            let counts = sample_distribution(probs, shots, &mut rng);
            (0..DIM)
                .map(|n| counts[2 * n + 1] as f64 / shots as f64)
                .collect()
        }
    };
    let ek = spectrum.energy(k);
    spectrum
        .levels
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let d = l.degeneracy as f64;
            let total: f64 = l.members.iter().map(|&n| p1[n]).sum();
            let gap = l.energy - ek;
            let predicted = if gap.abs() <= LEVEL_TOL { 0.0 } else { c * c / (gap * gap) };
            let sigma = match shots {
                None => 0.0,
                Some((shots, _)) => {
                    let p: f64 = l.members.iter().map(|&n| probs[2 * n + 1]).sum();
                    16.0 / d * (p * (1.0 - p) / shots as f64).sqrt()
                }
            };
            CalibrationRow {
                level: i,
                energy: l.energy,
                gap,
                measured: 16.0 * total / d,
                predicted,
                sigma,
            }
        })
        .collect()
}

/// Calibrate `u_e` on a uniform superposition of the system register.
pub fn calibrate_u_e(
    u_e: &Circuit,
    spectrum: &SpectrumTable,
    k: usize,
    c: f64,
    readout: &ReadoutMode,
) -> Result<Vec<CalibrationRow>> {
    let system: Vec<usize> = u_e.qubits_with_role(Role::System);
    let flag = *u_e
        .qubits_with_role(Role::Readout)
        .first()
        .ok_or_else(|| Error::InvalidArgument("calibration circuit has no flag qubit".into()))?;
    let system: [usize; 4] = system
        .try_into()
        .map_err(|_| Error::InvalidArgument("calibration needs four system qubits".into()))?;
    let probs = calibration_distribution(u_e, system, flag)?;
    let shots = match *readout {
        ReadoutMode::ExactAmplitude => None,
        ReadoutMode::Shots { shots, seed } => Some((shots, seed)),
    };
    Ok(calibration_rows(&probs, spectrum, k, c, shots))
}

/// Gates on the seven-qubit base register: system, work ancillas, flag.
pub fn base_register_circuit(gates: &[GateInstance]) -> Circuit {
    let mut c = Circuit::with_roles(Layout::new(0, false).roles());
    c.extend(gates.iter().cloned());
    c
}
