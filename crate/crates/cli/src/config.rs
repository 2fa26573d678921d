//! Run configuration: a JSON file, then command-line overrides on top.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use hubbard_pt::hubbard::HubbardParams;
use hubbard_pt::pt::{ReadoutMode, VMode, DEFAULT_RUS_MAX_ATTEMPTS};
use hubbard_pt::statevector::NoiseParams;
use serde::{Deserialize, Serialize};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ModeArg {
    PlainExp,
    Difference,
}

impl From<ModeArg> for VMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::PlainExp => VMode::PlainExp,
            ModeArg::Difference => VMode::Difference,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ReadoutArg {
    Exact,
    Shots,
}

/// Which circuit `export-qasm` and `census` look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum CircuitArg {
    /// First-order state circuit up to the flag measurement.
    Psi1,
    /// The energy-denominator network alone.
    #[serde(rename = "u_e")]
    #[value(name = "u_e")]
    UE,
    /// The disentangling unitary on four qubits.
    UDis,
    /// Measurement-free second-order circuit.
    E2NoRus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CompileArg {
    /// 1-qubit gates, CNOT and Toffoli.
    Native,
    /// Every Toffoli fully decomposed.
    Naive,
    /// Toffoli pairs cancelled.
    Optimized,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub t: f64,
    pub u: f64,
    pub w: f64,
    pub k: usize,
    /// Scale constant of the energy network; `null` picks the largest
    /// admissible value, the gap to the nearest other level.
    pub c: Option<f64>,
    pub lambdas: Vec<f64>,
    pub lambda: f64,
    pub v_mode: ModeArg,
    pub readout: ReadoutArg,
    pub shots: u64,
    pub seed: Option<u64>,
    pub rus_max_attempts: u64,
    pub noise: bool,
    pub noise_params: NoiseParams,
    pub trajectories: usize,
    pub circuit: CircuitArg,
    pub compile: CompileArg,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            t: 1.0,
            u: 1.0,
            w: 1.0,
            k: 0,
            c: None,
            lambdas: vec![0.02, 0.05, 0.1, 0.15, 0.2],
            lambda: 0.1,
            v_mode: ModeArg::Difference,
            readout: ReadoutArg::Exact,
            shots: 32_000,
            seed: None,
            rus_max_attempts: DEFAULT_RUS_MAX_ATTEMPTS,
            noise: true,
            noise_params: NoiseParams::default(),
            trajectories: 2000,
            circuit: CircuitArg::Psi1,
            compile: CompileArg::Optimized,
            output: None,
        }
    }
}

/// Flags accepted by every verb. Each one overrides the matching config
/// field.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// JSON config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true)]
    pub u: Option<f64>,
    #[arg(long, global = true)]
    pub w: Option<f64>,
    /// Target basis label.
    #[arg(long, global = true)]
    pub k: Option<usize>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    /// Comma-separated λ grid for `sweep`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    /// Single λ for circuit-level verbs.
    #[arg(long, global = true)]
    pub lambda: Option<f64>,
    #[arg(long, global = true)]
    pub v_mode: Option<ModeArg>,
    #[arg(long, global = true)]
    pub readout: Option<ReadoutArg>,
    #[arg(long, global = true)]
    pub shots: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub rus_max_attempts: Option<u64>,
    /// Turn the Pauli noise model off.
    #[arg(long, global = true)]
    pub no_noise: bool,
    #[arg(long, global = true)]
    pub trajectories: Option<usize>,
    #[arg(long, global = true)]
    pub circuit: Option<CircuitArg>,
    #[arg(long, global = true)]
    pub compile: Option<CompileArg>,
    /// Output file; stdout when absent.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
}

fn read_file(path: &Path) -> Result<RunConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

impl RunConfig {
    pub fn load(o: &Overrides) -> Result<Self, Failure> {
        let mut cfg = match &o.config {
            Some(p) => read_file(p)?,
            None => RunConfig::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => {$(
                if let Some(v) = o.$f.clone() {
                    cfg.$f = v;
                }
            )*};
        }
        take!(t, u, w, k, lambdas, lambda, v_mode, readout, shots, rus_max_attempts, trajectories, circuit, compile);
        if o.c.is_some() {
            cfg.c = o.c;
        }
        if o.seed.is_some() {
            cfg.seed = o.seed;
        }
        if o.output.is_some() {
            cfg.output = o.output.clone();
        }
        if o.no_noise {
            cfg.noise = false;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        let bad = |m: String| Err(Failure::Config(m));
        self.params().validate().map_err(|e| Failure::Config(e.to_string()))?;
        if self.k >= 16 {
            return bad(format!("k = {} is not a 4-bit label", self.k));
        }
        if self.c.is_some_and(|c| !c.is_finite()) {
            return bad("c must be finite".into());
        }
        if self.lambdas.is_empty() {
            return bad("lambdas must not be empty".into());
        }
        if self.lambdas.iter().chain([&self.lambda]).any(|l| !l.is_finite()) {
            return bad("lambda values must be finite".into());
        }
        if self.shots == 0 {
            return bad("shots must be at least 1".into());
        }
        if self.rus_max_attempts == 0 {
            return bad("rus_max_attempts must be at least 1".into());
        }
        if self.trajectories == 0 {
            return bad("trajectories must be at least 1".into());
        }
        self.noise_params
            .validate()
            .map_err(|e| Failure::Config(e.to_string()))?;
        if self.readout == ReadoutArg::Shots && self.seed.is_none() {
            return bad("shots readout needs an explicit seed".into());
        }
        Ok(())
    }

    pub fn params(&self) -> HubbardParams {
        HubbardParams {
            t: self.t,
            u: self.u,
            w: self.w,
        }
    }

    pub fn readout_mode(&self) -> ReadoutMode {
        match (self.readout, self.seed) {
            (ReadoutArg::Shots, Some(seed)) => ReadoutMode::Shots {
                shots: self.shots,
                seed,
            },
            _ => ReadoutMode::ExactAmplitude,
        }
    }

    pub fn noise_model(&self) -> NoiseParams {
        if self.noise {
            self.noise_params
        } else {
            NoiseParams::NONE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_unit_parameters() {
        let c = RunConfig::default();
        assert_eq!((c.t, c.u, c.w), (1.0, 1.0, 1.0));
        assert!(c.validate().is_ok());
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"k": 0, "v_mode": "plain_exp"}"#).unwrap();
        assert_eq!(c.v_mode, ModeArg::PlainExp);
        assert_eq!(c.lambdas.len(), 5);
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"lamda": 0.1}"#).is_err());
    }

    #[test]
    fn shots_without_seed_is_an_error() {
        let c = RunConfig {
            readout: ReadoutArg::Shots,
            ..RunConfig::default()
        };
        assert!(matches!(c.validate(), Err(Failure::Config(_))));
    }

    #[test]
    fn flags_override_file_values() {
        let o = Overrides {
            k: Some(3),
            lambdas: Some(vec![0.3]),
            no_noise: true,
            ..Overrides::default()
        };
        let c = RunConfig::load(&o).unwrap();
        assert_eq!(c.k, 3);
        assert_eq!(c.lambdas, vec![0.3]);
        assert!(!c.noise);
    }
}
