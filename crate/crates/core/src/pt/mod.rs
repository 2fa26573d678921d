//! Perturbation-theory circuits and estimators.
//!
//! Register layout, high bit first: system `q` (4), work ancillas `q′` (2),
//! energy flag `q″` (1), then whatever the mode needs: one combination
//! ancilla per difference block and, without repeat-until-success, a final
//! readout qubit.

pub mod fit;
pub mod noise;
pub mod perturbation;
pub mod protocol;
pub mod udis;
pub mod ue;

pub use fit::{fit_corrections, least_squares, FitResult, FitSummary};
pub use protocol::{
    calibrate_u_e, estimate, run_rus, CalibrationRow, E2Estimate, EstimateRecord, Pipeline,
    Psi1Estimate, RusOutcome,
};

use crate::error::{Error, Result};
use crate::gates::Role;
use crate::hubbard::HubbardParams;

pub const SYSTEM: [usize; 4] = [0, 1, 2, 3];
pub const ANCILLAS: [usize; 2] = [4, 5];
pub const FLAG: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VMode {
    /// `Ṽ = U_dis† exp(iλV̂) U_dis`.
    PlainExp,
    /// `(U₊ − U₋)/2` with `U± = U_dis† exp(±iλV̂/2) U_dis`.
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReadoutMode {
    /// Amplitudes are read directly from the statevector.
    ExactAmplitude,
    /// Sampled readout with a fixed seed.
    Shots { shots: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PtConfig {
    pub params: HubbardParams,
    pub k: usize,
    pub lambda: f64,
    pub c: f64,
    pub v_mode: VMode,
    pub readout: ReadoutMode,
    pub rus_max_attempts: u64,
}

pub const DEFAULT_RUS_MAX_ATTEMPTS: u64 = 1_000_000;

impl PtConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.k >= 16 {
            return Err(Error::InvalidArgument(format!("target label {} out of range", self.k)));
        }
        if !self.lambda.is_finite() || !self.c.is_finite() {
            return Err(Error::InvalidArgument("lambda and C must be finite".into()));
        }
        if self.rus_max_attempts == 0 {
            return Err(Error::InvalidArgument("rus_max_attempts must be at least 1".into()));
        }
        if let ReadoutMode::Shots { shots: 0, .. } = self.readout {
            return Err(Error::InvalidArgument("shots must be at least 1".into()));
        }
        Ok(())
    }
}

/// Qubit indices for one circuit variant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    pub system: [usize; 4],
    pub ancillas: [usize; 2],
    pub flag: usize,
    /// Combination ancillas, one per difference block.
    pub lcu: Vec<usize>,
    /// Final readout qubit of the measurement-free variant.
    pub readout: Option<usize>,
}

impl Layout {
    pub fn new(lcu_blocks: usize, readout: bool) -> Self {
        let lcu: Vec<usize> = (0..lcu_blocks).map(|i| FLAG + 1 + i).collect();
        let readout = readout.then_some(FLAG + 1 + lcu_blocks);
        Layout {
            system: SYSTEM,
            ancillas: ANCILLAS,
            flag: FLAG,
            lcu,
            readout,
        }
    }

    pub fn num_qubits(&self) -> usize {
        FLAG + 1 + self.lcu.len() + self.readout.is_some() as usize
    }

    pub fn roles(&self) -> Vec<Role> {
        let mut r = vec![Role::System; 4];
        r.extend([Role::Ancilla; 2]);
        r.resize(self.num_qubits(), Role::Readout);
        r
    }

    /// Basis index with system label `label`, ancillas at 0, and the flag and
    /// every combination ancilla at 1.
    pub fn flagged_index(&self, label: usize) -> usize {
        let n = self.num_qubits();
        let mut idx = label << (n - 4);
        for &q in std::iter::once(&self.flag).chain(&self.lcu) {
            idx |= 1 << (n - 1 - q);
        }
        idx
    }
}
