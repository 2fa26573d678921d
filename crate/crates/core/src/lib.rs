//! Quantum circuits for Rayleigh–Schrödinger perturbation theory on the
//! two-site extended Hubbard model.
//!
//! The crate is organised bottom-up:
//!
//! * [`statevector`]: dense amplitude simulation, measurement, sampling and a
//!   trajectory-level Pauli noise channel.
//! * [`gates`]: gate instances, circuits and the builders for the Fourier
//!   pair, multi-controlled rotations and two-level rotations.
//! * [`hubbard`]: the classical reference: Hamiltonian matrices, the labelled
//!   eigenbasis, the spectrum table and perturbative corrections.
//! * [`pt`]: the perturbation-theory circuits (`U_in`, `U_dis`, `Ṽ`, `U_e`),
//!   repeat-until-success post-selection and the estimators.
//! * [`opt`]: lowering, Toffoli-pair cancellation, coupling checks, gate
//!   census and OpenQASM 2.0 export.
//!
//! Qubit `0` is the most significant bit of a basis index, so the label
//! `|0101⟩` on four qubits is index 5.

pub mod error;
pub mod gates;
pub mod hubbard;
pub mod linalg;
pub mod opt;
pub mod par;
pub mod pt;
pub mod statevector;

pub use error::{Error, Result};
pub use num_complex::Complex64;
