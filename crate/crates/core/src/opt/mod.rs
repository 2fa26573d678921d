//! Circuit passes: lowering, Toffoli-pair cancellation, connectivity checks,
//! tallies and QASM output.

pub mod cancel;
pub mod census;
pub mod coupling;
pub mod lower;
pub mod qasm;

pub use cancel::{cancel_inverses, cancel_toffoli_pairs, commutes, find_toffoli_pairs};
pub use census::{gate_census, CensusBands, GateCensus};
pub use coupling::{check_coupling, route_with_swaps, CouplingMap, Violation};
pub use lower::{
    decompose_all_toffolis, decompose_toffoli, expand_multicontrolled, lower_cphase,
    lower_to_native, zyz,
};
pub use qasm::{export_qasm, parse_qasm};
