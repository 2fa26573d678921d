use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("register size {0} is outside the supported range 1..=24")]
    SizeOutOfRange(usize),

    #[error("qubit {qubit} is out of range for a {num_qubits}-qubit register")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("qubit {0} is used more than once by a single gate")]
    IndexCollision(usize),

    #[error("gate matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("gate {0} expects {1} target qubit(s)")]
    Arity(&'static str, usize),

    #[error("measurement branch has probability {0:.3e}, below the collapse threshold")]
    ZeroNormBranch(f64),

    #[error("{needed} ancilla qubit(s) required, {available} available")]
    InsufficientAncilla { needed: usize, available: usize },

    #[error("unsupported gate: {0}")]
    UnsupportedGate(String),

    #[error("energy level {energy} of state {index} is {degeneracy}-fold degenerate; non-degenerate perturbation theory does not apply")]
    DegenerateTarget {
        index: usize,
        energy: f64,
        degeneracy: usize,
    },

    #[error("eigenvalue gap {0:.3e} is too small to separate levels and too large to merge them")]
    DegeneracySplit(f64),

    #[error("scale constant C = {c} gives |C/(E_k - E_n)| = {ratio} > 1 for state {index}")]
    ConstantTooLarge { c: f64, index: usize, ratio: f64 },

    #[error("repeat-until-success exhausted after {0} attempts")]
    RusExhausted(u64),

    #[error("post-selection branch has probability {0:.3e}")]
    PostselectionFailure(f64),

    #[error("least-squares design is rank deficient ({points} distinct points, {params} parameters)")]
    RankDeficient { points: usize, params: usize },

    #[error("basis state {index} is not an eigenvector (residual {residual:.3e})")]
    NotEigenvector { index: usize, residual: f64 },

    #[error("qubit {0} has no node in the coupling map")]
    UnmappedQubit(usize),

    #[error("qasm parse error on line {line}: {msg}")]
    QasmParse { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
