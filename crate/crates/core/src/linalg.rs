//! Small dense-matrix helpers shared by the oracle, the passes and the tests.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::statevector::qubit_bit;

pub type CMatrix = DMatrix<Complex64>;

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(|x| Complex64::new(x, 0.0))
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a - b))
}

/// Max-abs deviation of `U†U` from the identity.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let prod = u.adjoint() * u;
    max_abs_diff(&prod, &CMatrix::identity(u.nrows(), u.ncols()))
}

/// `|Tr(A†B)| / dim`: 1 exactly when `B = e^{iφ}A` for unitary `A`, `B`.
pub fn phase_overlap(a: &CMatrix, b: &CMatrix) -> f64 {
    let tr: Complex64 = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| x.conj() * y)
        .sum();
    tr.norm() / a.nrows() as f64
}

/// True when `a` and `b` agree up to a global phase, within `tol` on the
/// overlap.
pub fn equal_up_to_phase(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
    a.shape() == b.shape() && phase_overlap(a, b) >= 1.0 - tol
}

/// Columns of `u` whose input has every qubit in `zeroed` at `|0⟩`.
///
/// Ancilla-based decompositions only promise correct action on that
/// subspace, so this is the slice that comparisons should look at.
pub fn zero_ancilla_columns(u: &CMatrix, num_qubits: usize, zeroed: &[usize]) -> CMatrix {
    let cols: Vec<usize> = (0..u.ncols())
        .filter(|&j| zeroed.iter().all(|&q| !qubit_bit(num_qubits, j, q)))
        .collect();
    CMatrix::from_fn(u.nrows(), cols.len(), |i, k| u[(i, cols[k])])
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Matrix exponential of a Hermitian `h` times `i·s`, via its eigenbasis.
pub fn expi_hermitian(h: &CMatrix, s: f64) -> CMatrix {
    let eig = h.clone().symmetric_eigen();
    let n = h.nrows();
    let phases = CMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, s * eig.eigenvalues[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}
