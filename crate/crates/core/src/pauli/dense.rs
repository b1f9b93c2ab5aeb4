use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{Pauli, PauliSum};
use crate::error::{Error, Result};

/// Register size above which [`to_dense_matrix`] refuses to build a matrix.
pub const DENSE_ORACLE_CAP: usize = 6;

fn letter_matrix(p: Pauli) -> DMatrix<Complex64> {
    let o = Complex64::new(0.0, 0.0);
    let l = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let entries = match p {
        Pauli::I => [l, o, o, l],
        Pauli::X => [o, l, l, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [l, o, o, -l],
    };
    DMatrix::from_row_slice(2, 2, &entries)
}

/// Dense `2ⁿ×2ⁿ` matrix built from Kronecker products, qubit 0 least significant.
///
/// Meant as a test oracle: it shares no code with the bit-mask kernels.
pub fn to_dense_matrix(s: &PauliSum) -> Result<DMatrix<Complex64>> {
    to_dense_matrix_capped(s, DENSE_ORACLE_CAP)
}

pub fn to_dense_matrix_capped(s: &PauliSum, cap: usize) -> Result<DMatrix<Complex64>> {
    let n = s.n_qubits();
    if n > cap {
        return Err(Error::TooManyQubits(n, cap));
    }
    let dim = 1usize << n;
    let mut out = DMatrix::<Complex64>::zeros(dim, dim);
    for t in s.terms() {
        // highest qubit is the leftmost Kronecker factor
        let mut m = DMatrix::<Complex64>::identity(1, 1);
        for q in (0..n).rev() {
            m = m.kronecker(&letter_matrix(t.letter(q)));
        }
        out += m * t.coefficient;
    }
    Ok(out)
}
