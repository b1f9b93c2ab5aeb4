//! Independent dense-matrix oracles shared by the integration tests.
#![allow(dead_code)]

use adaptbai::pauli::Pauli;
use adaptbai::statevector::StateVector;
use adaptbai::{PauliSum, PauliTerm};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

pub fn letter_matrix(p: Pauli) -> DMatrix<C> {
    let (o, z, i) = (c(1.0, 0.0), c(0.0, 0.0), c(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Kronecker product of per-qubit factors, qubit 0 as the rightmost factor.
pub fn kron_qubits(factors: &[DMatrix<C>]) -> DMatrix<C> {
    let mut m = DMatrix::from_element(1, 1, c(1.0, 0.0));
    for f in factors.iter().rev() {
        m = m.kronecker(f);
    }
    m
}

pub fn dense_term(t: &PauliTerm) -> DMatrix<C> {
    let factors: Vec<_> = (0..t.n_qubits()).map(|q| letter_matrix(t.letter(q))).collect();
    kron_qubits(&factors) * t.coefficient
}

pub fn dense(s: &PauliSum) -> DMatrix<C> {
    let d = 1 << s.n_qubits();
    s.terms()
        .fold(DMatrix::zeros(d, d), |acc, t| acc + dense_term(&t))
}

/// `e^{θG}` by scaling and squaring with a dense Taylor series.
pub fn dense_expm(g: &DMatrix<C>, theta: f64) -> DMatrix<C> {
    let a = g * c(theta, 0.0);
    let norm = a.iter().map(|z| z.norm()).sum::<f64>();
    let squarings = (norm / 0.25).log2().ceil().max(0.0) as u32;
    let scaled = a / c(2f64.powi(squarings as i32), 0.0);
    let dim = g.nrows();
    let mut term = DMatrix::<C>::identity(dim, dim);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &scaled / c(k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

pub fn max_abs(m: &DMatrix<C>) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn max_abs_vec(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

pub fn random_complex<R: Rng>(rng: &mut R) -> C {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_sum<R: Rng>(rng: &mut R, n: usize, max_terms: usize) -> PauliSum {
    let k = rng.gen_range(1..=max_terms);
    let terms: Vec<PauliTerm> = (0..k)
        .map(|_| {
            let x = rng.gen_range(0..1u64 << n);
            let z = rng.gen_range(0..1u64 << n);
            PauliTerm::new(n, x, z, random_complex(rng)).unwrap()
        })
        .collect();
    PauliSum::from_terms(n, terms).unwrap()
}

pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> StateVector {
    let mut amps: Vec<C> = (0..1usize << n).map(|_| random_complex(rng)).collect();
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amps.iter_mut().for_each(|a| *a /= norm);
    StateVector::from_amplitudes(n, amps).unwrap()
}

pub fn as_dvector(amps: &[C]) -> DVector<C> {
    DVector::from_column_slice(amps)
}

/// Per-qubit commutation of the letters, read off the dense 2×2 factors.
pub fn qwc_oracle(a: &PauliTerm, b: &PauliTerm) -> bool {
    (0..a.n_qubits()).all(|q| {
        let (ma, mb) = (letter_matrix(a.letter(q)), letter_matrix(b.letter(q)));
        max_abs(&(&ma * &mb - &mb * &ma)) < 1e-15
    })
}

/// Dense JW image of a single ladder operator; occupied is `|1⟩`.
pub fn dense_ladder(n_modes: usize, mode: usize, creation: bool) -> DMatrix<C> {
    let (o, z) = (c(1.0, 0.0), c(0.0, 0.0));
    let lower = DMatrix::from_row_slice(2, 2, &[z, o, z, z]);
    let op = if creation { lower.adjoint() } else { lower };
    let factors: Vec<_> = (0..n_modes)
        .map(|q| match q.cmp(&mode) {
            std::cmp::Ordering::Less => letter_matrix(Pauli::Z),
            std::cmp::Ordering::Equal => op.clone(),
            std::cmp::Ordering::Greater => letter_matrix(Pauli::I),
        })
        .collect();
    kron_qubits(&factors)
}
