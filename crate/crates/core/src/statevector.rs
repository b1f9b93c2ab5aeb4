//! Dense statevector simulation over the bit-mask Pauli representation.
//!
//! Basis index convention: qubit `q` is bit `q` of the index (qubit 0 least
//! significant), matching [`crate::pauli::to_dense_matrix`].

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::pauli::{i_pow, PauliSum};

/// Registers up to this size are diagonalized densely; larger ones use Lanczos.
pub const DENSE_DIAG_CAP: usize = 10;
/// Hard upper bound for [`exact_ground_energy`].
pub const EXACT_DIAG_CAP: usize = 16;

const TAYLOR_TOL: f64 = 1e-14;
const TAYLOR_MAX_ORDER: usize = 64;
const RENORM_DRIFT: f64 = 1e-12;
const PAR_THRESHOLD: usize = 1 << 12;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes after checking length and normalization (1e-10).
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::validation(
                "amplitudes",
                format!("expected {} entries, got {}", 1usize << n_qubits, amplitudes.len()),
            ));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::validation("amplitudes", format!("norm {norm} is not 1")));
        }
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn basis_state(n_qubits: usize, index: usize) -> Result<Self> {
        if n_qubits > EXACT_DIAG_CAP + 8 {
            return Err(Error::TooManyQubits(n_qubits, EXACT_DIAG_CAP + 8));
        }
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(Error::validation("basis index", format!("{index} >= {dim}")));
        }
        let mut amplitudes = vec![Complex64::default(); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self {
            n_qubits,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨self|other⟩`
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }
}

/// Computational-basis state with the occupied spin-orbitals set to `|1⟩`.
pub fn hartree_fock_state(n_qubits: usize, occupation: &[bool]) -> Result<StateVector> {
    if occupation.len() != n_qubits {
        return Err(Error::validation(
            "occupation",
            format!("length {} does not match {n_qubits} qubits", occupation.len()),
        ));
    }
    let index = occupation
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .fold(0usize, |acc, (q, _)| acc | 1 << q);
    StateVector::basis_state(n_qubits, index)
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    if a.len() >= PAR_THRESHOLD {
        a.par_iter().zip(b.par_iter()).map(|(x, y)| x.conj() * y).sum()
    } else {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    }
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `out += s·v`, term by term: `P(x,z)|b⟩ = i^{|x&z|} (−1)^{|z&b|} |b⊕x⟩`.
fn apply_into(s: &PauliSum, v: &[Complex64], out: &mut [Complex64]) {
    let dim = v.len();
    let terms: Vec<(usize, usize, Complex64)> = s
        .raw_terms()
        .map(|((x, z), c)| (x as usize, z as usize, c * i_pow((x & z).count_ones())))
        .collect();
    let kernel = |target: usize| -> Complex64 {
        let mut acc = Complex64::default();
        for &(x, z, phase) in &terms {
            let b = target ^ x;
            let amp = v[b];
            if (z & b).count_ones() & 1 == 1 {
                acc -= phase * amp;
            } else {
                acc += phase * amp;
            }
        }
        acc
    };
    if dim >= PAR_THRESHOLD {
        out.par_iter_mut()
            .enumerate()
            .for_each(|(t, o)| *o += kernel(t));
    } else {
        for (t, o) in out.iter_mut().enumerate() {
            *o += kernel(t);
        }
    }
}

fn check_dims(s: &PauliSum, n: usize) -> Result<()> {
    if s.n_qubits() != n {
        return Err(Error::Dimension {
            left: s.n_qubits(),
            right: n,
        });
    }
    Ok(())
}

pub(crate) fn apply_raw(s: &PauliSum, v: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); v.len()];
    apply_into(s, v, &mut out);
    out
}

/// `s·v` as an unnormalized amplitude array.
pub fn apply_pauli_sum(s: &PauliSum, v: &StateVector) -> Result<Vec<Complex64>> {
    check_dims(s, v.n_qubits)?;
    Ok(apply_raw(s, &v.amplitudes))
}

/// `e^{θ·g}·v` for an anti-Hermitian `g`.
///
/// A single-string generator `c·P` uses `cos(θ|c|) + sin(θ|c|)·(c/|c|)·P`.
/// Otherwise the Taylor series is summed in sub-steps with `|θ|·‖g‖₁ ≤ 1` each,
/// every sub-step truncated once the next term's norm drops below 1e-14.
pub fn apply_exponential(g: &PauliSum, theta: f64, v: &StateVector) -> Result<StateVector> {
    check_dims(g, v.n_qubits)?;
    let amplitudes = exp_raw(g, theta, &v.amplitudes)?;
    Ok(StateVector {
        n_qubits: v.n_qubits,
        amplitudes,
    })
}

pub(crate) fn exp_raw(g: &PauliSum, theta: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    if theta == 0.0 || g.is_empty() {
        return Ok(v.to_vec());
    }
    let mut out = if g.len() == 1 {
        let ((x, z), c) = g.raw_terms().next().expect("one term");
        let mag = c.norm();
        let unit = PauliSum::from_terms(
            g.n_qubits(),
            [crate::pauli::PauliTerm::new(g.n_qubits(), x, z, c / mag)?],
        )?;
        let rotated = apply_raw(&unit, v);
        let (s, co) = (theta * mag).sin_cos();
        v.iter()
            .zip(&rotated)
            .map(|(a, b)| a * co + b * s)
            .collect::<Vec<_>>()
    } else {
        let steps = (theta.abs() * g.one_norm()).ceil().max(1.0) as usize;
        let h = theta / steps as f64;
        let mut cur = v.to_vec();
        for _ in 0..steps {
            cur = taylor_step(g, h, &cur)?;
        }
        cur
    };
    // unitary: the output norm must match the input norm
    let (n, v_norm) = (norm(&out), norm(v));
    if (n - v_norm).abs() > RENORM_DRIFT * v_norm.max(1.0) && n > 0.0 {
        let scale = v_norm / n;
        out.iter_mut().for_each(|a| *a *= scale);
    }
    Ok(out)
}

fn taylor_step(g: &PauliSum, h: f64, v: &[Complex64]) -> Result<Vec<Complex64>> {
    let mut sum = v.to_vec();
    let mut term = v.to_vec();
    for k in 1..=TAYLOR_MAX_ORDER {
        let mut next = apply_raw(g, &term);
        let f = h / k as f64;
        next.iter_mut().for_each(|a| *a *= f);
        for (s, a) in sum.iter_mut().zip(&next) {
            *s += a;
        }
        if norm(&next) < TAYLOR_TOL {
            return Ok(sum);
        }
        term = next;
    }
    Err(Error::SeriesDiverged(TAYLOR_MAX_ORDER))
}

/// `Re⟨v|s|v⟩`, rejecting results with an imaginary part above 1e-9.
pub fn expectation(s: &PauliSum, v: &StateVector) -> Result<f64> {
    check_dims(s, v.n_qubits)?;
    let sv = apply_raw(s, &v.amplitudes);
    let e = inner(&v.amplitudes, &sv);
    if e.im.abs() >= 1e-9 {
        return Err(Error::NotHermitian(e.im));
    }
    Ok(e.re)
}

/// Mean and variance of a Hermitian `s` in `v`, sharing one application of `s`.
///
/// `⟨s²⟩ = ‖s v‖²` for Hermitian `s`.
pub fn mean_and_variance(s: &PauliSum, v: &StateVector) -> Result<(f64, f64)> {
    check_dims(s, v.n_qubits)?;
    let sv = apply_raw(s, &v.amplitudes);
    let e = inner(&v.amplitudes, &sv);
    if e.im.abs() >= 1e-9 {
        return Err(Error::NotHermitian(e.im));
    }
    let second = norm(&sv).powi(2);
    let var = second - e.re * e.re;
    let var = if var < 0.0 && var > -1e-12 { 0.0 } else { var };
    Ok((e.re, var))
}

/// `⟨s²⟩ − ⟨s⟩²`, clamped to 0 within 1e-12.
pub fn variance(s: &PauliSum, v: &StateVector) -> Result<f64> {
    mean_and_variance(s, v).map(|(_, var)| var)
}

/// Lowest eigenvalue of `h`: dense up to [`DENSE_DIAG_CAP`] qubits, Lanczos beyond.
pub fn exact_ground_energy(h: &PauliSum) -> Result<f64> {
    let n = h.n_qubits();
    if n > EXACT_DIAG_CAP {
        return Err(Error::TooManyQubits(n, EXACT_DIAG_CAP));
    }
    if n <= DENSE_DIAG_CAP {
        dense_ground_energy(h)
    } else {
        lanczos_ground_energy(h, 1e-9, 400)
    }
}

fn dense_ground_energy(h: &PauliSum) -> Result<f64> {
    let dim = 1usize << h.n_qubits();
    let mut m = DMatrix::<Complex64>::zeros(dim, dim);
    let mut e = vec![Complex64::default(); dim];
    for col in 0..dim {
        e[col] = Complex64::new(1.0, 0.0);
        let hc = apply_raw(h, &e);
        for (row, val) in hc.into_iter().enumerate() {
            m[(row, col)] = val;
        }
        e[col] = Complex64::default();
    }
    let eig = SymmetricEigen::new(m);
    Ok(eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min))
}

/// Lanczos with full reorthogonalization from a fixed pseudo-random start.
///
/// Stops when the Ritz residual `β_k·|y_k|` falls below `tol`.
pub fn lanczos_ground_energy(h: &PauliSum, tol: f64, max_iter: usize) -> Result<f64> {
    let dim = 1usize << h.n_qubits();
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_705);
    let mut q: Vec<Complex64> = (0..dim)
        .map(|_| {
            Complex64::new(
                StandardNormal.sample(&mut rng),
                StandardNormal.sample(&mut rng),
            )
        })
        .collect();
    let n0 = norm(&q);
    q.iter_mut().for_each(|a| *a /= n0);

    let mut basis: Vec<Vec<Complex64>> = vec![q];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let max_iter = max_iter.min(dim);
    let mut best = f64::INFINITY;

    for k in 0..max_iter {
        let mut w = apply_raw(h, &basis[k]);
        let alpha = inner(&basis[k], &w).re;
        alphas.push(alpha);
        // two passes of Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let proj = inner(b, &w);
                w.iter_mut().zip(b).for_each(|(wi, bi)| *wi -= proj * bi);
            }
        }
        let beta = norm(&w);

        let m = alphas.len();
        let mut t = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            t[(i, i)] = alphas[i];
            if i + 1 < m {
                t[(i, i + 1)] = betas[i];
                t[(i + 1, i)] = betas[i];
            }
        }
        let eig = SymmetricEigen::new(t);
        let (idx, &ritz) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        best = ritz;
        let residual = beta * eig.eigenvectors[(m - 1, idx)].abs();
        if residual < tol || beta < 1e-14 || k + 1 == max_iter {
            return Ok(best);
        }
        betas.push(beta);
        w.iter_mut().for_each(|a| *a /= beta);
        basis.push(w);
    }
    Ok(best)
}
