//! Pauli strings in symplectic bit-mask form and their linear combinations.
//!
//! Qubit `q` carries the letter given by bit `q` of the `(x, z)` masks:
//! `(0,0) = I`, `(1,0) = X`, `(1,1) = Y`, `(0,1) = Z`. The operator stored for a
//! key is the plain tensor product of those letters, so every key is Hermitian
//! and a sum is Hermitian exactly when all of its coefficients are real.

mod dense;
mod fermion;

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use dense::{to_dense_matrix, DENSE_ORACLE_CAP};
pub use fermion::{jordan_wigner, FermionOperator, Ladder};

/// Coefficients with a smaller magnitude are removed from every [`PauliSum`].
pub const DROP_TOLERANCE: f64 = 1e-12;

/// Largest register a bit-mask key can address.
pub const MAX_QUBITS: usize = 64;

const I_POWERS: [Complex64; 4] = [
    Complex64::new(1.0, 0.0),
    Complex64::new(0.0, 1.0),
    Complex64::new(-1.0, 0.0),
    Complex64::new(0.0, -1.0),
];

#[inline]
pub(crate) fn i_pow(k: u32) -> Complex64 {
    I_POWERS[(k & 3) as usize]
}

/// Single-qubit Pauli letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

fn check_width(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 {
        return Err(Error::Config("register must have at least one qubit".into()));
    }
    if n_qubits > MAX_QUBITS {
        return Err(Error::TooManyQubits(n_qubits, MAX_QUBITS));
    }
    Ok(())
}

#[inline]
fn width_mask(n_qubits: usize) -> u64 {
    if n_qubits >= 64 {
        u64::MAX
    } else {
        (1u64 << n_qubits) - 1
    }
}

/// Phase of `P(x1,z1) · P(x2,z2)` relative to `P(x1^x2, z1^z2)`, as a power of `i`.
///
/// Uses `P(x,z) = i^{|x&z|} X^x Z^z` and `Z^z X^x = (-1)^{|z&x|} X^x Z^z`.
#[inline]
pub(crate) fn product_phase(x1: u64, z1: u64, x2: u64, z2: u64) -> u32 {
    let a = (x1 & z1).count_ones();
    let b = (x2 & z2).count_ones();
    let c = ((x1 ^ x2) & (z1 ^ z2)).count_ones();
    let swap = 2 * (z1 & x2).count_ones();
    // a + b - c + swap, kept nonnegative mod 4
    (a + b + swap + 4 * 64 - c) & 3
}

/// One weighted Pauli string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    n_qubits: usize,
    x_mask: u64,
    z_mask: u64,
    pub coefficient: Complex64,
}

impl PauliTerm {
    pub fn new(n_qubits: usize, x_mask: u64, z_mask: u64, coefficient: Complex64) -> Result<Self> {
        check_width(n_qubits)?;
        let extra = (x_mask | z_mask) & !width_mask(n_qubits);
        if extra != 0 {
            return Err(Error::validation(
                "pauli masks",
                format!("bits set above qubit {}", n_qubits - 1),
            ));
        }
        Ok(Self {
            n_qubits,
            x_mask,
            z_mask,
            coefficient,
        })
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Result<Self> {
        Self::new(n_qubits, 0, 0, coefficient)
    }

    /// Builds a term from `(qubit, letter)` pairs. Repeated qubits are rejected.
    pub fn from_letters(
        n_qubits: usize,
        letters: &[(usize, Pauli)],
        coefficient: Complex64,
    ) -> Result<Self> {
        check_width(n_qubits)?;
        let (mut x, mut z) = (0u64, 0u64);
        let mut seen = 0u64;
        for &(q, p) in letters {
            if q >= n_qubits {
                return Err(Error::validation(
                    "pauli string",
                    format!("qubit index {q} out of range for {n_qubits} qubits"),
                ));
            }
            if seen >> q & 1 == 1 {
                return Err(Error::validation(
                    "pauli string",
                    format!("qubit {q} appears twice"),
                ));
            }
            seen |= 1 << q;
            let (bx, bz) = p.bits();
            x |= (bx as u64) << q;
            z |= (bz as u64) << q;
        }
        Self::new(n_qubits, x, z, coefficient)
    }

    /// Parses the compact `"X0 Y3 Z5"` token form; the empty string is the identity.
    pub fn parse(n_qubits: usize, text: &str, coefficient: Complex64) -> Result<Self> {
        let mut letters = Vec::new();
        for tok in text.split_whitespace() {
            let mut chars = tok.chars();
            let letter = match chars.next() {
                Some('X') => Pauli::X,
                Some('Y') => Pauli::Y,
                Some('Z') => Pauli::Z,
                Some('I') => Pauli::I,
                _ => return Err(Error::parse("pauli string", format!("bad token {tok:?}"))),
            };
            let q: usize = chars
                .as_str()
                .parse()
                .map_err(|_| Error::parse("pauli string", format!("bad qubit index in {tok:?}")))?;
            if letter != Pauli::I {
                letters.push((q, letter));
            } else if q >= n_qubits {
                return Err(Error::validation(
                    "pauli string",
                    format!("qubit index {q} out of range for {n_qubits} qubits"),
                ));
            }
        }
        Self::from_letters(n_qubits, &letters, coefficient)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn x_mask(&self) -> u64 {
        self.x_mask
    }

    pub fn z_mask(&self) -> u64 {
        self.z_mask
    }

    pub fn key(&self) -> (u64, u64) {
        (self.x_mask, self.z_mask)
    }

    pub fn letter(&self, qubit: usize) -> Pauli {
        Pauli::from_bits(self.x_mask >> qubit & 1 == 1, self.z_mask >> qubit & 1 == 1)
    }

    /// Number of non-identity letters.
    pub fn weight(&self) -> u32 {
        (self.x_mask | self.z_mask).count_ones()
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    pub fn is_identity(&self) -> bool {
        self.x_mask == 0 && self.z_mask == 0
    }

    /// Same operator content, ignoring coefficients.
    pub fn same_string(&self, other: &PauliTerm) -> bool {
        self.n_qubits == other.n_qubits && self.key() == other.key()
    }

    /// Token form without the coefficient, e.g. `"X0 Z1 Y2"`.
    pub fn label(&self) -> String {
        pauli_label(self.n_qubits, self.x_mask, self.z_mask)
    }
}

pub(crate) fn pauli_label(n_qubits: usize, x: u64, z: u64) -> String {
    let mut out = String::new();
    for q in 0..n_qubits {
        let p = Pauli::from_bits(x >> q & 1 == 1, z >> q & 1 == 1);
        if p != Pauli::I {
            if !out.is_empty() {
                out.push(' ');
            }
            out.push(p.symbol());
            out.push_str(&q.to_string());
        }
    }
    out
}

impl fmt::Display for PauliTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = self.label();
        write!(
            f,
            "({}{:+}i) [{}]",
            self.coefficient.re,
            self.coefficient.im,
            if label.is_empty() { "I" } else { &label }
        )
    }
}

fn check_same(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::Dimension { left: a, right: b });
    }
    Ok(())
}

/// Operator product `a·b` as a single term.
pub fn multiply(a: &PauliTerm, b: &PauliTerm) -> Result<PauliTerm> {
    check_same(a.n_qubits, b.n_qubits)?;
    let phase = product_phase(a.x_mask, a.z_mask, b.x_mask, b.z_mask);
    Ok(PauliTerm {
        n_qubits: a.n_qubits,
        x_mask: a.x_mask ^ b.x_mask,
        z_mask: a.z_mask ^ b.z_mask,
        coefficient: a.coefficient * b.coefficient * i_pow(phase),
    })
}

/// True when, on every qubit, the letters agree or one of them is the identity.
pub fn qubitwise_commutes(a: &PauliTerm, b: &PauliTerm) -> Result<bool> {
    check_same(a.n_qubits, b.n_qubits)?;
    Ok(qwc_masks(a.key(), b.key()))
}

#[inline]
pub(crate) fn qwc_masks((xa, za): (u64, u64), (xb, zb): (u64, u64)) -> bool {
    let overlap = (xa | za) & (xb | zb);
    ((xa ^ xb) | (za ^ zb)) & overlap == 0
}

/// Full (not qubit-wise) commutation of two Pauli strings.
#[inline]
pub(crate) fn strings_commute((xa, za): (u64, u64), (xb, zb): (u64, u64)) -> bool {
    ((xa & zb).count_ones() + (za & xb).count_ones()) % 2 == 0
}

/// Linear combination of Pauli strings over a fixed register.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSum {
    n_qubits: usize,
    terms: BTreeMap<(u64, u64), Complex64>,
}

impl PauliSum {
    pub fn zero(n_qubits: usize) -> Result<Self> {
        check_width(n_qubits)?;
        Ok(Self {
            n_qubits,
            terms: BTreeMap::new(),
        })
    }

    pub fn identity(n_qubits: usize, coefficient: Complex64) -> Result<Self> {
        let mut s = Self::zero(n_qubits)?;
        s.add_term(&PauliTerm::identity(n_qubits, coefficient)?)?;
        Ok(s)
    }

    pub fn from_terms<I>(n_qubits: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = PauliTerm>,
    {
        let mut s = Self::zero(n_qubits)?;
        for t in terms {
            check_same(n_qubits, t.n_qubits)?;
            s.accumulate(t.key(), t.coefficient);
        }
        s.prune();
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical key order.
    pub fn terms(&self) -> impl Iterator<Item = PauliTerm> + '_ {
        self.terms.iter().map(move |(&(x, z), &c)| PauliTerm {
            n_qubits: self.n_qubits,
            x_mask: x,
            z_mask: z,
            coefficient: c,
        })
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = ((u64, u64), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coefficient(&self, x_mask: u64, z_mask: u64) -> Complex64 {
        self.terms
            .get(&(x_mask, z_mask))
            .copied()
            .unwrap_or_default()
    }

    #[inline]
    pub(crate) fn accumulate(&mut self, key: (u64, u64), c: Complex64) {
        *self.terms.entry(key).or_default() += c;
    }

    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= DROP_TOLERANCE);
    }

    pub fn add_term(&mut self, t: &PauliTerm) -> Result<()> {
        check_same(self.n_qubits, t.n_qubits)?;
        let key = t.key();
        self.accumulate(key, t.coefficient);
        if self.terms[&key].norm() < DROP_TOLERANCE {
            self.terms.remove(&key);
        }
        Ok(())
    }

    pub fn scale(&self, factor: Complex64) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c *= factor;
        }
        out.prune();
        out
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        check_same(self.n_qubits, other.n_qubits)?;
        let mut out = self.clone();
        for (k, c) in other.raw_terms() {
            out.accumulate(k, c);
        }
        out.prune();
        Ok(out)
    }

    pub fn sub(&self, other: &PauliSum) -> Result<PauliSum> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &PauliSum) -> Result<PauliSum> {
        check_same(self.n_qubits, other.n_qubits)?;
        let mut out = PauliSum::zero(self.n_qubits)?;
        for (&(x1, z1), &c1) in &self.terms {
            for (&(x2, z2), &c2) in &other.terms {
                let phase = product_phase(x1, z1, x2, z2);
                out.accumulate((x1 ^ x2, z1 ^ z2), c1 * c2 * i_pow(phase));
            }
        }
        out.prune();
        Ok(out)
    }

    /// Hermitian conjugate.
    pub fn adjoint(&self) -> PauliSum {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.conj();
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.im.abs() <= tol)
    }

    pub fn is_anti_hermitian(&self, tol: f64) -> bool {
        self.terms.values().all(|c| c.re.abs() <= tol)
    }

    /// Sum of coefficient magnitudes; an upper bound on the operator norm.
    pub fn one_norm(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).sum()
    }

    /// Largest coefficient difference against another sum on the same register.
    pub fn max_abs_diff(&self, other: &PauliSum) -> Result<f64> {
        check_same(self.n_qubits, other.n_qubits)?;
        let mut worst: f64 = 0.0;
        for (k, c) in self.raw_terms() {
            worst = worst.max((c - other.coefficient(k.0, k.1)).norm());
        }
        for (k, c) in other.raw_terms() {
            if !self.terms.contains_key(&k) {
                worst = worst.max(c.norm());
            }
        }
        Ok(worst)
    }
}

/// `ab − ba`. Only anticommuting string pairs contribute, each with twice the product.
pub fn commutator(a: &PauliSum, b: &PauliSum) -> Result<PauliSum> {
    check_same(a.n_qubits, b.n_qubits)?;
    let mut out = PauliSum::zero(a.n_qubits)?;
    for (&(x1, z1), &c1) in &a.terms {
        for (&(x2, z2), &c2) in &b.terms {
            if strings_commute((x1, z1), (x2, z2)) {
                continue;
            }
            let phase = product_phase(x1, z1, x2, z2);
            out.accumulate((x1 ^ x2, z1 ^ z2), 2.0 * c1 * c2 * i_pow(phase));
        }
    }
    out.prune();
    Ok(out)
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}
