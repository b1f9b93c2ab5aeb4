//! Candidate generator pools: fermionic UCCSD, Z-stripped qubit strings, and
//! qubit excitations.
//!
//! Spin-orbitals are interleaved, so orbital `p` has spin `p % 2`. The
//! occupied/virtual split comes from the Hartree–Fock occupation.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{jordan_wigner, FermionOperator, Ladder, PauliSum, PauliTerm};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PoolKind {
    Uccsd,
    Qubit,
    #[serde(rename = "qe")]
    QubitExcitation,
}

impl PoolKind {
    pub const ALL: [PoolKind; 3] = [PoolKind::Uccsd, PoolKind::Qubit, PoolKind::QubitExcitation];

    pub fn as_str(self) -> &'static str {
        match self {
            PoolKind::Uccsd => "uccsd",
            PoolKind::Qubit => "qubit",
            PoolKind::QubitExcitation => "qe",
        }
    }
}

impl fmt::Display for PoolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PoolKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uccsd" => Ok(PoolKind::Uccsd),
            "qubit" => Ok(PoolKind::Qubit),
            "qe" | "qubit_excitation" | "qubit-excitation" => Ok(PoolKind::QubitExcitation),
            other => Err(Error::parse("pool kind", format!("unknown pool {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoolSpec {
    pub kind: PoolKind,
    occupation: Vec<bool>,
}

impl PoolSpec {
    /// Occupies the lowest `n_electrons` spin-orbitals.
    pub fn new(kind: PoolKind, n_spin_orbitals: usize, n_electrons: usize) -> Result<Self> {
        if n_electrons > n_spin_orbitals {
            return Err(Error::Pool(format!(
                "{n_electrons} electrons do not fit in {n_spin_orbitals} spin-orbitals"
            )));
        }
        Self::with_occupation(kind, (0..n_spin_orbitals).map(|p| p < n_electrons).collect())
    }

    pub fn with_occupation(kind: PoolKind, occupation: Vec<bool>) -> Result<Self> {
        if occupation.is_empty() {
            return Err(Error::Pool("no spin-orbitals".into()));
        }
        if !occupation.iter().any(|&o| o) {
            return Err(Error::Pool("no electrons".into()));
        }
        Ok(Self { kind, occupation })
    }

    pub fn n_spin_orbitals(&self) -> usize {
        self.occupation.len()
    }

    pub fn n_electrons(&self) -> usize {
        self.occupation.iter().filter(|&&o| o).count()
    }

    pub fn occupation(&self) -> &[bool] {
        &self.occupation
    }

    fn occupied(&self) -> Vec<usize> {
        (0..self.occupation.len()).filter(|&p| self.occupation[p]).collect()
    }

    fn virtuals(&self) -> Vec<usize> {
        (0..self.occupation.len()).filter(|&p| !self.occupation[p]).collect()
    }
}

/// A pool element: an anti-Hermitian operator with a stable index.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub id: usize,
    pub label: String,
    pub operator: PauliSum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Excitation {
    Single { i: usize, a: usize },
    Double { i: usize, j: usize, a: usize, b: usize },
}

impl Excitation {
    fn label(&self) -> String {
        match *self {
            Excitation::Single { i, a } => format!("{i}->{a}"),
            Excitation::Double { i, j, a, b } => format!("{i},{j}->{a},{b}"),
        }
    }
}

fn spin(p: usize) -> usize {
    p % 2
}

/// Spin-conserving singles by `(i, a)`, then doubles by `(i, j, a, b)`.
fn excitations(spec: &PoolSpec) -> Vec<Excitation> {
    let occ = spec.occupied();
    let virt = spec.virtuals();
    let mut out = Vec::new();
    for &i in &occ {
        for &a in &virt {
            if spin(i) == spin(a) {
                out.push(Excitation::Single { i, a });
            }
        }
    }
    for (x, &i) in occ.iter().enumerate() {
        for &j in &occ[x + 1..] {
            for (y, &a) in virt.iter().enumerate() {
                for &b in &virt[y + 1..] {
                    if spin(i) + spin(j) == spin(a) + spin(b) {
                        out.push(Excitation::Double { i, j, a, b });
                    }
                }
            }
        }
    }
    out
}

/// `t − t†` for the excitation written as a ladder product.
fn fermionic_generator(n: usize, ex: Excitation) -> Result<FermionOperator> {
    let one = Complex64::new(1.0, 0.0);
    let t = match ex {
        Excitation::Single { i, a } => vec![Ladder::create(a), Ladder::annihilate(i)],
        Excitation::Double { i, j, a, b } => vec![
            Ladder::create(a),
            Ladder::create(b),
            Ladder::annihilate(i),
            Ladder::annihilate(j),
        ],
    };
    let t_dag: Vec<Ladder> = t.iter().rev().map(|l| l.adjoint()).collect();
    FermionOperator::new(n).with(t, one)?.with(t_dag, -one)
}

/// `Q̂_p = (X_p + iY_p)/2`, `Q̂†_p = (X_p − iY_p)/2`, with no parity string.
fn qubit_ladder(n: usize, l: Ladder) -> Result<PauliSum> {
    let p = l.mode;
    let sign = if l.creation { -1.0 } else { 1.0 };
    PauliSum::from_terms(
        n,
        [
            PauliTerm::new(n, 1 << p, 0, Complex64::new(0.5, 0.0))?,
            PauliTerm::new(n, 1 << p, 1 << p, Complex64::new(0.0, 0.5 * sign))?,
        ],
    )
}

fn qubit_excitation_generator(n: usize, ex: Excitation) -> Result<PauliSum> {
    let f = fermionic_generator(n, ex)?;
    let mut out = PauliSum::zero(n)?;
    for (ladders, coeff) in f.products() {
        let mut prod = PauliSum::identity(n, *coeff)?;
        for &l in ladders {
            prod = prod.mul(&qubit_ladder(n, l)?)?;
        }
        out = out.add(&prod)?;
    }
    Ok(out)
}

pub fn build_uccsd_pool(spec: &PoolSpec) -> Result<Vec<Generator>> {
    expect_kind(spec, PoolKind::Uccsd)?;
    let n = spec.n_spin_orbitals();
    let mut pool = Vec::new();
    for ex in excitations(spec) {
        let operator = jordan_wigner(&fermionic_generator(n, ex)?)?;
        if operator.is_empty() {
            continue;
        }
        pool.push(Generator {
            id: pool.len(),
            label: ex.label(),
            operator,
        });
    }
    non_empty(pool)
}

/// Z-stripped strings of the Jordan–Wigner UCCSD generators, each as `i·P`.
pub fn build_qubit_pool(spec: &PoolSpec) -> Result<Vec<Generator>> {
    expect_kind(spec, PoolKind::Qubit)?;
    let n = spec.n_spin_orbitals();
    let uccsd = build_uccsd_pool(&PoolSpec {
        kind: PoolKind::Uccsd,
        occupation: spec.occupation.clone(),
    })?;
    // ordered by (weight, x, z)
    let mut strings: BTreeSet<(u32, u64, u64)> = BTreeSet::new();
    for g in &uccsd {
        for t in g.operator.terms() {
            let x = t.x_mask();
            let z = t.z_mask() & x;
            if (x & z).count_ones() % 2 == 0 {
                return Err(Error::EvenYCount {
                    label: crate::pauli::pauli_label(n, x, z),
                });
            }
            strings.insert((x.count_ones(), x, z));
        }
    }
    let pool = strings
        .into_iter()
        .enumerate()
        .map(|(id, (_, x, z))| {
            let term = PauliTerm::new(n, x, z, Complex64::new(0.0, 1.0))?;
            Ok(Generator {
                id,
                label: term.label(),
                operator: PauliSum::from_terms(n, [term])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    non_empty(pool)
}

pub fn build_qubit_excitation_pool(spec: &PoolSpec) -> Result<Vec<Generator>> {
    expect_kind(spec, PoolKind::QubitExcitation)?;
    let n = spec.n_spin_orbitals();
    let mut pool = Vec::new();
    for ex in excitations(spec) {
        let operator = qubit_excitation_generator(n, ex)?;
        if operator.is_empty() {
            continue;
        }
        pool.push(Generator {
            id: pool.len(),
            label: format!("q{}", ex.label()),
            operator,
        });
    }
    non_empty(pool)
}

pub fn build_pool(spec: &PoolSpec) -> Result<Vec<Generator>> {
    match spec.kind {
        PoolKind::Uccsd => build_uccsd_pool(spec),
        PoolKind::Qubit => build_qubit_pool(spec),
        PoolKind::QubitExcitation => build_qubit_excitation_pool(spec),
    }
}

fn expect_kind(spec: &PoolSpec, kind: PoolKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Pool(format!("expected a {kind} spec, got {}", spec.kind)));
    }
    Ok(())
}

fn non_empty(pool: Vec<Generator>) -> Result<Vec<Generator>> {
    if pool.is_empty() {
        return Err(Error::Pool("no excitations from occupied to virtual orbitals".into()));
    }
    Ok(pool)
}
