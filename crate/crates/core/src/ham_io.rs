//! Qubit Hamiltonian interchange format (JSON).
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "n_qubits": 4,
//!   "n_electrons": 2,
//!   "hf_occupation": [1, 1, 0, 0],
//!   "terms": [{ "pauli": "Z0 Z1", "coeff": [0.17, 0.0] }, ...],
//!   "metadata": { "molecule": "h2", "geometry": "...", "basis": "sto-3g",
//!                 "hf_energy": -1.11, "fci_energy": -1.13, "generator": "..." }
//! }
//! ```
//!
//! Pauli strings use `letter+index` tokens separated by spaces; the identity is
//! the empty string. Spin-orbitals are interleaved (α, β, α, β, …).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{PauliSum, PauliTerm};
use crate::statevector::{exact_ground_energy, EXACT_DIAG_CAP};

pub const FORMAT_VERSION: u32 = 1;

const HERMITIAN_TOL: f64 = 1e-10;
const HF_ENERGY_TOL: f64 = 1e-8;
const FCI_ENERGY_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    pub pauli: String,
    pub coeff: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub molecule: String,
    #[serde(default)]
    pub geometry: String,
    #[serde(default)]
    pub basis: String,
    pub hf_energy: f64,
    pub fci_energy: f64,
    #[serde(default)]
    pub generator: String,
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HamiltonianFile {
    pub format_version: u32,
    pub n_qubits: usize,
    pub n_electrons: usize,
    pub hf_occupation: Vec<u8>,
    pub terms: Vec<TermRecord>,
    pub metadata: Metadata,
}

impl HamiltonianFile {
    pub fn occupation(&self) -> Vec<bool> {
        self.hf_occupation.iter().map(|&b| b == 1).collect()
    }

    /// Replaces the term list with the canonical form of `h`.
    pub fn set_terms(&mut self, h: &PauliSum) {
        self.n_qubits = h.n_qubits();
        self.terms = h
            .terms()
            .map(|t| TermRecord {
                pauli: t.label(),
                coeff: [t.coefficient.re, t.coefficient.im],
            })
            .collect();
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reads, parses and validates a Hamiltonian file.
pub fn load_hamiltonian(path: impl AsRef<Path>) -> Result<(PauliSum, HamiltonianFile)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_hamiltonian(&text)
}

pub fn parse_hamiltonian(text: &str) -> Result<(PauliSum, HamiltonianFile)> {
    let file: HamiltonianFile =
        serde_json::from_str(text).map_err(|e| Error::parse("hamiltonian json", e.to_string()))?;
    let h = validate(&file)?;
    Ok((h, file))
}

/// Enforces the file invariants and returns the merged operator.
pub fn validate(file: &HamiltonianFile) -> Result<PauliSum> {
    if file.format_version != FORMAT_VERSION {
        return Err(Error::validation(
            "format_version",
            format!("unsupported version {} (expected {FORMAT_VERSION})", file.format_version),
        ));
    }
    let n = file.n_qubits;
    if n == 0 || n > crate::pauli::MAX_QUBITS {
        return Err(Error::validation("n_qubits", format!("{n} is out of range")));
    }
    if file.hf_occupation.len() != n {
        return Err(Error::validation(
            "hf_occupation",
            format!("length {} does not match n_qubits {n}", file.hf_occupation.len()),
        ));
    }
    if file.hf_occupation.iter().any(|&b| b > 1) {
        return Err(Error::validation("hf_occupation", "entries must be 0 or 1"));
    }
    let ones = file.hf_occupation.iter().filter(|&&b| b == 1).count();
    if ones != file.n_electrons {
        return Err(Error::validation(
            "hf_occupation",
            format!("{ones} occupied orbitals but n_electrons is {}", file.n_electrons),
        ));
    }

    let mut h = PauliSum::zero(n)?;
    for (i, rec) in file.terms.iter().enumerate() {
        let coeff = Complex64::new(rec.coeff[0], rec.coeff[1]);
        let t = PauliTerm::parse(n, &rec.pauli, coeff).map_err(|e| match e {
            Error::Parse { reason, .. } | Error::Validation { reason, .. } => {
                Error::validation(format!("terms[{i}].pauli"), reason)
            }
            other => other,
        })?;
        h.accumulate(t.key(), t.coefficient);
    }
    h.prune();

    if let Some(bad) = h.terms().find(|t| t.coefficient.im.abs() > HERMITIAN_TOL) {
        return Err(Error::validation(
            "terms",
            format!(
                "operator is not Hermitian: {} has imaginary coefficient {:e}",
                bad.label(),
                bad.coefficient.im
            ),
        ));
    }

    let hf = basis_expectation(&h, &file.occupation());
    if (hf - file.metadata.hf_energy).abs() > HF_ENERGY_TOL {
        return Err(Error::validation(
            "metadata.hf_energy",
            format!(
                "stored {} but the Hartree-Fock expectation is {hf}",
                file.metadata.hf_energy
            ),
        ));
    }
    Ok(h)
}

/// `⟨b|h|b⟩` for a computational basis state; only diagonal strings contribute.
pub fn basis_expectation(h: &PauliSum, occupation: &[bool]) -> f64 {
    let b = occupation
        .iter()
        .enumerate()
        .filter(|(_, &o)| o)
        .fold(0u64, |acc, (q, _)| acc | 1 << q);
    h.terms()
        .filter(|t| t.x_mask() == 0)
        .map(|t| {
            let sign = if (t.z_mask() & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            sign * t.coefficient.re
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferenceReport {
    pub stored_fci_energy: f64,
    pub computed_ground_energy: f64,
    pub difference: f64,
}

/// Recomputes the ground energy and compares it with the stored FCI value (1e-7).
pub fn verify_reference_energies(h: &PauliSum, meta: &Metadata) -> Result<ReferenceReport> {
    if h.n_qubits() > EXACT_DIAG_CAP {
        return Err(Error::TooManyQubits(h.n_qubits(), EXACT_DIAG_CAP));
    }
    let computed = exact_ground_energy(h)?;
    let report = ReferenceReport {
        stored_fci_energy: meta.fci_energy,
        computed_ground_energy: computed,
        difference: computed - meta.fci_energy,
    };
    if report.difference.abs() > FCI_ENERGY_TOL {
        return Err(Error::validation(
            "metadata.fci_energy",
            format!("stored {} but exact diagonalization gives {computed}", meta.fci_energy),
        ));
    }
    Ok(report)
}

/// Path of a Hamiltonian shipped in the repository's `data/` directory.
pub fn bundled_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(format!("{name}.json"))
}
