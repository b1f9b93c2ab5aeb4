//! Adaptive variational eigensolver simulator with best-arm-identification
//! generator selection.
//!
//! Each ADAPT iteration estimates the energy gradients `⟨[H, G_i]⟩` of a pool of
//! generators from sampled qubit-wise commuting fragments. The selection step
//! is either the fixed-precision baseline or Successive Elimination, which
//! spends shots in rounds of increasing precision and discards candidates whose
//! confidence interval falls below the leader's.

pub mod bench;
pub mod driver;
pub mod error;
pub mod ham_io;
pub mod measurement;
pub mod pauli;
pub mod pools;
pub mod selection;
pub mod statevector;
pub mod vqe;

pub use driver::{run_adapt, AdaptTrace, Policy, RunConfig, CHEMICAL_ACCURACY};
pub use error::{Error, Result};
pub use pauli::{PauliSum, PauliTerm};
pub use pools::{Generator, PoolKind};
