//! The outer ADAPT loop: fragment the commutators, select a generator, append
//! it with a zero angle, re-optimize every angle, record, repeat.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ham_io::{load_hamiltonian, HamiltonianFile};
use crate::measurement::{
    sorted_insertion, Charging, FragmentGroup, ShotLedger, ShotSampler,
};
use crate::pauli::{commutator, PauliSum};
use crate::pools::{build_pool, Generator, PoolKind, PoolSpec};
use crate::selection::{
    naive_select, successive_elimination_select, Candidate, SeConfig, SelectionResult,
};
use crate::statevector::{exact_ground_energy, expectation, hartree_fock_state, StateVector};
use crate::vqe::{ansatz_state, optimize, Ansatz};

/// Chemical accuracy in Hartree.
pub const CHEMICAL_ACCURACY: f64 = 1.59e-3;

const STALL_ANGLE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Naive,
    Se,
}

impl Policy {
    pub const BOTH: [Policy; 2] = [Policy::Naive, Policy::Se];

    pub fn as_str(self) -> &'static str {
        match self {
            Policy::Naive => "naive",
            Policy::Se => "se",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "naive" => Ok(Policy::Naive),
            "se" | "successive_elimination" | "successive-elimination" => Ok(Policy::Se),
            other => Err(Error::parse("policy", format!("unknown policy {other:?}"))),
        }
    }
}

/// Target precision used for each pool unless overridden.
pub fn default_epsilon(pool: PoolKind) -> f64 {
    match pool {
        PoolKind::Qubit => 0.5e-3,
        PoolKind::Uccsd | PoolKind::QubitExcitation => 1.0e-3,
    }
}

fn default_true() -> bool {
    true
}

fn default_max_iters() -> usize {
    30
}

fn default_stop_energy() -> f64 {
    CHEMICAL_ACCURACY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub hamiltonian_path: PathBuf,
    pub pool: PoolKind,
    pub policy: Policy,
    pub epsilon: f64,
    /// Elimination schedule; the default one for `pool` when absent. Its
    /// `epsilon` is always replaced by the run's `epsilon`.
    #[serde(default)]
    pub se: Option<SeConfig>,
    #[serde(default = "default_max_iters")]
    pub max_adapt_iterations: usize,
    #[serde(default = "default_stop_energy")]
    pub stop_energy_error: f64,
    /// Defaults to `2ε`.
    #[serde(default)]
    pub stop_gradient_threshold: Option<f64>,
    pub seed: u64,
    #[serde(default = "default_true")]
    pub noise: bool,
    #[serde(default)]
    pub charging: Charging,
}

impl RunConfig {
    pub fn new(hamiltonian_path: impl Into<PathBuf>, pool: PoolKind, policy: Policy, seed: u64) -> Self {
        Self {
            hamiltonian_path: hamiltonian_path.into(),
            pool,
            policy,
            epsilon: default_epsilon(pool),
            se: None,
            max_adapt_iterations: default_max_iters(),
            stop_energy_error: CHEMICAL_ACCURACY,
            stop_gradient_threshold: None,
            seed,
            noise: true,
            charging: Charging::Incremental,
        }
    }

    pub fn se_config(&self) -> SeConfig {
        let mut se = self
            .se
            .clone()
            .unwrap_or_else(|| SeConfig::standard(self.pool, self.epsilon));
        se.epsilon = self.epsilon;
        se
    }

    pub fn gradient_threshold(&self) -> f64 {
        self.stop_gradient_threshold.unwrap_or(2.0 * self.epsilon)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.policy == Policy::Se {
            self.se_config().validate()?;
        }
        Ok(())
    }
}

/// Everything about a (Hamiltonian, pool) pair that does not depend on the state.
#[derive(Debug, Clone)]
pub struct AdaptProblem {
    pub hamiltonian: PauliSum,
    pub file: HamiltonianFile,
    pub pool_kind: PoolKind,
    pub pool: Vec<Generator>,
    pub reference: StateVector,
    pub exact_energy: f64,
    /// Sorted-insertion groups of `[H, G_i]` for every pool element.
    pub groupings: Vec<Vec<PauliSum>>,
}

impl AdaptProblem {
    pub fn load(path: impl AsRef<Path>, pool_kind: PoolKind) -> Result<Self> {
        let (h, file) = load_hamiltonian(path)?;
        Self::new(h, file, pool_kind)
    }

    pub fn new(hamiltonian: PauliSum, file: HamiltonianFile, pool_kind: PoolKind) -> Result<Self> {
        let occupation = file.occupation();
        let spec = PoolSpec::with_occupation(pool_kind, occupation.clone())?;
        let pool = build_pool(&spec)?;
        let reference = hartree_fock_state(file.n_qubits, &occupation)?;
        let exact_energy = exact_ground_energy(&hamiltonian)?;
        let groupings = pool
            .par_iter()
            .map(|g| sorted_insertion(&commutator(&hamiltonian, &g.operator)?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            hamiltonian,
            file,
            pool_kind,
            pool,
            reference,
            exact_energy,
            groupings,
        })
    }

    pub fn fragment_stats(&self) -> FragmentStats {
        FragmentStats::of(self.groupings.iter().map(|g| g.len()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragmentStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub total: usize,
}

impl FragmentStats {
    fn of(counts: impl Iterator<Item = usize>) -> Self {
        let counts: Vec<usize> = counts.collect();
        let total: usize = counts.iter().sum();
        Self {
            min: counts.iter().copied().min().unwrap_or(0),
            max: counts.iter().copied().max().unwrap_or(0),
            mean: if counts.is_empty() { 0.0 } else { total as f64 / counts.len() as f64 },
            total,
        }
    }
}

/// Candidates with exact fragment statistics on `state`, one per pool element.
pub fn prepare_candidates(h: &PauliSum, pool: &[Generator], state: &StateVector) -> Result<Vec<Candidate>> {
    let groupings = pool
        .par_iter()
        .map(|g| sorted_insertion(&commutator(h, &g.operator)?))
        .collect::<Result<Vec<_>>>()?;
    candidates_from_groupings(pool, &groupings, state)
}

pub fn candidates_from_groupings(
    pool: &[Generator],
    groupings: &[Vec<PauliSum>],
    state: &StateVector,
) -> Result<Vec<Candidate>> {
    pool.par_iter()
        .zip(groupings.par_iter())
        .map(|(g, groups)| {
            // a vanishing commutator still reads out as one deterministic zero fragment
            let frags = if groups.is_empty() {
                vec![FragmentGroup {
                    terms: PauliSum::zero(state.n_qubits())?,
                    exact_mean: 0.0,
                    exact_variance: 0.0,
                }]
            } else {
                groups
                    .iter()
                    .map(|p| FragmentGroup::evaluate(p.clone(), state))
                    .collect::<Result<Vec<_>>>()?
            };
            Ok(Candidate::new(g.id, frags))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    ChemicalAccuracy,
    GradientThreshold,
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub chosen_id: Option<usize>,
    pub chosen_label: String,
    pub selection_shots: u64,
    pub cumulative_shots: u64,
    pub energy: f64,
    pub energy_error: f64,
    pub vqe_iterations: usize,
    pub vqe_converged: bool,
    pub final_gradient: f64,
    pub rounds_used: usize,
    pub survivors_per_round: Vec<usize>,
    pub repeat: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceMeta {
    pub molecule: String,
    pub n_qubits: usize,
    pub pool_size: usize,
    pub fragment_stats: FragmentStats,
    pub exact_energy: f64,
    pub hf_energy: f64,
    pub config: RunConfig,
    pub stop_reason: StopReason,
    /// Includes the shots of a final selection that did not append anything.
    pub total_selection_shots: u64,
    pub per_iteration_shots: Vec<(usize, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdaptTrace {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
    #[serde(skip)]
    pub ledger: ShotLedger,
    #[serde(skip)]
    pub final_parameters: Vec<f64>,
}

impl AdaptTrace {
    /// Cumulative selection shots at the first row below `threshold`, if any.
    pub fn shots_to_accuracy(&self, threshold: f64) -> Option<u64> {
        self.rows
            .iter()
            .find(|r| r.energy_error < threshold)
            .map(|r| r.cumulative_shots)
    }

    pub fn chosen_sequence(&self) -> Vec<usize> {
        self.rows.iter().filter_map(|r| r.chosen_id).collect()
    }
}

pub fn run_adapt(cfg: &RunConfig) -> Result<AdaptTrace> {
    cfg.validate()?;
    let problem = AdaptProblem::load(&cfg.hamiltonian_path, cfg.pool).map_err(|e| match e {
        Error::Io { .. } => e,
        other => Error::Config(format!("{}: {other}", cfg.hamiltonian_path.display())),
    })?;
    run_adapt_on(&problem, cfg)
}

/// Runs the loop on an already-loaded problem (shared across seeds and policies).
pub fn run_adapt_on(problem: &AdaptProblem, cfg: &RunConfig) -> Result<AdaptTrace> {
    cfg.validate()?;
    if problem.pool_kind != cfg.pool {
        return Err(Error::Config(format!(
            "problem was built for the {} pool, config asks for {}",
            problem.pool_kind, cfg.pool
        )));
    }
    let h = &problem.hamiltonian;
    let se = cfg.se_config();
    let mut sampler = ShotSampler::new(cfg.seed)
        .with_noise(cfg.noise)
        .with_charging(cfg.charging);
    let mut ledger = ShotLedger::new();
    let mut ansatz = Ansatz::new();
    let mut state = problem.reference.clone();

    let hf_energy = expectation(h, &state)?;
    let mut rows = vec![TraceRow {
        iteration: 0,
        chosen_id: None,
        chosen_label: String::new(),
        selection_shots: 0,
        cumulative_shots: 0,
        energy: hf_energy,
        energy_error: hf_energy - problem.exact_energy,
        vqe_iterations: 0,
        vqe_converged: true,
        final_gradient: 0.0,
        rounds_used: 0,
        survivors_per_round: Vec::new(),
        repeat: false,
    }];

    let mut stop = if rows[0].energy_error < cfg.stop_energy_error {
        Some(StopReason::ChemicalAccuracy)
    } else {
        None
    };
    let mut iteration = 0;
    while stop.is_none() {
        if iteration >= cfg.max_adapt_iterations {
            stop = Some(StopReason::MaxIterations);
            break;
        }
        iteration += 1;
        ledger.begin_iteration(iteration);
        let mut candidates = candidates_from_groupings(&problem.pool, &problem.groupings, &state)?;
        let selection: SelectionResult = match cfg.policy {
            Policy::Naive => naive_select(&mut candidates, cfg.epsilon, &mut sampler, &mut ledger)?,
            Policy::Se => successive_elimination_select(&mut candidates, &se, &mut sampler, &mut ledger)?,
        };
        // largest magnitude seen anywhere in the pool; equals the winner's under naive
        let best_seen = candidates
            .iter()
            .map(|c| c.abs_gradient_estimate)
            .fold(selection.final_gradient.abs(), f64::max);
        if best_seen < cfg.gradient_threshold() {
            stop = Some(StopReason::GradientThreshold);
            break;
        }
        let last = ansatz.generators.last().map(|g| g.id);
        let repeat = ansatz.generators.iter().any(|g| g.id == selection.chosen_id);
        if last == Some(selection.chosen_id)
            && ansatz.parameters.last().map_or(false, |t| t.abs() < STALL_ANGLE)
        {
            stop = Some(StopReason::Stalled);
            break;
        }

        let generator = problem.pool[selection.chosen_id].clone();
        let label = generator.label.clone();
        ansatz.push(generator);
        let warm = ansatz.parameters.clone();
        let outcome = optimize(&ansatz, h, &problem.reference, &warm)?;
        ansatz.parameters = outcome.optimal_parameters.clone();
        state = ansatz_state(&ansatz, &problem.reference)?;

        let energy_error = outcome.energy - problem.exact_energy;
        rows.push(TraceRow {
            iteration,
            chosen_id: Some(selection.chosen_id),
            chosen_label: label,
            selection_shots: selection.shots_spent_this_iteration,
            cumulative_shots: ledger.total_shots(),
            energy: outcome.energy,
            energy_error,
            vqe_iterations: outcome.iterations,
            vqe_converged: outcome.converged,
            final_gradient: selection.final_gradient,
            rounds_used: selection.rounds_used,
            survivors_per_round: selection.survivors_per_round,
            repeat,
        });
        if energy_error < cfg.stop_energy_error {
            stop = Some(StopReason::ChemicalAccuracy);
        }
    }

    Ok(AdaptTrace {
        meta: TraceMeta {
            molecule: problem.file.metadata.molecule.clone(),
            n_qubits: problem.file.n_qubits,
            pool_size: problem.pool.len(),
            fragment_stats: problem.fragment_stats(),
            exact_energy: problem.exact_energy,
            hf_energy,
            config: cfg.clone(),
            stop_reason: stop.expect("loop exits with a reason"),
            total_selection_shots: ledger.total_shots(),
            per_iteration_shots: ledger.per_iteration().to_vec(),
        },
        rows,
        final_parameters: ansatz.parameters,
        ledger,
    })
}
