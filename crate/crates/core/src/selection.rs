//! Generator selection policies.
//!
//! [`naive_select`] estimates every gradient to the target precision.
//! [`successive_elimination_select`] runs rounds of increasing precision over an
//! active set and drops candidate `i` once `|g_i| + R_r < M − R_r`, where `M` is
//! the largest active `|g|` in the round and `R_r = d·c_r·ε`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{
    estimate_gradient, FragmentEstimate, FragmentGroup, ShotLedger, ShotSampler,
};
use crate::pools::PoolKind;

/// A bandit arm: one pool generator with its measurable fragments.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub generator_id: usize,
    pub fragments: Vec<(FragmentGroup, FragmentEstimate)>,
    pub gradient_estimate: f64,
    pub abs_gradient_estimate: f64,
    pub active: bool,
}

impl Candidate {
    pub fn new(generator_id: usize, groups: Vec<FragmentGroup>) -> Self {
        let fragments = groups
            .into_iter()
            .map(|g| {
                let e = FragmentEstimate::unmeasured(&g);
                (g, e)
            })
            .collect();
        Self {
            generator_id,
            fragments,
            gradient_estimate: 0.0,
            abs_gradient_estimate: 0.0,
            active: true,
        }
    }

    /// Exact gradient on the frozen state (sum of fragment means).
    pub fn exact_gradient(&self) -> f64 {
        self.fragments.iter().map(|(g, _)| g.exact_mean).sum()
    }

    fn measure(
        &mut self,
        per_fragment_std: f64,
        sampler: &mut ShotSampler,
        ledger: &mut ShotLedger,
    ) -> Result<()> {
        let g = estimate_gradient(&mut self.fragments, per_fragment_std, sampler, ledger)?;
        self.gradient_estimate = g;
        self.abs_gradient_estimate = g.abs();
        Ok(())
    }
}

/// Precision multiplier `c_r` of the default schedule, rounds numbered `1..=10`.
pub fn standard_schedule(kind: PoolKind, round: usize) -> Result<f64> {
    if !(1..=10).contains(&round) {
        return Err(Error::Config(format!("round {round} outside 1..=10")));
    }
    let r = round as f64;
    Ok(match kind {
        PoolKind::Uccsd | PoolKind::QubitExcitation => 5.0 - 2.0 * r / 5.0,
        PoolKind::Qubit => 2.0 - r / 10.0,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeConfig {
    /// Target precision ε (Hartree).
    pub epsilon: f64,
    /// `c_1, …, c_L`; the number of entries is the round limit `L`.
    pub multipliers: Vec<f64>,
    /// `d` in `R_r = d·ε_r`.
    pub radius_multiplier: f64,
}

impl SeConfig {
    pub fn standard(kind: PoolKind, epsilon: f64) -> Self {
        Self {
            epsilon,
            multipliers: (1..=10)
                .map(|r| standard_schedule(kind, r).expect("in range"))
                .collect(),
            radius_multiplier: 8.0,
        }
    }

    pub fn max_rounds(&self) -> usize {
        self.multipliers.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.radius_multiplier > 0.0) {
            return Err(Error::Config("radius multiplier must be positive".into()));
        }
        let Some(&last) = self.multipliers.last() else {
            return Err(Error::Config("schedule needs at least one round".into()));
        };
        if self.multipliers.iter().any(|&c| !(c >= 1.0)) {
            return Err(Error::Config("schedule multipliers must be >= 1".into()));
        }
        if self.multipliers.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Config("schedule multipliers must be nonincreasing".into()));
        }
        if (last - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("final multiplier must be 1, got {last}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub chosen_id: usize,
    pub final_gradient: f64,
    pub shots_spent_this_iteration: u64,
    pub rounds_used: usize,
    pub survivors_per_round: Vec<usize>,
}

/// Index of the largest `|g|` among active candidates; ties go to the lowest id.
fn leader(pool: &[Candidate]) -> usize {
    let mut best: Option<usize> = None;
    for (k, c) in pool.iter().enumerate() {
        if !c.active {
            continue;
        }
        best = match best {
            None => Some(k),
            Some(b) => {
                let cb = &pool[b];
                if c.abs_gradient_estimate > cb.abs_gradient_estimate
                    || (c.abs_gradient_estimate == cb.abs_gradient_estimate
                        && c.generator_id < cb.generator_id)
                {
                    Some(k)
                } else {
                    Some(b)
                }
            }
        };
    }
    best.expect("at least one active candidate")
}

pub fn naive_select(
    pool: &mut [Candidate],
    epsilon: f64,
    sampler: &mut ShotSampler,
    ledger: &mut ShotLedger,
) -> Result<SelectionResult> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    let before = ledger.total_shots();
    for c in pool.iter_mut() {
        c.active = true;
        ledger.attribute(c.generator_id, 1);
        c.measure(epsilon, sampler, ledger)?;
    }
    let best = leader(pool);
    Ok(SelectionResult {
        chosen_id: pool[best].generator_id,
        final_gradient: pool[best].gradient_estimate,
        shots_spent_this_iteration: ledger.total_shots() - before,
        rounds_used: 1,
        survivors_per_round: vec![pool.len()],
    })
}

pub fn successive_elimination_select(
    pool: &mut [Candidate],
    cfg: &SeConfig,
    sampler: &mut ShotSampler,
    ledger: &mut ShotLedger,
) -> Result<SelectionResult> {
    if pool.is_empty() {
        return Err(Error::EmptyPool);
    }
    cfg.validate()?;
    let before = ledger.total_shots();
    pool.iter_mut().for_each(|c| c.active = true);

    let mut survivors = Vec::new();
    let mut rounds_used = 1;
    if pool.len() > 1 {
        for (r, &multiplier) in cfg.multipliers.iter().enumerate() {
            let round = r + 1;
            let eps_r = multiplier * cfg.epsilon;
            for c in pool.iter_mut().filter(|c| c.active) {
                ledger.attribute(c.generator_id, round);
                c.measure(eps_r, sampler, ledger)?;
            }
            let m = pool[leader(pool)].abs_gradient_estimate;
            let radius = cfg.radius_multiplier * eps_r;
            for c in pool.iter_mut().filter(|c| c.active) {
                if c.abs_gradient_estimate + radius < m - radius {
                    c.active = false;
                }
            }
            let alive = pool.iter().filter(|c| c.active).count();
            survivors.push(alive);
            rounds_used = round;
            if alive == 1 {
                break;
            }
        }
    } else {
        survivors.push(1);
    }

    // the winner is always reported at the target precision ε
    let best = leader(pool);
    ledger.attribute(pool[best].generator_id, rounds_used);
    pool[best].measure(cfg.epsilon, sampler, ledger)?;

    Ok(SelectionResult {
        chosen_id: pool[best].generator_id,
        final_gradient: pool[best].gradient_estimate,
        shots_spent_this_iteration: ledger.total_shots() - before,
        rounds_used,
        survivors_per_round: survivors,
    })
}
