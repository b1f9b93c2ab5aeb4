//! Qubit-wise commuting fragmentation and the finite-shot estimation model.
//!
//! A fragment measured with `s` shots yields an estimate distributed as
//! `Normal(⟨A⟩, Var(A)/s)`. Noise is injected with the exact variance taken
//! from the frozen state, and every shot is charged to a [`ShotLedger`].

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{qwc_masks, PauliSum};
use crate::statevector::{mean_and_variance, StateVector};

/// A qubit-wise commuting group with its exact statistics on the current state.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentGroup {
    pub terms: PauliSum,
    pub exact_mean: f64,
    pub exact_variance: f64,
}

impl FragmentGroup {
    pub fn evaluate(terms: PauliSum, state: &StateVector) -> Result<Self> {
        let (exact_mean, exact_variance) = mean_and_variance(&terms, state)?;
        Ok(Self {
            terms,
            exact_mean,
            exact_variance,
        })
    }
}

/// Running estimate of one fragment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragmentEstimate {
    pub shots_spent: u64,
    pub current_std: f64,
    pub estimate: f64,
}

impl FragmentEstimate {
    /// Nothing measured yet. Deterministic fragments start at their exact value.
    pub fn unmeasured(group: &FragmentGroup) -> Self {
        if group.exact_variance == 0.0 {
            Self {
                shots_spent: 0,
                current_std: 0.0,
                estimate: group.exact_mean,
            }
        } else {
            Self {
                shots_spent: 0,
                current_std: f64::INFINITY,
                estimate: 0.0,
            }
        }
    }
}

/// Greedy sorted insertion: terms by descending `|c|` (ties in key order) go into
/// the first group whose every member is qubit-wise compatible.
pub fn sorted_insertion(s: &PauliSum) -> Result<Vec<PauliSum>> {
    let mut terms: Vec<_> = s.raw_terms().collect();
    terms.sort_by(|a, b| b.1.norm().total_cmp(&a.1.norm()));
    let mut groups: Vec<Vec<((u64, u64), Complex64)>> = Vec::new();
    'outer: for t in terms {
        for g in groups.iter_mut() {
            if g.iter().all(|m| qwc_masks(m.0, t.0)) {
                g.push(t);
                continue 'outer;
            }
        }
        groups.push(vec![t]);
    }
    groups
        .into_iter()
        .map(|g| {
            let mut p = PauliSum::zero(s.n_qubits())?;
            for (k, c) in g {
                p.accumulate(k, c);
            }
            Ok(p)
        })
        .collect()
}

/// [`sorted_insertion`] followed by exact evaluation of every group on `state`.
pub fn sorted_insertion_grouping(s: &PauliSum, state: &StateVector) -> Result<Vec<FragmentGroup>> {
    sorted_insertion(s)?
        .into_iter()
        .map(|g| FragmentGroup::evaluate(g, state))
        .collect()
}

/// `⌈Var/ε²⌉`, or one confirmation shot for a deterministic fragment.
pub fn shots_for_precision(variance: f64, epsilon: f64) -> Result<u64> {
    if !(epsilon > 0.0) || !epsilon.is_finite() {
        return Err(Error::Precision(format!("epsilon must be positive, got {epsilon}")));
    }
    if !(variance >= 0.0) {
        return Err(Error::Precision(format!("variance must be nonnegative, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(1);
    }
    let ratio = variance / (epsilon * epsilon);
    // 4e-6 / 1e-6 evaluates to 4.000000000000001; snap near-integers first
    let nearest = ratio.round();
    let shots = if (ratio - nearest).abs() <= 1e-9 * nearest.max(1.0) {
        nearest
    } else {
        ratio.ceil()
    };
    Ok((shots as u64).max(1))
}

/// How repeat refinements of a fragment are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Charging {
    /// Only the shots beyond those already spent are paid for.
    #[default]
    Incremental,
    /// Every refinement pays the full target cost and measures afresh.
    Fresh,
}

/// Source of measurement noise for one run.
#[derive(Debug, Clone)]
pub struct ShotSampler {
    rng: ChaCha8Rng,
    noise: bool,
    charging: Charging,
}

impl ShotSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: true,
            charging: Charging::Incremental,
        }
    }

    /// Estimates equal exact means; shots are still charged.
    pub fn noiseless(seed: u64) -> Self {
        Self {
            noise: false,
            ..Self::new(seed)
        }
    }

    pub fn with_noise(mut self, noise: bool) -> Self {
        self.noise = noise;
        self
    }

    pub fn with_charging(mut self, charging: Charging) -> Self {
        self.charging = charging;
        self
    }

    pub fn noise(&self) -> bool {
        self.noise
    }

    fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }
}

/// One ledger entry, attributable to an iteration, candidate and elimination round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Charge {
    pub iteration: usize,
    pub candidate: usize,
    pub round: usize,
    pub shots: u64,
}

/// Cumulative measurement accounting.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ShotLedger {
    total_shots: u64,
    per_iteration: Vec<(usize, u64)>,
    charges: Vec<Charge>,
    #[serde(skip)]
    cursor: (usize, usize, usize),
}

impl ShotLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_shots(&self) -> u64 {
        self.total_shots
    }

    pub fn per_iteration(&self) -> &[(usize, u64)] {
        &self.per_iteration
    }

    pub fn charges(&self) -> &[Charge] {
        &self.charges
    }

    pub fn begin_iteration(&mut self, iteration: usize) {
        self.cursor = (iteration, 0, 0);
    }

    /// Sets the candidate and round that subsequent charges are attributed to.
    pub fn attribute(&mut self, candidate: usize, round: usize) {
        self.cursor.1 = candidate;
        self.cursor.2 = round;
    }

    pub fn iteration_shots(&self, iteration: usize) -> u64 {
        self.per_iteration
            .iter()
            .filter(|(k, _)| *k == iteration)
            .map(|(_, s)| s)
            .sum()
    }

    pub fn charge(&mut self, shots: u64) {
        if shots == 0 {
            return;
        }
        let (iteration, candidate, round) = self.cursor;
        self.total_shots += shots;
        match self.per_iteration.last_mut() {
            Some((k, s)) if *k == iteration => *s += shots,
            _ => self.per_iteration.push((iteration, shots)),
        }
        match self.charges.last_mut() {
            Some(c) if (c.iteration, c.candidate, c.round) == self.cursor => c.shots += shots,
            _ => self.charges.push(Charge {
                iteration,
                candidate,
                round,
                shots,
            }),
        }
    }
}

/// Brings a fragment estimate to `target_std`, paying only for missing shots.
///
/// When shots are added the estimate is redrawn at the combined precision.
pub fn refine_estimate(
    f: &FragmentEstimate,
    group: &FragmentGroup,
    target_std: f64,
    sampler: &mut ShotSampler,
    ledger: &mut ShotLedger,
) -> Result<FragmentEstimate> {
    let required = shots_for_precision(group.exact_variance, target_std)?;
    let (extra, total) = match sampler.charging {
        Charging::Incremental => {
            let extra = required.saturating_sub(f.shots_spent);
            (extra, f.shots_spent + extra)
        }
        Charging::Fresh => {
            if f.shots_spent > 0 && f.current_std <= target_std {
                (0, f.shots_spent)
            } else {
                (required, required)
            }
        }
    };
    if extra == 0 {
        return Ok(*f);
    }
    ledger.charge(extra);
    if group.exact_variance == 0.0 {
        return Ok(FragmentEstimate {
            shots_spent: total,
            current_std: 0.0,
            estimate: group.exact_mean,
        });
    }
    let std = (group.exact_variance / total as f64).sqrt();
    let estimate = if sampler.noise {
        group.exact_mean + std * sampler.gaussian()
    } else {
        group.exact_mean
    };
    Ok(FragmentEstimate {
        shots_spent: total,
        current_std: std,
        estimate,
    })
}

/// Refines every fragment to `per_fragment_std` and returns the summed estimate.
///
/// The implied gradient std is `√F · per_fragment_std` for `F` fragments.
pub fn estimate_gradient(
    fragments: &mut [(FragmentGroup, FragmentEstimate)],
    per_fragment_std: f64,
    sampler: &mut ShotSampler,
    ledger: &mut ShotLedger,
) -> Result<f64> {
    if !(per_fragment_std > 0.0) {
        return Err(Error::Precision(format!(
            "target std must be positive, got {per_fragment_std}"
        )));
    }
    let mut total = 0.0;
    for (group, est) in fragments.iter_mut() {
        *est = refine_estimate(est, group, per_fragment_std, sampler, ledger)?;
        total += est.estimate;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::{qubitwise_commutes, PauliTerm};
    use crate::statevector::StateVector;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn sum(n: usize, items: &[(&str, f64)]) -> PauliSum {
        PauliSum::from_terms(
            n,
            items.iter().map(|(s, k)| PauliTerm::parse(n, s, c(*k)).unwrap()),
        )
        .unwrap()
    }

    fn group(mean: f64, var: f64) -> FragmentGroup {
        FragmentGroup {
            terms: PauliSum::zero(1).unwrap(),
            exact_mean: mean,
            exact_variance: var,
        }
    }

    #[test]
    fn sorted_insertion_example() {
        let s = sum(2, &[("Z0 Z1", 2.0), ("Z0", 1.0), ("X0 X1", 0.5)]);
        let groups = sorted_insertion(&s).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0], sum(2, &[("Z0 Z1", 2.0), ("Z0", 1.0)]));
        assert_eq!(groups[1], sum(2, &[("X0 X1", 0.5)]));
    }

    #[test]
    fn sorted_insertion_edge_cases() {
        assert!(sorted_insertion(&PauliSum::zero(3).unwrap()).unwrap().is_empty());
        let one = sum(3, &[("X0 Y2", 0.3)]);
        assert_eq!(sorted_insertion(&one).unwrap(), vec![one]);
    }

    #[test]
    fn groups_are_qwc_and_reconstruct() {
        let s = sum(
            3,
            &[
                ("X0 X1", 0.9),
                ("Y0 Y1", 0.8),
                ("Z0", 0.7),
                ("Z1 Z2", 0.6),
                ("X0", 0.5),
                ("Y1 X2", 0.4),
                ("Z0 Z2", 0.3),
            ],
        );
        let groups = sorted_insertion(&s).unwrap();
        let mut rebuilt = PauliSum::zero(3).unwrap();
        for g in &groups {
            let ts: Vec<_> = g.terms().collect();
            for a in &ts {
                for b in &ts {
                    assert!(qubitwise_commutes(a, b).unwrap());
                }
            }
            rebuilt = rebuilt.add(g).unwrap();
        }
        assert_eq!(rebuilt, s);
    }

    #[test]
    fn shot_formula() {
        assert_eq!(shots_for_precision(1.0, 1e-3).unwrap(), 1_000_000);
        assert_eq!(shots_for_precision(0.0, 1e-3).unwrap(), 1);
        assert_eq!(shots_for_precision(4e-6, 1e-3).unwrap(), 4);
        assert_eq!(shots_for_precision(4.5e-6, 1e-3).unwrap(), 5);
        assert!(shots_for_precision(1.0, 0.0).is_err());
        assert!(shots_for_precision(1.0, -1.0).is_err());
    }

    #[test]
    fn refine_is_noop_at_target() {
        let g = group(0.3, 0.01);
        let mut sampler = ShotSampler::new(1);
        let mut ledger = ShotLedger::new();
        let e = refine_estimate(&FragmentEstimate::unmeasured(&g), &g, 1e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(e.shots_spent, 100);
        assert_eq!(ledger.total_shots(), 100);
        let again = refine_estimate(&e, &g, 1e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(again, e);
        assert_eq!(ledger.total_shots(), 100);
        // a looser target never costs anything
        let looser = refine_estimate(&e, &g, 5e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(looser, e);
    }

    #[test]
    fn refine_incremental_charges_difference() {
        let g = group(0.3, 0.01);
        let mut sampler = ShotSampler::new(2);
        let mut ledger = ShotLedger::new();
        let e = refine_estimate(&FragmentEstimate::unmeasured(&g), &g, 2e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(e.shots_spent, 25);
        let e = refine_estimate(&e, &g, 1e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(e.shots_spent, 100);
        assert_eq!(ledger.total_shots(), 100);
        assert!((e.current_std - (0.01f64 / 100.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn refine_fresh_charges_full_cost() {
        let g = group(0.3, 0.01);
        let mut sampler = ShotSampler::new(2).with_charging(Charging::Fresh);
        let mut ledger = ShotLedger::new();
        let e = refine_estimate(&FragmentEstimate::unmeasured(&g), &g, 2e-2, &mut sampler, &mut ledger).unwrap();
        let e = refine_estimate(&e, &g, 1e-2, &mut sampler, &mut ledger).unwrap();
        assert_eq!(e.shots_spent, 100);
        assert_eq!(ledger.total_shots(), 125);
    }

    #[test]
    fn zero_variance_fragment_costs_one_shot() {
        let g = group(-0.25, 0.0);
        let mut sampler = ShotSampler::new(3);
        let mut ledger = ShotLedger::new();
        let mut e = FragmentEstimate::unmeasured(&g);
        for target in [1e-1, 1e-2, 1e-3] {
            e = refine_estimate(&e, &g, target, &mut sampler, &mut ledger).unwrap();
            assert_eq!(e.estimate, -0.25);
            assert_eq!(e.current_std, 0.0);
        }
        assert_eq!(ledger.total_shots(), 1);
    }

    #[test]
    fn refinement_spread_matches_target() {
        let g = group(1.0, 0.04);
        let sigma = 0.01;
        let mut sampler = ShotSampler::new(7);
        let mut ledger = ShotLedger::new();
        let trials = 10_000;
        let draws: Vec<f64> = (0..trials)
            .map(|_| {
                let e = FragmentEstimate::unmeasured(&g);
                let e = refine_estimate(&e, &g, 3.0 * sigma, &mut sampler, &mut ledger).unwrap();
                refine_estimate(&e, &g, sigma, &mut sampler, &mut ledger).unwrap().estimate
            })
            .collect();
        let mean = draws.iter().sum::<f64>() / trials as f64;
        let sd = (draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64).sqrt();
        assert!((sd / sigma - 1.0).abs() < 0.05, "sd {sd}");
        assert!((mean - 1.0).abs() < 3.0 * sigma / (trials as f64).sqrt());
    }

    #[test]
    fn gradient_sums_fragments() {
        let mut frags: Vec<_> = [group(0.1, 0.0), group(-0.4, 0.0), group(0.05, 0.0)]
            .into_iter()
            .map(|g| {
                let e = FragmentEstimate::unmeasured(&g);
                (g, e)
            })
            .collect();
        let mut sampler = ShotSampler::new(0);
        let mut ledger = ShotLedger::new();
        let g = estimate_gradient(&mut frags, 1e-3, &mut sampler, &mut ledger).unwrap();
        assert!((g + 0.25).abs() < 1e-15);
        assert_eq!(ledger.total_shots(), 3);
        assert!(estimate_gradient(&mut frags, 0.0, &mut sampler, &mut ledger).is_err());
    }

    #[test]
    fn noiseless_sampler_returns_exact_means() {
        let s = sum(2, &[("X0 X1", 0.5), ("Z0", 0.3), ("Y0 Y1", -0.2)]);
        let amps: Vec<Complex64> = [0.5, 0.5, 0.5, -0.5].iter().map(|&a| c(a)).collect();
        let v = StateVector::from_amplitudes(2, amps).unwrap();
        let groups = sorted_insertion_grouping(&s, &v).unwrap();
        let mut frags: Vec<_> = groups
            .into_iter()
            .map(|g| {
                let e = FragmentEstimate::unmeasured(&g);
                (g, e)
            })
            .collect();
        let mut sampler = ShotSampler::noiseless(0);
        let mut ledger = ShotLedger::new();
        let g = estimate_gradient(&mut frags, 1e-3, &mut sampler, &mut ledger).unwrap();
        let exact = crate::statevector::expectation(&s, &v).unwrap();
        assert!((g - exact).abs() < 1e-12);
        assert!(ledger.total_shots() > 0);
    }

    #[test]
    fn ledger_attribution() {
        let mut ledger = ShotLedger::new();
        ledger.begin_iteration(1);
        ledger.attribute(4, 1);
        ledger.charge(10);
        ledger.charge(5);
        ledger.attribute(2, 2);
        ledger.charge(7);
        ledger.begin_iteration(2);
        ledger.charge(3);
        assert_eq!(ledger.total_shots(), 25);
        assert_eq!(ledger.per_iteration(), &[(1, 22), (2, 3)]);
        assert_eq!(ledger.charges().len(), 3);
        assert_eq!(ledger.charges()[0].shots, 15);
        let attributed: u64 = ledger.charges().iter().map(|c| c.shots).sum();
        assert_eq!(attributed, ledger.total_shots());
    }
}
