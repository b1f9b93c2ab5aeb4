//! Global re-optimization of all ansatz angles on the exact statevector.

use std::collections::VecDeque;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pools::Generator;
use crate::statevector::{apply_raw, exp_raw, inner, StateVector};
use crate::pauli::PauliSum;

/// `|ψ(θ)⟩ = e^{θ_k G_k} ⋯ e^{θ_1 G_1} |ψ₀⟩`: generator 0 acts first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Ansatz {
    pub generators: Vec<Generator>,
    pub parameters: Vec<f64>,
}

impl Ansatz {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Appends a generator with angle 0, which leaves the state unchanged.
    pub fn push(&mut self, g: Generator) {
        self.generators.push(g);
        self.parameters.push(0.0);
    }

    fn check(&self, params: &[f64]) -> Result<()> {
        if params.len() != self.generators.len() {
            return Err(Error::Config(format!(
                "{} parameters for {} generators",
                params.len(),
                self.generators.len()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VqeOutcome {
    pub optimal_parameters: Vec<f64>,
    pub energy: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerSettings {
    pub memory: usize,
    pub gradient_tolerance: f64,
    pub max_iterations: usize,
    pub armijo: f64,
    /// Relative energy decrease treated as no progress (the double-precision floor).
    pub stall_tolerance: f64,
    /// Consecutive no-progress steps before giving up.
    pub stall_steps: usize,
}

impl Default for OptimizerSettings {
    fn default() -> Self {
        Self {
            memory: 10,
            gradient_tolerance: 1e-8,
            max_iterations: 200,
            armijo: 1e-4,
            stall_tolerance: 1e-14,
            stall_steps: 3,
        }
    }
}

fn state_at(a: &Ansatz, params: &[f64], reference: &StateVector) -> Result<Vec<Complex64>> {
    let mut amps = reference.amplitudes().to_vec();
    for (g, &t) in a.generators.iter().zip(params) {
        amps = exp_raw(&g.operator, t, &amps)?;
    }
    Ok(amps)
}

pub fn ansatz_state(a: &Ansatz, reference: &StateVector) -> Result<StateVector> {
    a.check(&a.parameters)?;
    let amps = state_at(a, &a.parameters, reference)?;
    StateVector::from_amplitudes(reference.n_qubits(), amps)
}

/// Energy and its gradient at `params`.
///
/// Backward sweep: with `ψ_j` the state after generator `j` and
/// `φ_j = U_{j+1}†⋯U_k† H ψ_k`, the component is `2·Re⟨φ_j|G_j ψ_j⟩`.
pub fn energy_and_gradient_at(
    a: &Ansatz,
    params: &[f64],
    h: &PauliSum,
    reference: &StateVector,
) -> Result<(f64, Vec<f64>)> {
    a.check(params)?;
    if h.n_qubits() != reference.n_qubits() {
        return Err(Error::Dimension {
            left: h.n_qubits(),
            right: reference.n_qubits(),
        });
    }
    let mut psi = state_at(a, params, reference)?;
    let mut phi = apply_raw(h, &psi);
    let energy = inner(&psi, &phi).re;
    let mut grad = vec![0.0; params.len()];
    for j in (0..params.len()).rev() {
        let g = &a.generators[j].operator;
        let g_psi = apply_raw(g, &psi);
        grad[j] = 2.0 * inner(&phi, &g_psi).re;
        if j > 0 {
            psi = exp_raw(g, -params[j], &psi)?;
            phi = exp_raw(g, -params[j], &phi)?;
        }
    }
    Ok((energy, grad))
}

pub fn energy_and_gradient(
    a: &Ansatz,
    h: &PauliSum,
    reference: &StateVector,
) -> Result<(f64, Vec<f64>)> {
    energy_and_gradient_at(a, &a.parameters, h, reference)
}

pub fn energy_at(a: &Ansatz, params: &[f64], h: &PauliSum, reference: &StateVector) -> Result<f64> {
    a.check(params)?;
    let psi = state_at(a, params, reference)?;
    Ok(inner(&psi, &apply_raw(h, &psi)).re)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

pub fn optimize(
    a: &Ansatz,
    h: &PauliSum,
    reference: &StateVector,
    warm_start: &[f64],
) -> Result<VqeOutcome> {
    optimize_with(a, h, reference, warm_start, &OptimizerSettings::default())
}

/// Limited-memory BFGS with Armijo backtracking. Returns the best point seen.
pub fn optimize_with(
    a: &Ansatz,
    h: &PauliSum,
    reference: &StateVector,
    warm_start: &[f64],
    settings: &OptimizerSettings,
) -> Result<VqeOutcome> {
    a.check(warm_start)?;
    let n = warm_start.len();
    let mut x = warm_start.to_vec();
    let (mut f, mut g) = energy_and_gradient_at(a, &x, h, reference)?;
    if n == 0 {
        return Ok(VqeOutcome {
            optimal_parameters: x,
            energy: f,
            gradient_norm: 0.0,
            iterations: 0,
            converged: true,
        });
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut iterations = 0;
    let mut converged = false;
    let mut stalled = 0;

    while iterations < settings.max_iterations {
        if inf_norm(&g) < settings.gradient_tolerance {
            converged = true;
            break;
        }
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let alpha = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= alpha * yi);
            alphas.push(alpha);
        }
        let gamma = history
            .back()
            .map(|(s, y, _)| dot(s, y) / dot(y, y))
            .unwrap_or_else(|| 1.0 / inf_norm(&g).max(1.0));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), alpha) in history.iter().zip(alphas.iter().rev()) {
            let beta = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (alpha - beta) * si);
        }
        let mut dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &dir);
        if !(slope < 0.0) {
            history.clear();
            dir = g.iter().map(|v| -v).collect();
            slope = -dot(&g, &g);
        }

        let mut step = 1.0;
        let mut accepted = None;
        while step > 1e-16 {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + step * di).collect();
            let ft = energy_at(a, &trial, h, reference)?;
            if ft <= f + settings.armijo * step * slope {
                accepted = Some((trial, ft));
                break;
            }
            step *= 0.5;
        }
        let Some((x_new, _)) = accepted else {
            break;
        };
        let (f_new, g_new) = energy_and_gradient_at(a, &x_new, h, reference)?;
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-16 {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        let progress = f - f_new;
        x = x_new;
        g = g_new;
        iterations += 1;
        if progress <= settings.stall_tolerance * f.abs().max(f_new.abs()).max(1.0) {
            stalled += 1;
            if stalled >= settings.stall_steps {
                f = f_new;
                break;
            }
        } else {
            stalled = 0;
        }
        f = f_new;
    }
    if !converged && inf_norm(&g) < settings.gradient_tolerance {
        converged = true;
    }
    Ok(VqeOutcome {
        gradient_norm: inf_norm(&g),
        optimal_parameters: x,
        energy: f,
        iterations,
        converged,
    })
}
