//! Received powers, weighted objective components, and their analytic
//! gradients with respect to the per-unit phases.

use num_complex::Complex64;

use super::simplex::{project_simplex, SimplexPoint};
use super::{moreau::moreau_value, PhaseConfig, SolverError};
use crate::channel::ChannelMatrix;

fn check_dims(
    h: &ChannelMatrix,
    n_phases: usize,
    weights: Option<&[f64]>,
) -> Result<(), SolverError> {
    if n_phases != h.n_units() {
        return Err(SolverError::DimensionMismatch {
            expected: h.n_units(),
            got: n_phases,
        });
    }
    if let Some(w) = weights {
        if w.len() != h.n_users() {
            return Err(SolverError::DimensionMismatch {
                expected: h.n_users(),
                got: w.len(),
            });
        }
        if w.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(SolverError::NonFiniteInput);
        }
    }
    Ok(())
}

/// Per-user combined signals `s_k = Σ_i h_{i,k} e^{jω_i}`.
pub(crate) fn user_signals(h: &ChannelMatrix, omega: &[f64]) -> Vec<Complex64> {
    let mut signals = vec![Complex64::new(0.0, 0.0); h.n_users()];
    for (i, &w) in omega.iter().enumerate() {
        let phasor = Complex64::from_polar(1.0, w);
        for (k, s) in signals.iter_mut().enumerate() {
            *s += h.entry(i, k) * phasor;
        }
    }
    signals
}

/// Received power per user, `P · |Σ_i h_{i,k} e^{jω_i}|²`.
pub fn user_powers(
    h: &ChannelMatrix,
    phases: &PhaseConfig,
    tx_power: f64,
) -> Result<Vec<f64>, SolverError> {
    check_dims(h, phases.len(), None)?;
    if !(tx_power.is_finite() && tx_power > 0.0) {
        return Err(SolverError::InvalidOption(format!(
            "tx_power = {tx_power} must be > 0"
        )));
    }
    Ok(user_signals(h, phases.phases())
        .into_iter()
        .map(|s| tx_power * s.norm_sqr())
        .collect())
}

/// Weighted objective components `f_k = −α_k |s_k|²` (transmit power
/// factored out). All entries are ≤ 0.
pub fn objective_components(
    h: &ChannelMatrix,
    phases: &PhaseConfig,
    weights: &[f64],
) -> Result<Vec<f64>, SolverError> {
    check_dims(h, phases.len(), Some(weights))?;
    Ok(components_impl(h, phases.phases(), weights))
}

fn components_impl(h: &ChannelMatrix, omega: &[f64], weights: &[f64]) -> Vec<f64> {
    user_signals(h, omega)
        .into_iter()
        .zip(weights)
        .map(|(s, &a)| -a * s.norm_sqr())
        .collect()
}

/// Gradients of the objective components: an `N × K` matrix, entry `(i, k)`
/// at `i * K + k`, holding `∂f_k/∂ω_i = 2 α_k Im(h_{i,k} e^{jω_i} s̄_k)`.
pub fn objective_jacobian(
    h: &ChannelMatrix,
    phases: &PhaseConfig,
    weights: &[f64],
) -> Result<Vec<f64>, SolverError> {
    check_dims(h, phases.len(), Some(weights))?;
    let omega = phases.phases();
    let signals = user_signals(h, omega);
    let k_users = h.n_users();
    let mut jac = vec![0.0; h.n_units() * k_users];
    for (i, &w) in omega.iter().enumerate() {
        let phasor = Complex64::from_polar(1.0, w);
        for k in 0..k_users {
            jac[i * k_users + k] =
                2.0 * weights[k] * (h.entry(i, k) * phasor * signals[k].conj()).im;
        }
    }
    Ok(jac)
}

/// Smoothed objective `M_λ(f(ω))` and its chain-rule gradient
/// `D_ω f(ω) · P_Δ(2λ f(ω))`.
pub fn smoothed_objective(
    h: &ChannelMatrix,
    phases: &PhaseConfig,
    weights: &[f64],
    lambda_smooth: f64,
) -> Result<(f64, Vec<f64>), SolverError> {
    check_dims(h, phases.len(), Some(weights))?;
    let prob = SmoothedProblem::new(h, weights, lambda_smooth)?;
    let eval = prob.eval(phases.phases());
    let grad = prob.gradient(phases.phases(), &eval);
    Ok((eval.value, grad))
}

/// One evaluation of the smoothed objective, keeping the intermediates the
/// gradient needs.
pub(crate) struct Eval {
    pub value: f64,
    pub components: Vec<f64>,
    pub signals: Vec<Complex64>,
    pub simplex: SimplexPoint,
}

/// The smoothed problem at a fixed smoothing parameter, over a fixed channel
/// and weight vector.
pub(crate) struct SmoothedProblem<'a> {
    h: &'a ChannelMatrix,
    weights: &'a [f64],
    lambda: f64,
}

impl<'a> SmoothedProblem<'a> {
    pub fn new(h: &'a ChannelMatrix, weights: &'a [f64], lambda: f64) -> Result<Self, SolverError> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(SolverError::InvalidOption(format!(
                "lambda_smooth = {lambda} must be > 0"
            )));
        }
        Ok(Self { h, weights, lambda })
    }

    pub fn eval(&self, omega: &[f64]) -> Eval {
        let signals = user_signals(self.h, omega);
        let components: Vec<f64> = signals
            .iter()
            .zip(self.weights)
            .map(|(s, &a)| -a * s.norm_sqr())
            .collect();
        let scaled: Vec<f64> = components.iter().map(|f| 2.0 * self.lambda * f).collect();
        let simplex = project_simplex(&scaled).expect("components are finite");
        let inner: f64 = simplex
            .weights()
            .iter()
            .zip(&components)
            .map(|(p, f)| p * f)
            .sum();
        let p_sq: f64 = simplex.weights().iter().map(|p| p * p).sum();
        let value = inner - p_sq / (4.0 * self.lambda);
        debug_assert!({
            let direct = moreau_value(&components, self.lambda).unwrap();
            (value - direct).abs() <= 1e-9 * value.abs().max(1.0)
        });
        Eval {
            value,
            components,
            signals,
            simplex,
        }
    }

    /// Chain-rule gradient `Σ_k p_k ∂f_k/∂ω`, reusing the signals from an
    /// evaluation at the same `omega`.
    pub fn gradient(&self, omega: &[f64], eval: &Eval) -> Vec<f64> {
        let p = eval.simplex.weights();
        let mut grad = vec![0.0; omega.len()];
        for (i, (&w, g)) in omega.iter().zip(grad.iter_mut()).enumerate() {
            let phasor = Complex64::from_polar(1.0, w);
            let mut acc = 0.0;
            for (k, (&pk, &alpha)) in p.iter().zip(self.weights).enumerate() {
                if pk > 0.0 {
                    acc += pk
                        * 2.0
                        * alpha
                        * (self.h.entry(i, k) * phasor * eval.signals[k].conj()).im;
                }
            }
            *g = acc;
        }
        grad
    }
}
