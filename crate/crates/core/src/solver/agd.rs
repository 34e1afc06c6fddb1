//! Accelerated gradient descent on the smoothed objective, with a
//! backtracking line search (halve on insufficient decrease, grow 1.2x on
//! acceptance) and a function-value restart that drops the momentum whenever
//! an extrapolated step would increase the objective. The iterate sequence
//! is monotone in the objective, so the result never exceeds the starting
//! value.

use super::objective::SmoothedProblem;
use super::{PhaseConfig, SolverError, SolverOptions};
use crate::channel::ChannelMatrix;

const ARMIJO: f64 = 1e-4;
const STEP_GROWTH: f64 = 1.2;
const MAX_HALVINGS: usize = 80;

/// Result of one inner solve.
#[derive(Debug, Clone)]
pub struct AgdOutcome {
    pub phases: PhaseConfig,
    /// Smoothed objective at the returned phases.
    pub value: f64,
    /// Max-norm of the gradient at the returned phases.
    pub grad_inf_norm: f64,
    /// Gradient steps taken.
    pub iterations: usize,
    /// Whether the gradient tolerance was met before the iteration cap.
    pub converged: bool,
}

pub(crate) struct EngineResult {
    pub omega: Vec<f64>,
    pub value: f64,
    pub grad_inf_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Last accepted step size, for warm-starting the next solve.
    pub step: f64,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, &x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Backtracking step from `base` along `-grad`; returns the accepted point,
/// its evaluation, and the accepted step, or `None` if no decrease is
/// achievable down to the smallest step.
fn backtrack(
    prob: &SmoothedProblem<'_>,
    base: &[f64],
    f_base: f64,
    grad: &[f64],
    mut step: f64,
) -> Option<(Vec<f64>, super::objective::Eval, f64)> {
    let g_sq = dot(grad, grad);
    if g_sq == 0.0 {
        return None;
    }
    for _ in 0..MAX_HALVINGS {
        let candidate: Vec<f64> = base.iter().zip(grad).map(|(x, g)| x - step * g).collect();
        let eval = prob.eval(&candidate);
        if eval.value <= f_base - ARMIJO * step * g_sq {
            return Some((candidate, eval, step));
        }
        step *= 0.5;
    }
    None
}

pub(crate) fn agd_engine(
    prob: &SmoothedProblem<'_>,
    omega0: &[f64],
    opts: &SolverOptions,
    step_init: f64,
) -> EngineResult {
    let grad_tol = |value: f64| opts.inner_grad_tol * value.abs().max(1.0);

    let eval0 = prob.eval(omega0);
    let mut grad_x = prob.gradient(omega0, &eval0);
    let mut f_x = eval0.value;
    let mut x = omega0.to_vec();

    if inf_norm(&grad_x) <= grad_tol(f_x) {
        return EngineResult {
            omega: x,
            value: f_x,
            grad_inf_norm: inf_norm(&grad_x),
            iterations: 0,
            converged: true,
            step: step_init,
        };
    }

    let mut x_prev = x.clone();
    let mut momentum_count = 1.0f64;
    let mut step = step_init.max(1e-300);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.inner_max_iters {
        iterations += 1;
        let beta = (momentum_count - 1.0) / (momentum_count + 2.0);
        let (accepted, f_new, eval_new) = if beta > 0.0 {
            let y: Vec<f64> = x
                .iter()
                .zip(&x_prev)
                .map(|(xi, pi)| xi + beta * (xi - pi))
                .collect();
            let eval_y = prob.eval(&y);
            let grad_y = prob.gradient(&y, &eval_y);
            match backtrack(prob, &y, eval_y.value, &grad_y, step) {
                Some((cand, eval, used)) if eval.value <= f_x => {
                    step = used * STEP_GROWTH;
                    momentum_count += 1.0;
                    (cand, eval.value, eval)
                }
                _ => {
                    // Extrapolation failed to improve on x: restart the
                    // momentum and fall through to a plain descent step.
                    momentum_count = 1.0;
                    match backtrack(prob, &x, f_x, &grad_x, step) {
                        Some((cand, eval, used)) => {
                            step = used * STEP_GROWTH;
                            momentum_count += 1.0;
                            (cand, eval.value, eval)
                        }
                        None => break,
                    }
                }
            }
        } else {
            match backtrack(prob, &x, f_x, &grad_x, step) {
                Some((cand, eval, used)) => {
                    step = used * STEP_GROWTH;
                    momentum_count += 1.0;
                    (cand, eval.value, eval)
                }
                None => break,
            }
        };

        x_prev = std::mem::replace(&mut x, accepted);
        f_x = f_new;
        grad_x = prob.gradient(&x, &eval_new);
        if inf_norm(&grad_x) <= grad_tol(f_x) {
            converged = true;
            break;
        }
    }

    EngineResult {
        omega: x,
        value: f_x,
        grad_inf_norm: inf_norm(&grad_x),
        iterations,
        converged,
        step,
    }
}

/// Minimize the smoothed objective from `omega0` at a fixed smoothing
/// parameter. Tolerances are interpreted on the objective's own scale;
/// [`super::solve_maxmin`] normalizes physical channels before calling this.
pub fn agd_minimize(
    h: &ChannelMatrix,
    weights: &[f64],
    lambda_smooth: f64,
    omega0: &PhaseConfig,
    opts: &SolverOptions,
) -> Result<AgdOutcome, SolverError> {
    opts.validate()?;
    if omega0.len() != h.n_units() {
        return Err(SolverError::DimensionMismatch {
            expected: h.n_units(),
            got: omega0.len(),
        });
    }
    if weights.len() != h.n_users() {
        return Err(SolverError::DimensionMismatch {
            expected: h.n_users(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(SolverError::NonFiniteInput);
    }
    let prob = SmoothedProblem::new(h, weights, lambda_smooth)?;
    let result = agd_engine(&prob, omega0.phases(), opts, 1.0);
    Ok(AgdOutcome {
        phases: PhaseConfig::new(result.omega),
        value: result.value,
        grad_inf_norm: result.grad_inf_norm,
        iterations: result.iterations,
        converged: result.converged,
    })
}
