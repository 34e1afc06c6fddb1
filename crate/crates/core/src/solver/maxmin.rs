//! Outer loop of the max-min design: repeatedly minimize the smoothed
//! objective, read the active set off the simplex projection, and sharpen
//! the smoothing parameter from the active-set gap (`λ ← 1/(2·gap)`) until
//! the gap falls below the tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::agd::agd_engine;
use super::objective::{user_signals, SmoothedProblem};
use super::simplex::project_simplex;
use super::{wrap_phase, PhaseConfig, SolverError, SolverOptions, ACTIVE_EPS};
use crate::channel::ChannelMatrix;

/// Relative gap tolerance used when [`SolverOptions::tau`] is left unset.
const AUTO_TAU_RELATIVE: f64 = 1e-6;

/// Stall guard: gap reductions below this fraction count as stalled.
const STALL_DECREASE: f64 = 0.01;
const STALL_LIMIT: usize = 3;

/// Termination status of a solve.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverStatus {
    /// The active-set gap reached the tolerance.
    Converged,
    /// The outer iteration cap was reached; the best iterate is reported.
    MaxOuterIterations,
}

impl SolverStatus {
    pub fn is_converged(&self) -> bool {
        matches!(self, Self::Converged)
    }
}

/// Result of a max-min solve. Gap, tolerance, and the smoothing-parameter
/// trace are reported in raw objective units (weights times channel power);
/// the first trace entry is the initialization, each later entry follows
/// `λ = 1/(2·gap)` from the gap recorded for the previous outer iteration,
/// or is a 10x escalation when the stall guard fired.
#[derive(Debug, Clone)]
pub struct Solution {
    pub phases: PhaseConfig,
    /// Received power per user at the solution, `P·|Σ_i h_{i,k} e^{jω_i}|²`.
    pub user_powers: Vec<f64>,
    /// `α_k · user_powers[k]`.
    pub weighted_values: Vec<f64>,
    /// Users with positive simplex weight at the returned iterate.
    pub active_set: Vec<usize>,
    /// Spread of objective components over the active set at the returned
    /// iterate (the best one seen, when the outer cap was hit).
    pub gap: f64,
    /// The gap tolerance the solve ran with.
    pub tau: f64,
    /// Smoothing parameters used, initialization first.
    pub lambda_trace: Vec<f64>,
    /// Active-set gap after each outer iteration.
    pub gap_trace: Vec<f64>,
    /// Gradient steps taken by the winning initialization.
    pub inner_iterations: usize,
    /// Times the stall guard escalated the smoothing parameter.
    pub stall_events: usize,
    pub status: SolverStatus,
}

impl Solution {
    /// Smallest weighted received power, the quantity the design maximizes.
    pub fn min_weighted_power(&self) -> f64 {
        self.weighted_values
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

struct RunOutcome {
    omega: Vec<f64>,
    active_set: Vec<usize>,
    /// Normalized units.
    gap: f64,
    /// Normalized min weighted power at `omega` (for restart selection).
    min_weighted: f64,
    lambda_trace: Vec<f64>,
    gap_trace: Vec<f64>,
    inner_iterations: usize,
    stall_events: usize,
    status: SolverStatus,
}

/// Solve the weighted max-min phase design over a channel matrix.
///
/// The channel is normalized internally so the best achievable weighted
/// power is one; `opts.lambda0` and the inner gradient tolerance act on that
/// normalized objective, while `tau`, `gap`, and `lambda_trace` are raw.
/// With `restarts > 1` the solver reruns from seeded random phases and keeps
/// the best final minimum weighted power (first run always starts from
/// `ω = 0`).
pub fn solve_maxmin(
    h: &ChannelMatrix,
    weights: &[f64],
    tx_power: f64,
    opts: &SolverOptions,
) -> Result<Solution, SolverError> {
    opts.validate()?;
    if weights.len() != h.n_users() {
        return Err(SolverError::DimensionMismatch {
            expected: h.n_users(),
            got: weights.len(),
        });
    }
    if weights.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(SolverError::NonFiniteInput);
    }
    if !(tx_power.is_finite() && tx_power > 0.0) {
        return Err(SolverError::InvalidOption(format!(
            "tx_power = {tx_power} must be > 0"
        )));
    }
    if h.n_units() == 0 || h.n_users() == 0 {
        return Err(SolverError::EmptyInput);
    }

    // Scale so the best achievable weighted power is one; raw quantities are
    // recovered by multiplying gaps by `scale` and dividing lambdas by it.
    let scale = weights
        .iter()
        .zip(h.beta_column_sums())
        .map(|(a, b)| a * b * b)
        .fold(0.0f64, f64::max);
    debug_assert!(scale > 0.0, "channel magnitudes are strictly positive");
    let tau_raw = opts.tau.unwrap_or(AUTO_TAU_RELATIVE * scale);
    let tau_norm = tau_raw / scale;

    if h.n_users() == 1 {
        return Ok(single_user_solution(
            h, weights, tx_power, opts, tau_raw, scale,
        ));
    }

    let h_norm = h.scaled(1.0 / scale.sqrt());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut best: Option<RunOutcome> = None;
    for restart in 0..opts.restarts {
        let omega0: Vec<f64> = if restart == 0 {
            vec![0.0; h.n_units()]
        } else {
            (0..h.n_units())
                .map(|_| rng.gen_range(0.0..std::f64::consts::TAU))
                .collect()
        };
        let run = run_outer(&h_norm, weights, tau_norm, opts, omega0)?;
        let better = match &best {
            None => true,
            Some(b) => run.min_weighted > b.min_weighted,
        };
        if better {
            best = Some(run);
        }
    }
    let run = best.expect("restarts >= 1");

    let phases = PhaseConfig::new(run.omega);
    let powers: Vec<f64> = user_signals(h, phases.phases())
        .into_iter()
        .map(|s| tx_power * s.norm_sqr())
        .collect();
    let weighted: Vec<f64> = powers.iter().zip(weights).map(|(p, a)| p * a).collect();
    Ok(Solution {
        phases,
        user_powers: powers,
        weighted_values: weighted,
        active_set: run.active_set,
        gap: run.gap * scale,
        tau: tau_raw,
        lambda_trace: run.lambda_trace.iter().map(|l| l / scale).collect(),
        gap_trace: run.gap_trace.iter().map(|g| g * scale).collect(),
        inner_iterations: run.inner_iterations,
        stall_events: run.stall_events,
        status: run.status,
    })
}

fn run_outer(
    h_norm: &ChannelMatrix,
    weights: &[f64],
    tau_norm: f64,
    opts: &SolverOptions,
    omega0: Vec<f64>,
) -> Result<RunOutcome, SolverError> {
    let mut omega = omega0;
    let mut lambda = opts.lambda0;
    let mut lambda_trace = vec![lambda];
    let mut gap_trace = Vec::new();
    let mut inner_iterations = 0;
    let mut stall_events = 0;
    let mut stall_streak = 0;
    let mut prev_gap = f64::INFINITY;
    let mut step = 1.0;
    let mut status = SolverStatus::MaxOuterIterations;

    // Best iterate across outer iterations, by min weighted power.
    let mut best: Option<(Vec<f64>, Vec<usize>, f64, f64)> = None;

    for _ in 0..opts.outer_max_iters {
        let prob = SmoothedProblem::new(h_norm, weights, lambda)?;
        let engine = agd_engine(&prob, &omega, opts, step);
        omega = engine.omega;
        step = engine.step;
        inner_iterations += engine.iterations;

        let eval = prob.eval(&omega);
        let p = project_simplex(
            &eval
                .components
                .iter()
                .map(|f| 2.0 * lambda * f)
                .collect::<Vec<_>>(),
        )?;
        let active = p.support(ACTIVE_EPS);
        let gap = spread(&eval.components, &active);
        gap_trace.push(gap);

        let min_weighted = -eval
            .components
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max);
        let improved = match &best {
            None => true,
            Some((_, _, _, best_mw)) => min_weighted > *best_mw,
        };
        if improved {
            best = Some((omega.clone(), active.clone(), gap, min_weighted));
        }

        if gap <= tau_norm {
            status = SolverStatus::Converged;
            // the converged iterate is the one to report even if an earlier
            // iterate had a marginally better minimum
            best = Some((omega.clone(), active, gap, min_weighted));
            break;
        }

        let mut next_lambda = 1.0 / (2.0 * gap);
        if gap > (1.0 - STALL_DECREASE) * prev_gap {
            stall_streak += 1;
        } else {
            stall_streak = 0;
        }
        if stall_streak >= STALL_LIMIT {
            next_lambda = lambda * 10.0;
            stall_events += 1;
            stall_streak = 0;
        }
        lambda = next_lambda;
        lambda_trace.push(lambda);
        prev_gap = gap;
    }

    let (best_omega, active_set, gap, min_weighted) = best.expect("at least one outer iteration");
    Ok(RunOutcome {
        omega: best_omega,
        active_set,
        gap,
        min_weighted,
        lambda_trace,
        gap_trace,
        inner_iterations,
        stall_events,
        status,
    })
}

fn spread(values: &[f64], active: &[usize]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &k in active {
        lo = lo.min(values[k]);
        hi = hi.max(values[k]);
    }
    if active.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// A single user needs no equalization: aligning every unit's phase against
/// the channel phase is the global optimum, with power `P (Σ_i β_i)²`.
fn single_user_solution(
    h: &ChannelMatrix,
    weights: &[f64],
    tx_power: f64,
    opts: &SolverOptions,
    tau_raw: f64,
    scale: f64,
) -> Solution {
    let omega: Vec<f64> = (0..h.n_units()).map(|i| wrap_phase(-h.psi(i, 0))).collect();
    let phases = PhaseConfig::new(omega);
    let power = user_signals(h, phases.phases())[0].norm_sqr() * tx_power;
    Solution {
        phases,
        user_powers: vec![power],
        weighted_values: vec![power * weights[0]],
        active_set: vec![0],
        gap: 0.0,
        tau: tau_raw,
        lambda_trace: vec![opts.lambda0 / scale],
        gap_trace: Vec::new(),
        inner_iterations: 0,
        stall_events: 0,
        status: SolverStatus::Converged,
    }
}
