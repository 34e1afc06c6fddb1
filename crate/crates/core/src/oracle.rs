//! Brute-force reference implementations for validating the optimizer and
//! its building blocks: exhaustive discrete phase search, continuous grid
//! search, direct envelope minimization, and dense simplex-grid projection.
//! All of them are exponential-cost desk-scale tools; they back the test
//! suite and the CLI's oracle-check command, not production use.

use std::fmt;

use num_complex::Complex64;

use crate::channel::ChannelMatrix;
use crate::solver::PhaseConfig;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub enum OracleError {
    /// The requested search needs more evaluations than the budget allows.
    BudgetExceeded {
        needed: u128,
        cap: u64,
    },
    /// Dense grids are limited to three dimensions.
    TooManyDimensions {
        n: usize,
        max: usize,
    },
    InvalidInput(String),
}

impl fmt::Display for OracleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BudgetExceeded { needed, cap } => {
                write!(f, "search needs {needed} evaluations, budget allows {cap}")
            }
            Self::TooManyDimensions { n, max } => {
                write!(f, "dense grid limited to {max} dimensions, got {n}")
            }
            Self::InvalidInput(msg) => write!(f, "{msg}"),
        }
    }
}

impl std::error::Error for OracleError {}

/// Evaluation caps for the brute-force searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBudget {
    /// Hard cap on objective evaluations, checked before any search runs.
    pub max_evaluations: u64,
    /// Steps per dimension for continuous grids.
    pub grid_steps: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_evaluations: 20_000_000,
            grid_steps: 2000,
        }
    }
}

impl OracleBudget {
    pub fn new(max_evaluations: u64, grid_steps: usize) -> Result<Self, OracleError> {
        if max_evaluations == 0 || grid_steps == 0 {
            return Err(OracleError::InvalidInput(
                "budget caps must be positive".into(),
            ));
        }
        Ok(Self {
            max_evaluations,
            grid_steps,
        })
    }

    fn check(&self, needed: u128) -> Result<(), OracleError> {
        if needed > self.max_evaluations as u128 {
            return Err(OracleError::BudgetExceeded {
                needed,
                cap: self.max_evaluations,
            });
        }
        Ok(())
    }
}

fn min_weighted_channel_power(h: &ChannelMatrix, weights: &[f64], omega: &[f64]) -> f64 {
    let mut worst = f64::INFINITY;
    for (k, &alpha) in weights.iter().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (i, &w) in omega.iter().enumerate() {
            s += h.entry(i, k) * Complex64::from_polar(1.0, w);
        }
        worst = worst.min(alpha * s.norm_sqr());
    }
    worst
}

/// Globally optimal discrete configuration by full enumeration of all
/// `(2^bits)^N` level assignments. Returns the best phases and the best
/// minimum weighted channel power (transmit power excluded). Ties keep the
/// lexicographically smallest level assignment.
pub fn exhaustive_discrete(
    h: &ChannelMatrix,
    weights: &[f64],
    bits: u32,
    budget: &OracleBudget,
) -> Result<(PhaseConfig, f64), OracleError> {
    check_channel(h, weights)?;
    if !(1..=8).contains(&bits) {
        return Err(OracleError::InvalidInput(format!(
            "bits = {bits} outside [1, 8]"
        )));
    }
    let n = h.n_units();
    let levels = 1u32 << bits;
    let needed = (levels as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    budget.check(needed)?;

    let step = TWO_PI / levels as f64;
    let mut assignment = vec![0u32; n];
    let mut best_assignment = assignment.clone();
    let mut best = f64::NEG_INFINITY;
    loop {
        let omega: Vec<f64> = assignment.iter().map(|&m| m as f64 * step).collect();
        let value = min_weighted_channel_power(h, weights, &omega);
        if value > best {
            best = value;
            best_assignment = assignment.clone();
        }
        // odometer increment; lexicographic order makes the tie-break the
        // first assignment reaching the best value
        let mut digit = n;
        loop {
            if digit == 0 {
                return Ok((
                    PhaseConfig::new(best_assignment.iter().map(|&m| m as f64 * step).collect()),
                    best,
                ));
            }
            digit -= 1;
            assignment[digit] += 1;
            if assignment[digit] < levels {
                break;
            }
            assignment[digit] = 0;
        }
    }
}

/// Best point on a uniform continuous grid over `[0, 2π)^(N−1)`, with the
/// first phase pinned to zero by global phase invariance. Accuracy is
/// limited by the grid resolution.
pub fn grid_continuous(
    h: &ChannelMatrix,
    weights: &[f64],
    budget: &OracleBudget,
) -> Result<(PhaseConfig, f64), OracleError> {
    check_channel(h, weights)?;
    let n = h.n_units();
    let steps = budget.grid_steps;
    let free = n - 1;
    let needed = (steps as u128)
        .checked_pow(free as u32)
        .unwrap_or(u128::MAX)
        .max(1);
    budget.check(needed)?;

    let mut omega = vec![0.0; n];
    if free == 0 {
        let value = min_weighted_channel_power(h, weights, &omega);
        return Ok((PhaseConfig::new(omega), value));
    }

    let step = TWO_PI / steps as f64;
    let mut counter = vec![0usize; free];
    let mut best = f64::NEG_INFINITY;
    let mut best_omega = omega.clone();
    loop {
        for (j, &c) in counter.iter().enumerate() {
            omega[j + 1] = c as f64 * step;
        }
        let value = min_weighted_channel_power(h, weights, &omega);
        if value > best {
            best = value;
            best_omega = omega.clone();
        }
        let mut digit = free;
        loop {
            if digit == 0 {
                return Ok((PhaseConfig::new(best_omega), best));
            }
            digit -= 1;
            counter[digit] += 1;
            if counter[digit] < steps {
                break;
            }
            counter[digit] = 0;
        }
    }
}

fn check_channel(h: &ChannelMatrix, weights: &[f64]) -> Result<(), OracleError> {
    if h.n_units() == 0 || h.n_users() == 0 {
        return Err(OracleError::InvalidInput("empty channel".into()));
    }
    if weights.len() != h.n_users() {
        return Err(OracleError::InvalidInput(format!(
            "{} weights for {} users",
            weights.len(),
            h.n_users()
        )));
    }
    if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return Err(OracleError::InvalidInput("weights must be positive".into()));
    }
    Ok(())
}

/// Numerically minimize `max(z) + λ‖z − x‖²` over a box containing the
/// minimizer, by repeated grid scans that shrink the box around the best
/// point. Validates the closed-form envelope without using it.
///
/// Each shrink keeps a margin of `sqrt(ε̂/λ)` around the best grid point,
/// where `ε̂` bounds the scan error; strong convexity of the objective then
/// guarantees the true minimizer stays inside the next box.
pub fn moreau_direct(
    x: &[f64],
    lambda_smooth: f64,
    budget: &OracleBudget,
) -> Result<f64, OracleError> {
    let n = x.len();
    if n == 0 {
        return Err(OracleError::InvalidInput("empty input".into()));
    }
    if n > 3 {
        return Err(OracleError::TooManyDimensions { n, max: 3 });
    }
    if !(lambda_smooth.is_finite() && lambda_smooth > 0.0) {
        return Err(OracleError::InvalidInput(format!(
            "lambda_smooth = {lambda_smooth} must be > 0"
        )));
    }
    let rounds = 6u32;
    let steps = budget.grid_steps;
    let needed = (steps as u128 + 1).pow(n as u32) * rounds as u128;
    budget.check(needed)?;

    let slack = 1.0 / lambda_smooth;
    let x_min = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let x_max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut lo = vec![x_min - slack; n];
    let mut hi = vec![x_max + slack; n];

    let objective = |z: &[f64]| -> f64 {
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let dist: f64 = z.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
        m + lambda_smooth * dist
    };

    let mut best_value = objective(x);
    let mut best_point = x.to_vec();
    for _ in 0..rounds {
        let widths: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
        let mut counter = vec![0usize; n];
        loop {
            let z: Vec<f64> = counter
                .iter()
                .enumerate()
                .map(|(j, &c)| lo[j] + widths[j] * c as f64 / steps as f64)
                .collect();
            let v = objective(&z);
            if v < best_value {
                best_value = v;
                best_point = z;
            }
            let mut digit = n;
            let mut wrapped = false;
            loop {
                if digit == 0 {
                    wrapped = true;
                    break;
                }
                digit -= 1;
                counter[digit] += 1;
                if counter[digit] <= steps {
                    break;
                }
                counter[digit] = 0;
            }
            if wrapped {
                break;
            }
        }
        let delta = widths.iter().cloned().fold(0.0f64, f64::max) / steps as f64;
        // a priori scan error: kink slope at most 2, plus the quadratic term
        let eps_hat = 2.0 * delta + lambda_smooth * (n as f64) * delta * delta;
        let margin = (eps_hat / lambda_smooth).sqrt() + 2.0 * delta;
        for j in 0..n {
            lo[j] = best_point[j] - margin;
            hi[j] = best_point[j] + margin;
        }
    }
    Ok(best_value)
}

/// Best point of a barycentric grid over the simplex, by squared distance to
/// `x`. Agreement with [`crate::solver::project_simplex`] is limited by the
/// grid resolution.
pub fn projection_dense(x: &[f64], budget: &OracleBudget) -> Result<Vec<f64>, OracleError> {
    let n = x.len();
    if n == 0 {
        return Err(OracleError::InvalidInput("empty input".into()));
    }
    if n > 3 {
        return Err(OracleError::TooManyDimensions { n, max: 3 });
    }
    let m = budget.grid_steps;
    let needed: u128 = match n {
        1 => 1,
        2 => m as u128 + 1,
        _ => ((m as u128 + 1) * (m as u128 + 2)) / 2,
    };
    budget.check(needed)?;

    let dist = |p: &[f64]| -> f64 { p.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum() };
    let mut best = vec![0.0; n];
    let mut best_d = f64::INFINITY;
    match n {
        1 => {
            best = vec![1.0];
        }
        2 => {
            for i in 0..=m {
                let p = [i as f64 / m as f64, (m - i) as f64 / m as f64];
                let d = dist(&p);
                if d < best_d {
                    best_d = d;
                    best = p.to_vec();
                }
            }
        }
        _ => {
            for i in 0..=m {
                for j in 0..=(m - i) {
                    let p = [
                        i as f64 / m as f64,
                        j as f64 / m as f64,
                        (m - i - j) as f64 / m as f64,
                    ];
                    let d = dist(&p);
                    if d < best_d {
                        best_d = d;
                        best = p.to_vec();
                    }
                }
            }
        }
    }
    Ok(best)
}
