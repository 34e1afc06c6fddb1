//! Weighted max-min phase design: the smoothed max-min objective, its
//! gradients, the accelerated inner solver, and the adaptive outer loop that
//! drives the smoothing parameter from the active-set gap.
//!
//! The objective components are `f_k(ω) = −α_k |Σ_i h_{i,k} e^{jω_i}|²` with
//! the transmit power factored out, so maximizing the minimum weighted
//! received power is minimizing `max_k f_k`. That max is replaced by its
//! Moreau envelope, whose gradient is a simplex projection, and the envelope
//! sharpness is raised until the active components are equalized within the
//! requested tolerance.

mod agd;
mod maxmin;
mod moreau;
mod objective;
mod simplex;

pub use agd::{agd_minimize, AgdOutcome};
pub use maxmin::{solve_maxmin, Solution, SolverStatus};
pub use moreau::{max_component, moreau_gradient, moreau_value};
pub use objective::{objective_components, objective_jacobian, smoothed_objective, user_powers};
pub use simplex::{project_simplex, SimplexPoint};

use std::fmt;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Active-set membership threshold: simplex weights above this count as
/// positive.
pub(crate) const ACTIVE_EPS: f64 = 1e-12;

/// Errors from solver inputs; non-convergence is reported through
/// [`SolverStatus`], not through this type.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverError {
    EmptyInput,
    NonFiniteInput,
    DimensionMismatch { expected: usize, got: usize },
    InvalidOption(String),
}

impl fmt::Display for SolverError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyInput => write!(f, "input vector is empty"),
            Self::NonFiniteInput => write!(f, "input contains NaN or infinity"),
            Self::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Self::InvalidOption(msg) => write!(f, "invalid solver option: {msg}"),
        }
    }
}

impl std::error::Error for SolverError {}

/// Per-unit phase shifts in radians, normalized into `[0, 2π)`. Tagged with
/// a bit depth once quantized to discrete hardware levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig {
    omega: Vec<f64>,
    bit_depth: Option<u32>,
}

impl PhaseConfig {
    /// Wrap raw phases, normalizing each into `[0, 2π)`.
    pub fn new(omega: Vec<f64>) -> Self {
        let omega = omega.into_iter().map(wrap_phase).collect();
        Self {
            omega,
            bit_depth: None,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            omega: vec![0.0; n],
            bit_depth: None,
        }
    }

    pub(crate) fn with_bit_depth(omega: Vec<f64>, bit_depth: u32) -> Self {
        let omega = omega.into_iter().map(wrap_phase).collect();
        Self {
            omega,
            bit_depth: Some(bit_depth),
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.omega
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// Bit depth of the quantization grid, if this configuration has been
    /// quantized.
    pub fn bit_depth(&self) -> Option<u32> {
        self.bit_depth
    }
}

/// Normalize a phase into `[0, 2π)`.
pub(crate) fn wrap_phase(omega: f64) -> f64 {
    let w = omega.rem_euclid(TWO_PI);
    if w >= TWO_PI {
        0.0
    } else {
        w
    }
}

/// Controls for [`solve_maxmin`]. The smoothing parameter `lambda0` and the
/// inner gradient tolerance are interpreted on the internally normalized
/// objective (best achievable weighted power scaled to one), so the defaults
/// are meaningful regardless of the absolute channel gains; `tau` is in raw
/// objective units, with `None` resolving to `1e-6` of the normalization
/// scale.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Termination tolerance on the active-set gap, in raw objective units.
    /// `None` selects `1e-6 · max_k α_k (Σ_i β_{i,k})²`.
    pub tau: Option<f64>,
    /// Initial smoothing parameter (normalized objective scale).
    pub lambda0: f64,
    /// Cap on gradient steps per inner solve.
    pub inner_max_iters: usize,
    /// Inner stationarity tolerance: stop when `‖∇‖∞ ≤ tol · max(1, |value|)`.
    pub inner_grad_tol: f64,
    /// Cap on smoothing-parameter updates.
    pub outer_max_iters: usize,
    /// Number of initializations: the first starts from `ω = 0`, the rest
    /// from seeded uniform random phases.
    pub restarts: usize,
    /// Seed for the restart initializer.
    pub seed: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tau: None,
            lambda0: 1e-3,
            inner_max_iters: 5000,
            inner_grad_tol: 1e-8,
            outer_max_iters: 100,
            restarts: 1,
            seed: 0,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(SolverError::InvalidOption(format!(
                    "tau = {tau} must be > 0"
                )));
            }
        }
        if !(self.lambda0.is_finite() && self.lambda0 > 0.0) {
            return Err(SolverError::InvalidOption(format!(
                "lambda0 = {} must be > 0",
                self.lambda0
            )));
        }
        if !(self.inner_grad_tol.is_finite() && self.inner_grad_tol > 0.0) {
            return Err(SolverError::InvalidOption(format!(
                "inner_grad_tol = {} must be > 0",
                self.inner_grad_tol
            )));
        }
        if self.inner_max_iters == 0 || self.outer_max_iters == 0 || self.restarts == 0 {
            return Err(SolverError::InvalidOption(
                "iteration caps and restarts must be >= 1".into(),
            ));
        }
        Ok(())
    }
}
