//! Moreau envelope of the coordinate maximum. The envelope
//! `M_λ(x) = min_z max(z) + λ‖z−x‖²` has the closed form
//! `λ‖x‖² − ‖2λx − P_Δ(2λx)‖² / (4λ)` and gradient `P_Δ(2λx)`; it
//! under-approximates the max by at most `1/(4λ)` and sharpens as `λ` grows.

use super::simplex::{project_simplex, SimplexPoint};
use super::SolverError;

/// Largest entry of a nonempty vector.
pub fn max_component(x: &[f64]) -> f64 {
    debug_assert!(!x.is_empty());
    x.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn check_lambda(lambda_smooth: f64) -> Result<(), SolverError> {
    if !(lambda_smooth.is_finite() && lambda_smooth > 0.0) {
        return Err(SolverError::InvalidOption(format!(
            "lambda_smooth = {lambda_smooth} must be > 0"
        )));
    }
    Ok(())
}

/// Envelope value `M_λ(x)`.
pub fn moreau_value(x: &[f64], lambda_smooth: f64) -> Result<f64, SolverError> {
    check_lambda(lambda_smooth)?;
    let p = project_simplex(
        &x.iter()
            .map(|&v| 2.0 * lambda_smooth * v)
            .collect::<Vec<_>>(),
    )?;
    // equivalent to the ‖·‖² form but without the large cancelling terms:
    // M_λ(x) = ⟨p, x⟩ − ‖p‖²/(4λ)
    let inner: f64 = p.weights().iter().zip(x).map(|(pi, xi)| pi * xi).sum();
    let p_sq: f64 = p.weights().iter().map(|pi| pi * pi).sum();
    Ok(inner - p_sq / (4.0 * lambda_smooth))
}

/// Envelope gradient `∇M_λ(x) = P_Δ(2λx)`.
pub fn moreau_gradient(x: &[f64], lambda_smooth: f64) -> Result<SimplexPoint, SolverError> {
    check_lambda(lambda_smooth)?;
    project_simplex(
        &x.iter()
            .map(|&v| 2.0 * lambda_smooth * v)
            .collect::<Vec<_>>(),
    )
}
