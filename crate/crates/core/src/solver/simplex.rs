//! Exact Euclidean projection onto the probability simplex by the
//! sort-then-threshold rule: `p_i = max(x_i − θ*, 0)` with the unique
//! threshold that makes the positive parts sum to one.

use super::SolverError;

/// A point on the probability simplex: nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexPoint {
    weights: Vec<f64>,
}

impl SimplexPoint {
    pub(crate) fn from_weights(weights: Vec<f64>) -> Self {
        debug_assert!(weights.iter().all(|&w| w >= 0.0));
        debug_assert!((weights.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Indices with weight above the given threshold.
    pub fn support(&self, eps: f64) -> Vec<usize> {
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > eps)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Euclidean projection of `x` onto the probability simplex.
pub fn project_simplex(x: &[f64]) -> Result<SimplexPoint, SolverError> {
    if x.is_empty() {
        return Err(SolverError::EmptyInput);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(SolverError::NonFiniteInput);
    }
    let n = x.len();
    if n == 1 {
        return Ok(SimplexPoint::from_weights(vec![1.0]));
    }

    let mut sorted = x.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    // Largest prefix whose running threshold keeps its last element positive.
    let mut cumsum = 0.0;
    let mut theta = sorted[0] - 1.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j as f64 + 1.0);
        if u - candidate > 0.0 {
            theta = candidate;
        } else {
            break;
        }
    }

    let mut weights: Vec<f64> = x.iter().map(|&v| (v - theta).max(0.0)).collect();
    // Remove the rounding drift so the invariant holds exactly.
    let sum: f64 = weights.iter().sum();
    if (sum - 1.0).abs() > 1e-15 && sum > 0.0 {
        for w in &mut weights {
            *w /= sum;
        }
    }
    Ok(SimplexPoint::from_weights(weights))
}
