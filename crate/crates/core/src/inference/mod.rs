//! Mahalanobis distances, χ² p-values and multiple-testing thresholds.

pub mod chi2;
pub mod multiple;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Point2;
use crate::matrix::SymMat2;

pub use chi2::Chi2;
pub use multiple::{adjust_threshold, Adjustment, ErrorControl};

#[derive(Debug, Error, PartialEq)]
pub enum InferenceError {
    #[error("scatter matrix is singular or not positive definite")]
    SingularMatrix,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("level must be positive and finite, got {0}")]
    BadLevel(f64),
}

/// Squared Mahalanobis distance (z − μ)ᵀ Σ⁻¹ (z − μ).
pub fn mahalanobis_sq(z: Point2, mu: Point2, sigma: &SymMat2) -> Result<f64, InferenceError> {
    let inv = sigma.inverse().ok_or(InferenceError::SingularMatrix)?;
    Ok(inv.quad_form(z - mu).max(0.0))
}

/// Upper-tail χ²₂ probabilities exp(−d²/2). Values that underflow are
/// mapped to the smallest positive normal double.
pub fn pvalues(d2: &[f64]) -> Vec<f64> {
    d2.iter()
        .map(|&d| {
            let p = (-d / 2.0).exp();
            if p < f64::MIN_POSITIVE {
                log::warn!("p-value for d² = {d} underflows; clamped to {:e}", f64::MIN_POSITIVE);
                f64::MIN_POSITIVE
            } else {
                p
            }
        })
        .collect()
}

/// χ²₂ critical squared distance for tail probability `t_adj`.
pub fn critical_distance(t_adj: f64) -> f64 {
    (-2.0 * t_adj.ln()).max(0.0)
}

/// Per-point test statistics and the adjusted decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestOutcome {
    pub d2: Vec<f64>,
    pub pvalues: Vec<f64>,
    pub method: ErrorControl,
    pub q: f64,
    pub t_adj: f64,
    pub d2_adj: f64,
    pub rejected: Vec<usize>,
}

impl TestOutcome {
    pub fn is_rejected(&self, i: usize) -> bool {
        self.rejected.binary_search(&i).is_ok()
    }
}

/// Runs the full testing step for every point against `(location, scatter)`.
pub fn test_points(
    points: &[Point2],
    location: Point2,
    scatter: &SymMat2,
    method: ErrorControl,
    q: f64,
) -> Result<TestOutcome, InferenceError> {
    let d2 = points
        .iter()
        .map(|&z| mahalanobis_sq(z, location, scatter))
        .collect::<Result<Vec<_>, _>>()?;
    let pvalues = pvalues(&d2);
    let Adjustment { t_adj, rejected } = adjust_threshold(&pvalues, method, q)?;
    Ok(TestOutcome { d2, pvalues, method, q, t_adj, d2_adj: critical_distance(t_adj), rejected })
}

/// Fixed inflation factor that flags `target` of a p-variate normal sample
/// when the bag boundary sits at the median squared distance.
pub fn fixed_proportion_factor(p: u32, target: f64) -> Result<f64, InferenceError> {
    if !(target > 0.0 && target < 1.0) {
        return Err(InferenceError::Domain(format!("target proportion {target} outside (0, 1)")));
    }
    let chi = Chi2::new(p)?;
    Ok((chi.quantile_upper(target)? / chi.quantile(0.5)?).sqrt())
}
