//! Strictly convex ℓp norms, their duals, and closed-form gradients.
//!
//! Every learner and solver in this crate is parameterized by a [`NormSpec`].
//! For a primal norm `‖·‖ₚ` the dual is `‖·‖_q` with `1/p + 1/q = 1`, and the
//! gradients satisfy `‖ℓ(x)‖* = 1`, `ℓ(x)ᵀx = ‖x‖`, `ℓ*(ℓ(x)) = x/‖x‖`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Norms below this value are treated as zero when a gradient is requested.
pub const ZERO_NORM_THRESHOLD: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormError {
    #[error("exponent p = {0} is outside the open interval (1, inf)")]
    InvalidExponent(f64),
    #[error("gradient requested at a zero vector")]
    ZeroVector,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
enum NormKind {
    Lp { p: f64, q: f64 },
}

/// A norm satisfying strict convexity and differentiability away from zero.
///
/// Only the ℓp family is represented today; the private kind enumeration is
/// the extension point for other smooth norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormSpec {
    kind: NormKind,
}

impl Default for NormSpec {
    fn default() -> Self {
        Self::l2()
    }
}

impl NormSpec {
    pub fn l2() -> Self {
        Self {
            kind: NormKind::Lp { p: 2.0, q: 2.0 },
        }
    }

    /// ℓp norm with `1 < p < ∞`.
    pub fn lp(p: f64) -> Result<Self, NormError> {
        if !(p.is_finite() && p > 1.0) {
            return Err(NormError::InvalidExponent(p));
        }
        let q = if p == 2.0 { 2.0 } else { p / (p - 1.0) };
        Ok(Self {
            kind: NormKind::Lp { p, q },
        })
    }

    pub fn p(&self) -> f64 {
        match self.kind {
            NormKind::Lp { p, .. } => p,
        }
    }

    /// Conjugate exponent of the dual norm.
    pub fn q(&self) -> f64 {
        match self.kind {
            NormKind::Lp { q, .. } => q,
        }
    }

    pub fn is_l2(&self) -> bool {
        self.p() == 2.0
    }

    /// The dual norm as a primal norm in its own right.
    pub fn dual(&self) -> Self {
        match self.kind {
            NormKind::Lp { p, q } => Self {
                kind: NormKind::Lp { p: q, q: p },
            },
        }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        lp_norm(x, self.p())
    }

    pub fn dual_norm(&self, w: &[f64]) -> f64 {
        lp_norm(w, self.q())
    }

    /// `ℓ(x) = ∇‖x‖`.
    pub fn grad_norm(&self, x: &[f64]) -> Result<Vec<f64>, NormError> {
        lp_gradient(x, self.p())
    }

    /// `ℓ*(w) = ∇‖w‖*`.
    pub fn grad_dual_norm(&self, w: &[f64]) -> Result<Vec<f64>, NormError> {
        lp_gradient(w, self.q())
    }
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    if p == 2.0 {
        return x.iter().map(|v| v * v).sum::<f64>().sqrt();
    }
    // Scale by the largest magnitude so |xᵢ|^p neither overflows nor underflows.
    let scale = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let sum: f64 = x.iter().map(|v| (v.abs() / scale).powf(p)).sum();
    scale * sum.powf(1.0 / p)
}

fn lp_gradient(x: &[f64], p: f64) -> Result<Vec<f64>, NormError> {
    let n = lp_norm(x, p);
    if !(n >= ZERO_NORM_THRESHOLD) {
        return Err(NormError::ZeroVector);
    }
    if p == 2.0 {
        return Ok(x.iter().map(|v| v / n).collect());
    }
    Ok(x
        .iter()
        .map(|&v| v.signum() * (v.abs() / n).powf(p - 1.0))
        .collect())
}
