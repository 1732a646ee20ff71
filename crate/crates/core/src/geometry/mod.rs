//! Convex-hull distance, dual certificates, and the certificate-to-classifier map.
//!
//! The maximum margin problem over two labeled point sets is equivalent to
//! finding the nearest pair of points `(v₊, v₋)` between their convex hulls.
//! The pair certifies the hull distance `τ`, and `w = ℓ(v₊ − v₋)`,
//! `b = −½wᵀ(v₊ + v₋)` attains margin `τ/2` on every point.

mod nearest;

pub use nearest::{HullSolver, Method, SolveStats};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{dot, lerp, sub};
use crate::norms::{NormError, NormSpec};
use crate::types::{Label, LabeledPoint, LinearClassifier};

pub const DEFAULT_TOL: f64 = 1e-9;
/// Hull distances at or below this value are reported as [`GeometryError::NotSeparable`].
pub const SEPARABILITY_THRESHOLD: f64 = 1e-10;
pub const DEGENERATE_THRESHOLD: f64 = 1e-14;

const LINE_SEARCH_MAX_ITER: usize = 100;
const LINE_SEARCH_WIDTH: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("no points with label {0}")]
    EmptyClass(Label),
    #[error("classes are not strictly separable (hull distance {distance:e})")]
    NotSeparable { distance: f64 },
    #[error("certificates coincide; no classifier direction")]
    DegenerateCertificates,
    #[error("classifier weight has zero dual norm")]
    ZeroClassifier,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("nearest-point solver did not converge after {iterations} iterations (distance {distance}, gap {gap:e})")]
    NoConvergence {
        iterations: usize,
        distance: f64,
        gap: f64,
    },
    #[error(transparent)]
    Norm(#[from] NormError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentMin {
    pub beta: f64,
    pub value: f64,
}

/// Minimizes `‖u − βz‖` over `β ∈ [0, 1]`.
///
/// Closed form for ℓ2; bisection on the derivative of the convex 1-D
/// objective otherwise.
pub fn segment_beta_star(u: &[f64], z: &[f64], norm: &NormSpec) -> SegmentMin {
    let at = |beta: f64| -> f64 {
        let r: Vec<f64> = u.iter().zip(z).map(|(a, b)| a - beta * b).collect();
        norm.norm(&r)
    };
    if z.iter().all(|&v| v == 0.0) {
        return SegmentMin {
            beta: 0.0,
            value: norm.norm(u),
        };
    }
    let beta = if norm.is_l2() {
        let uz = dot(u, z);
        let zz = dot(z, z);
        if uz < 0.0 {
            0.0
        } else if uz <= zz {
            uz / zz
        } else {
            1.0
        }
    } else {
        // d/dβ ‖u − βz‖ = −ℓ(u − βz)ᵀz; a zero residual is the minimizer.
        let slope = |beta: f64| -> Option<f64> {
            let r: Vec<f64> = u.iter().zip(z).map(|(a, b)| a - beta * b).collect();
            norm.grad_norm(&r).ok().map(|g| -dot(&g, z))
        };
        match (slope(0.0), slope(1.0)) {
            (None, _) => 0.0,
            (Some(s0), _) if s0 >= 0.0 => 0.0,
            (_, Some(s1)) if s1 <= 0.0 => 1.0,
            (_, None) => 1.0,
            _ => {
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                for _ in 0..LINE_SEARCH_MAX_ITER {
                    if hi - lo <= LINE_SEARCH_WIDTH {
                        break;
                    }
                    let mid = 0.5 * (lo + hi);
                    match slope(mid) {
                        None => {
                            lo = mid;
                            hi = mid;
                        }
                        Some(s) if s < 0.0 => lo = mid,
                        Some(_) => hi = mid,
                    }
                }
                0.5 * (lo + hi)
            }
        }
    };
    SegmentMin {
        beta,
        value: at(beta),
    }
}

/// Nearest points of the two hulls with their convex weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificatePair {
    pub v_plus: Vec<f64>,
    pub v_minus: Vec<f64>,
    pub coeffs_plus: Vec<f64>,
    pub coeffs_minus: Vec<f64>,
}

impl CertificatePair {
    pub fn singleton(v_plus: Vec<f64>, v_minus: Vec<f64>) -> Self {
        Self {
            v_plus,
            v_minus,
            coeffs_plus: vec![1.0],
            coeffs_minus: vec![1.0],
        }
    }

    pub fn distance(&self, norm: &NormSpec) -> f64 {
        norm.norm(&sub(&self.v_plus, &self.v_minus))
    }

    /// Checks both convex-weight invariants against the source points.
    pub fn is_consistent<P: AsRef<[f64]>>(&self, plus: &[P], minus: &[P], tol: f64) -> bool {
        fn side<P: AsRef<[f64]>>(v: &[f64], coeffs: &[f64], pts: &[P], tol: f64) -> bool {
            if coeffs.len() != pts.len() || coeffs.iter().any(|&c| c < 0.0) {
                return false;
            }
            if (coeffs.iter().sum::<f64>() - 1.0).abs() > tol {
                return false;
            }
            let mut acc = vec![0.0; v.len()];
            for (c, p) in coeffs.iter().zip(pts) {
                crate::linalg::axpy(*c, p.as_ref(), &mut acc);
            }
            acc.iter().zip(v).all(|(a, b)| (a - b).abs() <= tol * (1.0 + b.abs()))
        }
        side(&self.v_plus, &self.coeffs_plus, plus, tol)
            && side(&self.v_minus, &self.coeffs_minus, minus, tol)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxMarginSolution {
    pub classifier: LinearClassifier,
    pub gamma: f64,
    pub certificates: CertificatePair,
    pub tau: f64,
}

/// `w = ℓ(v₊ − v₋)`, `b = −½wᵀ(v₊ + v₋)`, `γ = ‖v₊ − v₋‖/2`.
pub fn classifier_from_certificates(
    cert: &CertificatePair,
    norm: &NormSpec,
) -> Result<(LinearClassifier, f64), GeometryError> {
    let diff = sub(&cert.v_plus, &cert.v_minus);
    let dist = norm.norm(&diff);
    if dist <= DEGENERATE_THRESHOLD {
        return Err(GeometryError::DegenerateCertificates);
    }
    let w = norm.grad_norm(&diff)?;
    let mid = lerp(&cert.v_plus, &cert.v_minus, 0.5);
    let b = -dot(&w, &mid);
    Ok((LinearClassifier::new(w, b), 0.5 * dist))
}

fn solution_from(cert: CertificatePair, norm: &NormSpec) -> Result<MaxMarginSolution, GeometryError> {
    let (classifier, gamma) = classifier_from_certificates(&cert, norm)?;
    Ok(MaxMarginSolution {
        classifier,
        gamma,
        tau: 2.0 * gamma,
        certificates: cert,
    })
}

/// Solves for the nearest points of `conv(plus)` and `conv(minus)`.
pub fn hull_distance<P: AsRef<[f64]>>(
    plus: &[P],
    minus: &[P],
    norm: &NormSpec,
    tol: f64,
) -> Result<MaxMarginSolution, GeometryError> {
    if plus.is_empty() {
        return Err(GeometryError::EmptyClass(Label::Positive));
    }
    if minus.is_empty() {
        return Err(GeometryError::EmptyClass(Label::Negative));
    }
    let dim = plus[0].as_ref().len();
    let mut solver = HullSolver::new(*norm, dim);
    for p in plus {
        solver.push(p.as_ref().to_vec(), true)?;
    }
    for q in minus {
        solver.push(q.as_ref().to_vec(), false)?;
    }
    solve_to_solution(&mut solver, norm, tol)
}

/// Runs (or resumes) `solver` and converts its certificates into a solution.
pub fn solve_to_solution(
    solver: &mut HullSolver,
    norm: &NormSpec,
    tol: f64,
) -> Result<MaxMarginSolution, GeometryError> {
    solver.solve(tol)?;
    let (coeffs_plus, coeffs_minus) = solver.coefficients();
    let cert = CertificatePair {
        v_plus: solver.v_plus().to_vec(),
        v_minus: solver.v_minus().to_vec(),
        coeffs_plus,
        coeffs_minus,
    };
    if cert.distance(norm) <= SEPARABILITY_THRESHOLD {
        return Err(GeometryError::NotSeparable {
            distance: cert.distance(norm),
        });
    }
    solution_from(cert, norm)
}

/// Offline maximum margin classifier for a labeled set.
pub fn max_margin_offline(
    points: &[LabeledPoint],
    norm: &NormSpec,
    tol: f64,
) -> Result<MaxMarginSolution, GeometryError> {
    let plus: Vec<&[f64]> = points
        .iter()
        .filter(|p| p.y == Label::Positive)
        .map(|p| p.x.as_slice())
        .collect();
    let minus: Vec<&[f64]> = points
        .iter()
        .filter(|p| p.y == Label::Negative)
        .map(|p| p.x.as_slice())
        .collect();
    hull_distance(&plus, &minus, norm, tol)
}

/// Result of adding one point to the two-certificate problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreePointUpdate {
    pub solution: MaxMarginSolution,
    /// Weight moved from the old certificate onto `x`.
    pub beta: f64,
}

/// Nearest points between `conv{v₊, x}` and `{v₋}` (positive `x`) or
/// `{v₊}` and `conv{v₋, x}` (negative `x`).
///
/// Certificate coefficients are over `[old certificate, x]` on the side that
/// gained the point and `[old certificate]` on the other.
pub fn three_point_update(
    v_plus: &[f64],
    v_minus: &[f64],
    x: &[f64],
    y: Label,
    norm: &NormSpec,
) -> Result<ThreePointUpdate, GeometryError> {
    if x.len() != v_plus.len() {
        return Err(GeometryError::DimensionMismatch {
            expected: v_plus.len(),
            found: x.len(),
        });
    }
    let u = sub(v_plus, v_minus);
    let cert = match y {
        Label::Positive => {
            let z = sub(v_plus, x);
            let seg = segment_beta_star(&u, &z, norm);
            check_distance(seg.value)?;
            let v = lerp(v_plus, x, seg.beta);
            (
                CertificatePair {
                    v_plus: v,
                    v_minus: v_minus.to_vec(),
                    coeffs_plus: vec![1.0 - seg.beta, seg.beta],
                    coeffs_minus: vec![1.0],
                },
                seg.beta,
            )
        }
        Label::Negative => {
            let z = sub(x, v_minus);
            let seg = segment_beta_star(&u, &z, norm);
            check_distance(seg.value)?;
            let v = lerp(v_minus, x, seg.beta);
            (
                CertificatePair {
                    v_plus: v_plus.to_vec(),
                    v_minus: v,
                    coeffs_plus: vec![1.0],
                    coeffs_minus: vec![1.0 - seg.beta, seg.beta],
                },
                seg.beta,
            )
        }
    };
    let beta = cert.1;
    Ok(ThreePointUpdate {
        solution: solution_from(cert.0, norm)?,
        beta,
    })
}

fn check_distance(d: f64) -> Result<(), GeometryError> {
    if d <= SEPARABILITY_THRESHOLD {
        Err(GeometryError::NotSeparable { distance: d })
    } else {
        Ok(())
    }
}

/// `max{0, y(wᵀx + b)} / ‖w‖*`.
pub fn margin(x: &[f64], y: Label, w: &[f64], b: f64, norm: &NormSpec) -> Result<f64, GeometryError> {
    let dn = norm.dual_norm(w);
    if dn <= 0.0 {
        return Err(GeometryError::ZeroClassifier);
    }
    Ok((y.sign() * (dot(w, x) + b)).max(0.0) / dn)
}

/// Signed minimum of `y(wᵀx + b)/‖w‖*` over a data set.
pub fn min_signed_margin(
    points: &[LabeledPoint],
    classifier: &LinearClassifier,
    norm: &NormSpec,
) -> Result<f64, GeometryError> {
    let dn = norm.dual_norm(&classifier.w);
    if dn <= 0.0 {
        return Err(GeometryError::ZeroClassifier);
    }
    Ok(points
        .iter()
        .map(|p| classifier.functional_margin(&p.x, p.y))
        .fold(f64::INFINITY, f64::min)
        / dn)
}
