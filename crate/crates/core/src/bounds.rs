//! Contraction factors and mistake-bound calculators.
//!
//! `κ∘(δ, η) = max { min_{β∈[0,1]} ‖u − βz‖ : ‖u‖ = 1, ‖z‖ ≤ δ, ℓ(u)ᵀz ≥ η }`
//! bounds the ratio of consecutive margins when a point violates the current
//! margin, and `κ(r, φ) = κ∘(r/2, (1−φ)/2)`. With `r = D/γ*` the number of
//! running-phase steps with `aₜ < φγₜ` is at most `log(γ₃/γ*) / −log κ(r, φ)`,
//! and zero when the program defining `κ` is infeasible.

use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, PI};

use crate::geometry::{max_margin_offline, segment_beta_star, GeometryError, DEFAULT_TOL};
use crate::linalg::{dot, sub};
use crate::norms::NormSpec;
use crate::types::{Label, LabeledPoint};

/// `κ∘` or `κ`; the infeasible case stands for `−∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Kappa {
    Value(f64),
    Infeasible,
}

impl Kappa {
    pub fn value(self) -> Option<f64> {
        match self {
            Kappa::Value(v) => Some(v),
            Kappa::Infeasible => None,
        }
    }

    pub fn is_infeasible(self) -> bool {
        self == Kappa::Infeasible
    }
}

/// Which closed-form piece of `κ∘` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaBranch {
    /// `max{0, η} > δ`.
    Infeasible,
    /// `η ≤ 0 ≤ δ`: value 1.
    Unit,
    /// `0 < η ≤ min{δ², δ}`: `√(1 − η²/δ²)`.
    Angle,
    /// `δ² < η ≤ δ`: `√(1 + δ² − 2η)`.
    Endpoint,
}

pub fn kappa_circ_l2_branch(delta: f64, eta: f64) -> KappaBranch {
    if eta.max(0.0) > delta {
        KappaBranch::Infeasible
    } else if eta <= 0.0 {
        KappaBranch::Unit
    } else if eta <= delta * delta {
        KappaBranch::Angle
    } else {
        KappaBranch::Endpoint
    }
}

/// Closed-form `κ∘` for the ℓ2 norm.
pub fn kappa_circ_l2(delta: f64, eta: f64) -> Kappa {
    match kappa_circ_l2_branch(delta, eta) {
        KappaBranch::Infeasible => Kappa::Infeasible,
        KappaBranch::Unit => Kappa::Value(1.0),
        KappaBranch::Angle => Kappa::Value((1.0 - (eta / delta).powi(2)).max(0.0).sqrt()),
        KappaBranch::Endpoint => Kappa::Value((1.0 + delta * delta - 2.0 * eta).max(0.0).sqrt()),
    }
}

/// Numeric `κ∘` for any ℓp norm by a two-dimensional search.
///
/// For fixed `u` and a direction `ẑ`, shrinking `z` along `ẑ` can only move
/// the segment `[0, z]` away from `u`, so the best `z` has the smallest
/// feasible length `η / ℓ(u)ᵀẑ`. The search is therefore over the angle of
/// `u` (restricted to `[0, π/4]` by the symmetries of ℓp, and fixed for ℓ2)
/// and the angle of `ẑ`. Restricting to the plane is an assumption for
/// `p ≠ 2`; the tests cross-check it against random three-dimensional
/// candidates. A coarse grid is refined by pattern search down to
/// `resolution` radians.
pub fn kappa_circ_numeric(delta: f64, eta: f64, norm: &NormSpec, resolution: f64) -> Kappa {
    if eta.max(0.0) > delta {
        return Kappa::Infeasible;
    }
    if eta <= 0.0 {
        return Kappa::Value(1.0);
    }
    let resolution = resolution.max(1e-9);
    let objective = |alpha: f64, theta: f64| -> f64 { planar_value(delta, eta, alpha, theta, norm) };
    let alpha_max = if norm.is_l2() { 0.0 } else { FRAC_PI_4 };
    let coarse = (PI / 360.0).max(resolution);
    let n_theta = (2.0 * PI / coarse).ceil() as usize;
    let n_alpha = if alpha_max == 0.0 { 1 } else { (alpha_max / coarse).ceil() as usize + 1 };

    let mut seeds: Vec<(f64, f64, f64)> = Vec::new();
    for ia in 0..n_alpha {
        let alpha = if n_alpha == 1 { 0.0 } else { alpha_max * ia as f64 / (n_alpha - 1) as f64 };
        for it in 0..n_theta {
            let theta = 2.0 * PI * it as f64 / n_theta as f64;
            let v = objective(alpha, theta);
            if v.is_finite() {
                seeds.push((v, alpha, theta));
            }
        }
    }
    if seeds.is_empty() {
        // Feasible only on a set thinner than the grid (η = δ exactly): the
        // aligned choice z = δℓ*(…) is the unique feasible direction.
        return Kappa::Value(aligned_value(delta, eta, norm));
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    seeds.truncate(8);

    let mut best = f64::NEG_INFINITY;
    for (mut v, mut alpha, mut theta) in seeds {
        let mut step = coarse;
        while step >= resolution * 0.5 {
            let mut improved = false;
            for (da, dt) in [(0.0, 1.0), (0.0, -1.0), (1.0, 0.0), (-1.0, 0.0), (1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
                if alpha_max == 0.0 && da != 0.0 {
                    continue;
                }
                let a = (alpha + da * step).clamp(0.0, alpha_max);
                let t = theta + dt * step;
                let cand = objective(a, t);
                if cand > v {
                    v = cand;
                    alpha = a;
                    theta = t;
                    improved = true;
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    Kappa::Value(best.max(aligned_value(delta, eta, norm)))
}

fn unit_in(norm: &NormSpec, angle: f64) -> Vec<f64> {
    let v = [angle.cos(), angle.sin()];
    let n = norm.norm(&v);
    vec![v[0] / n, v[1] / n]
}

fn planar_value(delta: f64, eta: f64, alpha: f64, theta: f64, norm: &NormSpec) -> f64 {
    let u = unit_in(norm, alpha);
    let g = norm.grad_norm(&u).expect("unit vector");
    let zhat = unit_in(norm, theta);
    let gz = dot(&g, &zhat);
    if gz <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let s = eta / gz;
    if s > delta {
        return f64::NEG_INFINITY;
    }
    let z: Vec<f64> = zhat.iter().map(|c| s * c).collect();
    segment_beta_star(&u, &z, norm).value
}

/// Value at `u = e₁`, `z = δ·ℓ*(ℓ(e₁))`, feasible whenever `η ≤ δ`.
fn aligned_value(delta: f64, eta: f64, norm: &NormSpec) -> f64 {
    if eta > delta {
        return f64::NEG_INFINITY;
    }
    let u = [1.0, 0.0];
    let z = [delta, 0.0];
    segment_beta_star(&u, &z, norm).value
}

/// Resolution used by [`kappa`] for norms without a closed form.
pub const NUMERIC_KAPPA_RESOLUTION: f64 = 1e-3;

/// `κ(r, φ) = κ∘(r/2, (1−φ)/2)`.
pub fn kappa(r: f64, phi: f64, norm: &NormSpec) -> Kappa {
    let (delta, eta) = (r / 2.0, (1.0 - phi) / 2.0);
    if norm.is_l2() {
        kappa_circ_l2(delta, eta)
    } else {
        kappa_circ_numeric(delta, eta, norm, NUMERIC_KAPPA_RESOLUTION)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundInputs {
    pub r: f64,
    pub phi: f64,
    pub gamma3: f64,
    pub gamma_star: f64,
}

impl BoundInputs {
    pub fn new(r: f64, phi: f64, gamma3: f64, gamma_star: f64) -> Self {
        Self {
            r,
            phi,
            gamma3,
            gamma_star,
        }
    }

    pub fn log_ratio(&self) -> f64 {
        (self.gamma3 / self.gamma_star).ln()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MistakeBound {
    /// Upper bound on `m(φ)`; may be infinite.
    pub value: f64,
    pub kappa: Kappa,
}

/// Bound on running-phase violations `m(φ)` through `κ(r, φ)`.
pub fn m_phi_bound(inputs: &BoundInputs, norm: &NormSpec) -> MistakeBound {
    let k = kappa(inputs.r, inputs.phi, norm);
    MistakeBound {
        value: bound_from_kappa(inputs.log_ratio(), k),
        kappa: k,
    }
}

fn bound_from_kappa(log_ratio: f64, k: Kappa) -> f64 {
    match k {
        Kappa::Infeasible => 0.0,
        _ if log_ratio <= 0.0 => 0.0,
        Kappa::Value(v) if v >= 1.0 => f64::INFINITY,
        Kappa::Value(v) if v <= 0.0 => 0.0,
        Kappa::Value(v) => log_ratio / -v.ln(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExplicitBranch {
    /// `r/(1−φ) < 1`.
    Zero,
    /// `1 ≤ r/(1−φ) < √2`.
    Middle,
    /// `r/(1−φ) ≥ √2`.
    Large,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExplicitBound {
    pub value: f64,
    pub branch: ExplicitBranch,
}

/// The three-branch ℓ2 expression for the bound on `m(φ)`, written in terms of
/// `r/(1−φ)`.
///
/// For `φ = 0` this agrees with [`m_phi_bound`]. For `φ > 0` the branch
/// switch of the κ-based bound is at `r² = 2(1−φ)` rather than
/// `r² = 2(1−φ)²`, and the two expressions can differ.
pub fn m_phi_bound_l2_explicit(inputs: &BoundInputs) -> ExplicitBound {
    let BoundInputs { r, phi, .. } = *inputs;
    let ratio = r / (1.0 - phi);
    let lr = inputs.log_ratio();
    let finish = |den: f64| if lr <= 0.0 { 0.0 } else if den >= 1.0 { f64::INFINITY } else { 2.0 * lr / -den.ln() };
    if ratio < 1.0 {
        ExplicitBound {
            value: 0.0,
            branch: ExplicitBranch::Zero,
        }
    } else if ratio < 2f64.sqrt() {
        ExplicitBound {
            value: finish(phi + r * r / 4.0),
            branch: ExplicitBranch::Middle,
        }
    } else {
        ExplicitBound {
            value: finish(1.0 - ((1.0 - phi) / r).powi(2)),
            branch: ExplicitBranch::Large,
        }
    }
}

/// `γ₃ ≤ 2(D + γ*)`.
pub fn gamma3_upper_bound(d: f64, gamma_star: f64) -> f64 {
    2.0 * (d + gamma_star)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub d_plus: f64,
    pub d_minus: f64,
    pub d: f64,
    pub d_bar: f64,
    pub gamma_star: f64,
    pub r: f64,
}

/// Class diameters, largest norm, optimal margin and `r = D/γ*`.
pub fn dataset_stats(points: &[LabeledPoint], norm: &NormSpec) -> Result<DatasetStats, GeometryError> {
    let sol = max_margin_offline(points, norm, DEFAULT_TOL)?;
    let plus: Vec<&[f64]> = points.iter().filter(|p| p.y == Label::Positive).map(|p| p.x.as_slice()).collect();
    let minus: Vec<&[f64]> = points.iter().filter(|p| p.y == Label::Negative).map(|p| p.x.as_slice()).collect();
    let d_plus = diameter(&plus, norm);
    let d_minus = diameter(&minus, norm);
    let d = d_plus.max(d_minus);
    let d_bar = points.iter().map(|p| norm.norm(&p.x)).fold(0.0, f64::max);
    Ok(DatasetStats {
        d_plus,
        d_minus,
        d,
        d_bar,
        gamma_star: sol.gamma,
        r: d / sol.gamma,
    })
}

/// Exact diameter `max ‖xᵢ − xⱼ‖` with triangle-inequality pruning around the
/// centroid.
pub fn diameter(points: &[&[f64]], norm: &NormSpec) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let dim = points[0].len();
    let mut centroid = vec![0.0; dim];
    for p in points {
        crate::linalg::axpy(1.0 / points.len() as f64, p, &mut centroid);
    }
    let mut order: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .map(|(i, p)| (norm.norm(&sub(p, &centroid)), i))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = 0.0_f64;
    for (a, &(ra, i)) in order.iter().enumerate() {
        if 2.0 * ra <= best {
            break;
        }
        for &(rb, j) in &order[a + 1..] {
            if ra + rb <= best {
                break;
            }
            best = best.max(norm.norm(&sub(points[i], points[j])));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kappa_circ_examples() {
        assert_eq!(kappa_circ_l2(1.0, -0.5), Kappa::Value(1.0));
        let v = kappa_circ_l2(1.0, 0.5).value().unwrap();
        assert!((v - 0.75f64.sqrt()).abs() < 1e-15);
        assert_eq!(kappa_circ_l2(0.3, 0.5), Kappa::Infeasible);
        assert_eq!(kappa_circ_l2(-0.1, -0.5), Kappa::Infeasible);
        assert_eq!(kappa_circ_l2(0.0, 0.0), Kappa::Value(1.0));
    }

    #[test]
    fn kappa_examples() {
        assert_eq!(kappa(0.5, 0.0, &NormSpec::l2()), Kappa::Infeasible);
        let v = kappa(2.0, 0.0, &NormSpec::l2()).value().unwrap();
        assert!((v - 0.75f64.sqrt()).abs() < 1e-15);
        let v = kappa(1.2, 0.0, &NormSpec::l2()).value().unwrap();
        assert!((v - 0.6).abs() < 1e-12);
        let n = kappa_circ_numeric(0.6, 0.5, &NormSpec::l2(), 1e-3).value().unwrap();
        assert!((n - 0.6).abs() < 1e-2);
    }

    #[test]
    fn numeric_matches_closed_form_in_l2() {
        for &(d, e) in &[(1.0, 0.5), (0.6, 0.5), (2.0, 0.3), (0.9, 0.85), (0.5, 0.1)] {
            let a = kappa_circ_l2(d, e).value().unwrap();
            let b = kappa_circ_numeric(d, e, &NormSpec::l2(), 1e-3).value().unwrap();
            assert!((a - b).abs() < 1e-2, "({d},{e}): {a} vs {b}");
        }
    }

    #[test]
    fn numeric_general_p_trichotomy() {
        for p in [1.5, 3.0] {
            let spec = NormSpec::lp(p).unwrap();
            assert_eq!(kappa_circ_numeric(1.0, -0.2, &spec, 1e-2), Kappa::Value(1.0));
            assert_eq!(kappa_circ_numeric(1.0, 0.0, &spec, 1e-2), Kappa::Value(1.0));
            assert_eq!(kappa_circ_numeric(0.2, 0.3, &spec, 1e-2), Kappa::Infeasible);
            let v = kappa_circ_numeric(0.8, 0.3, &spec, 1e-2).value().unwrap();
            assert!(v > 0.0 && v < 1.0, "p={p}: {v}");
        }
    }

    #[test]
    fn planar_search_dominates_random_3d_candidates() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for p in [1.5, 3.0] {
            let spec = NormSpec::lp(p).unwrap();
            let (delta, eta) = (0.8, 0.3);
            let k = kappa_circ_numeric(delta, eta, &spec, 1e-3).value().unwrap();
            for _ in 0..20_000 {
                let mut u: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
                let n = spec.norm(&u);
                u.iter_mut().for_each(|v| *v /= n);
                let z: Vec<f64> = (0..3).map(|_| rng.random_range(-delta..delta)).collect();
                if spec.norm(&z) > delta || dot(&spec.grad_norm(&u).unwrap(), &z) < eta {
                    continue;
                }
                let v = segment_beta_star(&u, &z, &spec).value;
                assert!(v <= k + 1e-3, "p={p}: random {v} beats planar {k}");
            }
        }
    }

    #[test]
    fn branch_boundaries_are_continuous() {
        for i in 1..50 {
            let delta = i as f64 / 50.0;
            // η = δ² boundary, approached from both pieces.
            let eta = delta * delta;
            let angle = (1.0 - (eta / delta).powi(2)).sqrt();
            let endpoint = (1.0 + delta * delta - 2.0 * eta).sqrt();
            assert!((angle - endpoint).abs() <= 1e-12);
            assert_eq!(kappa_circ_l2(delta, 0.0), Kappa::Value(1.0));
        }
    }

    #[test]
    fn m_phi_examples() {
        let l2 = NormSpec::l2();
        assert_eq!(m_phi_bound(&BoundInputs::new(0.9, 0.0, 3.0, 1.0), &l2).value, 0.0);
        let b = m_phi_bound(&BoundInputs::new(2.0, 0.0, 4.0, 1.0), &l2).value;
        assert!((b - 2.0 * 4f64.ln() / -(0.75f64.ln())).abs() < 1e-12);
        assert!((b - 9.6378).abs() < 1e-3);
        assert_eq!(m_phi_bound(&BoundInputs::new(2.0, 0.3, 1.0, 1.0), &l2).value, 0.0);
        let e = m_phi_bound_l2_explicit(&BoundInputs::new(2.0, 0.0, 4.0, 1.0));
        assert_eq!(e.branch, ExplicitBranch::Large);
        assert!((e.value - b).abs() < 1e-12);
    }

    #[test]
    fn gamma3_examples() {
        assert!((gamma3_upper_bound(220.43, 1.0) - 442.86).abs() < 1e-9);
        assert_eq!(gamma3_upper_bound(0.0, 1.0), 2.0);
    }

    #[test]
    fn example1_stats() {
        let c = 10.0;
        let r = 2.0 / c;
        let pts = vec![
            LabeledPoint::new(vec![c, 1.0], Label::Positive),
            LabeledPoint::new(vec![c, -1.0], Label::Negative),
            LabeledPoint::new(vec![c + r, -1.0], Label::Negative),
        ];
        let s = dataset_stats(&pts, &NormSpec::l2()).unwrap();
        assert!((s.d - 0.2).abs() < 1e-12);
        assert!((s.gamma_star - 1.0).abs() < 1e-9);
        assert!((s.d_bar - ((c + r).powi(2) + 1.0).sqrt()).abs() < 1e-12);
        assert!((s.r - 0.2).abs() < 1e-9);
        let two = vec![
            LabeledPoint::new(vec![0.0, 1.0], Label::Positive),
            LabeledPoint::new(vec![0.0, -1.0], Label::Negative),
        ];
        let s = dataset_stats(&two, &NormSpec::l2()).unwrap();
        assert_eq!((s.d, s.r), (0.0, 0.0));
    }

    proptest! {
        #[test]
        fn diameter_matches_brute_force(pts in prop::collection::vec(prop::collection::vec(-5.0..5.0f64, 3), 2..40)) {
            let refs: Vec<&[f64]> = pts.iter().map(|p| p.as_slice()).collect();
            let l2 = NormSpec::l2();
            let mut brute = 0.0_f64;
            for i in 0..pts.len() {
                for j in 0..pts.len() {
                    brute = brute.max(l2.norm(&sub(&pts[i], &pts[j])));
                }
            }
            prop_assert!((diameter(&refs, &l2) - brute).abs() <= 1e-12);
        }

        #[test]
        fn trichotomy_and_monotonicity(delta in -0.5..2.0f64, eta in -1.0..2.0f64, dd in 0.0..0.5f64, de in 0.0..0.5f64) {
            let k = kappa_circ_l2(delta, eta);
            if eta.max(0.0) > delta {
                prop_assert_eq!(k, Kappa::Infeasible);
            } else if eta <= 0.0 {
                prop_assert_eq!(k, Kappa::Value(1.0));
            } else {
                let v = k.value().unwrap();
                prop_assert!(v > 0.0 || (eta == delta && delta >= 1.0));
                prop_assert!(v < 1.0);
            }
            // Non-decreasing in δ, non-increasing in η (Infeasible is −∞).
            let rank = |k: Kappa| k.value().unwrap_or(f64::NEG_INFINITY);
            prop_assert!(rank(kappa_circ_l2(delta + dd, eta)) >= rank(k) - 1e-15);
            prop_assert!(rank(kappa_circ_l2(delta, eta + de)) <= rank(k) + 1e-15);
        }
    }
}
