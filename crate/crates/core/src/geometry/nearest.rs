//! Nearest points between two convex hulls.
//!
//! Two solvers share one state type:
//!
//! * [`Method::WorkingSet`] (ℓ2 only): column generation. Wolfe-style face
//!   iterations solve the problem restricted to a small working set exactly; a full scan then adds the most violating points of each
//!   hull, and drops idle ones when the set grows past a cap.
//! * [`Method::Pairwise`] (any norm): MDM-style pairwise steps that move
//!   weight from the worst active vertex to the Frank-Wolfe vertex of one hull,
//!   with an exact 1-D line search along the segment.
//!
//! Both stop on the same certified duality gap. With `v = v₊ − v₋` and
//! `g = ℓ(v)`, every point of `conv(V₊) − conv(V₋)` has norm at least
//! `minᵢ gᵀpᵢ − maxⱼ gᵀqⱼ`, so `‖v‖` minus that quantity bounds the
//! suboptimality.

use nalgebra::{DMatrix, DVector};

use super::{segment_beta_star, GeometryError, SEPARABILITY_THRESHOLD};
use crate::linalg::{axpy, dot, sub};
use crate::norms::NormSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    WorkingSet,
    Pairwise,
}

impl Method {
    pub fn default_for(norm: &NormSpec) -> Self {
        if norm.is_l2() {
            Method::WorkingSet
        } else {
            Method::Pairwise
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub distance: f64,
    /// Certified upper bound on `distance − τ`.
    pub gap: f64,
}

const MAX_WORKING_SET_ROUNDS: usize = 10_000;
const VIOLATORS_PER_ROUND: usize = 16;
const MAX_FACE_SOLVES: usize = 100_000;
const MAX_PAIRWISE_STEPS: usize = 5_000_000;

/// Nearest-point state over two growing point sets.
///
/// Points are appended with [`HullSolver::push`]; a subsequent [`HullSolver::solve`]
/// warm-starts from the previous certificates, which is how the naïve online
/// learner re-solves after every update without starting over.
#[derive(Debug, Clone)]
pub struct HullSolver {
    norm: NormSpec,
    method: Method,
    dim: usize,
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
    active_plus: Vec<(usize, f64)>,
    active_minus: Vec<(usize, f64)>,
    v_plus: Vec<f64>,
    v_minus: Vec<f64>,
}

impl HullSolver {
    pub fn new(norm: NormSpec, dim: usize) -> Self {
        Self::with_method(norm, dim, Method::default_for(&norm))
    }

    /// Panics if `method` is [`Method::WorkingSet`] and the norm is not ℓ2.
    pub fn with_method(norm: NormSpec, dim: usize, method: Method) -> Self {
        assert!(
            method == Method::Pairwise || norm.is_l2(),
            "the working-set solver requires the l2 norm"
        );
        Self {
            norm,
            method,
            dim,
            plus: Vec::new(),
            minus: Vec::new(),
            active_plus: Vec::new(),
            active_minus: Vec::new(),
            v_plus: vec![0.0; dim],
            v_minus: vec![0.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn plus_points(&self) -> &[Vec<f64>] {
        &self.plus
    }

    pub fn minus_points(&self) -> &[Vec<f64>] {
        &self.minus
    }

    pub fn push(&mut self, x: Vec<f64>, positive: bool) -> Result<(), GeometryError> {
        if x.len() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if positive {
            self.plus.push(x);
        } else {
            self.minus.push(x);
        }
        Ok(())
    }

    pub fn v_plus(&self) -> &[f64] {
        &self.v_plus
    }

    pub fn v_minus(&self) -> &[f64] {
        &self.v_minus
    }

    /// Dense convex weights over the positive and negative source points.
    pub fn coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let mut cp = vec![0.0; self.plus.len()];
        let mut cm = vec![0.0; self.minus.len()];
        for &(i, w) in &self.active_plus {
            cp[i] = w;
        }
        for &(j, w) in &self.active_minus {
            cm[j] = w;
        }
        (cp, cm)
    }

    pub fn solve(&mut self, tol: f64) -> Result<SolveStats, GeometryError> {
        if self.plus.is_empty() {
            return Err(GeometryError::EmptyClass(crate::types::Label::Positive));
        }
        if self.minus.is_empty() {
            return Err(GeometryError::EmptyClass(crate::types::Label::Negative));
        }
        if self.active_plus.is_empty() || self.active_minus.is_empty() {
            self.cold_start();
        }
        match self.method {
            Method::WorkingSet => self.solve_working_set(tol),
            Method::Pairwise => self.solve_pairwise(tol),
        }
    }

    fn cold_start(&mut self) {
        // Alternate nearest-neighbour hops from an arbitrary positive point.
        let p0 = &self.plus[0];
        let j = argmin_by(&self.minus, |q| self.norm.norm(&sub(p0, q)));
        let q = &self.minus[j];
        let i = argmin_by(&self.plus, |p| self.norm.norm(&sub(p, q)));
        self.active_plus = vec![(i, 1.0)];
        self.active_minus = vec![(j, 1.0)];
        self.refresh_certificates();
    }

    fn refresh_certificates(&mut self) {
        self.v_plus = combine(&self.plus, &self.active_plus, self.dim);
        self.v_minus = combine(&self.minus, &self.active_minus, self.dim);
    }

    fn direction(&self) -> Vec<f64> {
        sub(&self.v_plus, &self.v_minus)
    }

    /// Frank-Wolfe vertices for the linear functional `g`.
    fn frank_wolfe_vertices(&self, g: &[f64]) -> (usize, f64, usize, f64) {
        let (mut best_i, mut best_s) = (0, f64::INFINITY);
        for (i, p) in self.plus.iter().enumerate() {
            let s = dot(g, p);
            if s < best_s {
                best_s = s;
                best_i = i;
            }
        }
        let (mut best_j, mut best_t) = (0, f64::NEG_INFINITY);
        for (j, q) in self.minus.iter().enumerate() {
            let t = dot(g, q);
            if t > best_t {
                best_t = t;
                best_j = j;
            }
        }
        (best_i, best_s, best_j, best_t)
    }

    fn gap_check(&self, tol: f64) -> Result<(f64, f64, usize, usize, bool), GeometryError> {
        let v = self.direction();
        let dist = self.norm.norm(&v);
        if dist <= SEPARABILITY_THRESHOLD {
            return Err(GeometryError::NotSeparable { distance: dist });
        }
        let g = self.norm.grad_norm(&v)?;
        let (i, s, j, t) = self.frank_wolfe_vertices(&g);
        let lower = s - t;
        let gap = (dist - lower).max(0.0);
        if lower <= SEPARABILITY_THRESHOLD && gap <= tol * (1.0 + dist) {
            return Err(GeometryError::NotSeparable { distance: dist });
        }
        Ok((dist, gap, i, j, gap <= tol * (1.0 + dist)))
    }

    fn solve_working_set(&mut self, tol: f64) -> Result<SolveStats, GeometryError> {
        let cap = 4 * (self.dim + 2) + 64;
        let mut ws = WorkingSet::default();
        for &(i, w) in &self.active_plus {
            ws.insert(true, i, w);
        }
        for &(j, w) in &self.active_minus {
            ws.insert(false, j, w);
        }
        let mut best = (f64::INFINITY, 0usize);
        let mut iterations = 0;
        for round in 0..MAX_WORKING_SET_ROUNDS {
            iterations += ws.solve(&self.plus, &self.minus, &self.v_plus, &self.v_minus, tol);
            self.active_plus = ws.active(true);
            self.active_minus = ws.active(false);
            normalize(&mut self.active_plus);
            normalize(&mut self.active_minus);
            self.refresh_certificates();
            let (dist, gap, g) = self.scan_gap(tol)?;
            if gap <= tol * (1.0 + dist) {
                return Ok(SolveStats {
                    iterations,
                    distance: dist,
                    gap,
                });
            }
            if gap < best.0 * (1.0 - 1e-6) {
                best = (gap, round);
            } else if round - best.1 > 8 {
                // No progress at floating-point resolution.
                return self.accept_stalled(iterations, dist, gap, tol);
            }
            let added = self.add_violators(&mut ws, &g);
            if added == 0 {
                return self.accept_stalled(iterations, dist, gap, tol);
            }
            ws.prune(cap);
        }
        let (dist, gap, _) = self.scan_gap(tol)?;
        Err(GeometryError::NoConvergence {
            iterations,
            distance: dist,
            gap,
        })
    }

    /// Full-data duality gap at the current certificates.
    fn scan_gap(&self, tol: f64) -> Result<(f64, f64, Vec<f64>), GeometryError> {
        let (dist, gap, _, _, _) = self.gap_check(tol)?;
        let g = self.norm.grad_norm(&self.direction())?;
        Ok((dist, gap, g))
    }

    /// Adds the points that most violate the optimality conditions under `g`.
    fn add_violators(&self, ws: &mut WorkingSet, g: &[f64]) -> usize {
        let mut added = 0;
        for positive in [true, false] {
            let (points, v, sign) = if positive {
                (&self.plus, &self.v_plus, 1.0)
            } else {
                (&self.minus, &self.v_minus, -1.0)
            };
            let level = sign * dot(g, v);
            let mut cand: Vec<(f64, usize)> = points
                .iter()
                .enumerate()
                .map(|(i, p)| (sign * dot(g, p), i))
                .filter(|&(s, i)| s < level && !ws.contains(positive, i))
                .collect();
            let k = cand.len().min(VIOLATORS_PER_ROUND);
            if k == 0 {
                continue;
            }
            if cand.len() > k {
                cand.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0));
                cand.truncate(k);
            }
            for (_, i) in cand {
                ws.insert(positive, i, 0.0);
                added += 1;
            }
        }
        added
    }

    fn accept_stalled(&self, iterations: usize, dist: f64, gap: f64, tol: f64) -> Result<SolveStats, GeometryError> {
        if gap <= tol.sqrt() * (1.0 + dist) {
            Ok(SolveStats {
                iterations,
                distance: dist,
                gap,
            })
        } else {
            Err(GeometryError::NoConvergence {
                iterations,
                distance: dist,
                gap,
            })
        }
    }

    fn solve_pairwise(&mut self, tol: f64) -> Result<SolveStats, GeometryError> {
        for step in 0..MAX_PAIRWISE_STEPS {
            let v = self.direction();
            let dist = self.norm.norm(&v);
            if dist <= SEPARABILITY_THRESHOLD {
                return Err(GeometryError::NotSeparable { distance: dist });
            }
            let g = self.norm.grad_norm(&v)?;
            let (fw_plus, s_min, fw_minus, t_max) = self.frank_wolfe_vertices(&g);
            let lower = s_min - t_max;
            let gap = (dist - lower).max(0.0);
            if gap <= tol * (1.0 + dist) {
                if lower <= SEPARABILITY_THRESHOLD {
                    return Err(GeometryError::NotSeparable { distance: dist });
                }
                return Ok(SolveStats {
                    iterations: step,
                    distance: dist,
                    gap,
                });
            }
            // Away vertices: worst active point of each hull under g.
            let (away_plus, s_away) = self
                .active_plus
                .iter()
                .enumerate()
                .map(|(k, &(i, _))| (k, dot(&g, &self.plus[i])))
                .fold((0, f64::NEG_INFINITY), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
            let (away_minus, t_away) = self
                .active_minus
                .iter()
                .enumerate()
                .map(|(k, &(j, _))| (k, dot(&g, &self.minus[j])))
                .fold((0, f64::INFINITY), |acc, cur| if cur.1 < acc.1 { cur } else { acc });
            let gain_plus = s_away - s_min;
            let gain_minus = t_max - t_away;
            if gain_plus.max(gain_minus) <= 0.0 {
                return Ok(SolveStats {
                    iterations: step,
                    distance: dist,
                    gap,
                });
            }
            if gain_plus >= gain_minus {
                let (from, mass) = self.active_plus[away_plus];
                // v moves by s·(p_fw − p_away), s ∈ [0, mass].
                let dir = sub(&self.plus[fw_plus], &self.plus[from]);
                let z: Vec<f64> = dir.iter().map(|d| -mass * d).collect();
                let beta = segment_beta_star(&v, &z, &self.norm).beta;
                if beta <= 0.0 {
                    return self.stalled_pairwise(step, dist, gap, tol);
                }
                let moved = beta * mass;
                shift_mass(&mut self.active_plus, away_plus, fw_plus, moved);
                axpy(moved, &dir, &mut self.v_plus);
            } else {
                let (from, mass) = self.active_minus[away_minus];
                let dir = sub(&self.minus[fw_minus], &self.minus[from]);
                // v = v₊ − v₋ moves by −s·dir.
                let z: Vec<f64> = dir.iter().map(|d| mass * d).collect();
                let beta = segment_beta_star(&v, &z, &self.norm).beta;
                if beta <= 0.0 {
                    return self.stalled_pairwise(step, dist, gap, tol);
                }
                let moved = beta * mass;
                shift_mass(&mut self.active_minus, away_minus, fw_minus, moved);
                axpy(moved, &dir, &mut self.v_minus);
            }
            if step % 1024 == 1023 {
                // Drift control for the incrementally updated certificates.
                self.refresh_certificates();
            }
        }
        let v = self.direction();
        Err(GeometryError::NoConvergence {
            iterations: MAX_PAIRWISE_STEPS,
            distance: self.norm.norm(&v),
            gap: f64::NAN,
        })
    }

    fn stalled_pairwise(
        &mut self,
        step: usize,
        dist: f64,
        gap: f64,
        tol: f64,
    ) -> Result<SolveStats, GeometryError> {
        self.refresh_certificates();
        // The line search returned no progress: we are at the limit of
        // floating-point resolution. Accept if the gap is within a looser
        // tolerance, otherwise report.
        if gap <= tol.sqrt() * (1.0 + dist) {
            Ok(SolveStats {
                iterations: step,
                distance: dist,
                gap,
            })
        } else {
            Err(GeometryError::NoConvergence {
                iterations: step,
                distance: dist,
                gap,
            })
        }
    }
}

fn shift_mass(active: &mut Vec<(usize, f64)>, from: usize, to_index: usize, moved: f64) {
    active[from].1 -= moved;
    match active.iter_mut().find(|(i, _)| *i == to_index) {
        Some(entry) => entry.1 += moved,
        None => active.push((to_index, moved)),
    }
    active.retain(|&(_, w)| w > 1e-16);
    normalize(active);
}

fn normalize(active: &mut [(usize, f64)]) {
    let total: f64 = active.iter().map(|&(_, w)| w).sum();
    if total > 0.0 {
        for entry in active.iter_mut() {
            entry.1 /= total;
        }
    }
}

fn combine(points: &[Vec<f64>], active: &[(usize, f64)], dim: usize) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for &(i, w) in active {
        axpy(w, &points[i], &mut out);
    }
    out
}

fn argmin_by(points: &[Vec<f64>], f: impl Fn(&[f64]) -> f64) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, p) in points.iter().enumerate() {
        let v = f(p);
        if v < best.1 {
            best = (i, v);
        }
    }
    best.0
}

/// Restricted problem over a subset of the points, in the variables
/// `αₖ ≥ 0` with unit mass per class.
#[derive(Debug, Default)]
struct WorkingSet {
    entries: Vec<(bool, usize)>,
    alpha: Vec<f64>,
}

impl WorkingSet {
    fn contains(&self, positive: bool, i: usize) -> bool {
        self.entries.contains(&(positive, i))
    }

    fn insert(&mut self, positive: bool, i: usize, alpha: f64) {
        match self.entries.iter().position(|&e| e == (positive, i)) {
            Some(k) => self.alpha[k] += alpha,
            None => {
                self.entries.push((positive, i));
                self.alpha.push(alpha);
            }
        }
    }

    fn active(&self, positive: bool) -> Vec<(usize, f64)> {
        self.entries
            .iter()
            .zip(&self.alpha)
            .filter(|(e, a)| e.0 == positive && **a > 0.0)
            .map(|(e, &a)| (e.1, a))
            .collect()
    }

    /// Drops zero-weight entries, oldest first, until at most `cap` remain.
    fn prune(&mut self, cap: usize) {
        let mut excess = self.entries.len().saturating_sub(cap);
        let mut k = 0;
        while excess > 0 && k < self.entries.len() {
            if self.alpha[k] == 0.0 {
                self.entries.remove(k);
                self.alpha.remove(k);
                excess -= 1;
            } else {
                k += 1;
            }
        }
    }

    /// Exact solve of the restricted problem by Wolfe-style face iterations,
    /// with coordinates centred at the certificate midpoint. Returns the
    /// number of face solves.
    fn solve(&mut self, plus: &[Vec<f64>], minus: &[Vec<f64>], vp: &[f64], vm: &[f64], tol: f64) -> usize {
        let m = self.entries.len();
        let centre: Vec<f64> = vp.iter().zip(vm).map(|(a, b)| 0.5 * (a + b)).collect();
        let z: Vec<Vec<f64>> = self
            .entries
            .iter()
            .map(|&(pos, i)| {
                if pos {
                    sub(&plus[i], &centre)
                } else {
                    sub(&centre, &minus[i])
                }
            })
            .collect();
        for pos in [true, false] {
            let total: f64 = (0..m).filter(|&k| self.entries[k].0 == pos).map(|k| self.alpha[k]).sum();
            if total > 0.0 {
                (0..m).filter(|&k| self.entries[k].0 == pos).for_each(|k| self.alpha[k] /= total);
            }
        }
        let mut face: Vec<usize> = (0..m).filter(|&k| self.alpha[k] > 0.0).collect();
        let mut solves = 0;
        let mut last_added = None;
        while solves < MAX_FACE_SOLVES {
            solves += 1;
            let Some(target) = face_minimizer(&z, &self.entries, &face) else {
                break;
            };
            if target.iter().all(|&t| t > 0.0) {
                for (&k, t) in face.iter().zip(target) {
                    self.alpha[k] = t;
                }
                match self.most_violating(&z, &face, tol) {
                    Some(k) => {
                        face.push(k);
                        last_added = Some(k);
                        continue;
                    }
                    None => break,
                }
            }
            // Move toward the face minimizer until the first weight vanishes.
            let mut theta = 1.0f64;
            for (&k, &t) in face.iter().zip(&target) {
                if t <= 0.0 {
                    let a = self.alpha[k];
                    theta = theta.min(if a - t > 0.0 { a / (a - t) } else { 0.0 });
                }
            }
            if theta == 0.0 && face.last().copied() == last_added {
                // The newest point cannot enter: resolution limit.
                face.pop();
                break;
            }
            for (&k, &t) in face.iter().zip(&target) {
                let a = self.alpha[k] + theta * (t - self.alpha[k]);
                self.alpha[k] = if t <= 0.0 && a <= 1e-15 * (1.0 + self.alpha[k]) { 0.0 } else { a.max(0.0) };
            }
            let before = face.len();
            face.retain(|&k| self.alpha[k] > 0.0);
            if face.len() == before {
                // Clamp the smallest weight so the loop always makes progress.
                if let Some((pos, _)) = face
                    .iter()
                    .enumerate()
                    .filter(|&(pos, _)| target[pos] <= 0.0)
                    .min_by(|a, b| self.alpha[*a.1].total_cmp(&self.alpha[*b.1]))
                {
                    self.alpha[face[pos]] = 0.0;
                    face.remove(pos);
                }
            }
            for pos in [true, false] {
                if !face.iter().any(|&k| self.entries[k].0 == pos) {
                    // Lost a class through rounding; reinstate its best point.
                    if let Some(k) = (0..m).filter(|&k| self.entries[k].0 == pos).min_by(|&a, &b| {
                        dot(&z[a], &z[a]).total_cmp(&dot(&z[b], &z[b]))
                    }) {
                        self.alpha[k] = 1.0;
                        face.push(k);
                    }
                }
            }
        }
        solves
    }

    /// Entry outside `face` whose gradient falls furthest below its class
    /// multiplier, if the violation exceeds the tolerance.
    fn most_violating(&self, z: &[Vec<f64>], face: &[usize], tol: f64) -> Option<usize> {
        let dim = z.first().map_or(0, Vec::len);
        let mut v = vec![0.0; dim];
        for &k in face {
            axpy(self.alpha[k], &z[k], &mut v);
        }
        let dist = dot(&v, &v).sqrt();
        let grad: Vec<f64> = z.iter().map(|zk| dot(zk, &v)).collect();
        let scale = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let eps = (0.25 * tol * (1.0 + dist) * dist).max(1e-13 * (1.0 + scale));
        let mut best: Option<(usize, f64)> = None;
        for pos in [true, false] {
            let lambda: f64 = face
                .iter()
                .filter(|&&k| self.entries[k].0 == pos)
                .map(|&k| self.alpha[k] * grad[k])
                .sum();
            for k in 0..z.len() {
                if self.entries[k].0 != pos || face.contains(&k) {
                    continue;
                }
                let violation = lambda - grad[k];
                if violation > eps && best.is_none_or(|b| violation > b.1) {
                    best = Some((k, violation));
                }
            }
        }
        best.map(|b| b.0)
    }
}

/// Minimizes `‖Σ αₖ zₖ‖₂` over `face` subject only to unit mass per class,
/// by least squares in barycentric offsets; rank-deficient faces get the
/// minimum-norm solution, which leaves `Σ αₖ zₖ` unchanged.
fn face_minimizer(z: &[Vec<f64>], entries: &[(bool, usize)], face: &[usize]) -> Option<Vec<f64>> {
    let r_plus = *face.iter().find(|&&k| entries[k].0)?;
    let r_minus = *face.iter().find(|&&k| !entries[k].0)?;
    let dim = z[r_plus].len();
    let cols: Vec<usize> = face.iter().copied().filter(|&k| k != r_plus && k != r_minus).collect();
    let mut out: Vec<f64> = face.iter().map(|&k| if k == r_plus || k == r_minus { 1.0 } else { 0.0 }).collect();
    if cols.is_empty() {
        return Some(out);
    }
    let v0: Vec<f64> = z[r_plus].iter().zip(&z[r_minus]).map(|(a, b)| a + b).collect();
    let b = DMatrix::from_fn(dim, cols.len(), |row, c| {
        let k = cols[c];
        let r = if entries[k].0 { r_plus } else { r_minus };
        z[k][row] - z[r][row]
    });
    let rhs = DVector::from_iterator(dim, v0.iter().map(|v| -v));
    let svd = b.svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &s| a.max(s));
    let beta = svd.solve(&rhs, 1e-12 * smax.max(f64::MIN_POSITIVE)).ok()?;
    if beta.iter().any(|v| !v.is_finite()) {
        return None;
    }
    for (c, &k) in cols.iter().enumerate() {
        let idx = face.iter().position(|&f| f == k).expect("column from face");
        out[idx] = beta[c];
        let r = if entries[k].0 { r_plus } else { r_minus };
        let ridx = face.iter().position(|&f| f == r).expect("reference in face");
        out[ridx] -= beta[c];
    }
    Some(out)
}
