#![allow(dead_code)]

use omm_core::data::gen_gaussian_clusters;
use omm_core::{Label, LabeledPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn l2(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(min_{p∈plus} wᵀp − max_{q∈minus} wᵀq) / 2` for a unit direction `w`.
pub fn slab_half_width(w: &[f64], plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let lo = plus.iter().map(|p| dot(w, p)).fold(f64::INFINITY, f64::min);
    let hi = minus.iter().map(|q| dot(w, q)).fold(f64::NEG_INFINITY, f64::max);
    0.5 * (lo - hi)
}

fn direction(angles: &[f64]) -> Vec<f64> {
    match angles {
        [t] => vec![t.cos(), t.sin()],
        [t, s] => vec![s.sin() * t.cos(), s.sin() * t.sin(), s.cos()],
        _ => unreachable!(),
    }
}

/// Largest ℓ2 margin over all hyperplanes, by sweeping unit directions
/// (d = 2 or 3) and refining the best cells with a shrinking random search on
/// the sphere.
pub fn sweep_margin(plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let d = plus[0].len();
    let f = |w: &[f64]| slab_half_width(w, plus, minus);
    let mut seeds: Vec<(f64, Vec<f64>)> = Vec::new();
    if d == 2 {
        let n = 4096;
        for i in 0..n {
            let w = direction(&[std::f64::consts::TAU * i as f64 / n as f64]);
            seeds.push((f(&w), w));
        }
    } else {
        let (nt, ns) = (256, 128);
        for i in 0..nt {
            for j in 0..=ns {
                let w = direction(&[std::f64::consts::TAU * i as f64 / nt as f64, std::f64::consts::PI * j as f64 / ns as f64]);
                seeds.push((f(&w), w));
            }
        }
    }
    seeds.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut best = f64::NEG_INFINITY;
    for (mut v, mut w) in seeds.into_iter().take(6) {
        let mut step = 0.05;
        while step > 1e-10 {
            let mut moved = false;
            for _ in 0..48 {
                let mut c: Vec<f64> = w.iter().map(|a| a + step * rng.sample::<f64, _>(StandardNormal)).collect();
                let n = l2(&c);
                c.iter_mut().for_each(|a| *a /= n);
                let fc = f(&c);
                if fc > v {
                    v = fc;
                    w = c;
                    moved = true;
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        best = best.max(v);
    }
    best
}

/// Brute-force `κ∘` for ℓ2 on a polar grid of `z` with `u = e₁`.
///
/// The inner minimum over `β ∈ [0, 1]` is taken on a grid of step `beta_step`;
/// since `β ↦ ‖u − βz‖²` is a convex quadratic, the grid minimum is attained at
/// one of the two grid points around its unconstrained minimizer.
pub fn kappa_brute_l2(delta: f64, eta: f64, radius_step: f64, angle_step: f64, beta_step: f64) -> Option<f64> {
    if eta.max(0.0) > delta {
        return None;
    }
    let nb = (1.0 / beta_step).round() as i64;
    let seg = |z0: f64, z1: f64| -> f64 {
        let zz = z0 * z0 + z1 * z1;
        let q = |b: f64| (1.0 - b * z0).powi(2) + (b * z1).powi(2);
        if zz == 0.0 {
            return 1.0;
        }
        let k = ((z0 / zz) / beta_step).floor() as i64;
        [k, k + 1]
            .iter()
            .map(|&i| i.clamp(0, nb) as f64 * beta_step)
            .map(q)
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    };
    let na = (std::f64::consts::TAU / angle_step).ceil() as usize;
    let nr = (delta / radius_step).floor() as usize;
    let mut best = f64::NEG_INFINITY;
    for ia in 0..na {
        let (s, c) = (ia as f64 * angle_step).sin_cos();
        if c * delta < eta {
            continue;
        }
        for ir in 0..=nr {
            let rad = ir as f64 * radius_step;
            if rad * c < eta {
                continue;
            }
            best = best.max(seg(rad * c, rad * s));
        }
    }
    // η = δ leaves only z = δe₁ feasible, which may fall between grid angles.
    if eta > 0.0 && (delta - eta).abs() < 1e-12 {
        best = best.max(seg(delta, 0.0));
    }
    (best > f64::NEG_INFINITY).then_some(best)
}

pub fn split(points: &[LabeledPoint]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let plus = points.iter().filter(|p| p.y == Label::Positive).map(|p| p.x.clone()).collect();
    let minus = points.iter().filter(|p| p.y == Label::Negative).map(|p| p.x.clone()).collect();
    (plus, minus)
}

pub fn gaussian_stream(d: usize, n: usize, seed: u64) -> Vec<LabeledPoint> {
    gen_gaussian_clusters(d, n, 2.0, seed).expect("valid parameters")
}

fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-11 * scale {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    (1u32..(1 << n))
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect::<Vec<_>>())
        .filter(|s| s.len() <= max)
        .collect()
}

/// Exact ℓ2 distance between two small hulls by enumerating face pairs and
/// solving each affine nearest-point problem in closed form.
pub fn face_enumeration_distance(plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let d = plus[0].len();
    let mut best = f64::INFINITY;
    for a in subsets(plus.len(), d + 1) {
        for b in subsets(minus.len(), d + 1) {
            if a.len() + b.len() > d + 2 {
                continue;
            }
            let base: Vec<f64> = plus[a[0]].iter().zip(&minus[b[0]]).map(|(p, q)| p - q).collect();
            let mut cols: Vec<Vec<f64>> = Vec::new();
            for &i in &a[1..] {
                cols.push(plus[i].iter().zip(&plus[a[0]]).map(|(p, q)| p - q).collect());
            }
            for &j in &b[1..] {
                cols.push(minus[j].iter().zip(&minus[b[0]]).map(|(p, q)| q - p).collect());
            }
            let coef = if cols.is_empty() {
                Vec::new()
            } else {
                let gram = cols.iter().map(|c| cols.iter().map(|e| dot(c, e)).collect()).collect();
                let rhs = cols.iter().map(|c| -dot(c, &base)).collect();
                match solve_dense(gram, rhs) {
                    Some(x) => x,
                    None => continue,
                }
            };
            let (ca, cb) = coef.split_at(a.len() - 1);
            let feasible = ca.iter().chain(cb).all(|&c| c >= -1e-12)
                && 1.0 - ca.iter().sum::<f64>() >= -1e-12
                && 1.0 - cb.iter().sum::<f64>() >= -1e-12;
            if !feasible {
                continue;
            }
            let mut v = base.clone();
            for (c, col) in coef.iter().zip(&cols) {
                for (vi, ci) in v.iter_mut().zip(col) {
                    *vi += c * ci;
                }
            }
            best = best.min(l2(&v));
        }
    }
    best
}
