//! Invariant suites run by `omm verify`.

use std::fmt;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use omm_core::baselines::{Algorithm, Baseline, BaselineConfig, BiasMode, ALMA_DEFAULT_PHI};
use omm_core::bounds::{self, BoundInputs, Kappa};
use omm_core::data::gen_gaussian_clusters;
use omm_core::geometry::{hull_distance, DEFAULT_TOL};
use omm_core::harness::{violation_counts, OnlineLearner, StepEvent};
use omm_core::linalg::{add, dot};
use omm_core::omm::{OmmConfig, OmmState};
use omm_core::{LabeledPoint, NormSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Gradient and duality identities of the ℓp norms.
    Norms,
    /// Hull distance against a direction-sweep margin oracle.
    Hull,
    /// Predicted margins stay above the optimum and never increase.
    Margin,
    /// κ∘ closed form against numeric maximization, and its trichotomy.
    Kappa,
    /// Per-update margin contraction.
    Contraction,
    /// Violation counts against the mistake bound.
    Bound,
    /// Translation invariance of OMM and PUMMA.
    Translation,
    /// First running margin against `2(D + γ*)`.
    Gamma3,
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_possible_value().expect("no skipped variants");
        f.write_str(v.get_name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    /// Inflate one recorded predicted margin.
    GammaUp,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: Suite,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: Suite, name: &str, failures: Vec<String>, total: usize) -> CheckResult {
    CheckResult {
        suite,
        name: name.to_string(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{total} cases")
        } else {
            format!("{} of {total} cases failed; first: {}", failures.len(), failures[0])
        },
    }
}

pub fn run_suites(suites: &[Suite], seed: u64, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut out = Vec::new();
    for &s in suites {
        match s {
            Suite::Norms => out.extend(norms_suite(seed)),
            Suite::Hull => out.push(hull_suite(seed)),
            Suite::Margin => out.extend(margin_suite(seed, fault)),
            Suite::Kappa => out.extend(kappa_suite()),
            Suite::Contraction => out.push(contraction_suite(seed)),
            Suite::Bound => out.push(bound_suite(seed)),
            Suite::Translation => out.extend(translation_suite(seed)),
            Suite::Gamma3 => out.push(gamma3_suite(seed)),
        }
    }
    out
}

fn normal_vec(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

fn norms_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut grad_fail = Vec::new();
    let mut dual_fail = Vec::new();
    let mut total = 0;
    for p in [1.5, 2.0, 3.0] {
        let norm = NormSpec::lp(p).expect("valid exponent");
        for _ in 0..1000 {
            total += 1;
            let d = rng.random_range(1..=6);
            let x = normal_vec(&mut rng, d);
            let w = normal_vec(&mut rng, d);
            let g = norm.grad_norm(&x).expect("nonzero");
            let h = 1e-6;
            for i in 0..d {
                let mut a = x.clone();
                let mut b = x.clone();
                a[i] += h;
                b[i] -= h;
                let fd = (norm.norm(&a) - norm.norm(&b)) / (2.0 * h);
                if (fd - g[i]).abs() > 1e-5 * (1.0 + g[i].abs()) {
                    grad_fail.push(format!("p={p} x={x:?} coord {i}: {fd} vs {}", g[i]));
                }
            }
            let nx = norm.norm(&x);
            let ok = (norm.dual_norm(&g) - 1.0).abs() < 1e-9
                && (dot(&g, &x) - nx).abs() < 1e-9 * (1.0 + nx)
                && dot(&w, &x).abs() <= nx * norm.dual_norm(&w) * (1.0 + 1e-12)
                && {
                    let back = norm.grad_dual_norm(&g).expect("nonzero");
                    back.iter().zip(&x).all(|(bi, xi)| (bi - xi / nx).abs() < 1e-8)
                };
            if !ok {
                dual_fail.push(format!("p={p} x={x:?}"));
            }
        }
    }
    vec![
        check(Suite::Norms, "gradient-finite-difference", grad_fail, total),
        check(Suite::Norms, "duality-identities", dual_fail, total),
    ]
}

/// Largest `(min₊ wᵀx − max₋ wᵀx)/2` over unit `w`, by a dense sweep followed by
/// pattern search on spherical angles.
pub fn sweep_margin(plus: &[Vec<f64>], minus: &[Vec<f64>]) -> f64 {
    let d = plus[0].len();
    let dir = |angles: &[f64]| -> Vec<f64> {
        match d {
            1 => vec![if angles[0].cos() >= 0.0 { 1.0 } else { -1.0 }],
            2 => vec![angles[0].cos(), angles[0].sin()],
            _ => vec![
                angles[1].sin() * angles[0].cos(),
                angles[1].sin() * angles[0].sin(),
                angles[1].cos(),
            ],
        }
    };
    let value = |angles: &[f64]| {
        let w = dir(angles);
        let lo = plus.iter().map(|x| dot(&w, x)).fold(f64::INFINITY, f64::min);
        let hi = minus.iter().map(|x| dot(&w, x)).fold(f64::NEG_INFINITY, f64::max);
        (lo - hi) / 2.0
    };
    assert!(d <= 3, "sweep oracle supports d ≤ 3");
    let mut best = (f64::NEG_INFINITY, vec![0.0, 0.0]);
    let (na, nb) = if d == 3 { (720, 360) } else { (6283, 1) };
    for i in 0..na {
        for j in 0..nb {
            let a = vec![
                std::f64::consts::TAU * i as f64 / na as f64,
                std::f64::consts::PI * (j as f64 + 0.5) / nb as f64,
            ];
            let v = value(&a);
            if v > best.0 {
                best = (v, a);
            }
        }
    }
    let mut step = 0.01;
    while step > 1e-12 {
        let mut improved = false;
        for k in 0..2 {
            for s in [-1.0, 1.0] {
                let mut a = best.1.clone();
                a[k] += s * step;
                let v = value(&a);
                if v > best.0 {
                    best = (v, a);
                    improved = true;
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    best.0
}

fn hull_suite(seed: u64) -> CheckResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1e11a1);
    let mut failures = Vec::new();
    let mut done = 0;
    let norm = NormSpec::l2();
    while done < 40 {
        let d = rng.random_range(2..=3);
        let n = rng.random_range(2..=6);
        let n_plus = rng.random_range(1..n);
        let offset = normal_vec(&mut rng, d);
        let plus: Vec<Vec<f64>> = (0..n_plus).map(|_| add(&normal_vec(&mut rng, d), &offset)).collect();
        let minus: Vec<Vec<f64>> = (n_plus..n).map(|_| normal_vec(&mut rng, d)).collect();
        let Ok(sol) = hull_distance(&plus, &minus, &norm, DEFAULT_TOL) else {
            continue;
        };
        done += 1;
        let oracle = sweep_margin(&plus, &minus);
        if (sol.gamma - oracle).abs() > 1e-3 || (sol.tau / 2.0 - sol.gamma).abs() > 1e-12 {
            failures.push(format!("tau/2 = {} vs oracle {oracle}", sol.tau / 2.0));
        }
    }
    check(Suite::Hull, "hull-distance-vs-sweep", failures, done)
}

struct Trace {
    events: Vec<StepEvent>,
    gamma3: Option<f64>,
    gamma_star: f64,
    d: f64,
}

fn omm_trace(cfg: OmmConfig, points: &[LabeledPoint]) -> Trace {
    let mut s = OmmState::new(cfg).expect("valid config");
    let events = points
        .iter()
        .map(|p| OnlineLearner::step(&mut s, &p.x, p.y).expect("separable stream"))
        .collect();
    let stats = bounds::dataset_stats(points, &cfg.norm).expect("separable stream");
    Trace {
        events,
        gamma3: s.gamma_3(),
        gamma_star: stats.gamma_star,
        d: stats.d,
    }
}

fn streams(seed: u64, count: usize, n: usize) -> Vec<Vec<LabeledPoint>> {
    (0..count as u64)
        .map(|k| {
            let d = [2, 5, 20][k as usize % 3];
            gen_gaussian_clusters(d, n, 2.0, seed.wrapping_mul(1000).wrapping_add(k)).expect("valid parameters")
        })
        .collect()
}

fn configs() -> [OmmConfig; 3] {
    [OmmConfig::e_omm(), OmmConfig::n_omm(), OmmConfig::ce_omm()]
}

fn margin_suite(seed: u64, fault: Option<Fault>) -> Vec<CheckResult> {
    let mut lower = Vec::new();
    let mut mono = Vec::new();
    let mut order = Vec::new();
    let mut total = 0;
    for points in streams(seed, 6, 300) {
        for cfg in configs() {
            total += 1;
            let mut tr = omm_trace(cfg, &points);
            if fault == Some(Fault::GammaUp) {
                let running: Vec<usize> = (0..tr.events.len()).filter(|&i| tr.events[i].running).collect();
                if let Some(&i) = running.get(running.len() / 2) {
                    let g = tr.events[i].gamma_t.expect("running");
                    tr.events[i].gamma_t = Some(g * 1.5 + 1.0);
                }
            }
            let mut prev = f64::INFINITY;
            for e in tr.events.iter().filter(|e| e.running) {
                let g = e.gamma_t.expect("running");
                if g < tr.gamma_star * (1.0 - 1e-9) {
                    lower.push(format!("{} step {}: gamma_t {g} < gamma* {}", cfg.name(), e.index, tr.gamma_star));
                }
                if g > prev * (1.0 + 1e-9) {
                    mono.push(format!("{} step {}: gamma_t {g} > previous {prev}", cfg.name(), e.index));
                }
                prev = g;
            }
            for c in violation_counts(&tr.events, tr.gamma_star, &[0.0, 0.3, 0.5, 1.0]) {
                if c.m_bar_phi > c.m_phi {
                    order.push(format!("{} phi {}: {} > {}", cfg.name(), c.phi, c.m_bar_phi, c.m_phi));
                }
            }
        }
    }
    vec![
        check(Suite::Margin, "gamma-t-above-optimum", lower, total),
        check(Suite::Margin, "gamma-t-non-increasing", mono, total),
        check(Suite::Margin, "m-bar-below-m", order, total),
    ]
}

fn kappa_suite() -> Vec<CheckResult> {
    let norm = NormSpec::l2();
    let mut vs_numeric = Vec::new();
    let mut trichotomy = Vec::new();
    let mut total = 0;
    for i in 1..=12 {
        for j in 0..=12 {
            total += 1;
            let delta = 2.0 * i as f64 / 12.0;
            let eta = -0.5 + 2.5 * j as f64 / 12.0;
            let closed = bounds::kappa_circ_l2(delta, eta);
            let numeric = bounds::kappa_circ_numeric(delta, eta, &norm, 1e-3);
            match (closed, numeric) {
                (Kappa::Infeasible, Kappa::Infeasible) => {}
                (Kappa::Value(a), Kappa::Value(b)) if (a - b).abs() <= 1e-2 => {}
                (a, b) => vs_numeric.push(format!("delta={delta} eta={eta}: {a:?} vs {b:?}")),
            }
            let expect_ok = match closed {
                Kappa::Infeasible => delta < eta,
                Kappa::Value(v) if eta <= 0.0 => v == 1.0,
                Kappa::Value(v) => delta >= eta && v < 1.0,
            };
            if !expect_ok {
                trichotomy.push(format!("delta={delta} eta={eta}: {closed:?}"));
            }
        }
    }
    let mut continuity = Vec::new();
    for delta in [0.3f64, 0.7, 0.99] {
        let eta = delta * delta;
        let a = bounds::kappa_circ_l2(delta, eta).value().unwrap_or(f64::NAN);
        let b = bounds::kappa_circ_l2(delta, eta * (1.0 + 1e-15)).value().unwrap_or(f64::NAN);
        if !((a - b).abs() <= 1e-12) {
            continuity.push(format!("delta={delta}: {a} vs {b}"));
        }
    }
    vec![
        check(Suite::Kappa, "closed-form-vs-numeric", vs_numeric, total),
        check(Suite::Kappa, "trichotomy", trichotomy, total),
        check(Suite::Kappa, "branch-continuity", continuity, 3),
    ]
}

fn contraction_suite(seed: u64) -> CheckResult {
    let mut failures = Vec::new();
    let mut total = 0;
    for points in streams(seed ^ 0x44, 6, 300) {
        for cfg in configs() {
            let tr = omm_trace(cfg, &points);
            for e in tr.events.iter().filter(|e| e.running && e.updated) {
                total += 1;
                let (g, a, next) = (e.gamma_t.unwrap(), e.score.unwrap(), e.gamma_next.unwrap());
                let k = bounds::kappa_circ_l2(tr.d / (2.0 * g), (g - a) / (2.0 * g));
                match k {
                    Kappa::Value(k) if next / g <= k + 1e-9 => {}
                    k => failures.push(format!("{} step {}: ratio {} vs {k:?}", cfg.name(), e.index, next / g)),
                }
            }
        }
    }
    check(Suite::Contraction, "margin-contraction", failures, total)
}

fn bound_suite(seed: u64) -> CheckResult {
    let mut failures = Vec::new();
    let mut total = 0;
    let norm = NormSpec::l2();
    for points in streams(seed ^ 0x7, 9, 500) {
        for cfg in configs() {
            let tr = omm_trace(cfg, &points);
            let Some(g3) = tr.gamma3 else { continue };
            let phis: Vec<f64> = [0.0, 0.3, 0.5].into_iter().filter(|&p| p <= cfg.rho).collect();
            for c in violation_counts(&tr.events, tr.gamma_star, &phis) {
                total += 1;
                let b = bounds::m_phi_bound(&BoundInputs::new(tr.d / tr.gamma_star, c.phi, g3, tr.gamma_star), &norm);
                if b.value.is_finite() && c.m_phi as f64 > b.value + 1e-9 {
                    failures.push(format!("{} phi {}: m = {} > bound {}", cfg.name(), c.phi, c.m_phi, b.value));
                }
            }
        }
    }
    check(Suite::Bound, "violations-within-bound", failures, total)
}

/// Runs two learners in lockstep and reports the first divergence.
pub fn compare_translated(
    a: &mut dyn OnlineLearner,
    b: &mut dyn OnlineLearner,
    points: &[LabeledPoint],
    u: &[f64],
) -> Result<(), String> {
    for (i, p) in points.iter().enumerate() {
        let ea = a.step(&p.x, p.y).map_err(|e| e.to_string())?;
        let eb = b.step(&add(&p.x, u), p.y).map_err(|e| e.to_string())?;
        if ea.mistake != eb.mistake || ea.updated != eb.updated {
            return Err(format!("step {}: events differ", i + 1));
        }
        match (a.classifier(), b.classifier()) {
            (None, None) => {}
            (Some(ca), Some(cb)) => {
                let scale = ca.w.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
                if ca.w.iter().zip(&cb.w).any(|(x, y)| (x - y).abs() > 1e-9 * scale) {
                    return Err(format!("step {}: weights differ", i + 1));
                }
                let want = ca.b - dot(&ca.w, u);
                let bscale = 1.0 + ca.b.abs() + dot(&ca.w, u).abs();
                if (cb.b - want).abs() > 1e-8 * bscale {
                    return Err(format!("step {}: bias {} vs expected {want}", i + 1, cb.b));
                }
            }
            _ => return Err(format!("step {}: classifier presence differs", i + 1)),
        }
    }
    Ok(())
}

fn mistakes(learner: &mut dyn OnlineLearner, points: &[LabeledPoint], u: &[f64]) -> usize {
    points
        .iter()
        .map_while(|p| learner.step(&add(&p.x, u), p.y).ok())
        .filter(|e| e.mistake)
        .count()
}

fn translation_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x7a7a);
    let mut failures = Vec::new();
    let mut total = 0;
    let mut contrast = 0;
    let mut contrast_total = 0;
    for k in 0..4u64 {
        let points = gen_gaussian_clusters(3, 200, 2.0, seed.wrapping_mul(77).wrapping_add(k)).expect("valid parameters");
        let u: Vec<f64> = normal_vec(&mut rng, 3).iter().map(|v| 5.0 * v).collect();
        let dbar = |shift: &[f64]| points.iter().map(|p| dot(&add(&p.x, shift), &add(&p.x, shift)).sqrt()).fold(0.0, f64::max);
        let zero = vec![0.0; 3];
        for cfg in configs() {
            total += 1;
            let mut a = OmmState::new(cfg).expect("valid config");
            let mut b = OmmState::new(cfg).expect("valid config");
            if let Err(e) = compare_translated(&mut a, &mut b, &points, &u) {
                failures.push(format!("{}: {e}", cfg.name()));
            }
        }
        total += 1;
        let pumma = BaselineConfig::new(Algorithm::pumma(), BiasMode::Native);
        let mut a = Baseline::new(pumma, 3).expect("valid config");
        let mut b = Baseline::new(pumma, 3).expect("valid config");
        if let Err(e) = compare_translated(&mut a, &mut b, &points, &u) {
            failures.push(format!("PUMMA: {e}"));
        }
        for alg in [Algorithm::Romma, Algorithm::alma(ALMA_DEFAULT_PHI)] {
            contrast_total += 1;
            let mode = |shift: &[f64]| match alg {
                Algorithm::Romma => BiasMode::AppendNegDbar(dbar(shift)),
                _ => BiasMode::AppendOne,
            };
            let mut a = Baseline::new(BaselineConfig::new(alg, mode(&zero)), 3).expect("valid config");
            let mut b = Baseline::new(BaselineConfig::new(alg, mode(&u)), 3).expect("valid config");
            if mistakes(&mut a, &points, &zero) != mistakes(&mut b, &points, &u) {
                contrast += 1;
            }
        }
    }
    let contrast_fail = if contrast == 0 {
        vec!["ROMMA and ALMA mistake counts never changed under translation".to_string()]
    } else {
        Vec::new()
    };
    vec![
        check(Suite::Translation, "omm-and-pumma-invariant", failures, total),
        check(Suite::Translation, "romma-alma-not-invariant", contrast_fail, contrast_total),
    ]
}

fn gamma3_suite(seed: u64) -> CheckResult {
    let mut failures = Vec::new();
    let mut total = 0;
    for points in streams(seed ^ 0x33, 6, 200) {
        let tr = omm_trace(OmmConfig::e_omm(), &points);
        total += 1;
        let g3 = tr.gamma3.unwrap_or(0.0);
        if g3 > bounds::gamma3_upper_bound(tr.d, tr.gamma_star) * (1.0 + 1e-12) {
            failures.push(format!("gamma3 {g3} > 2(D + gamma*) with D={} gamma*={}", tr.d, tr.gamma_star));
        }
    }
    check(Suite::Gamma3, "initial-margin-bound", failures, total)
}
