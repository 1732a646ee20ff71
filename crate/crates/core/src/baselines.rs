//! Classical online large-margin learners used as comparison points.
//!
//! Update rules:
//!
//! * **Perceptron**: `w ← w + y x` when `y wᵀx ≤ 0`.
//! * **ROMMA** / **aggressive ROMMA** (Li & Long): on a mistake (resp. whenever
//!   `y wᵀx < 1`), `w` becomes the minimum-norm vector satisfying both the
//!   previous relaxed constraint `wᵀw_old ≥ ‖w_old‖²` and `y wᵀx ≥ 1`:
//!   `w ← c·w + d·x` with
//!   `c = (‖x‖²‖w‖² − y wᵀx) / (‖x‖²‖w‖² − (wᵀx)²)`,
//!   `d = ‖w‖²(y − wᵀx) / (‖x‖²‖w‖² − (wᵀx)²)`.
//!   From `w = 0`, or when `x ∥ w`, the update is `w ← y x/‖x‖²`.
//! * **ALMA₂(α; B, C)** (Gentile): on normalized inputs `x̂`, with update
//!   counter `k` starting at 1, update when `y wᵀx̂ ≤ (1−α)B/√k` by
//!   `w ← w + (C/√k) y x̂` followed by projection onto the unit ball.
//! * **PUMMA** (ℓ2): keeps one point per class `(x₊, x₋)`. When
//!   `y(wᵀx + b) < 1 − δ` the stored point of label `y` is replaced by `x`
//!   and `w` solves `min ½‖w‖²` s.t. `wᵀ(x₊ − x₋) ≥ 2`, `wᵀw_old ≥ ‖w_old‖²`,
//!   with `b = −½wᵀ(x₊ + x₋)`.
//!
//! Only OMM and PUMMA handle a bias natively. The others learn a homogeneous
//! classifier, optionally on augmented inputs ([`BiasMode`]).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::harness::{OnlineLearner, RunError, StepEvent};
use crate::linalg::{axpy, dot, l2_norm_sq, sub};
use crate::norms::NormSpec;
use crate::types::{Label, LinearClassifier};

/// Relative tolerance that treats `|y wᵀx| ≤ 1e−12·‖w‖‖x‖` as a tie in the
/// Perceptron test.
pub const PERCEPTRON_TIE_TOL: f64 = 1e-12;
/// a-ROMMA updates while `y wᵀx < 1 − AGGRESSIVE_ROMMA_DELTA`.
pub const AGGRESSIVE_ROMMA_DELTA: f64 = 0.0;
pub const PUMMA_DEFAULT_DELTA: f64 = 0.01;
pub const ALMA_DEFAULT_PHI: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Algorithm {
    Perceptron,
    Romma,
    AggressiveRomma,
    Pumma { delta: f64 },
    Alma { phi: f64, b: f64, c: f64 },
}

impl Algorithm {
    pub fn pumma() -> Self {
        Algorithm::Pumma {
            delta: PUMMA_DEFAULT_DELTA,
        }
    }

    /// ALMA₂(1−φ; √8/(1−φ), √2).
    pub fn alma(phi: f64) -> Self {
        Algorithm::Alma {
            phi,
            b: 8f64.sqrt() / (1.0 - phi),
            c: 2f64.sqrt(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Algorithm::Perceptron => "Perceptron",
            Algorithm::Romma => "ROMMA",
            Algorithm::AggressiveRomma => "a-ROMMA",
            Algorithm::Pumma { .. } => "PUMMA",
            Algorithm::Alma { .. } => "ALMA",
        }
    }
}

/// How a homogeneous learner represents the bias.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BiasMode {
    /// `b = 0`.
    Homogeneous,
    /// Learn on `(x, 1)`; `b` is the last weight.
    AppendOne,
    /// Learn on `(x, −D̄)`; `b = −D̄·w_last`.
    AppendNegDbar(f64),
    /// The algorithm maintains `b` itself.
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub algorithm: Algorithm,
    pub bias_mode: BiasMode,
}

impl BaselineConfig {
    pub fn new(algorithm: Algorithm, bias_mode: BiasMode) -> Self {
        Self { algorithm, bias_mode }
    }

    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |msg: String| Err(BaselineError::InvalidConfig(msg));
        match (self.algorithm, self.bias_mode) {
            (Algorithm::Pumma { delta }, BiasMode::Native) => {
                if !(0.0..=1.0).contains(&delta) {
                    return bad(format!("PUMMA delta = {delta} is outside [0, 1]"));
                }
            }
            (Algorithm::Pumma { .. }, mode) => return bad(format!("PUMMA requires native bias, got {mode:?}")),
            (a, BiasMode::Native) => return bad(format!("{} has no native bias", a.name())),
            (Algorithm::Romma | Algorithm::AggressiveRomma, BiasMode::AppendOne) => {
                return bad("ROMMA variants use the -Dbar coordinate for the bias".into())
            }
            (a @ (Algorithm::Perceptron | Algorithm::Alma { .. }), BiasMode::AppendNegDbar(_)) => {
                return bad(format!("the -Dbar coordinate is only defined for ROMMA variants, not {}", a.name()))
            }
            (_, BiasMode::AppendNegDbar(dbar)) if !(dbar > 0.0 && dbar.is_finite()) => {
                return bad(format!("Dbar = {dbar} must be positive"))
            }
            _ => {}
        }
        if let Algorithm::Alma { phi, b, c } = self.algorithm {
            if !(phi < 1.0 && phi >= 0.0 && b > 0.0 && c > 0.0) {
                return bad(format!("ALMA parameters phi={phi}, B={b}, C={c} are invalid"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("constrained update has no feasible solution; the stream is not separable")]
    InfeasibleUpdate,
    #[error("expected dimension {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// `w + y x` if `y wᵀx ≤ 0` (up to [`PERCEPTRON_TIE_TOL`]), else `w`.
pub fn perceptron_step(w: &[f64], x: &[f64], y: Label) -> Vec<f64> {
    if perceptron_fires(w, x, y) {
        let mut next = w.to_vec();
        axpy(y.sign(), x, &mut next);
        next
    } else {
        w.to_vec()
    }
}

fn perceptron_fires(w: &[f64], x: &[f64], y: Label) -> bool {
    let tie = PERCEPTRON_TIE_TOL * l2_norm_sq(w).sqrt() * l2_norm_sq(x).sqrt();
    y.sign() * dot(w, x) <= tie
}

/// ROMMA projection step; returns `None` when `x = 0`.
pub fn romma_project(w: &[f64], x: &[f64], y: Label) -> Option<Vec<f64>> {
    let xx = l2_norm_sq(x);
    if xx == 0.0 {
        return None;
    }
    let ww = l2_norm_sq(w);
    let wx = dot(w, x);
    let denom = xx * ww - wx * wx;
    if ww == 0.0 || denom <= 1e-12 * xx * ww {
        return Some(x.iter().map(|v| y.sign() * v / xx).collect());
    }
    let c = (xx * ww - y.sign() * wx) / denom;
    let d = ww * (y.sign() - wx) / denom;
    Some(w.iter().zip(x).map(|(wi, xi)| c * wi + d * xi).collect())
}

/// `min ½‖w‖²` s.t. `wᵀa ≥ 2`, `wᵀc ≥ ‖c‖²`.
pub fn pumma_solve(a: &[f64], c: &[f64]) -> Result<Vec<f64>, BaselineError> {
    let aa = l2_norm_sq(a);
    let cc = l2_norm_sq(c);
    let ac = dot(a, c);
    if aa == 0.0 {
        return Err(BaselineError::InfeasibleUpdate);
    }
    let feasible = |w: &[f64]| {
        let s = 1e-12 * (1.0 + l2_norm_sq(w).sqrt() * aa.sqrt().max(cc.sqrt()));
        dot(w, a) >= 2.0 - s && dot(w, c) >= cc - s * (1.0 + cc.sqrt())
    };
    let mut candidates: Vec<Vec<f64>> = vec![a.iter().map(|v| 2.0 * v / aa).collect()];
    if cc > 0.0 {
        candidates.push(c.to_vec());
        let det = aa * cc - ac * ac;
        if det > 1e-12 * aa * cc {
            let lambda = (2.0 * cc - ac * cc) / det;
            let mu = (aa * cc - 2.0 * ac) / det;
            if lambda >= 0.0 && mu >= 0.0 {
                candidates.push(a.iter().zip(c).map(|(ai, ci)| lambda * ai + mu * ci).collect());
            }
        }
    }
    candidates
        .into_iter()
        .filter(|w| feasible(w))
        .min_by(|u, v| l2_norm_sq(u).total_cmp(&l2_norm_sq(v)))
        .ok_or(BaselineError::InfeasibleUpdate)
}

#[derive(Debug, Clone)]
enum PummaPhase {
    Initializing(Option<(Vec<f64>, Label)>),
    Running { x_plus: Vec<f64>, x_minus: Vec<f64> },
}

/// A baseline learner over a fixed input dimension.
#[derive(Debug, Clone)]
pub struct Baseline {
    config: BaselineConfig,
    dim: usize,
    /// Weights over the (possibly augmented) input.
    w: Vec<f64>,
    b: f64,
    /// ALMA update counter `k`.
    k: usize,
    pumma: PummaPhase,
    steps: usize,
}

impl Baseline {
    pub fn new(config: BaselineConfig, dim: usize) -> Result<Self, BaselineError> {
        config.validate()?;
        let aug = match config.bias_mode {
            BiasMode::AppendOne | BiasMode::AppendNegDbar(_) => dim + 1,
            _ => dim,
        };
        Ok(Self {
            config,
            dim,
            w: vec![0.0; aug],
            b: 0.0,
            k: 1,
            pumma: PummaPhase::Initializing(None),
            steps: 0,
        })
    }

    pub fn config(&self) -> &BaselineConfig {
        &self.config
    }

    fn augment(&self, x: &[f64]) -> Vec<f64> {
        let mut out = x.to_vec();
        match self.config.bias_mode {
            BiasMode::AppendOne => out.push(1.0),
            BiasMode::AppendNegDbar(dbar) => out.push(-dbar),
            _ => {}
        }
        out
    }

    /// The learned classifier in the original input space.
    pub fn current_classifier(&self) -> LinearClassifier {
        match self.config.bias_mode {
            BiasMode::AppendOne => LinearClassifier::new(self.w[..self.dim].to_vec(), self.w[self.dim]),
            BiasMode::AppendNegDbar(dbar) => {
                LinearClassifier::new(self.w[..self.dim].to_vec(), -dbar * self.w[self.dim])
            }
            _ => LinearClassifier::new(self.w.clone(), self.b),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Label {
        if let (Algorithm::Pumma { .. }, PummaPhase::Initializing(first)) = (&self.config.algorithm, &self.pumma) {
            return first.as_ref().map_or(Label::Positive, |(_, y)| *y);
        }
        self.current_classifier().predict(x)
    }

    pub fn update(&mut self, x: &[f64], y: Label) -> Result<StepEvent, BaselineError> {
        if x.len() != self.dim {
            return Err(BaselineError::DimensionMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        self.steps += 1;
        let index = self.steps;
        let y_hat = self.predict(x);
        let before = self.current_classifier();
        let score = y.sign() * before.score(x);
        let dual = l2_norm_sq(&before.w).sqrt();
        let mut event = StepEvent {
            index,
            t: Some(index),
            y_hat,
            y,
            score: (dual > 0.0).then(|| score / dual),
            mistake: score <= 0.0,
            updated: false,
            running: true,
            gamma_t: None,
            gamma_next: None,
        };
        match self.config.algorithm {
            Algorithm::Perceptron => {
                let xa = self.augment(x);
                if perceptron_fires(&self.w, &xa, y) {
                    axpy(y.sign(), &xa, &mut self.w);
                    event.updated = true;
                    event.mistake = true;
                } else {
                    event.mistake = false;
                }
            }
            Algorithm::Romma | Algorithm::AggressiveRomma => {
                let xa = self.augment(x);
                let margin = y.sign() * dot(&self.w, &xa);
                let fire = match self.config.algorithm {
                    Algorithm::Romma => margin <= 0.0,
                    _ => margin < 1.0 - AGGRESSIVE_ROMMA_DELTA,
                };
                if fire {
                    if let Some(w) = romma_project(&self.w, &xa, y) {
                        self.w = w;
                        event.updated = true;
                    }
                }
            }
            Algorithm::Alma { phi, b, c } => {
                let xa = self.augment(x);
                let n = l2_norm_sq(&xa).sqrt();
                if n > 0.0 {
                    let k = self.k as f64;
                    let gamma_k = b / k.sqrt();
                    let margin = y.sign() * dot(&self.w, &xa) / n;
                    if margin <= phi * gamma_k {
                        axpy(y.sign() * c / (k.sqrt() * n), &xa, &mut self.w);
                        let wn = l2_norm_sq(&self.w).sqrt();
                        if wn > 1.0 {
                            self.w.iter_mut().for_each(|v| *v /= wn);
                        }
                        self.k += 1;
                        event.updated = true;
                    }
                }
            }
            Algorithm::Pumma { delta } => self.pumma_update(x, y, delta, &mut event)?,
        }
        Ok(event)
    }

    fn pumma_update(&mut self, x: &[f64], y: Label, delta: f64, event: &mut StepEvent) -> Result<(), BaselineError> {
        match std::mem::replace(&mut self.pumma, PummaPhase::Initializing(None)) {
            PummaPhase::Initializing(None) => {
                event.mistake = y != event.y_hat;
                event.running = false;
                event.score = None;
                self.pumma = PummaPhase::Initializing(Some((x.to_vec(), y)));
            }
            PummaPhase::Initializing(Some((x1, y1))) if y1 == y => {
                event.mistake = false;
                event.running = false;
                event.score = None;
                self.pumma = PummaPhase::Initializing(Some((x1, y1)));
            }
            PummaPhase::Initializing(Some((x1, _))) => {
                event.mistake = true;
                event.running = false;
                event.score = None;
                let (x_plus, x_minus) = match y {
                    Label::Positive => (x.to_vec(), x1),
                    Label::Negative => (x1, x.to_vec()),
                };
                let a = sub(&x_plus, &x_minus);
                let aa = l2_norm_sq(&a);
                if aa == 0.0 {
                    return Err(BaselineError::InfeasibleUpdate);
                }
                self.w = a.iter().map(|v| 2.0 * v / aa).collect();
                self.b = pumma_bias(&self.w, &x_plus, &x_minus);
                self.pumma = PummaPhase::Running { x_plus, x_minus };
                event.updated = true;
            }
            PummaPhase::Running { mut x_plus, mut x_minus } => {
                let functional = y.sign() * (dot(&self.w, x) + self.b);
                if functional < 1.0 - delta {
                    match y {
                        Label::Positive => x_plus = x.to_vec(),
                        Label::Negative => x_minus = x.to_vec(),
                    }
                    let a = sub(&x_plus, &x_minus);
                    let solved = pumma_solve(&a, &self.w);
                    match solved {
                        Ok(w) => {
                            self.w = w;
                            self.b = pumma_bias(&self.w, &x_plus, &x_minus);
                            event.updated = true;
                        }
                        Err(e) => {
                            self.pumma = PummaPhase::Running { x_plus, x_minus };
                            return Err(e);
                        }
                    }
                }
                self.pumma = PummaPhase::Running { x_plus, x_minus };
            }
        }
        Ok(())
    }
}

fn pumma_bias(w: &[f64], x_plus: &[f64], x_minus: &[f64]) -> f64 {
    -0.5 * (dot(w, x_plus) + dot(w, x_minus))
}

impl OnlineLearner for Baseline {
    fn name(&self) -> String {
        self.config.algorithm.name().to_string()
    }

    fn norm(&self) -> NormSpec {
        NormSpec::l2()
    }

    fn predict(&self, x: &[f64]) -> Label {
        Baseline::predict(self, x)
    }

    fn step(&mut self, x: &[f64], y: Label) -> Result<StepEvent, RunError> {
        self.update(x, y).map_err(RunError::from)
    }

    fn classifier(&self) -> Option<LinearClassifier> {
        let c = self.current_classifier();
        c.w.iter().any(|&v| v != 0.0).then_some(c)
    }

    fn gamma_3(&self) -> Option<f64> {
        None
    }
}
