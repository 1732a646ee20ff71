//! Experiment runner, metrics and report emitters.
//!
//! Metrics of a run over a data set `S`:
//!
//! * `m`: number of mistakes (steps with non-positive functional margin, or a
//!   wrong constant prediction during initialization);
//! * `γ̄ = min_{(x,y)∈S} y(w_Tᵀx + b_T)/‖w_T‖*` for the final classifier,
//!   reported only when positive;
//! * `τ`: first step after which the classifier separates all of `S`;
//! * wall time of the learner loop.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::baselines::{Algorithm, Baseline, BaselineConfig, BaselineError, BiasMode, ALMA_DEFAULT_PHI};
use crate::data::{permutation, Dataset, VariantConfig};
use crate::geometry::GeometryError;
use crate::norms::NormSpec;
use crate::omm::{OmmConfig, OmmError, OmmState, Variant};
use crate::types::{Label, LabeledPoint, LinearClassifier};

/// Common interface of every online learner.
pub trait OnlineLearner {
    fn name(&self) -> String;
    fn norm(&self) -> NormSpec;
    fn predict(&self, x: &[f64]) -> Label;
    /// Predicts, observes the label, and possibly updates.
    fn step(&mut self, x: &[f64], y: Label) -> Result<StepEvent, RunError>;
    fn classifier(&self) -> Option<LinearClassifier>;
    /// First margin of the running phase, for learners that have one.
    fn gamma_3(&self) -> Option<f64>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepEvent {
    /// 1-based position in the stream.
    pub index: usize,
    /// Learner-internal step counter (running phase starts at 3 for OMM).
    pub t: Option<usize>,
    pub y_hat: Label,
    pub y: Label,
    /// Signed margin `y(wᵀx + b)/‖w‖*` before the update, when a classifier exists.
    pub score: Option<f64>,
    pub mistake: bool,
    pub updated: bool,
    /// False during an initialization phase.
    pub running: bool,
    /// Predicted margin before the step.
    pub gamma_t: Option<f64>,
    /// Predicted margin after the step.
    pub gamma_next: Option<f64>,
}

impl StepEvent {
    pub fn initializing(index: usize, y_hat: Label, y: Label) -> Self {
        Self {
            index,
            t: None,
            y_hat,
            y,
            score: None,
            mistake: y_hat != y,
            updated: false,
            running: false,
            gamma_t: None,
            gamma_next: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RunError {
    #[error(transparent)]
    Omm(#[from] OmmError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl RunError {
    /// The stream was not separable (or an update had no feasible solution).
    pub fn is_infeasible(&self) -> bool {
        matches!(
            self,
            RunError::Omm(OmmError::Geometry(GeometryError::NotSeparable { .. }))
                | RunError::Baseline(BaselineError::InfeasibleUpdate)
        )
    }
}

/// The eight benchmark algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AlgorithmKind {
    NOmm,
    CeOmm,
    EOmm,
    Romma,
    ARomma,
    Pumma,
    Perceptron,
    Alma,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 8] = [
        AlgorithmKind::NOmm,
        AlgorithmKind::CeOmm,
        AlgorithmKind::EOmm,
        AlgorithmKind::Romma,
        AlgorithmKind::ARomma,
        AlgorithmKind::Pumma,
        AlgorithmKind::Perceptron,
        AlgorithmKind::Alma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::NOmm => "n-OMM",
            AlgorithmKind::CeOmm => "ce-OMM",
            AlgorithmKind::EOmm => "e-OMM",
            AlgorithmKind::Romma => "ROMMA",
            AlgorithmKind::ARomma => "a-ROMMA",
            AlgorithmKind::Pumma => "PUMMA",
            AlgorithmKind::Perceptron => "Perceptron",
            AlgorithmKind::Alma => "ALMA",
        }
    }

    /// Case-insensitive lookup by display name.
    pub fn parse(s: &str) -> Option<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        Self::ALL.into_iter().find(|k| k.name().to_ascii_lowercase() == key)
    }

    pub fn is_omm(self) -> bool {
        matches!(self, AlgorithmKind::NOmm | AlgorithmKind::CeOmm | AlgorithmKind::EOmm)
    }
}

impl std::fmt::Display for AlgorithmKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub kind: AlgorithmKind,
    /// Overrides the OMM aggressiveness of the named variant.
    pub rho: Option<f64>,
    pub norm: NormSpec,
}

impl AlgorithmConfig {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            rho: None,
            norm: NormSpec::l2(),
        }
    }

    pub fn omm_config(&self) -> Option<OmmConfig> {
        let base = match self.kind {
            AlgorithmKind::NOmm => OmmConfig::n_omm(),
            AlgorithmKind::CeOmm => OmmConfig::ce_omm(),
            AlgorithmKind::EOmm => OmmConfig::e_omm(),
            _ => return None,
        };
        let mut cfg = base.with_norm(self.norm);
        if let Some(rho) = self.rho {
            cfg.rho = rho;
        }
        Some(cfg)
    }

    /// Bias handling for the homogeneous baselines: none when the data has
    /// `b* = 0`, otherwise an appended `1` (Perceptron, ALMA) or `−D̄`
    /// coordinate (ROMMA variants).
    pub fn baseline_config(&self, zero_bias: bool, dbar: f64) -> Option<BaselineConfig> {
        let algorithm = match self.kind {
            AlgorithmKind::Romma => Algorithm::Romma,
            AlgorithmKind::ARomma => Algorithm::AggressiveRomma,
            AlgorithmKind::Pumma => Algorithm::pumma(),
            AlgorithmKind::Perceptron => Algorithm::Perceptron,
            AlgorithmKind::Alma => Algorithm::alma(ALMA_DEFAULT_PHI),
            _ => return None,
        };
        let bias_mode = match (self.kind, zero_bias) {
            (AlgorithmKind::Pumma, _) => BiasMode::Native,
            (_, true) => BiasMode::Homogeneous,
            (AlgorithmKind::Romma | AlgorithmKind::ARomma, false) => BiasMode::AppendNegDbar(dbar),
            (_, false) => BiasMode::AppendOne,
        };
        Some(BaselineConfig::new(algorithm, bias_mode))
    }

    pub fn build(&self, dim: usize, zero_bias: bool, dbar: f64) -> Result<Box<dyn OnlineLearner + Send>, RunError> {
        if let Some(cfg) = self.omm_config() {
            return Ok(Box::new(OmmState::new(cfg)?));
        }
        if !self.norm.is_l2() {
            return Err(RunError::InvalidConfig(format!("{} is implemented for the l2 norm only", self.kind)));
        }
        let cfg = self.baseline_config(zero_bias, dbar).expect("baseline kind");
        Ok(Box::new(Baseline::new(cfg, dim)?))
    }

    /// The naïve OMM variant is restricted to a single pass.
    pub fn max_passes(&self) -> Option<usize> {
        (self.omm_config().map(|c| c.variant) == Some(Variant::Naive)).then_some(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub algorithm: String,
    pub variant: Option<VariantConfig>,
    pub m: usize,
    pub gamma_bar: Option<f64>,
    pub tau: Option<usize>,
    pub wall_time_seconds: f64,
    pub steps: usize,
    pub updates: usize,
    pub passes: usize,
    pub gamma3: Option<f64>,
    /// Permutation seeds of passes 2, 3, ….
    pub seeds: Vec<u64>,
    pub final_classifier: Option<LinearClassifier>,
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub events: Vec<StepEvent>,
}

impl RunReport {
    /// `m` recomputed from the event log.
    pub fn mistakes_from_events(&self) -> usize {
        self.events.iter().filter(|e| e.mistake).count()
    }
}

/// A failed run together with everything recorded before the failure.
#[derive(Debug, Clone, Error)]
#[error("{error}")]
pub struct RunFailure {
    pub error: RunError,
    pub partial: Box<RunReport>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub passes: usize,
    pub seed: u64,
    pub track_tau: bool,
    pub keep_events: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            passes: 1,
            seed: 0,
            track_tau: true,
            keep_events: true,
        }
    }
}

/// Smallest `y(wᵀx + b)` over the data set, scanning `hint` first and
/// stopping at the first non-positive value; returns the failing index.
fn first_violation(points: &[LabeledPoint], c: &LinearClassifier, hint: usize) -> Option<usize> {
    let n = points.len();
    (0..n)
        .map(|k| (hint + k) % n)
        .find(|&i| c.functional_margin(&points[i].x, points[i].y) <= 0.0)
}

/// Runs a learner over `points` in the given pass orders.
pub fn run_learner(
    learner: &mut dyn OnlineLearner,
    points: &[LabeledPoint],
    orders: &[Vec<usize>],
    options: &RunOptions,
) -> Result<RunReport, RunFailure> {
    let mut report = RunReport {
        algorithm: learner.name(),
        variant: None,
        m: 0,
        gamma_bar: None,
        tau: None,
        wall_time_seconds: 0.0,
        steps: 0,
        updates: 0,
        passes: orders.len(),
        gamma3: None,
        seeds: Vec::new(),
        final_classifier: None,
        error: None,
        events: Vec::new(),
    };
    let mut hint = 0;
    let mut tau_done = !options.track_tau || points.is_empty();
    let start = Instant::now();
    let mut tau_time = 0.0;
    let mut failure = None;
    'outer: for order in orders {
        for &i in order {
            let p = &points[i];
            let event = match learner.step(&p.x, p.y) {
                Ok(e) => e,
                Err(e) => {
                    failure = Some(e);
                    break 'outer;
                }
            };
            report.steps += 1;
            report.m += event.mistake as usize;
            if event.updated {
                report.updates += 1;
                if !tau_done {
                    let t0 = Instant::now();
                    if let Some(c) = learner.classifier() {
                        match first_violation(points, &c, hint) {
                            None => {
                                report.tau = Some(report.steps);
                                tau_done = true;
                            }
                            Some(j) => hint = j,
                        }
                    }
                    tau_time += t0.elapsed().as_secs_f64();
                }
            }
            if options.keep_events {
                report.events.push(event);
            }
        }
    }
    report.wall_time_seconds = (start.elapsed().as_secs_f64() - tau_time).max(0.0);
    report.gamma3 = learner.gamma_3();
    report.final_classifier = learner.classifier();
    report.gamma_bar = report.final_classifier.as_ref().and_then(|c| {
        crate::geometry::min_signed_margin(points, c, &learner.norm())
            .ok()
            .filter(|g| *g > 0.0)
    });
    match failure {
        None => Ok(report),
        Some(error) => {
            report.error = Some(error.to_string());
            Err(RunFailure {
                error,
                partial: Box::new(report),
            })
        }
    }
}

/// Pass 1 in native order, passes 2.. with permutations seeded `seed + k`.
pub fn pass_orders(n: usize, passes: usize, seed: u64) -> (Vec<Vec<usize>>, Vec<u64>) {
    let mut orders = vec![(0..n).collect::<Vec<_>>()];
    let mut seeds = Vec::new();
    for k in 1..passes.max(1) {
        let s = seed.wrapping_add(k as u64);
        seeds.push(s);
        orders.push(permutation(n, s));
    }
    (orders, seeds)
}

/// Runs one algorithm on one (already transformed) data set.
pub fn run_experiment(
    algo: &AlgorithmConfig,
    ds: &Dataset,
    variant: Option<VariantConfig>,
    options: &RunOptions,
) -> Result<RunReport, RunFailure> {
    let zero_bias = variant.is_none_or(|v| v.zero_bias);
    let dbar = ds
        .stats
        .map(|s| s.d_bar)
        .unwrap_or_else(|| ds.points.iter().map(|p| crate::linalg::l2_norm_sq(&p.x).sqrt()).fold(0.0, f64::max));
    let passes = algo.max_passes().map_or(options.passes, |cap| options.passes.min(cap));
    let (orders, seeds) = pass_orders(ds.len(), passes, options.seed);
    let mut learner = algo.build(ds.d, zero_bias, dbar.max(f64::MIN_POSITIVE)).map_err(|error| RunFailure {
        partial: Box::new(empty_report(algo, variant, &error)),
        error,
    })?;
    let name = algo.omm_config().map_or_else(|| algo.kind.name().to_string(), |c| c.name());
    let finish = |mut r: RunReport| {
        r.algorithm = name.clone();
        r.variant = variant;
        r.seeds = seeds.clone();
        r
    };
    match run_learner(learner.as_mut(), &ds.points, &orders, options) {
        Ok(r) => Ok(finish(r)),
        Err(f) => Err(RunFailure {
            error: f.error,
            partial: Box::new(finish(*f.partial)),
        }),
    }
}

fn empty_report(algo: &AlgorithmConfig, variant: Option<VariantConfig>, error: &RunError) -> RunReport {
    RunReport {
        algorithm: algo.kind.name().to_string(),
        variant,
        m: 0,
        gamma_bar: None,
        tau: None,
        wall_time_seconds: 0.0,
        steps: 0,
        updates: 0,
        passes: 0,
        gamma3: None,
        seeds: Vec::new(),
        final_classifier: None,
        error: Some(error.to_string()),
        events: Vec::new(),
    }
}

/// One job of a benchmark grid.
#[derive(Debug, Clone)]
pub struct GridJob<'a> {
    pub algo: AlgorithmConfig,
    pub dataset: &'a Dataset,
    pub variant: VariantConfig,
}

/// Runs jobs on the rayon pool; results come back in job order. Failed runs
/// contribute their partial reports.
pub fn run_grid(jobs: &[GridJob<'_>], options: &RunOptions) -> Vec<RunReport> {
    jobs.par_iter()
        .map(|job| match run_experiment(&job.algo, job.dataset, Some(job.variant), options) {
            Ok(r) => r,
            Err(f) => *f.partial,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationCounts {
    pub phi: f64,
    /// Steps with `γ(xₜ, yₜ; wₜ, bₜ) ≤ φγₜ`.
    pub m_phi: usize,
    /// Steps with `γ(xₜ, yₜ; wₜ, bₜ) ≤ φγ*`.
    pub m_bar_phi: usize,
}

/// Violation counts over running-phase steps (`t ≥ 3`). Steps without a
/// predicted margin contribute to `m̄` only.
pub fn violation_counts(events: &[StepEvent], gamma_star: f64, phis: &[f64]) -> Vec<ViolationCounts> {
    phis.iter()
        .map(|&phi| {
            let mut m_phi = 0;
            let mut m_bar_phi = 0;
            for e in events.iter().filter(|e| e.running) {
                let Some(a) = e.score else { continue };
                let margin = a.max(0.0);
                if let Some(g) = e.gamma_t {
                    m_phi += (margin <= phi * g) as usize;
                }
                m_bar_phi += (margin <= phi * gamma_star) as usize;
            }
            ViolationCounts { phi, m_phi, m_bar_phi }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Svg,
}

#[derive(Debug, Error)]
pub enum EmitError {
    #[error("no reports to emit")]
    Empty,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// Writes reports as CSV, a Table-2-style markdown table, or SVG plots.
///
/// For [`ReportFormat::Svg`], `path` is a directory receiving `m.svg`,
/// `gamma_bar.svg` and `tau.svg`. With `include_time = false` the time column
/// holds `--`, which makes the output byte-identical across reruns.
pub fn emit_report(reports: &[RunReport], format: ReportFormat, path: &Path, include_time: bool) -> Result<(), EmitError> {
    if reports.is_empty() {
        return Err(EmitError::Empty);
    }
    match format {
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_path(path)?;
            w.write_record(["algorithm", "theta", "zero_bias", "m", "gamma_bar", "tau", "time_s"])?;
            for r in reports {
                let (theta, zb) = r
                    .variant
                    .map_or(("--".to_string(), "--".to_string()), |v| (v.theta.to_string(), v.zero_bias.to_string()));
                w.write_record([
                    r.algorithm.clone(),
                    theta,
                    zb,
                    r.m.to_string(),
                    r.gamma_bar.map_or("--".into(), |g| format!("{g:.6}")),
                    r.tau.map_or("--".into(), |t| t.to_string()),
                    if include_time { format!("{:.3}", r.wall_time_seconds) } else { "--".into() },
                ])?;
            }
            w.flush()?;
        }
        ReportFormat::Markdown => fs::write(path, markdown_table(reports, &[], include_time))?,
        ReportFormat::Svg => {
            fs::create_dir_all(path)?;
            for metric in [Metric::Mistakes, Metric::GammaBar, Metric::Tau] {
                fs::write(path.join(format!("{}.svg", metric.file_stem())), svg_plot(reports, metric))?;
            }
        }
    }
    Ok(())
}

/// `D̄/D` ratio shown in a section header, keyed by `(θ, zero_bias)`.
pub type RatioNote = ((f64, bool), f64);

/// Markdown table with one section per θ and `b* = 0` / `b* ≠ 0` column
/// groups; missing values are shown as `--`.
pub fn markdown_table(reports: &[RunReport], ratios: &[RatioNote], include_time: bool) -> String {
    let mut thetas: Vec<f64> = reports.iter().filter_map(|r| r.variant.map(|v| v.theta)).collect();
    thetas.sort_by(f64::total_cmp);
    thetas.dedup();
    if thetas.is_empty() {
        thetas.push(f64::NAN);
    }
    let mut algos: Vec<String> = Vec::new();
    let order = |name: &str| {
        AlgorithmKind::ALL
            .iter()
            .position(|k| k.name() == name)
            .unwrap_or(AlgorithmKind::ALL.len())
    };
    for r in reports {
        if !algos.contains(&r.algorithm) {
            algos.push(r.algorithm.clone());
        }
    }
    algos.sort_by_key(|a| order(a));

    let mut out = String::new();
    out.push_str("| | m | γ̄ | τ | time (s) | m | γ̄ | τ | time (s) |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    out.push_str("| | **b\\* = 0** | | | | **b\\* ≠ 0** | | | |\n");
    for &theta in &thetas {
        let ratio = |zb: bool| {
            ratios
                .iter()
                .find(|((t, z), _)| *t == theta && *z == zb)
                .map_or("--".to_string(), |(_, v)| format!("{v:.4}"))
        };
        let label = if theta.is_nan() { "--".to_string() } else { format!("θ = {theta}") };
        let _ = writeln!(
            out,
            "| **{label}** | D̄/D = {} | | | | D̄/D = {} | | | |",
            ratio(true),
            ratio(false)
        );
        for a in &algos {
            let cell = |zb: bool| -> String {
                let found = reports.iter().find(|r| {
                    &r.algorithm == a
                        && match r.variant {
                            Some(v) => (v.theta == theta || theta.is_nan()) && v.zero_bias == zb,
                            None => zb && theta.is_nan(),
                        }
                });
                match found {
                    None => "-- | -- | -- | --".into(),
                    Some(r) => format!(
                        "{} | {} | {} | {}",
                        r.m,
                        r.gamma_bar.map_or("--".into(), |g| format!("{g:.2}")),
                        r.tau.map_or("--".into(), |t| t.to_string()),
                        if include_time { format!("{:.2}", r.wall_time_seconds) } else { "--".into() }
                    ),
                }
            };
            let _ = writeln!(out, "| {a} | {} | {} |", cell(true), cell(false));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Metric {
    Mistakes,
    GammaBar,
    Tau,
}

impl Metric {
    fn file_stem(self) -> &'static str {
        match self {
            Metric::Mistakes => "m",
            Metric::GammaBar => "gamma_bar",
            Metric::Tau => "tau",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Metric::Mistakes => "mistakes m (log10)",
            Metric::GammaBar => "final margin γ̄",
            Metric::Tau => "τ (log10)",
        }
    }

    fn value(self, r: &RunReport) -> Option<f64> {
        match self {
            Metric::Mistakes => Some(((r.m.max(1)) as f64).log10()),
            Metric::GammaBar => r.gamma_bar,
            Metric::Tau => r.tau.map(|t| (t.max(1) as f64).log10()),
        }
    }
}

const PALETTE: [&str; 8] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02", "#a6761d", "#666666"];

/// Metric against θ, one line per algorithm, `b* = 0` and `b* ≠ 0` panels.
fn svg_plot(reports: &[RunReport], metric: Metric) -> String {
    let (pw, ph, pad) = (360.0, 260.0, 50.0);
    let width = 2.0 * pw + 3.0 * pad + 110.0;
    let height = ph + 2.0 * pad;
    let mut algos: Vec<&str> = reports.iter().map(|r| r.algorithm.as_str()).collect();
    algos.sort_by_key(|a| AlgorithmKind::ALL.iter().position(|k| k.name() == *a).unwrap_or(99));
    algos.dedup();
    let values: Vec<f64> = reports.iter().filter_map(|r| metric.value(r)).collect();
    let (mut lo, mut hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        lo = 0.0;
        hi = 1.0;
    }
    if hi - lo < 1e-9 {
        hi = lo + 1.0;
    }
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(svg, r#"<text x="{}" y="18" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, metric.title());
    for (panel, zero_bias) in [(0.0, true), (1.0, false)] {
        let x0 = pad + panel * (pw + pad);
        let y0 = pad;
        let _ = writeln!(svg, r##"<rect x="{x0}" y="{y0}" width="{pw}" height="{ph}" fill="none" stroke="#000"/>"##);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            x0 + pw / 2.0,
            y0 - 6.0,
            if zero_bias { "b* = 0" } else { "b* ≠ 0" }
        );
        for k in 0..=4 {
            let v = lo + (hi - lo) * k as f64 / 4.0;
            let y = y0 + ph - ph * k as f64 / 4.0;
            let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="end">{v:.2}</text>"#, x0 - 4.0, y + 4.0);
            let theta = k as f64 / 4.0;
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" text-anchor="middle">{theta}</text>"#,
                x0 + pw * theta,
                y0 + ph + 14.0
            );
        }
        for (ai, a) in algos.iter().enumerate() {
            let mut pts: Vec<(f64, f64)> = reports
                .iter()
                .filter(|r| r.algorithm == *a && r.variant.is_some_and(|v| v.zero_bias == zero_bias))
                .filter_map(|r| metric.value(r).map(|v| (r.variant.expect("filtered").theta, v)))
                .collect();
            pts.sort_by(|p, q| p.0.total_cmp(&q.0));
            let coords: Vec<String> = pts
                .iter()
                .map(|(t, v)| format!("{:.2},{:.2}", x0 + pw * t.min(1.0), y0 + ph - ph * (v - lo) / (hi - lo)))
                .collect();
            let color = PALETTE[ai % PALETTE.len()];
            if !coords.is_empty() {
                let _ = writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    coords.join(" ")
                );
            }
        }
    }
    for (ai, a) in algos.iter().enumerate() {
        let x = 2.0 * pw + 2.5 * pad;
        let y = pad + 14.0 * ai as f64;
        let color = PALETTE[ai % PALETTE.len()];
        let _ = writeln!(svg, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 16.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{a}</text>"#, x + 20.0, y + 4.0);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Reproducibility record written next to run outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub reports: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub algorithm: String,
    pub variant: Option<VariantConfig>,
    pub m: usize,
    pub gamma_bar: Option<f64>,
    pub tau: Option<usize>,
    pub gamma3: Option<f64>,
    pub passes: usize,
    pub seeds: Vec<u64>,
    pub error: Option<String>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seeds: Vec<u64>, reports: &[RunReport]) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config,
            seeds,
            reports: reports
                .iter()
                .map(|r| ManifestEntry {
                    algorithm: r.algorithm.clone(),
                    variant: r.variant,
                    m: r.m,
                    gamma_bar: r.gamma_bar,
                    tau: r.tau,
                    gamma3: r.gamma3,
                    passes: r.passes,
                    seeds: r.seeds.clone(),
                    error: r.error.clone(),
                })
                .collect(),
        }
    }

    pub fn write(&self, path: &Path) -> Result<(), EmitError> {
        fs::write(path, serde_json::to_string_pretty(self).map_err(std::io::Error::other)? + "\n")?;
        Ok(())
    }
}

/// Writes the per-step event log as CSV.
pub fn write_events(events: &[StepEvent], path: &Path) -> Result<(), EmitError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "t", "y_hat", "y", "score", "mistake", "updated", "running", "gamma_t", "gamma_next"])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.12e}"));
    for e in events {
        w.write_record([
            e.index.to_string(),
            e.t.map_or(String::new(), |t| t.to_string()),
            e.y_hat.to_string(),
            e.y.to_string(),
            opt(e.score),
            e.mistake.to_string(),
            e.updated.to_string(),
            e.running.to_string(),
            opt(e.gamma_t),
            opt(e.gamma_next),
        ])?;
    }
    w.flush()?;
    Ok(())
}
