//! Subcommand definitions and handlers.

use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde_json::json;

use omm_core::bounds::{self, BoundInputs, Kappa};
use omm_core::data::{self, Dataset, Schema, VariantConfig};
use omm_core::harness::{
    self, AlgorithmConfig, AlgorithmKind, GridJob, ReportFormat, RunManifest, RunOptions, RunReport,
};
use omm_core::NormSpec;

use crate::config::{Config, OUT_DIR_ENV};
use crate::verify::{self, Fault, Suite};
use crate::CliError;

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode, standardize and filter raw delimited data into a dataset cache.
    Preprocess(PreprocessArgs),
    /// Run one algorithm on one data variant.
    Run(RunArgs),
    /// Run an algorithm × variant grid and emit tables and plots.
    Bench(BenchArgs),
    /// Evaluate the mistake-bound calculators.
    Bounds(BoundsArgs),
    /// Check the invariant suites.
    Verify(VerifyArgs),
}

pub fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Preprocess(a) => cmd_preprocess(&a),
        Command::Run(a) => cmd_run(&a),
        Command::Bench(a) => cmd_bench(&a),
        Command::Bounds(a) => cmd_bounds(&a),
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn out_dir(flag: Option<PathBuf>, cfg: &Config) -> Result<PathBuf, CliError> {
    if let Some(p) = cfg.resolve_opt(flag, "out")? {
        return Ok(p);
    }
    Ok(std::env::var_os(OUT_DIR_ENV).map_or_else(|| PathBuf::from("omm-out"), PathBuf::from))
}

fn norm_from(p: Option<f64>) -> Result<NormSpec, CliError> {
    match p {
        None => Ok(NormSpec::l2()),
        Some(p) => NormSpec::lp(p).map_err(|e| CliError::Usage(e.to_string())),
    }
}

// ---------------------------------------------------------------- preprocess

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw input file(s); `.gz` is decompressed. Repeat for several files.
    #[arg(long)]
    pub input: Vec<PathBuf>,
    /// Schema sidecar describing the columns.
    #[arg(long)]
    pub schema: Option<PathBuf>,
    /// Output dataset cache; the summary goes to `<out>.stats.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn stats_path(cache: &Path) -> PathBuf {
    let mut s = cache.as_os_str().to_owned();
    s.push(".stats.json");
    PathBuf::from(s)
}

pub fn cmd_preprocess(a: &PreprocessArgs) -> Result<(), CliError> {
    let cfg = Config::load(a.config.as_deref())?;
    let mut inputs = a.input.clone();
    if inputs.is_empty() {
        inputs = cfg.list("input").into_iter().map(PathBuf::from).collect();
    }
    if inputs.is_empty() {
        return Err(CliError::Usage("--input is required".into()));
    }
    let schema_path = cfg
        .resolve_opt(a.schema.clone(), "schema")?
        .ok_or_else(|| CliError::Usage("--schema is required".into()))?;
    let out = cfg
        .resolve_opt(a.out.clone(), "out")?
        .ok_or_else(|| CliError::Usage("--out is required".into()))?;
    if !schema_path.is_file() {
        return Err(CliError::Usage(format!("schema file {} not found", schema_path.display())));
    }
    let schema = Schema::load(&schema_path)?;
    let raw = data::load_csv_many(&inputs, &schema)?;
    let is_adult = schema.columns.iter().map(|c| c.name.as_str()).eq(data::ADULT_COLUMNS);
    let (ds, report) = if is_adult {
        data::preprocess_adult(&raw)?
    } else {
        data::preprocess(&raw, &data::SoftMarginFilter::default())?
    };
    let ds = ds.with_stats()?;
    let stats = ds.stats.expect("stats computed");
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    ds.write_cache(&out)?;
    let summary = json!({
        "n": ds.len(),
        "d": ds.d,
        "positive_fraction": ds.positive_fraction(),
        "rows_read": report.rows_read,
        "rows_complete": report.rows_complete,
        "rows_kept": report.rows_kept,
        "D": stats.d,
        "D_plus": stats.d_plus,
        "D_minus": stats.d_minus,
        "D_bar": stats.d_bar,
        "gamma_star": stats.gamma_star,
        "r": stats.r,
        "features": report.feature_names,
    });
    std::fs::write(stats_path(&out), serde_json::to_string_pretty(&summary)? + "\n")?;
    println!(
        "n={} d={} positive_fraction={:.4} D={:.4} D_bar={:.4} gamma_star={:.6}",
        ds.len(),
        ds.d,
        ds.positive_fraction(),
        stats.d,
        stats.d_bar,
        stats.gamma_star
    );
    Ok(())
}

// ---------------------------------------------------------------- data sources

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Synthetic {
    /// Adversarial three-point stream.
    Example1,
    /// Separable Gaussian clusters.
    Gaussian,
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Dataset cache written by `preprocess`.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub synthetic: Option<Synthetic>,
    /// Example 1 scale `c` (> 2).
    #[arg(long = "c")]
    pub c: Option<f64>,
    /// Example 1: number of cycling steps after the adversarial prefix.
    #[arg(long)]
    pub tail: Option<usize>,
    /// Gaussian: dimension.
    #[arg(long)]
    pub dim: Option<usize>,
    /// Gaussian: number of points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Gaussian: class separation.
    #[arg(long)]
    pub separation: Option<f64>,
    /// Gaussian: generator seed.
    #[arg(long)]
    pub data_seed: Option<u64>,
}

enum Source {
    Cache(Dataset),
    Synthetic(Dataset),
}

fn synthetic_kind(s: &str) -> Result<Synthetic, CliError> {
    Synthetic::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown synthetic stream '{s}'")))
}

fn load_source(a: &DataArgs, cfg: &Config) -> Result<Source, CliError> {
    let synthetic = match a.synthetic {
        Some(s) => Some(s),
        None => cfg.raw("synthetic").map(synthetic_kind).transpose()?,
    };
    let data = cfg.resolve_opt(a.data.clone(), "data")?;
    match (data, synthetic) {
        (Some(_), Some(_)) => Err(CliError::Usage("--data and --synthetic are mutually exclusive".into())),
        (None, None) => Err(CliError::Usage("one of --data or --synthetic is required".into())),
        (Some(path), None) => {
            if !path.is_file() {
                return Err(CliError::Usage(format!("dataset cache {} not found", path.display())));
            }
            Ok(Source::Cache(Dataset::read_cache(&path)?))
        }
        (None, Some(Synthetic::Example1)) => {
            let c = cfg.resolve(a.c, "c", 10.0)?;
            let tail = cfg.resolve(a.tail, "tail", 0)?;
            Ok(Source::Synthetic(Dataset::new(data::gen_example1(c, tail)?)?))
        }
        (None, Some(Synthetic::Gaussian)) => {
            let d = cfg.resolve(a.dim, "dim", 5)?;
            let n = cfg.resolve(a.n, "n", 1000)?;
            let sep = cfg.resolve(a.separation, "separation", 2.0)?;
            let seed = cfg.resolve(a.data_seed, "data-seed", 0)?;
            Ok(Source::Synthetic(Dataset::new(data::gen_gaussian_clusters(d, n, sep, seed)?)?))
        }
    }
}

fn parse_algo(s: &str) -> Result<AlgorithmKind, CliError> {
    AlgorithmKind::parse(s).ok_or_else(|| {
        let names: Vec<_> = AlgorithmKind::ALL.iter().map(|k| k.name().to_ascii_lowercase()).collect();
        CliError::Usage(format!("unknown algorithm '{s}' (expected one of {})", names.join(", ")))
    })
}

fn parse_bool(s: &str) -> Result<bool, CliError> {
    match s.to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(CliError::Usage(format!("invalid boolean '{s}'"))),
    }
}

// ---------------------------------------------------------------- run

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// perceptron, romma, a-romma, alma, pumma, e-omm, ce-omm or n-omm.
    #[arg(long)]
    pub algo: Option<String>,
    /// Feature-scaling strength (dataset caches only).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Move the optimal bias to zero (dataset caches only).
    #[arg(long, value_parser = parse_bool)]
    pub zero_bias: Option<bool>,
    #[arg(long)]
    pub passes: Option<usize>,
    /// Override the OMM aggressiveness.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Seed of the pass permutations.
    #[arg(long)]
    pub seed: Option<u64>,
    /// ℓp exponent for the OMM variants.
    #[arg(long)]
    pub p: Option<f64>,
    /// Output directory (default: $OMM_OUT_DIR, else ./omm-out).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    let cfg = Config::load(a.config.as_deref())?;
    let algo_name = cfg
        .resolve_opt(a.algo.clone(), "algo")?
        .ok_or_else(|| CliError::Usage("--algo is required".into()))?;
    let kind = parse_algo(&algo_name)?;
    let theta = cfg.resolve(a.theta, "theta", 0.0)?;
    let zero_bias = match a.zero_bias {
        Some(b) => b,
        None => cfg.raw("zero-bias").map(parse_bool).transpose()?.unwrap_or(true),
    };
    let passes = cfg.resolve(a.passes, "passes", 1)?;
    let seed = cfg.resolve(a.seed, "seed", 0)?;
    let rho = cfg.resolve_opt(a.rho, "rho")?;
    let norm = norm_from(cfg.resolve_opt(a.p, "p")?)?;
    if passes == 0 {
        return Err(CliError::Usage("--passes must be at least 1".into()));
    }
    if rho.is_some() && !kind.is_omm() {
        return Err(CliError::Usage("--rho applies to the OMM variants only".into()));
    }
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(CliError::Usage(format!("--theta {theta} must be a nonnegative number")));
    }
    let out = out_dir(a.out.clone(), &cfg)?;
    let algo = AlgorithmConfig { kind, rho, norm };
    if let Some(omm) = algo.omm_config() {
        omm.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }

    let (ds, variant) = match load_source(&a.data, &cfg)? {
        Source::Cache(base) => {
            let v = VariantConfig::new(theta, zero_bias);
            (data::apply_variant(&base, &v)?, Some(v))
        }
        Source::Synthetic(ds) => (ds, None),
    };
    let options = RunOptions {
        passes,
        seed,
        track_tau: true,
        keep_events: true,
    };
    let (report, failure) = match harness::run_experiment(&algo, &ds, variant, &options) {
        Ok(r) => (r, None),
        Err(f) => (*f.partial, Some(f.error)),
    };
    std::fs::create_dir_all(&out)?;
    harness::emit_report(std::slice::from_ref(&report), ReportFormat::Csv, &out.join("summary.csv"), true)?;
    harness::write_events(&report.events, &out.join("events.csv"))?;
    std::fs::write(out.join("report.json"), serde_json::to_string_pretty(&report)? + "\n")?;
    let config = json!({
        "algo": kind.name(),
        "theta": theta,
        "zero_bias": zero_bias,
        "passes": passes,
        "seed": seed,
        "rho": rho,
        "p": norm.p(),
        "data": a.data.data.as_ref().map(|p| p.display().to_string()),
        "synthetic": a.data.synthetic.map(|s| format!("{s:?}").to_ascii_lowercase()),
        "n": ds.len(),
        "d": ds.d,
    });
    RunManifest::new("run", config, vec![seed], std::slice::from_ref(&report)).write(&out.join("manifest.json"))?;
    println!("{}", summary_line(&report));
    match failure {
        None => Ok(()),
        Some(e) if e.is_infeasible() => Err(CliError::Infeasible(e.to_string())),
        Some(e) => Err(CliError::Runtime(e.to_string())),
    }
}

pub fn summary_line(r: &RunReport) -> String {
    format!(
        "algorithm={} m={} gamma_bar={} tau={} updates={} steps={} time_s={:.3}",
        r.algorithm,
        r.m,
        r.gamma_bar.map_or("--".into(), |g| format!("{g:.6}")),
        r.tau.map_or("--".into(), |t| t.to_string()),
        r.updates,
        r.steps,
        r.wall_time_seconds
    )
}

// ---------------------------------------------------------------- bench

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// All eight algorithms on all ten (θ, bias) variants.
    #[arg(long)]
    pub all: bool,
    /// Algorithms to run (repeatable); ignored with --all.
    #[arg(long)]
    pub algo: Vec<String>,
    /// θ values (repeatable); ignored with --all.
    #[arg(long)]
    pub theta: Vec<f64>,
    /// Bias settings (repeatable); ignored with --all.
    #[arg(long, value_parser = parse_bool)]
    pub zero_bias: Vec<bool>,
    #[arg(long)]
    pub passes: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write `--` instead of wall times so reruns produce identical files.
    #[arg(long)]
    pub no_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let cfg = Config::load(a.config.as_deref())?;
    let all = a.all || cfg.raw("all").map(parse_bool).transpose()?.unwrap_or(false);
    let passes = cfg.resolve(a.passes, "passes", 1)?;
    let seed = cfg.resolve(a.seed, "seed", 0)?;
    let no_timing = a.no_timing || cfg.raw("no-timing").map(parse_bool).transpose()?.unwrap_or(false);
    if passes == 0 {
        return Err(CliError::Usage("--passes must be at least 1".into()));
    }
    let kinds: Vec<AlgorithmKind> = if all {
        AlgorithmKind::ALL.to_vec()
    } else {
        let names = if a.algo.is_empty() { cfg.list("algo") } else { a.algo.clone() };
        if names.is_empty() {
            return Err(CliError::Usage("pass --all or at least one --algo".into()));
        }
        names.iter().map(|s| parse_algo(s)).collect::<Result<_, _>>()?
    };
    let variants: Vec<VariantConfig> = if all {
        VariantConfig::grid()
    } else {
        let thetas = if a.theta.is_empty() {
            let l = cfg.list("theta");
            if l.is_empty() {
                vec![0.0]
            } else {
                l.iter()
                    .map(|s| s.parse().map_err(|_| CliError::Usage(format!("invalid theta '{s}'"))))
                    .collect::<Result<_, _>>()?
            }
        } else {
            a.theta.clone()
        };
        let biases = if a.zero_bias.is_empty() {
            let l = cfg.list("zero-bias");
            if l.is_empty() {
                vec![true]
            } else {
                l.iter().map(|s| parse_bool(s)).collect::<Result<_, _>>()?
            }
        } else {
            a.zero_bias.clone()
        };
        let mut v = Vec::new();
        for &zb in &biases {
            for &t in &thetas {
                if !(t >= 0.0 && t.is_finite()) {
                    return Err(CliError::Usage(format!("--theta {t} must be a nonnegative number")));
                }
                v.push(VariantConfig::new(t, zb));
            }
        }
        v
    };
    let out = out_dir(a.out.clone(), &cfg)?;
    let base = match load_source(&a.data, &cfg)? {
        Source::Cache(ds) | Source::Synthetic(ds) => ds,
    };
    let plus: Vec<&[f64]> = base.points.iter().filter(|p| p.y.sign() > 0.0).map(|p| p.x.as_slice()).collect();
    let minus: Vec<&[f64]> = base.points.iter().filter(|p| p.y.sign() < 0.0).map(|p| p.x.as_slice()).collect();
    let l2 = NormSpec::l2();
    let diam = bounds::diameter(&plus, &l2).max(bounds::diameter(&minus, &l2));

    let mut datasets = Vec::with_capacity(variants.len());
    let mut ratios = Vec::new();
    for v in &variants {
        let ds = data::apply_variant(&base, v)?;
        let dbar = ds.points.iter().map(|p| l2.norm(&p.x)).fold(0.0, f64::max);
        ratios.push(((v.theta, v.zero_bias), if diam > 0.0 { dbar / diam } else { f64::NAN }));
        datasets.push(ds);
    }
    let mut jobs = Vec::new();
    for (v, ds) in variants.iter().zip(&datasets) {
        for &kind in &kinds {
            jobs.push(GridJob {
                algo: AlgorithmConfig::new(kind),
                dataset: ds,
                variant: *v,
            });
        }
    }
    let options = RunOptions {
        passes,
        seed,
        track_tau: true,
        keep_events: false,
    };
    let reports = harness::run_grid(&jobs, &options);
    for r in reports.iter().filter(|r| r.error.is_some()) {
        eprintln!(
            "warning: {} on {:?} failed: {}",
            r.algorithm,
            r.variant,
            r.error.as_deref().unwrap_or_default()
        );
    }
    std::fs::create_dir_all(&out)?;
    let include_time = !no_timing;
    harness::emit_report(&reports, ReportFormat::Csv, &out.join("results.csv"), include_time)?;
    let table = harness::markdown_table(&reports, &ratios, include_time);
    std::fs::write(out.join("table.md"), &table)?;
    harness::emit_report(&reports, ReportFormat::Svg, &out.join("plots"), include_time)?;
    let config = json!({
        "algorithms": kinds.iter().map(|k| k.name()).collect::<Vec<_>>(),
        "variants": variants,
        "passes": passes,
        "seed": seed,
        "data": a.data.data.as_ref().map(|p| p.display().to_string()),
        "n": base.len(),
        "d": base.d,
        "D": diam,
    });
    RunManifest::new("bench", config, vec![seed], &reports).write(&out.join("manifest.json"))?;
    print!("{table}");
    Ok(())
}

// ---------------------------------------------------------------- bounds

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Separation ratio `D/γ*`.
    #[arg(long)]
    pub r: Option<f64>,
    /// Violation level, `φ < 1`.
    #[arg(long, allow_negative_numbers = true)]
    pub phi: Option<f64>,
    /// First running-phase margin.
    #[arg(long)]
    pub gamma3: Option<f64>,
    /// Optimal margin.
    #[arg(long)]
    pub gamma_star: Option<f64>,
    /// ℓp exponent (numeric κ for p ≠ 2).
    #[arg(long)]
    pub p: Option<f64>,
    /// Print a JSON object instead of text.
    #[arg(long)]
    pub json: bool,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn fmt_value(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.4}")
    }
}

pub fn cmd_bounds(a: &BoundsArgs) -> Result<(), CliError> {
    let cfg = Config::load(a.config.as_deref())?;
    let r = cfg
        .resolve_opt(a.r, "r")?
        .ok_or_else(|| CliError::Usage("--r is required".into()))?;
    let phi = cfg.resolve(a.phi, "phi", 0.0)?;
    let gamma3 = cfg.resolve_opt(a.gamma3, "gamma3")?;
    let gamma_star = cfg.resolve_opt(a.gamma_star, "gamma-star")?;
    let norm = norm_from(cfg.resolve_opt(a.p, "p")?)?;
    if !(r >= 0.0 && r.is_finite()) {
        return Err(CliError::Usage(format!("--r {r} must be a nonnegative number")));
    }
    if !(phi < 1.0) {
        return Err(CliError::Usage(format!("--phi {phi} must be below 1")));
    }
    if gamma3.is_some() != gamma_star.is_some() {
        return Err(CliError::Usage("--gamma3 and --gamma-star go together".into()));
    }
    for (name, v) in [("gamma3", gamma3), ("gamma-star", gamma_star)] {
        if v.is_some_and(|v| !(v > 0.0 && v.is_finite())) {
            return Err(CliError::Usage(format!("--{name} must be positive")));
        }
    }
    let k = bounds::kappa(r, phi, &norm);
    let branch = norm.is_l2().then(|| bounds::kappa_circ_l2_branch(r / 2.0, (1.0 - phi) / 2.0));
    // Without the margins only the infeasible case has a known value.
    let inputs = gamma3.zip(gamma_star).map(|(g3, gs)| BoundInputs::new(r, phi, g3, gs));
    let bound = match (&inputs, k) {
        (Some(i), _) => Some(bounds::m_phi_bound(i, &norm).value),
        (None, Kappa::Infeasible) => Some(0.0),
        (None, _) => None,
    };
    let explicit = norm.is_l2().then(|| {
        let i = inputs.unwrap_or(BoundInputs::new(r, phi, 1.0, 1.0));
        let e = bounds::m_phi_bound_l2_explicit(&i);
        (e, inputs.is_some() || e.value == 0.0)
    });
    let total = bound.map(|b| if b.is_finite() { b.floor() + 2.0 } else { f64::INFINITY });
    if a.json {
        let v = json!({
            "r": r,
            "phi": phi,
            "p": norm.p(),
            "kappa": k.value(),
            "kappa_infeasible": k.is_infeasible(),
            "kappa_branch": branch.map(|b| format!("{b:?}").to_ascii_lowercase()),
            "bound": bound.map(|b| if b.is_finite() { json!(b) } else { json!("inf") }),
            "explicit_bound": explicit.and_then(|(e, known)| known.then(|| if e.value.is_finite() { json!(e.value) } else { json!("inf") })),
            "explicit_branch": explicit.map(|(e, _)| format!("{:?}", e.branch).to_ascii_lowercase()),
            "total_mistakes": total.map(|t| if t.is_finite() { json!(t) } else { json!("inf") }),
        });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    match k {
        Kappa::Infeasible => println!("kappa(r, phi) = infeasible"),
        Kappa::Value(v) => println!("kappa(r, phi) = {v:.6}"),
    }
    if let Some(b) = branch {
        println!("kappa branch: {}", format!("{b:?}").to_ascii_lowercase());
    }
    match bound {
        Some(b) => println!("bound: m(phi) <= {}", fmt_value(b)),
        None => println!("bound: pass --gamma3 and --gamma-star to evaluate m(phi)"),
    }
    if let Some((e, known)) = explicit {
        let branch = format!("{:?}", e.branch).to_ascii_lowercase();
        if known {
            println!("explicit l2 bound: {} (branch {branch})", fmt_value(e.value));
        } else {
            println!("explicit l2 branch: {branch}");
        }
    }
    if let Some(t) = total {
        println!("mistakes <= {} (including initialization)", fmt_value(t).trim_end_matches(".0000"));
    }
    Ok(())
}

// ---------------------------------------------------------------- verify

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Suites to run (repeatable); all by default.
    #[arg(long, value_enum)]
    pub suite: Vec<Suite>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Deliberately corrupt recorded quantities to exercise the checks.
    #[arg(long, value_enum)]
    pub inject_fault: Option<Fault>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

pub fn cmd_verify(a: &VerifyArgs) -> Result<(), CliError> {
    let cfg = Config::load(a.config.as_deref())?;
    let seed = cfg.resolve(a.seed, "seed", 0)?;
    let suites = if a.suite.is_empty() {
        let l = cfg.list("suite");
        if l.is_empty() {
            Suite::value_variants().to_vec()
        } else {
            l.iter()
                .map(|s| Suite::from_str(s, true).map_err(|_| CliError::Usage(format!("unknown suite '{s}'"))))
                .collect::<Result<_, _>>()?
        }
    } else {
        a.suite.clone()
    };
    let results = verify::run_suites(&suites, seed, a.inject_fault);
    let mut failed = Vec::new();
    for r in &results {
        println!("{} {}/{}: {}", if r.passed { "PASS" } else { "FAIL" }, r.suite, r.name, r.detail);
        if !r.passed {
            failed.push(format!("{}/{}", r.suite, r.name));
        }
    }
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(CliError::Verify(failed.join(", ")))
    }
}
