mod common;

use common::gaussian_stream;
use omm_core::data::{apply_variant, gen_example1, Dataset, VariantConfig};
use omm_core::harness::{
    emit_report, markdown_table, pass_orders, run_experiment, run_grid, AlgorithmConfig, AlgorithmKind, GridJob,
    ReportFormat, RunOptions, RunReport,
};
use omm_core::{Label, LabeledPoint};

fn strip_time(mut r: RunReport) -> RunReport {
    r.wall_time_seconds = 0.0;
    r
}

fn dataset() -> Dataset {
    Dataset::new(gaussian_stream(4, 400, 21)).unwrap().with_stats().unwrap()
}

#[test]
fn grid_is_deterministic_and_ordered() {
    let ds = dataset();
    let variants: Vec<Dataset> = VariantConfig::grid().iter().map(|v| apply_variant(&ds, v).unwrap()).collect();
    let jobs: Vec<GridJob> = AlgorithmKind::ALL
        .iter()
        .flat_map(|&k| {
            VariantConfig::grid()
                .into_iter()
                .zip(&variants)
                .map(move |(variant, dataset)| GridJob { algo: AlgorithmConfig::new(k), dataset, variant })
        })
        .collect();
    let opts = RunOptions { passes: 3, seed: 5, ..RunOptions::default() };
    let a: Vec<RunReport> = run_grid(&jobs, &opts).into_iter().map(strip_time).collect();
    let b: Vec<RunReport> = run_grid(&jobs, &opts).into_iter().map(strip_time).collect();
    assert_eq!(a.len(), 80);
    assert_eq!(a, b);
    for (r, j) in a.iter().zip(&jobs) {
        assert_eq!(r.variant, Some(j.variant));
        assert_eq!(r.m, r.mistakes_from_events());
        let expected_passes = if j.algo.kind == AlgorithmKind::NOmm { 1 } else { 3 };
        assert_eq!(r.passes, expected_passes, "{}", r.algorithm);
        assert_eq!(r.steps, expected_passes * ds.len());
        assert_eq!(r.seeds.len(), expected_passes - 1);
    }
}

#[test]
fn metrics_are_consistent_with_final_classifier() {
    let ds = dataset();
    for kind in AlgorithmKind::ALL {
        let r = run_experiment(&AlgorithmConfig::new(kind), &ds, None, &RunOptions::default()).unwrap();
        let c = r.final_classifier.clone().unwrap();
        let separates = ds.points.iter().all(|p| c.functional_margin(&p.x, p.y) > 0.0);
        assert_eq!(r.gamma_bar.is_some(), separates, "{}", r.algorithm);
        if let Some(t) = r.tau {
            assert!(t <= r.steps && separates);
        }
        assert!(r.updates <= r.steps);
    }
}

#[test]
fn tau_is_first_separating_step() {
    // Brute force: replay e-OMM and check every prefix classifier.
    let ds = dataset();
    let r = run_experiment(&AlgorithmConfig::new(AlgorithmKind::EOmm), &ds, None, &RunOptions::default()).unwrap();
    let mut learner = AlgorithmConfig::new(AlgorithmKind::EOmm).build(ds.d, true, 1.0).unwrap();
    let mut first = None;
    for (i, p) in ds.points.iter().enumerate() {
        learner.step(&p.x, p.y).unwrap();
        if first.is_none() {
            if let Some(c) = learner.classifier() {
                if ds.points.iter().all(|q| c.functional_margin(&q.x, q.y) > 0.0) {
                    first = Some(i + 1);
                }
            }
        }
    }
    assert_eq!(r.tau, first);
}

#[test]
fn perceptron_on_example1() {
    let ds = Dataset::new(gen_example1(10.0, 0).unwrap()).unwrap();
    let cfg = AlgorithmConfig::new(AlgorithmKind::Perceptron);
    let r = run_experiment(&cfg, &ds, None, &RunOptions::default()).unwrap();
    assert_eq!(r.m, 52);
}

#[test]
fn pass_orders_start_native() {
    let (orders, seeds) = pass_orders(10, 3, 100);
    assert_eq!(orders[0], (0..10).collect::<Vec<_>>());
    assert_eq!(seeds, vec![101, 102]);
    assert_ne!(orders[1], orders[2]);
}

#[test]
fn infeasible_run_returns_partial_report() {
    let pts = vec![
        LabeledPoint::new(vec![1.0], Label::Positive),
        LabeledPoint::new(vec![2.0], Label::Negative),
        LabeledPoint::new(vec![3.0], Label::Positive),
    ];
    let ds = Dataset::new(pts).unwrap();
    let f = run_experiment(&AlgorithmConfig::new(AlgorithmKind::NOmm), &ds, None, &RunOptions::default()).unwrap_err();
    assert!(f.error.is_infeasible());
    assert_eq!(f.partial.steps, 2);
    assert!(f.partial.error.is_some());
}

#[test]
fn reports_render_without_timing_identically() {
    let ds = dataset();
    let variant = VariantConfig::new(0.0, true);
    let v = apply_variant(&ds, &variant).unwrap();
    let reports: Vec<RunReport> = AlgorithmKind::ALL
        .iter()
        .map(|&k| run_experiment(&AlgorithmConfig::new(k), &v, Some(variant), &RunOptions::default()).unwrap())
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    emit_report(&reports, ReportFormat::Csv, &a, false).unwrap();
    let mut rerun = reports.clone();
    rerun.iter_mut().for_each(|r| r.wall_time_seconds += 1.0);
    emit_report(&rerun, ReportFormat::Csv, &b, false).unwrap();
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("algorithm,theta,zero_bias,m,gamma_bar,tau,time_s\n"));
    assert_eq!(text.lines().count(), 9);
    let md = markdown_table(&reports, &[((0.0, true), 0.5)], false);
    assert!(md.contains("e-OMM") && md.contains("--"));
    emit_report(&reports, ReportFormat::Svg, &dir.path().join("plots"), true).unwrap();
    for f in ["m.svg", "gamma_bar.svg", "tau.svg"] {
        assert!(std::fs::read_to_string(dir.path().join("plots").join(f)).unwrap().starts_with("<svg"));
    }
    assert!(emit_report(&[], ReportFormat::Csv, &a, false).is_err());
}
