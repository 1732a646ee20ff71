mod common;

use std::io::Write;

use common::{gaussian_stream, split};
use omm_core::bounds::{dataset_stats, diameter};
use omm_core::data::{
    apply_variant, encode, example1_points, gen_example1, load_csv, load_csv_many, permutation, preprocess, ColumnKind,
    DataError, Dataset, Schema, SoftMarginFilter, VariantConfig,
};
use omm_core::geometry::{max_margin_offline, DEFAULT_TOL};
use omm_core::norms::NormSpec;
use omm_core::Label;
use proptest::prelude::*;

const SCHEMA: &str = "\
# toy
delimiter ,
header true
missing ?
positive yes
column size numeric
column color categorical
column label label
";

const ROWS: &str = "size,color,label
1.0, red, no
2.0, blue, no
?, red, yes
8.0, green, yes
9.0, red, yes.
";

#[test]
fn schema_and_encoding() {
    let schema = Schema::parse(SCHEMA).unwrap();
    assert_eq!(schema.columns.len(), 3);
    assert_eq!(schema.columns[1].kind, ColumnKind::Categorical);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, ROWS).unwrap();
    let raw = load_csv(&path, &schema).unwrap();
    assert_eq!(raw.rows.len(), 5);
    let (points, names, complete) = encode(&raw).unwrap();
    assert_eq!(complete, 4);
    // Levels sorted (blue, green, red); the first is dropped.
    assert_eq!(names, ["size", "color_green", "color_red"]);
    assert_eq!(points.iter().filter(|p| p.y == Label::Positive).count(), 2);
    for j in 0..3 {
        let col: Vec<f64> = points.iter().map(|p| p.x[j]).collect();
        let mean = col.iter().sum::<f64>() / 4.0;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 4.0;
        assert!(mean.abs() < 1e-12 && (var - 1.0).abs() < 1e-12, "column {j}");
    }
}

#[test]
fn gzip_and_multi_file_input() {
    let schema = Schema::parse(SCHEMA).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("a.csv");
    std::fs::write(&plain, ROWS).unwrap();
    let gz = dir.path().join("b.csv.gz");
    let mut enc = flate2::write::GzEncoder::new(std::fs::File::create(&gz).unwrap(), flate2::Compression::default());
    enc.write_all(ROWS.as_bytes()).unwrap();
    enc.finish().unwrap();
    let raw = load_csv_many(&[&plain, &gz], &schema).unwrap();
    assert_eq!(raw.rows.len(), 10);
    assert_eq!(raw.rows[5], raw.rows[0]);
}

#[test]
fn malformed_inputs() {
    assert!(matches!(Schema::parse("column a numeric\nbogus line here"), Err(DataError::SchemaMismatch(_))));
    let schema = Schema::parse(SCHEMA).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    std::fs::write(&path, "size,color,label\n1.0,red\n").unwrap();
    assert!(matches!(load_csv(&path, &schema), Err(DataError::ParseError { .. })));
    std::fs::write(&path, "size,color,label\nabc,red,no\n").unwrap();
    let raw = load_csv(&path, &schema).unwrap();
    assert!(matches!(encode(&raw), Err(DataError::ParseError { .. })));
}

#[test]
fn filter_keeps_a_separable_subset() {
    let mut pts = gaussian_stream(3, 400, 5);
    // Flip a few labels so the raw set is not separable.
    for p in pts.iter_mut().step_by(37) {
        p.y = p.y.opposite();
    }
    assert!(max_margin_offline(&pts, &NormSpec::l2(), DEFAULT_TOL).is_err());
    let kept = SoftMarginFilter::default().apply(pts.clone());
    assert!(kept.len() < pts.len() && kept.len() > 300);
    assert!(max_margin_offline(&kept, &NormSpec::l2(), DEFAULT_TOL).is_ok());
}

#[test]
fn preprocess_is_deterministic() {
    let schema = Schema::parse(SCHEMA).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    std::fs::write(&path, ROWS).unwrap();
    let raw = load_csv(&path, &schema).unwrap();
    let (a, ra) = preprocess(&raw, &SoftMarginFilter::default()).unwrap();
    let (b, _) = preprocess(&raw, &SoftMarginFilter::default()).unwrap();
    assert_eq!(a, b);
    assert_eq!(ra.rows_read, 5);
    assert_eq!(ra.rows_complete, 4);
}

#[test]
fn cache_round_trip() {
    let ds = Dataset::new(gaussian_stream(6, 100, 3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.bin");
    ds.write_cache(&path).unwrap();
    assert_eq!(Dataset::read_cache(&path).unwrap(), ds);
    let mut bytes = std::fs::read(&path).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(&path, &bytes).unwrap();
    assert!(matches!(Dataset::read_cache(&path), Err(DataError::BadCache(_))));
}

#[test]
fn variants_translate_classes_and_normalize_margin() {
    let ds = Dataset::new(gaussian_stream(5, 600, 11)).unwrap();
    let base = dataset_stats(&ds.points, &NormSpec::l2()).unwrap();
    let mut w_ref = None;
    for cfg in VariantConfig::grid() {
        let v = apply_variant(&ds, &cfg).unwrap();
        let st = dataset_stats(&v.points, &NormSpec::l2()).unwrap();
        assert!((st.gamma_star - 1.0).abs() < 1e-6, "{cfg:?}: gamma* {}", st.gamma_star);
        assert!((st.d_plus - base.d_plus).abs() < 1e-9 && (st.d_minus - base.d_minus).abs() < 1e-9);
        let sol = max_margin_offline(&v.points, &NormSpec::l2(), DEFAULT_TOL).unwrap();
        if cfg.zero_bias {
            assert!(sol.classifier.b.abs() < 1e-6, "{cfg:?}: b* = {}", sol.classifier.b);
        }
        match &w_ref {
            None => w_ref = Some(sol.classifier.w.clone()),
            Some(w) => {
                for (a, b) in w.iter().zip(&sol.classifier.w) {
                    assert!((a - b).abs() < 1e-6);
                }
            }
        }
        // Each class moves rigidly.
        let (p0, _) = split(&ds.points);
        let (p1, _) = split(&v.points);
        let shift: Vec<f64> = p1[0].iter().zip(&p0[0]).map(|(a, b)| a - b).collect();
        for (a, b) in p1.iter().zip(&p0) {
            for k in 0..a.len() {
                assert!((a[k] - b[k] - shift[k]).abs() < 1e-9);
            }
        }
    }
    let far = apply_variant(&ds, &VariantConfig::new(1.0, true)).unwrap();
    let near = apply_variant(&ds, &VariantConfig::new(0.0, true)).unwrap();
    assert!(dataset_stats(&far.points, &NormSpec::l2()).unwrap().d_bar > dataset_stats(&near.points, &NormSpec::l2()).unwrap().d_bar);
    assert!(matches!(apply_variant(&ds, &VariantConfig::new(-1.0, true)), Err(DataError::InvalidParam(_))));
}

#[test]
fn example1_construction() {
    let z = example1_points(10.0).unwrap();
    assert_eq!(z[0].x, vec![10.0, 1.0]);
    assert_eq!(z[2].x, vec![10.2, -1.0]);
    let s = gen_example1(10.0, 7).unwrap();
    assert_eq!(s.len(), 59);
    assert_eq!(s[0], z[0]);
    assert_eq!(s[1], z[2]);
    assert_eq!(s[52..55], z[..]);
    assert!(gen_example1(2.0, 0).is_err());
    let refs: Vec<&[f64]> = z.iter().map(|p| p.x.as_slice()).collect();
    assert!((diameter(&refs, &NormSpec::l2()) - (4.0f64 + 0.04).sqrt()).abs() < 1e-12);
}

proptest! {
    #[test]
    fn gaussian_clusters_have_margin(d in 1usize..12, seed in any::<u64>(), sep in 0.5f64..4.0) {
        let pts = omm_core::data::gen_gaussian_clusters(d, 200, sep, seed).unwrap();
        prop_assert_eq!(pts.len(), 200);
        if pts.iter().any(|p| p.y == Label::Positive) && pts.iter().any(|p| p.y == Label::Negative) {
            let g = max_margin_offline(&pts, &NormSpec::l2(), DEFAULT_TOL).unwrap().gamma;
            prop_assert!(g >= sep / 2.0 - 1e-9);
        }
        prop_assert_eq!(pts, omm_core::data::gen_gaussian_clusters(d, 200, sep, seed).unwrap());
    }

    #[test]
    fn permutations_are_bijections(n in 0usize..500, seed in any::<u64>()) {
        let p = permutation(n, seed);
        let mut sorted = p.clone();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(p, permutation(n, seed));
    }
}
