//! Data sets: CSV ingestion, preprocessing, margin-preserving transformations,
//! synthetic streams and the binary cache format.
//!
//! # Cache layout
//!
//! ```text
//! bytes 0..8    magic  b"OMMDATA1"
//! bytes 8..16   n      u64 little-endian
//! bytes 16..24  d      u64 little-endian
//! then n rows of (d + 1) f64 little-endian values: x₁ … x_d, y ∈ {+1, −1}
//! ```

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bounds::{dataset_stats, DatasetStats};
use crate::geometry::{max_margin_offline, GeometryError, DEFAULT_TOL};
use crate::linalg::{axpy, dot, l2_norm_sq};
use crate::norms::NormSpec;
use crate::types::{Label, LabeledPoint};

const CACHE_MAGIC: &[u8; 8] = b"OMMDATA1";

#[derive(Debug, Error)]
pub enum DataError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at row {row}, column {column}: {message}")]
    ParseError { row: usize, column: usize, message: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("data set is empty")]
    EmptyDataset,
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("invalid cache file: {0}")]
    BadCache(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    pub kind: ColumnKind,
}

/// Column layout and parsing options, read from a plain-text sidecar.
///
/// ```text
/// # comments start with '#'
/// delimiter ,
/// header false
/// comment |
/// missing ?
/// positive >50K
/// column age numeric
/// column workclass categorical
/// column income label
/// ```
///
/// Label tokens are compared after trimming whitespace and a trailing `.`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSpec>,
    pub delimiter: u8,
    pub header: bool,
    pub comment: Option<u8>,
    pub missing: String,
    pub positive: String,
}

impl Schema {
    pub fn parse(text: &str) -> Result<Self, DataError> {
        let mut schema = Schema {
            columns: Vec::new(),
            delimiter: b',',
            header: true,
            comment: None,
            missing: "?".into(),
            positive: "1".into(),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = |m: &str| DataError::SchemaMismatch(format!("line {}: {m}", lineno + 1));
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let rest: Vec<&str> = parts.collect();
            let single = |what: &str| -> Result<String, DataError> {
                match rest.as_slice() {
                    [v] => Ok((*v).to_string()),
                    _ => Err(bad(&format!("expected one value for '{what}'"))),
                }
            };
            match key {
                "delimiter" => {
                    let v = single("delimiter")?;
                    schema.delimiter = match v.as_str() {
                        "tab" | "\\t" => b'\t',
                        s if s.len() == 1 => s.as_bytes()[0],
                        _ => return Err(bad("delimiter must be a single byte")),
                    };
                }
                "header" => {
                    schema.header = single("header")?
                        .parse()
                        .map_err(|_| bad("header must be true or false"))?
                }
                "comment" => {
                    let v = single("comment")?;
                    if v.len() != 1 {
                        return Err(bad("comment must be a single byte"));
                    }
                    schema.comment = Some(v.as_bytes()[0]);
                }
                "missing" => schema.missing = single("missing")?,
                "positive" => schema.positive = single("positive")?,
                "column" => {
                    let (name, kind) = match rest.as_slice() {
                        [n, k] => (n, k),
                        _ => return Err(bad("expected 'column NAME KIND'")),
                    };
                    let kind = match *kind {
                        "numeric" => ColumnKind::Numeric,
                        "categorical" => ColumnKind::Categorical,
                        "label" => ColumnKind::Label,
                        other => return Err(bad(&format!("unknown column kind '{other}'"))),
                    };
                    schema.columns.push(ColumnSpec {
                        name: (*name).to_string(),
                        kind,
                    });
                }
                other => return Err(bad(&format!("unknown key '{other}'"))),
            }
        }
        let labels = schema.columns.iter().filter(|c| c.kind == ColumnKind::Label).count();
        if labels != 1 {
            return Err(DataError::SchemaMismatch(format!("expected exactly one label column, found {labels}")));
        }
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self, DataError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    fn label_index(&self) -> usize {
        self.columns.iter().position(|c| c.kind == ColumnKind::Label).expect("validated")
    }
}

/// Rows of raw string cells in schema column order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub schema: Schema,
    pub rows: Vec<Vec<String>>,
}

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>, DataError> {
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(flate2::read::GzDecoder::new(BufReader::new(file))))
    } else {
        Ok(Box::new(BufReader::new(file)))
    }
}

/// Reads one delimiter-separated file (optionally gzip-compressed).
pub fn load_csv(path: &Path, schema: &Schema) -> Result<RawTable, DataError> {
    load_csv_many(&[path], schema)
}

/// Reads and concatenates several files sharing one schema.
pub fn load_csv_many<P: AsRef<Path>>(paths: &[P], schema: &Schema) -> Result<RawTable, DataError> {
    let mut rows = Vec::new();
    for path in paths {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(schema.header)
            .delimiter(schema.delimiter)
            .comment(schema.comment)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(open_maybe_gz(path.as_ref())?);
        for (i, record) in reader.records().enumerate() {
            let row = rows.len() + 1;
            let record = record.map_err(|e| DataError::ParseError {
                row,
                column: 0,
                message: e.to_string(),
            })?;
            if record.len() != schema.columns.len() {
                return Err(DataError::ParseError {
                    row,
                    column: record.len().min(schema.columns.len()),
                    message: format!(
                        "{}: record {} has {} fields, schema has {}",
                        path.as_ref().display(),
                        i + 1,
                        record.len(),
                        schema.columns.len()
                    ),
                });
            }
            rows.push(record.iter().map(str::to_string).collect());
        }
    }
    if rows.is_empty() {
        return Err(DataError::ParseError {
            row: 0,
            column: 0,
            message: "no data rows".into(),
        });
    }
    Ok(RawTable {
        schema: schema.clone(),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub points: Vec<LabeledPoint>,
    pub d: usize,
    pub stats: Option<DatasetStats>,
}

impl Dataset {
    pub fn new(points: Vec<LabeledPoint>) -> Result<Self, DataError> {
        let d = points.first().map(|p| p.dim()).ok_or(DataError::EmptyDataset)?;
        if let Some((i, p)) = points.iter().enumerate().find(|(_, p)| p.dim() != d) {
            return Err(DataError::ParseError {
                row: i + 1,
                column: p.dim(),
                message: format!("expected {d} features"),
            });
        }
        Ok(Self { points, d, stats: None })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positive_fraction(&self) -> f64 {
        let pos = self.points.iter().filter(|p| p.y == Label::Positive).count();
        pos as f64 / self.points.len().max(1) as f64
    }

    /// Computes and caches ℓ2 statistics.
    pub fn with_stats(mut self) -> Result<Self, DataError> {
        self.stats = Some(dataset_stats(&self.points, &NormSpec::l2())?);
        Ok(self)
    }

    pub fn write_cache(&self, path: &Path) -> Result<(), DataError> {
        let mut out = BufWriter::new(File::create(path)?);
        out.write_all(CACHE_MAGIC)?;
        out.write_all(&(self.points.len() as u64).to_le_bytes())?;
        out.write_all(&(self.d as u64).to_le_bytes())?;
        for p in &self.points {
            for v in p.x.iter().chain(std::iter::once(&p.y.sign())) {
                out.write_all(&v.to_le_bytes())?;
            }
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_cache(path: &Path) -> Result<Self, DataError> {
        let mut bytes = Vec::new();
        File::open(path)?.read_to_end(&mut bytes)?;
        if bytes.len() < 24 || &bytes[..8] != CACHE_MAGIC {
            return Err(DataError::BadCache("missing magic header".into()));
        }
        let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
        let (n, d) = (word(8) as usize, word(16) as usize);
        let expected = n
            .checked_mul(d + 1)
            .and_then(|v| v.checked_mul(8))
            .and_then(|v| v.checked_add(24))
            .ok_or_else(|| DataError::BadCache("header overflows".into()))?;
        if bytes.len() != expected {
            return Err(DataError::BadCache(format!("expected {expected} bytes, found {}", bytes.len())));
        }
        let mut points = Vec::with_capacity(n);
        let mut values = bytes[24..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")));
        for row in 0..n {
            let x: Vec<f64> = values.by_ref().take(d).collect();
            let y = match values.next() {
                Some(v) if v == 1.0 => Label::Positive,
                Some(v) if v == -1.0 => Label::Negative,
                other => return Err(DataError::BadCache(format!("row {row}: label {other:?}"))),
            };
            points.push(LabeledPoint::new(x, y));
        }
        if n == 0 {
            return Ok(Self { points, d, stats: None });
        }
        Self::new(points)
    }
}

/// Soft-margin linear classifier used to drop points that are misclassified
/// or too close to the boundary before the separable experiments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SoftMarginFilter {
    /// Hinge-loss penalty `C`.
    pub c: f64,
    /// Weight each class by `n / (2 n_class)`.
    pub balanced: bool,
    /// Keep points with `y(wᵀx + b) ≥ threshold`.
    pub threshold: f64,
    pub tol: f64,
    pub max_epochs: usize,
    pub seed: u64,
}

impl Default for SoftMarginFilter {
    fn default() -> Self {
        Self {
            c: 0.01,
            balanced: true,
            threshold: 0.01,
            tol: 1e-4,
            max_epochs: 1000,
            seed: 0,
        }
    }
}

impl SoftMarginFilter {
    /// Dual coordinate descent on the hinge-loss SVM with the bias learned as
    /// an extra unit feature. Returns `(w, b)`.
    pub fn fit(&self, points: &[LabeledPoint]) -> (Vec<f64>, f64) {
        let n = points.len();
        let d = points.first().map_or(0, |p| p.dim());
        let n_pos = points.iter().filter(|p| p.y == Label::Positive).count();
        let upper = |y: Label| -> f64 {
            if !self.balanced {
                return self.c;
            }
            let n_class = if y == Label::Positive { n_pos } else { n - n_pos };
            self.c * n as f64 / (2.0 * n_class.max(1) as f64)
        };
        let qii: Vec<f64> = points.iter().map(|p| l2_norm_sq(&p.x) + 1.0).collect();
        let mut alpha = vec![0.0; n];
        let mut w = vec![0.0; d];
        let mut b = 0.0;
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.max_epochs {
            order.shuffle(&mut rng);
            let (mut pg_max, mut pg_min) = (f64::NEG_INFINITY, f64::INFINITY);
            for &i in &order {
                let p = &points[i];
                let y = p.y.sign();
                let u = upper(p.y);
                let g = y * (dot(&w, &p.x) + b) - 1.0;
                let pg = if alpha[i] == 0.0 {
                    g.min(0.0)
                } else if alpha[i] >= u {
                    g.max(0.0)
                } else {
                    g
                };
                pg_max = pg_max.max(pg);
                pg_min = pg_min.min(pg);
                if pg.abs() > 1e-12 {
                    let old = alpha[i];
                    alpha[i] = (old - g / qii[i]).clamp(0.0, u);
                    let delta = (alpha[i] - old) * y;
                    axpy(delta, &p.x, &mut w);
                    b += delta;
                }
            }
            if pg_max - pg_min <= self.tol {
                break;
            }
        }
        (w, b)
    }

    pub fn apply(&self, points: Vec<LabeledPoint>) -> Vec<LabeledPoint> {
        let (w, b) = self.fit(&points);
        points
            .into_iter()
            .filter(|p| p.y.sign() * (dot(&w, &p.x) + b) >= self.threshold)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreprocessReport {
    pub rows_read: usize,
    pub rows_complete: usize,
    pub rows_kept: usize,
    pub feature_names: Vec<String>,
}

/// Drops incomplete rows, dummy-encodes categoricals with `k − 1` columns
/// (levels sorted, first level dropped), and standardizes every feature to
/// zero mean and unit population standard deviation. Constant columns
/// become zero.
pub fn encode(raw: &RawTable) -> Result<(Vec<LabeledPoint>, Vec<String>, usize), DataError> {
    let schema = &raw.schema;
    let label_idx = schema.label_index();
    let complete: Vec<&Vec<String>> = raw
        .rows
        .iter()
        .filter(|r| r.iter().all(|c| c != &schema.missing && !c.is_empty()))
        .collect();
    if complete.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let mut levels: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (j, col) in schema.columns.iter().enumerate() {
        if col.kind == ColumnKind::Categorical {
            let set: BTreeSet<&str> = complete.iter().map(|r| r[j].as_str()).collect();
            levels.insert(j, set.into_iter().skip(1).map(str::to_string).collect());
        }
    }
    let mut names = Vec::new();
    for col in schema.columns.iter().filter(|c| c.kind == ColumnKind::Numeric) {
        names.push(col.name.clone());
    }
    for (j, lv) in &levels {
        for level in lv {
            names.push(format!("{}_{}", schema.columns[*j].name, level));
        }
    }
    let positive = normalize_label(&schema.positive);
    let mut points = Vec::with_capacity(complete.len());
    for (i, row) in complete.iter().enumerate() {
        let mut x = Vec::with_capacity(names.len());
        for (j, col) in schema.columns.iter().enumerate() {
            if col.kind == ColumnKind::Numeric {
                let v: f64 = row[j].parse().map_err(|_| DataError::ParseError {
                    row: i + 1,
                    column: j + 1,
                    message: format!("'{}' is not numeric", row[j]),
                })?;
                x.push(v);
            }
        }
        for (j, lv) in &levels {
            for level in lv {
                x.push(if &row[*j] == level { 1.0 } else { 0.0 });
            }
        }
        let y = if normalize_label(&row[label_idx]) == positive {
            Label::Positive
        } else {
            Label::Negative
        };
        points.push(LabeledPoint::new(x, y));
    }
    standardize(&mut points);
    Ok((points, names, complete.len()))
}

fn normalize_label(s: &str) -> &str {
    s.trim().trim_end_matches('.')
}

/// Zero mean and unit population standard deviation per column.
pub fn standardize(points: &mut [LabeledPoint]) {
    let Some(d) = points.first().map(|p| p.dim()) else {
        return;
    };
    let n = points.len() as f64;
    for j in 0..d {
        let mean = points.iter().map(|p| p.x[j]).sum::<f64>() / n;
        let var = points.iter().map(|p| (p.x[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for p in points.iter_mut() {
            p.x[j] = if sd > 0.0 { (p.x[j] - mean) / sd } else { 0.0 };
        }
    }
}

/// Encodes, standardizes and filters a raw table.
pub fn preprocess(raw: &RawTable, filter: &SoftMarginFilter) -> Result<(Dataset, PreprocessReport), DataError> {
    let (points, names, complete) = encode(raw)?;
    let kept = filter.apply(points);
    if kept.is_empty() {
        return Err(DataError::EmptyDataset);
    }
    let report = PreprocessReport {
        rows_read: raw.rows.len(),
        rows_complete: complete,
        rows_kept: kept.len(),
        feature_names: names,
    };
    Ok((Dataset::new(kept)?, report))
}

/// Raw column names of the UCI Adult files.
pub const ADULT_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education-num",
    "marital-status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital-gain",
    "capital-loss",
    "hours-per-week",
    "native-country",
    "income",
];

/// [`preprocess`] with the default filter, after checking the Adult layout.
pub fn preprocess_adult(raw: &RawTable) -> Result<(Dataset, PreprocessReport), DataError> {
    let names: Vec<&str> = raw.schema.columns.iter().map(|c| c.name.as_str()).collect();
    if names != ADULT_COLUMNS {
        return Err(DataError::SchemaMismatch(format!("not the Adult layout: {names:?}")));
    }
    preprocess(raw, &SoftMarginFilter::default())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariantConfig {
    pub theta: f64,
    pub zero_bias: bool,
    pub normalize_margin: bool,
}

impl VariantConfig {
    pub fn new(theta: f64, zero_bias: bool) -> Self {
        Self {
            theta,
            zero_bias,
            normalize_margin: true,
        }
    }

    /// The ten `(θ, bias)` combinations of the benchmark grid.
    pub fn grid() -> Vec<Self> {
        let mut out = Vec::new();
        for zero_bias in [true, false] {
            for theta in [0.0, 0.25, 0.5, 0.75, 1.0] {
                out.push(Self::new(theta, zero_bias));
            }
        }
        out
    }
}

/// Applies margin normalization, optional bias removal and θ feature scaling,
/// in that order.
///
/// Every step is a translation of each class by a fixed vector, so class
/// diameters never change. Feature scaling moves all points by a multiple of
/// the component of the largest-norm point orthogonal to `w*`.
pub fn apply_variant(ds: &Dataset, cfg: &VariantConfig) -> Result<Dataset, DataError> {
    if !(cfg.theta >= 0.0 && cfg.theta.is_finite()) {
        return Err(DataError::InvalidParam(format!("theta = {} must be nonnegative", cfg.theta)));
    }
    let l2 = NormSpec::l2();
    let sol = max_margin_offline(&ds.points, &l2, DEFAULT_TOL)?;
    let w = sol.classifier.w.clone();
    let ww = l2_norm_sq(&w);
    let mut points = ds.points.clone();
    let mut v_plus = sol.certificates.v_plus.clone();
    let mut v_minus = sol.certificates.v_minus.clone();
    if cfg.normalize_margin {
        let zeta = 1.0 - sol.gamma;
        let wn = ww.sqrt();
        for p in points.iter_mut() {
            axpy(zeta * p.y.sign() / wn, &w, &mut p.x);
        }
        axpy(zeta / wn, &w, &mut v_plus);
        axpy(-zeta / wn, &w, &mut v_minus);
    }
    if cfg.zero_bias {
        let mid: Vec<f64> = v_plus.iter().zip(&v_minus).map(|(a, b)| -0.5 * (a + b)).collect();
        for p in points.iter_mut() {
            axpy(1.0, &mid, &mut p.x);
        }
    }
    if cfg.theta > 0.0 {
        let xbar = points
            .iter()
            .map(|p| &p.x)
            .max_by(|a, b| l2_norm_sq(a).total_cmp(&l2_norm_sq(b)))
            .expect("nonempty")
            .clone();
        let mut shift = xbar.clone();
        axpy(-dot(&xbar, &w) / ww, &w, &mut shift);
        for p in points.iter_mut() {
            axpy(cfg.theta, &shift, &mut p.x);
        }
    }
    Dataset::new(points)
}

/// Alternating adversarial prefix followed by a cycling tail.
///
/// With `r = 2/c`, `z¹ = ((c, 1), +1)`, `z² = ((c, −1), −1)`,
/// `z³ = ((c + r, −1), −1)`. The prefix alternates `z¹, z³` for
/// `⌊(c² + 4/c² + 5) / (2(1 + 1/c²))⌋` steps; the tail cycles `z¹, z², z³`.
pub fn gen_example1(c: f64, tail_len: usize) -> Result<Vec<LabeledPoint>, DataError> {
    let m = example1_prefix_len(c)?;
    let z = example1_points(c)?;
    let mut out = Vec::with_capacity(m + tail_len);
    for t in 0..m {
        out.push(if t % 2 == 0 { z[0].clone() } else { z[2].clone() });
    }
    for t in 0..tail_len {
        out.push(z[t % 3].clone());
    }
    Ok(out)
}

/// `[z¹, z², z³]`.
pub fn example1_points(c: f64) -> Result<[LabeledPoint; 3], DataError> {
    if !(c > 2.0 && c.is_finite()) {
        return Err(DataError::InvalidParam(format!("c = {c} must exceed 2")));
    }
    let r = 2.0 / c;
    Ok([
        LabeledPoint::new(vec![c, 1.0], Label::Positive),
        LabeledPoint::new(vec![c, -1.0], Label::Negative),
        LabeledPoint::new(vec![c + r, -1.0], Label::Negative),
    ])
}

pub fn example1_prefix_len(c: f64) -> Result<usize, DataError> {
    if !(c > 2.0 && c.is_finite()) {
        return Err(DataError::InvalidParam(format!("c = {c} must exceed 2")));
    }
    let c2 = c * c;
    Ok(((c2 + 4.0 / c2 + 5.0) / (2.0 * (1.0 + 1.0 / c2))).floor() as usize)
}

/// Two Gaussian clouds around `±separation·w` for a random unit `w`; points
/// with `y wᵀx < separation/2` are redrawn, so the hyperplane `wᵀx = 0`
/// separates the stream with margin at least `separation/2`.
pub fn gen_gaussian_clusters(d: usize, n: usize, separation: f64, seed: u64) -> Result<Vec<LabeledPoint>, DataError> {
    if !(separation > 0.0) || d == 0 {
        return Err(DataError::InvalidParam(format!("need d > 0 and separation > 0, got d={d}, separation={separation}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
    let wn = l2_norm_sq(&w).sqrt();
    w.iter_mut().for_each(|v| *v /= wn);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let y = if rng.random_bool(0.5) { Label::Positive } else { Label::Negative };
        loop {
            let mut x: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            axpy(y.sign() * separation, &w, &mut x);
            if y.sign() * dot(&w, &x) >= separation / 2.0 {
                out.push(LabeledPoint::new(x, y));
                break;
            }
        }
    }
    Ok(out)
}

/// Shuffles indices `0..n` with a seeded generator.
pub fn permutation(n: usize, seed: u64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example1_lengths() {
        assert_eq!(example1_prefix_len(10.0).unwrap(), 52);
        assert_eq!(example1_prefix_len(4.0).unwrap(), 10);
        assert_eq!(example1_prefix_len(30.0).unwrap(), 452);
        assert!(matches!(gen_example1(2.0, 0), Err(DataError::InvalidParam(_))));
        let s = gen_example1(10.0, 6).unwrap();
        assert_eq!(s.len(), 58);
        assert_eq!(s[1].x, vec![10.2, -1.0]);
        assert_eq!(s[53].x, vec![10.0, -1.0]);
    }

    #[test]
    fn gaussian_clusters_are_deterministic_and_separated() {
        let a = gen_gaussian_clusters(5, 200, 2.0, 7).unwrap();
        assert_eq!(a, gen_gaussian_clusters(5, 200, 2.0, 7).unwrap());
        assert!(gen_gaussian_clusters(5, 0, 2.0, 7).unwrap().is_empty());
        let sol = max_margin_offline(&a, &NormSpec::l2(), DEFAULT_TOL).unwrap();
        assert!(sol.gamma >= 1.0 - 1e-9);
    }

    #[test]
    fn schema_rejects_garbage() {
        assert!(Schema::parse("column a numeric\n").is_err());
        assert!(Schema::parse("column a numeric\ncolumn y label\nbogus 1\n").is_err());
        let s = Schema::parse("delimiter tab\nheader false\ncolumn a numeric\ncolumn y label\n").unwrap();
        assert_eq!(s.delimiter, b'\t');
        assert!(!s.header);
    }

    #[test]
    fn dummy_encoding_and_standardization() {
        let schema = Schema::parse("column a numeric\ncolumn k categorical\ncolumn y label\npositive yes\n").unwrap();
        let rows = [
            ["1", "red", "yes"],
            ["2", "blue", "no"],
            ["3", "green", "yes"],
            ["4", "?", "no"],
            ["5", "red", "no."],
        ];
        let raw = RawTable {
            schema,
            rows: rows.iter().map(|r| r.iter().map(|s| s.to_string()).collect()).collect(),
        };
        let (pts, names, complete) = encode(&raw).unwrap();
        assert_eq!(complete, 4);
        assert_eq!(names, vec!["a", "k_green", "k_red"]);
        for j in 0..3 {
            let mean = pts.iter().map(|p| p.x[j]).sum::<f64>() / 4.0;
            let var = pts.iter().map(|p| (p.x[j] - mean).powi(2)).sum::<f64>() / 4.0;
            assert!(mean.abs() < 1e-12 && (var.sqrt() - 1.0).abs() < 1e-12);
        }
        let labels: Vec<Label> = pts.iter().map(|p| p.y).collect();
        assert_eq!(labels, vec![Label::Positive, Label::Negative, Label::Positive, Label::Negative]);
    }

    #[test]
    fn filter_keeps_well_separated_data() {
        let mut pts = Vec::new();
        for i in 0..20 {
            let s = i as f64 * 0.1;
            pts.push(LabeledPoint::new(vec![5.0 + s, s], Label::Positive));
            pts.push(LabeledPoint::new(vec![-5.0 - s, -s], Label::Negative));
        }
        let kept = SoftMarginFilter::default().apply(pts.clone());
        assert_eq!(kept.len(), pts.len());
    }

    #[test]
    fn filter_drops_overlap() {
        let mut pts = gen_gaussian_clusters(3, 300, 2.0, 1).unwrap();
        let flipped = LabeledPoint::new(pts[0].x.clone(), pts[0].y.opposite());
        pts.push(flipped);
        let kept = SoftMarginFilter::default().apply(pts);
        assert!(max_margin_offline(&kept, &NormSpec::l2(), DEFAULT_TOL).is_ok());
    }
}
