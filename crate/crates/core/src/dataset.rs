//! Dataset loading, preprocessing, splitting, and synthetic data generation.
//!
//! The CSV on disk is comma-separated with a header row; every column is a
//! real-valued feature except the last, which must be the binary label column
//! `Class` (1 = fraud/minority, 0 = genuine/majority).

use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of the label column expected in CSV files.
pub const LABEL_COLUMN: &str = "Class";

/// A feature matrix with binary labels and stable row identifiers.
///
/// Rows are kept in ascending `row_ids` order throughout the pipeline so that
/// the documented "lower row id wins" tie rules coincide with positional
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    row_ids: Vec<u64>,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    /// Build a dataset, enforcing the structural invariants: matching row
    /// counts, labels in {0, 1}, finite features, unique row ids.
    pub fn new(
        features: Array2<f64>,
        labels: Vec<u8>,
        row_ids: Vec<u64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() != labels.len() || features.nrows() != row_ids.len() {
            return Err(Error::InvalidParameter {
                name: "labels/row_ids",
                reason: format!(
                    "row counts disagree: {} features, {} labels, {} row ids",
                    features.nrows(),
                    labels.len(),
                    row_ids.len()
                ),
            });
        }
        if features.ncols() != feature_names.len() {
            return Err(Error::InvalidParameter {
                name: "feature_names",
                reason: format!(
                    "{} columns but {} names",
                    features.ncols(),
                    feature_names.len()
                ),
            });
        }
        if let Some(bad) = labels.iter().find(|&&l| l > 1) {
            return Err(Error::InvalidParameter {
                name: "labels",
                reason: format!("label {bad} outside {{0, 1}}"),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "features",
                reason: "non-finite feature value".into(),
            });
        }
        let mut sorted = row_ids.clone();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidParameter {
                name: "row_ids",
                reason: "duplicate row id".into(),
            });
        }
        Ok(Self {
            features: ensure_standard_layout(features),
            labels,
            row_ids,
            feature_names,
        })
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn row_ids(&self) -> &[u64] {
        &self.row_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn n_rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn n_features(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.n_rows() == 0
    }

    /// Positional indices of rows carrying `label`.
    pub fn positions_of_class(&self, label: u8) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == label)
            .map(|(i, _)| i)
            .collect()
    }

    /// New dataset containing the given rows (positional indices), in the
    /// order given.
    pub fn select_rows(&self, positions: &[usize]) -> LabeledDataset {
        let features = ensure_standard_layout(self.features.select(Axis(0), positions));
        let labels = positions.iter().map(|&i| self.labels[i]).collect();
        let row_ids = positions.iter().map(|&i| self.row_ids[i]).collect();
        LabeledDataset {
            features,
            labels,
            row_ids,
            feature_names: self.feature_names.clone(),
        }
    }

    /// Rows sorted into ascending row-id order. Most constructors already
    /// produce this order; use after operations that may disturb it.
    pub fn sorted_by_row_id(&self) -> LabeledDataset {
        let mut positions: Vec<usize> = (0..self.n_rows()).collect();
        positions.sort_by_key(|&i| self.row_ids[i]);
        self.select_rows(&positions)
    }
}

/// Row operations elsewhere rely on contiguous rows; rebuild the buffer if
/// an ndarray op handed back another layout.
pub(crate) fn ensure_standard_layout(features: Array2<f64>) -> Array2<f64> {
    if features.is_standard_layout() {
        features
    } else {
        let dim = features.dim();
        Array2::from_shape_vec(dim, features.iter().copied().collect())
            .expect("same element count")
    }
}

/// Exact per-label row counts: `(majority, minority)` where majority is
/// label 0 (genuine) and minority is label 1 (fraud).
pub fn class_counts(d: &LabeledDataset) -> (usize, usize) {
    let minority = d.labels.iter().filter(|&&l| l == 1).count();
    (d.n_rows() - minority, minority)
}

// ---------------------------------------------------------------------------
// CSV I/O
// ---------------------------------------------------------------------------

/// Load a transactions CSV: header row, real-valued feature columns, and a
/// final `Class` label column. Row ids are assigned 0..n-1 in file order.
///
/// When `expected_schema` is given, the header must match it exactly.
pub fn load_csv(path: &Path, expected_schema: Option<&[String]>) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => Error::io(path, std::io::Error::other(e.to_string())),
            _ => Error::CsvFormat {
                line: 1,
                message: e.to_string(),
            },
        })?;

    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::CsvFormat {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|s| s.to_string())
        .collect();

    if let Some(expected) = expected_schema {
        if header != expected {
            return Err(Error::HeaderMismatch {
                expected: expected.to_vec(),
                found: header,
            });
        }
    }
    match header.last() {
        Some(last) if last == LABEL_COLUMN => {}
        _ => {
            return Err(Error::CsvFormat {
                line: 1,
                message: format!("last column must be {LABEL_COLUMN:?}, found {:?}", header),
            });
        }
    }
    let n_features = header.len() - 1;
    let feature_names: Vec<String> = header[..n_features].to_vec();

    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<u8> = Vec::new();
    for (row_index, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::CsvFormat {
            line: (row_index + 2) as u64,
            message: e.to_string(),
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or((row_index + 2) as u64);
        if record.len() != header.len() {
            return Err(Error::CsvFormat {
                line,
                message: format!("expected {} cells, found {}", header.len(), record.len()),
            });
        }
        for (col, cell) in record.iter().take(n_features).enumerate() {
            let v: f64 = cell.trim().parse().map_err(|_| Error::CsvFormat {
                line,
                message: format!("non-numeric value {cell:?} in column {:?}", header[col]),
            })?;
            if !v.is_finite() {
                return Err(Error::CsvFormat {
                    line,
                    message: format!("non-finite value {cell:?} in column {:?}", header[col]),
                });
            }
            values.push(v);
        }
        let label_cell = record.get(n_features).unwrap_or("").trim();
        let label: f64 = label_cell.parse().map_err(|_| Error::CsvFormat {
            line,
            message: format!("non-numeric label {label_cell:?}"),
        })?;
        if label == 0.0 {
            labels.push(0);
        } else if label == 1.0 {
            labels.push(1);
        } else {
            return Err(Error::CsvFormat {
                line,
                message: format!("label {label_cell:?} outside {{0, 1}}"),
            });
        }
    }

    let n_rows = labels.len();
    let features = Array2::from_shape_vec((n_rows, n_features), values)
        .expect("row-major cell buffer matches dimensions");
    let row_ids = (0..n_rows as u64).collect();
    LabeledDataset::new(features, labels, row_ids, feature_names)
}

/// Write a dataset in the same CSV format `load_csv` reads.
///
/// Feature values are formatted with Rust's shortest round-trip float
/// notation, so a write/load cycle reproduces them bit for bit.
pub fn write_csv(d: &LabeledDataset, path: &Path) -> Result<()> {
    let mut out = String::new();
    for name in d.feature_names() {
        out.push_str(name);
        out.push(',');
    }
    out.push_str(LABEL_COLUMN);
    out.push('\n');
    for (row, &label) in d.features.axis_iter(Axis(0)).zip(d.labels.iter()) {
        for v in row.iter() {
            let _ = write!(out, "{v},");
        }
        let _ = writeln!(out, "{label}");
    }
    std::fs::write(path, out).map_err(|e| Error::io(path, e))
}

// ---------------------------------------------------------------------------
// Preprocessing
// ---------------------------------------------------------------------------

/// Per-column scaling method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    None,
    #[default]
    Zscore,
}

/// Where scaling statistics are fitted. `WholeDataset` mirrors a
/// scale-before-split pipeline; `TrainOnly` avoids test-set leakage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FitScope {
    #[default]
    WholeDataset,
    TrainOnly,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    /// Columns to drop before scaling.
    pub drop_columns: Vec<String>,
    /// Scaling applied to every retained column.
    pub scaling: Scaling,
    /// Scope the scaling statistics are fitted on.
    pub fit_scope: FitScope,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self {
            drop_columns: vec!["Time".to_string()],
            scaling: Scaling::Zscore,
            fit_scope: FitScope::WholeDataset,
        }
    }
}

/// Fitted column statistics: the mean and population standard deviation
/// (divide by n) actually applied to each retained column.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnStats {
    pub columns: Vec<String>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ColumnStats {
    /// Identity stats (mean 0, std 1) for the given columns.
    pub fn identity(columns: Vec<String>) -> Self {
        let n = columns.len();
        Self {
            columns,
            means: vec![0.0; n],
            stds: vec![1.0; n],
        }
    }
}

/// Drop the configured columns, then scale the remaining ones.
///
/// If `fit_stats` is supplied its columns must match the post-drop columns
/// and it is applied as-is; otherwise statistics are fitted on `d`. Returns
/// the transformed dataset together with the stats that were applied.
pub fn preprocess(
    d: &LabeledDataset,
    cfg: &PreprocessConfig,
    fit_stats: Option<&ColumnStats>,
) -> Result<(LabeledDataset, ColumnStats)> {
    for col in &cfg.drop_columns {
        if !d.feature_names.contains(col) {
            return Err(Error::UnknownColumn {
                column: col.clone(),
            });
        }
    }
    let kept: Vec<usize> = (0..d.n_features())
        .filter(|&j| !cfg.drop_columns.contains(&d.feature_names[j]))
        .collect();
    let kept_names: Vec<String> = kept.iter().map(|&j| d.feature_names[j].clone()).collect();
    let mut features = ensure_standard_layout(d.features.select(Axis(1), &kept));

    let stats = match cfg.scaling {
        Scaling::None => ColumnStats::identity(kept_names.clone()),
        Scaling::Zscore => {
            let stats = match fit_stats {
                Some(s) => {
                    if s.columns != kept_names {
                        return Err(Error::InvalidParameter {
                            name: "fit_stats",
                            reason: format!(
                                "stats columns {:?} do not match post-drop columns {:?}",
                                s.columns, kept_names
                            ),
                        });
                    }
                    s.clone()
                }
                None => fit_column_stats(&features, &kept_names)?,
            };
            for (j, mut col) in features.axis_iter_mut(Axis(1)).enumerate() {
                let (mean, std) = (stats.means[j], stats.stds[j]);
                col.mapv_inplace(|v| (v - mean) / std);
            }
            stats
        }
    };

    let out = LabeledDataset {
        features,
        labels: d.labels.clone(),
        row_ids: d.row_ids.clone(),
        feature_names: kept_names,
    };
    Ok((out, stats))
}

/// Fit per-column mean and population standard deviation.
pub fn fit_column_stats(features: &Array2<f64>, names: &[String]) -> Result<ColumnStats> {
    let n = features.nrows() as f64;
    let mut means = Vec::with_capacity(names.len());
    let mut stds = Vec::with_capacity(names.len());
    for (j, col) in features.axis_iter(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let std = var.sqrt();
        if std == 0.0 {
            return Err(Error::ZeroVariance {
                column: names[j].clone(),
            });
        }
        means.push(mean);
        stds.push(std);
    }
    Ok(ColumnStats {
        columns: names.to_vec(),
        means,
        stds,
    })
}

// ---------------------------------------------------------------------------
// Splitting
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    /// Fraction of each class placed in the train partition.
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 0,
            stratified: true,
        }
    }
}

/// Seeded train/test partition. Stratified mode draws
/// `round(train_fraction * class_count)` rows per class (clamped so both
/// partitions keep at least one row of each class); both outputs preserve
/// ascending row-id order, so the partition is a pure function of the seed.
pub fn stratified_split(
    d: &LabeledDataset,
    spec: &SplitSpec,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::InvalidParameter {
            name: "train_fraction",
            reason: format!("must be in (0, 1), got {}", spec.train_fraction),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut train_positions: Vec<usize> = Vec::new();

    if spec.stratified {
        for class in [0u8, 1u8] {
            let mut positions = d.positions_of_class(class);
            if positions.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class,
                    count: positions.len(),
                });
            }
            let take = split_count(positions.len(), spec.train_fraction);
            positions.shuffle(&mut rng);
            train_positions.extend_from_slice(&positions[..take]);
        }
    } else {
        let mut positions: Vec<usize> = (0..d.n_rows()).collect();
        if positions.len() < 2 {
            return Err(Error::EmptyInput(format!(
                "split needs at least 2 rows, got {}",
                positions.len()
            )));
        }
        let take = split_count(positions.len(), spec.train_fraction);
        positions.shuffle(&mut rng);
        train_positions.extend_from_slice(&positions[..take]);
    }

    let mut in_train = vec![false; d.n_rows()];
    for &p in &train_positions {
        in_train[p] = true;
    }
    let train: Vec<usize> = (0..d.n_rows()).filter(|&i| in_train[i]).collect();
    let test: Vec<usize> = (0..d.n_rows()).filter(|&i| !in_train[i]).collect();
    Ok((d.select_rows(&train), d.select_rows(&test)))
}

/// Rows to put in train: nearest integer, clamped so neither side is empty.
fn split_count(total: usize, fraction: f64) -> usize {
    let raw = (fraction * total as f64).round() as usize;
    raw.clamp(1, total - 1)
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

/// Two seeded Gaussian clusters: majority centered at the origin, minority
/// centered `class_separation` away (Euclidean) along the all-ones diagonal.
/// Each cluster has per-coordinate standard deviation 0.5, so a separation of
/// 3.0 puts the means six within-cluster sigmas apart.
pub fn make_synthetic(
    n_major: usize,
    n_minor: usize,
    dims: usize,
    class_separation: f64,
    seed: u64,
) -> Result<LabeledDataset> {
    if n_major < 1 || n_minor < 1 {
        return Err(Error::InvalidParameter {
            name: "n_major/n_minor",
            reason: "class counts must be at least 1".into(),
        });
    }
    if dims < 1 {
        return Err(Error::InvalidParameter {
            name: "dims",
            reason: "dims must be at least 1".into(),
        });
    }
    const CLUSTER_STD: f64 = 0.5;
    let offset = class_separation / (dims as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = StandardNormal;

    let n = n_major + n_minor;
    let mut values = Vec::with_capacity(n * dims);
    let mut labels = Vec::with_capacity(n);
    for row in 0..n {
        let (label, mean) = if row < n_major { (0u8, 0.0) } else { (1u8, offset) };
        for _ in 0..dims {
            let z: f64 = normal.sample(&mut rng);
            values.push(mean + CLUSTER_STD * z);
        }
        labels.push(label);
    }
    let features = Array2::from_shape_vec((n, dims), values).expect("buffer matches dims");
    let row_ids = (0..n as u64).collect();
    let feature_names = (1..=dims).map(|j| format!("f{j}")).collect();
    LabeledDataset::new(features, labels, row_ids, feature_names)
}
