//! Dataset representation, CSV ingestion, min-max scaling, stratified
//! splitting, and one-vs-one pairing.
//!
//! CSV conventions: comma-separated decimal numerals, newline-terminated
//! rows, no header. The label file carries one token per line, one of `+1`,
//! `1`, or `-1`.

use std::io::Write as _;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two feature views an operation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum View {
    A,
    B,
}

/// Paired feature matrices for views A and B plus ±1 labels.
///
/// All three parts have the same number of rows; row `i` of each view
/// describes the same underlying sample.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiViewDataset {
    pub view_a: DMatrix<f64>,
    pub view_b: DMatrix<f64>,
    pub labels: Vec<i8>,
}

impl MultiViewDataset {
    /// Builds a dataset, validating the row-count and label invariants.
    pub fn new(view_a: DMatrix<f64>, view_b: DMatrix<f64>, labels: Vec<i8>) -> Result<Self> {
        if view_a.nrows() != view_b.nrows() {
            return Err(Error::DimensionMismatch {
                context: "dataset views",
                expected: format!("{} rows", view_a.nrows()),
                found: format!("{} rows", view_b.nrows()),
            });
        }
        if view_a.nrows() != labels.len() {
            return Err(Error::DimensionMismatch {
                context: "dataset labels",
                expected: format!("{} rows", view_a.nrows()),
                found: format!("{} labels", labels.len()),
            });
        }
        if let Some(bad) = labels.iter().find(|&&y| y != 1 && y != -1) {
            return Err(Error::InvalidParameter(format!(
                "label {bad} is not +1 or -1"
            )));
        }
        for m in [&view_a, &view_b] {
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameter(
                    "feature values must be finite".into(),
                ));
            }
        }
        Ok(Self {
            view_a,
            view_b,
            labels,
        })
    }

    /// Number of samples.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when the dataset holds no samples.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Row indices carrying the given label.
    pub fn class_indices(&self, label: i8) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.labels[i] == label)
            .collect()
    }

    /// Dataset restricted to the given rows, in the given order.
    pub fn subset(&self, rows: &[usize]) -> Self {
        Self {
            view_a: self.view_a.select_rows(rows.iter()),
            view_b: self.view_b.select_rows(rows.iter()),
            labels: rows.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

/// Per-feature minima and maxima recorded when scaling training data,
/// reusable on test data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    pub min_a: Vec<f64>,
    pub max_a: Vec<f64>,
    pub min_b: Vec<f64>,
    pub max_b: Vec<f64>,
}

impl ScalingParams {
    /// Parameters that leave data unchanged (min 0, max 1 per feature).
    pub fn identity(dim_a: usize, dim_b: usize) -> Self {
        Self {
            min_a: vec![0.0; dim_a],
            max_a: vec![1.0; dim_a],
            min_b: vec![0.0; dim_b],
            max_b: vec![1.0; dim_b],
        }
    }

    fn bounds(&self, view: View) -> (&[f64], &[f64]) {
        match view {
            View::A => (&self.min_a, &self.max_a),
            View::B => (&self.min_b, &self.max_b),
        }
    }

    /// Applies `(x − min)/(max − min)` per feature. Constant training
    /// features map to 0; out-of-range test values are not clipped.
    pub fn transform_row(&self, row: &[f64], view: View) -> Result<Vec<f64>> {
        let (mins, maxs) = self.bounds(view);
        if row.len() != mins.len() {
            return Err(Error::DimensionMismatch {
                context: "scaling transform",
                expected: format!("{} features", mins.len()),
                found: format!("{} features", row.len()),
            });
        }
        Ok(row
            .iter()
            .zip(mins.iter().zip(maxs))
            .map(|(&x, (&lo, &hi))| if hi > lo { (x - lo) / (hi - lo) } else { 0.0 })
            .collect())
    }

    /// Row-wise [`Self::transform_row`] over a whole matrix.
    pub fn transform_matrix(&self, m: &DMatrix<f64>, view: View) -> Result<DMatrix<f64>> {
        let (mins, maxs) = self.bounds(view);
        if m.ncols() != mins.len() {
            return Err(Error::DimensionMismatch {
                context: "scaling transform",
                expected: format!("{} features", mins.len()),
                found: format!("{} features", m.ncols()),
            });
        }
        let mut out = m.clone();
        for j in 0..out.ncols() {
            let (lo, hi) = (mins[j], maxs[j]);
            for i in 0..out.nrows() {
                out[(i, j)] = if hi > lo { (out[(i, j)] - lo) / (hi - lo) } else { 0.0 };
            }
        }
        Ok(out)
    }
}

fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a headerless numeric CSV file into a dense matrix.
pub fn parse_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    let text = read_to_string(path)?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() && i + 1 == text.lines().count() {
            break;
        }
        let cells: Vec<&str> = line.split(',').collect();
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::RaggedRow {
                path: path.to_path_buf(),
                row: i + 1,
                expected,
                found: cells.len(),
            });
        }
        let mut row = Vec::with_capacity(cells.len());
        for (j, cell) in cells.iter().enumerate() {
            let parsed: Option<f64> = cell.trim().parse().ok().filter(|v: &f64| v.is_finite());
            match parsed {
                Some(v) => row.push(v),
                None => {
                    return Err(Error::NonNumericCell {
                        path: path.to_path_buf(),
                        row: i + 1,
                        col: j + 1,
                        cell: cell.trim().to_string(),
                    })
                }
            }
        }
        rows.push(row);
    }
    let ncols = width.unwrap_or(0);
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        ncols,
        rows.iter().flatten().copied(),
    ))
}

/// Parses a label file: one of `+1`, `1`, `-1` per line.
pub fn parse_labels_csv(path: &Path) -> Result<Vec<i8>> {
    let text = read_to_string(path)?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let token = line.trim();
        if token.is_empty() && i + 1 == text.lines().count() {
            break;
        }
        match token {
            "+1" | "1" => labels.push(1),
            "-1" => labels.push(-1),
            other => {
                return Err(Error::InvalidLabel {
                    path: path.to_path_buf(),
                    row: i + 1,
                    label: other.to_string(),
                })
            }
        }
    }
    Ok(labels)
}

/// Loads a two-view dataset from three CSV files (view A, view B, labels).
pub fn load_multiview_csv(
    path_a: &Path,
    path_b: &Path,
    path_labels: &Path,
) -> Result<MultiViewDataset> {
    let view_a = parse_matrix_csv(path_a)?;
    let view_b = parse_matrix_csv(path_b)?;
    let labels = parse_labels_csv(path_labels)?;
    let check = |rows_b: usize, path_b: &Path| -> Result<()> {
        if view_a.nrows() != rows_b {
            return Err(Error::RowCountMismatch {
                path_a: path_a.to_path_buf(),
                rows_a: view_a.nrows(),
                path_b: path_b.to_path_buf(),
                rows_b,
            });
        }
        Ok(())
    };
    check(view_b.nrows(), path_b)?;
    check(labels.len(), path_labels)?;
    MultiViewDataset::new(view_a, view_b, labels)
}

/// Scales every feature column to [0, 1] and returns the parameters for
/// reuse on test data. Constant columns map to 0.
pub fn minmax_scale(ds: &MultiViewDataset) -> (MultiViewDataset, ScalingParams) {
    fn column_bounds(m: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>) {
        (0..m.ncols())
            .map(|j| {
                let col = m.column(j);
                (col.min(), col.max())
            })
            .unzip()
    }
    let (min_a, max_a) = column_bounds(&ds.view_a);
    let (min_b, max_b) = column_bounds(&ds.view_b);
    let params = ScalingParams {
        min_a,
        max_a,
        min_b,
        max_b,
    };
    let scaled = MultiViewDataset {
        view_a: params
            .transform_matrix(&ds.view_a, View::A)
            .expect("dimensions fixed above"),
        view_b: params
            .transform_matrix(&ds.view_b, View::B)
            .expect("dimensions fixed above"),
        labels: ds.labels.clone(),
    };
    (scaled, params)
}

/// Seeded stratified k-fold split: within each class, indices are shuffled
/// by a ChaCha stream seeded from `seed` and dealt round-robin into folds.
///
/// Returns `(train, test)` index pairs, one per fold, each sorted ascending.
pub fn stratified_kfold(
    ds: &MultiViewDataset,
    folds: usize,
    seed: u64,
) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::InvalidParameter(format!(
            "folds must be at least 2, got {folds}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_sets = vec![Vec::new(); folds];
    for label in [1i8, -1] {
        let mut members = ds.class_indices(label);
        if members.len() < folds {
            return Err(Error::ClassTooSmall {
                label,
                size: members.len(),
                required: folds,
                context: "stratified k-fold",
            });
        }
        members.shuffle(&mut rng);
        for (pos, idx) in members.into_iter().enumerate() {
            test_sets[pos % folds].push(idx);
        }
    }
    Ok(test_sets
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let train = (0..ds.len()).filter(|i| !test.contains(i)).collect();
            (train, test)
        })
        .collect())
}

/// One unordered class pair of a one-vs-one reduction, with the row indices
/// belonging to each side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OneVsOnePair {
    pub class_a: i64,
    pub class_b: i64,
    pub indices_a: Vec<usize>,
    pub indices_b: Vec<usize>,
}

/// Enumerates all K(K−1)/2 unordered class pairs of a multiclass label
/// vector, in ascending (class_a, class_b) order.
pub fn one_vs_one_pairs(labels: &[i64]) -> Result<Vec<OneVsOnePair>> {
    let mut classes: Vec<i64> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "one-vs-one pairing needs at least 2 classes, got {}",
            classes.len()
        )));
    }
    let mut pairs = Vec::with_capacity(classes.len() * (classes.len() - 1) / 2);
    for (i, &a) in classes.iter().enumerate() {
        for &b in &classes[i + 1..] {
            pairs.push(OneVsOnePair {
                class_a: a,
                class_b: b,
                indices_a: (0..labels.len()).filter(|&r| labels[r] == a).collect(),
                indices_b: (0..labels.len()).filter(|&r| labels[r] == b).collect(),
            });
        }
    }
    Ok(pairs)
}

/// Writes a matrix as headerless CSV with shortest round-trip numerals.
pub fn write_matrix_csv(path: &Path, m: &DMatrix<f64>) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        writeln!(out, "{}", row.join(",")).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Writes labels one per line as `+1` / `-1`.
pub fn write_labels_csv(path: &Path, labels: &[i8]) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err)?);
    for &y in labels {
        writeln!(out, "{}", if y > 0 { "+1" } else { "-1" }).map_err(io_err)?;
    }
    out.flush().map_err(io_err)
}

/// Convenience: the `PathBuf`s of the three files of a dataset directory.
pub fn dataset_paths(dir: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join("view_a.csv"),
        dir.join("view_b.csv"),
        dir.join("labels.csv"),
    )
}
