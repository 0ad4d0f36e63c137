//! Single-view weighted twin classifier, used as the head-to-head baseline.
//!
//! Two nonparallel planes are fitted independently: each hugs one class
//! (weighted by intra-class graph degrees) and pushes the other class
//! beyond unit distance, with margin constraints only for opposing samples
//! retained by the inter-class neighbor indicator. Each plane's dual is the
//! single-view restriction of the multi-view program — drop the second
//! view, the cross-view slack bounds, and the slack product — which leaves
//! `min ½αᵀ(ZGZᵀ)α − eᵀα` over `0 ≤ α ≤ C`, solved by the same
//! interior-point path with the same KKT certificate.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{ScalingParams, View};
use crate::error::{Error, Result};
use crate::graphs::WeightGraphs;
use crate::kernels::{augmented_kernel_block, gram, KernelSpec};
use crate::model::{
    euclidean_weight_norm, kernel_weight_norm, read_versioned_json, write_pretty_json,
    Hyperplane, MatrixRecord, PlaneRecord, SOLVER_MAX_ITER, SOLVER_TOLERANCE,
};
use crate::qp::{
    append_bias_column, regularized_inverse, sandwich, solve_qp, stack_rows,
    weighted_proximity, QpProblem,
};
use crate::SCHEMA_VERSION;

const MODEL_TYPE: &str = "single_view_twin";

/// Solver outcome for one of the two planes.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PlaneFitDiagnostics {
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Retained opposing samples / opposing-class size before pruning.
    pub kept: usize,
    pub constraint_class_size: usize,
    /// Ridge actually used for the proximity inverse.
    pub eps: f64,
}

/// A fitted single-view twin classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct WltsvmModel {
    /// Plane near the positive class.
    pub plane_pos: Hyperplane,
    /// Plane near the negative class.
    pub plane_neg: Hyperplane,
    pub kernel: Option<KernelSpec>,
    /// Kernel reference rows (scaled; positives stacked above negatives).
    pub reference: Option<DMatrix<f64>>,
    pub scaling: ScalingParams,
    pub diagnostics_pos: PlaneFitDiagnostics,
    pub diagnostics_neg: PlaneFitDiagnostics,
}

/// Min/max over the union of both classes' rows, stored in both view slots
/// so [`ScalingParams::transform_row`] works with [`View::A`].
fn single_view_minmax(x_pos: &DMatrix<f64>, x_neg: &DMatrix<f64>) -> ScalingParams {
    let dim = x_pos.ncols();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for m in [x_pos, x_neg] {
        for j in 0..dim {
            for i in 0..m.nrows() {
                lo[j] = lo[j].min(m[(i, j)]);
                hi[j] = hi[j].max(m[(i, j)]);
            }
        }
    }
    ScalingParams {
        min_a: lo.clone(),
        max_a: hi.clone(),
        min_b: lo,
        max_b: hi,
    }
}

fn validate_inputs(x_pos: &DMatrix<f64>, x_neg: &DMatrix<f64>, c: f64, k: usize) -> Result<()> {
    if x_pos.nrows() == 0 {
        return Err(Error::ClassTooSmall {
            label: 1,
            size: 0,
            required: 1,
            context: "single-view plane-pair training",
        });
    }
    if x_neg.nrows() == 0 {
        return Err(Error::ClassTooSmall {
            label: -1,
            size: 0,
            required: 1,
            context: "single-view plane-pair training",
        });
    }
    if x_pos.ncols() != x_neg.ncols() {
        return Err(Error::DimensionMismatch {
            context: "single-view class matrices",
            expected: format!("{} features", x_pos.ncols()),
            found: format!("{} features", x_neg.ncols()),
        });
    }
    if !(c >= 0.0 && c.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty must be a nonnegative real, got {c}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParameter(
            "neighbor count k must be at least 1".into(),
        ));
    }
    Ok(())
}

/// Fits one plane: `own` rows are hugged (degree-weighted), retained
/// `constraint` rows are pushed past unit distance. Returns the augmented
/// plane vector `sign · G Zᵀ α`.
fn fit_plane(
    own: &DMatrix<f64>,
    constraint: &DMatrix<f64>,
    graphs_own: &WeightGraphs,
    c: f64,
    sign: f64,
) -> Result<(DVector<f64>, PlaneFitDiagnostics)> {
    let kept = graphs_own.retained_opposing();
    if kept.is_empty() {
        return Err(Error::NoSupportVectorCandidates);
    }
    let l = kept.len();
    let mut z = DMatrix::zeros(l, constraint.ncols());
    for (row, &j) in kept.iter().enumerate() {
        z.row_mut(row).copy_from(&constraint.row(j));
    }
    let m = weighted_proximity(own, &graphs_own.degrees);
    let (g, eps) = regularized_inverse(&m, 0.0)?;
    let h = sandwich(&z, &g);
    let p = DVector::from_element(l, -1.0);
    let a_ineq = DMatrix::identity(l, l);
    let b = DVector::from_element(l, c);
    let qp = QpProblem::new(h, p, a_ineq, b)?;
    let solution = solve_qp(&qp, SOLVER_TOLERANCE, SOLVER_MAX_ITER)?;
    let u = g * (z.transpose() * &solution.pi) * sign;
    let diagnostics = PlaneFitDiagnostics {
        kkt_residual: solution.kkt_residual,
        converged: solution.converged,
        iterations: solution.iterations,
        kept: l,
        constraint_class_size: graphs_own.opposing_indicator.len(),
        eps,
    };
    Ok((u, diagnostics))
}

/// Fits the baseline on raw features: scales them to [0, 1] per feature
/// (min/max over both classes), then trains. Predictions take raw inputs.
pub fn fit_wltsvm(
    x_pos: &DMatrix<f64>,
    x_neg: &DMatrix<f64>,
    c: f64,
    k: usize,
    kernel: Option<KernelSpec>,
) -> Result<WltsvmModel> {
    validate_inputs(x_pos, x_neg, c, k)?;
    let scaling = single_view_minmax(x_pos, x_neg);
    let sp = scaling.transform_matrix(x_pos, View::A)?;
    let sn = scaling.transform_matrix(x_neg, View::A)?;
    fit_wltsvm_prescaled(&sp, &sn, c, k, kernel, scaling)
}

/// Fits on features that are already scaled, recording `scaling` for
/// prediction-time use.
pub fn fit_wltsvm_prescaled(
    x_pos: &DMatrix<f64>,
    x_neg: &DMatrix<f64>,
    c: f64,
    k: usize,
    kernel: Option<KernelSpec>,
    scaling: ScalingParams,
) -> Result<WltsvmModel> {
    validate_inputs(x_pos, x_neg, c, k)?;
    if let Some(spec) = &kernel {
        spec.validate()?;
    }
    let graphs_pos = WeightGraphs::build(x_pos, x_neg, k)?;
    let graphs_neg = WeightGraphs::build(x_neg, x_pos, k)?;
    let (des_pos, des_neg, reference) = match &kernel {
        None => (append_bias_column(x_pos), append_bias_column(x_neg), None),
        Some(spec) => {
            let c_ref = stack_rows(x_pos, x_neg);
            (
                augmented_kernel_block(x_pos, &c_ref, spec)?,
                augmented_kernel_block(x_neg, &c_ref, spec)?,
                Some(c_ref),
            )
        }
    };
    // Plane 1 hugs the positives and carries a minus sign from its
    // stationarity condition; plane 2 mirrors with a plus.
    let (u_pos, diag_pos) = fit_plane(&des_pos, &des_neg, &graphs_pos, c, -1.0)?;
    let (u_neg, diag_neg) = fit_plane(&des_neg, &des_pos, &graphs_neg, c, 1.0)?;
    let reference_gram = match (&kernel, &reference) {
        (Some(spec), Some(r)) => Some(gram(r, spec)),
        _ => None,
    };
    let make_plane = |u: DVector<f64>| -> Result<Hyperplane> {
        let weight_norm = match &reference_gram {
            None => euclidean_weight_norm(&u),
            Some(g) => kernel_weight_norm(&u, g)?,
        };
        Ok(Hyperplane {
            coefficients: u,
            weight_norm,
        })
    };
    Ok(WltsvmModel {
        plane_pos: make_plane(u_pos)?,
        plane_neg: make_plane(u_neg)?,
        kernel,
        reference,
        scaling,
        diagnostics_pos: diag_pos,
        diagnostics_neg: diag_neg,
    })
}

impl WltsvmModel {
    fn features(&self, x_raw: &[f64]) -> Result<DVector<f64>> {
        let scaled = self.scaling.transform_row(x_raw, View::A)?;
        match &self.kernel {
            None => {
                let mut phi = DVector::zeros(scaled.len() + 1);
                for (i, v) in scaled.iter().enumerate() {
                    phi[i] = *v;
                }
                phi[scaled.len()] = 1.0;
                Ok(phi)
            }
            Some(spec) => {
                let Some(c) = &self.reference else {
                    return Err(Error::InvalidParameter(
                        "kernel model is missing its reference rows".into(),
                    ));
                };
                let row = DMatrix::from_row_slice(1, scaled.len(), &scaled);
                let block = augmented_kernel_block(&row, c, spec)?;
                Ok(block.row(0).transpose())
            }
        }
    }

    /// Distances of a raw sample to the (positive, negative) planes.
    pub fn distances(&self, x_raw: &[f64]) -> Result<(f64, f64)> {
        let phi = self.features(x_raw)?;
        Ok((self.plane_pos.distance(&phi)?, self.plane_neg.distance(&phi)?))
    }
}

/// Nearer-plane classification; exact ties go to +1.
pub fn predict_wltsvm(model: &WltsvmModel, x_raw: &[f64]) -> Result<i8> {
    let (d_pos, d_neg) = model.distances(x_raw)?;
    Ok(if d_pos <= d_neg { 1 } else { -1 })
}

/// [`predict_wltsvm`] over the rows of a matrix.
pub fn predict_wltsvm_many(model: &WltsvmModel, x: &DMatrix<f64>) -> Result<Vec<i8>> {
    (0..x.nrows())
        .map(|i| {
            let row: Vec<f64> = x.row(i).iter().copied().collect();
            predict_wltsvm(model, &row)
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct WltsvmRecord {
    schema_version: u32,
    model_type: String,
    kernel: Option<KernelSpec>,
    scaling: ScalingParams,
    plane_positive: PlaneRecord,
    plane_negative: PlaneRecord,
    reference: Option<MatrixRecord>,
    diagnostics_pos: PlaneFitDiagnostics,
    diagnostics_neg: PlaneFitDiagnostics,
}

/// Writes the baseline model with the shared file schema (distinct type tag).
pub fn save_wltsvm(model: &WltsvmModel, path: &Path) -> Result<()> {
    let record = WltsvmRecord {
        schema_version: SCHEMA_VERSION,
        model_type: MODEL_TYPE.to_string(),
        kernel: model.kernel.clone(),
        scaling: model.scaling.clone(),
        plane_positive: PlaneRecord {
            coefficients: model.plane_pos.coefficients.iter().copied().collect(),
            weight_norm: model.plane_pos.weight_norm,
        },
        plane_negative: PlaneRecord {
            coefficients: model.plane_neg.coefficients.iter().copied().collect(),
            weight_norm: model.plane_neg.weight_norm,
        },
        reference: model.reference.as_ref().map(MatrixRecord::from_matrix),
        diagnostics_pos: model.diagnostics_pos.clone(),
        diagnostics_neg: model.diagnostics_neg.clone(),
    };
    write_pretty_json(path, &record)
}

/// Loads a model written by [`save_wltsvm`].
pub fn load_wltsvm(path: &Path) -> Result<WltsvmModel> {
    let value = read_versioned_json(path, MODEL_TYPE)?;
    let record: WltsvmRecord = serde_json::from_value(value).map_err(|e| Error::ModelFormat {
        path: path.to_path_buf(),
        detail: format!("bad field: {e}"),
    })?;
    let reference = match &record.reference {
        None => None,
        Some(r) => Some(r.to_matrix().ok_or_else(|| Error::ModelFormat {
            path: path.to_path_buf(),
            detail: "reference matrix shape disagrees with data".into(),
        })?),
    };
    Ok(WltsvmModel {
        plane_pos: Hyperplane {
            coefficients: DVector::from_column_slice(&record.plane_positive.coefficients),
            weight_norm: record.plane_positive.weight_norm,
        },
        plane_neg: Hyperplane {
            coefficients: DVector::from_column_slice(&record.plane_negative.coefficients),
            weight_norm: record.plane_negative.weight_norm,
        },
        kernel: record.kernel,
        reference,
        scaling: record.scaling,
        diagnostics_pos: record.diagnostics_pos,
        diagnostics_neg: record.diagnostics_neg,
    })
}
