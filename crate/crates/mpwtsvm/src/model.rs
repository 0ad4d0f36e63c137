//! The multi-view twin classifier: hyperparameters, fitting, primal
//! recovery, prediction, and model-file serialization.
//!
//! A fitted model holds four hyperplanes — one pair per view, each pair
//! consisting of a plane close to the positive class and a plane close to
//! the negative class. Prediction assigns a sample the class of its nearer
//! plane, per view (`predict_view`) or by averaging the two views'
//! normalized distances (`predict_combined`).

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::data::{minmax_scale, MultiViewDataset, ScalingParams, View};
use crate::error::{Error, Result};
use crate::eval::accuracy;
use crate::kernels::{augmented_kernel_block, gram, KernelSpec};
use crate::qp::{
    assemble_dual, solve_qp, solve_qp_warm, ClassSplit, DualDirection, DualProblem, GraphSet,
    QpSolution,
};
use crate::SCHEMA_VERSION;

/// Interior-point tolerance used by [`MpwtsvmModel::fit`].
pub const SOLVER_TOLERANCE: f64 = 1e-8;
/// Iteration cap used by [`MpwtsvmModel::fit`].
pub const SOLVER_MAX_ITER: usize = 200;
/// Weight norms below this fall back to unnormalized plane distances.
pub const DEGENERATE_NORM: f64 = 1e-12;

const MODEL_TYPE: &str = "multi_view_twin";

/// All knobs of the estimator.
///
/// The positive direction (planes hugging the positive class) uses
/// `c_a, c_b, c_coupling, gamma`; the negative direction uses the `*2`
/// mirrors. `kernel = None` trains directly on the (scaled) features;
/// `Some(spec)` trains in the kernel's feature space, including
/// `KernelSpec::Linear`, which is equivalent to the raw linear mode up to
/// regularization differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    /// Penalty on view A's margin violations, positive direction.
    pub c_a: f64,
    /// Penalty on view B's margin violations, positive direction.
    pub c_b: f64,
    /// Weight of the cross-view slack product, positive direction.
    pub c_coupling: f64,
    /// Mirror of `c_a` for the negative direction.
    pub c_a2: f64,
    /// Mirror of `c_b` for the negative direction.
    pub c_b2: f64,
    /// Mirror of `c_coupling` for the negative direction.
    pub c_coupling2: f64,
    /// Trade-off scaling view B's proximity term, positive direction.
    pub gamma: f64,
    /// Mirror of `gamma` for the negative direction.
    pub gamma2: f64,
    /// Neighbor count for the intra-class and inter-class graphs.
    pub k: usize,
    /// Ridge added when inverting proximity matrices (0 = automatic).
    pub eps_reg: f64,
    /// Feature map: `None` for raw linear features, or a kernel.
    pub kernel: Option<KernelSpec>,
    /// Lift the slack diagonal to make the dual positive semidefinite.
    pub convexify: bool,
}

impl Default for Hyperparameters {
    fn default() -> Self {
        Self {
            c_a: 1.0,
            c_b: 1.0,
            c_coupling: 1.0,
            c_a2: 1.0,
            c_b2: 1.0,
            c_coupling2: 1.0,
            gamma: 1.0,
            gamma2: 1.0,
            k: 5,
            eps_reg: 0.0,
            kernel: None,
            convexify: false,
        }
    }
}

impl Hyperparameters {
    /// The usual grid-search tying: one penalty for all six slots, one
    /// gamma for both directions.
    pub fn tied(penalty: f64, gamma: f64, k: usize) -> Self {
        Self {
            c_a: penalty,
            c_b: penalty,
            c_coupling: penalty,
            c_a2: penalty,
            c_b2: penalty,
            c_coupling2: penalty,
            gamma,
            gamma2: gamma,
            k,
            ..Self::default()
        }
    }

    /// Checks ranges: penalties ≥ 0, gammas > 0, `k` ≥ 1, `eps_reg` ≥ 0,
    /// kernel parameters valid.
    pub fn validate(&self) -> Result<()> {
        let penalties = [
            ("c_a", self.c_a),
            ("c_b", self.c_b),
            ("c_coupling", self.c_coupling),
            ("c_a2", self.c_a2),
            ("c_b2", self.c_b2),
            ("c_coupling2", self.c_coupling2),
        ];
        for (name, v) in penalties {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a nonnegative real, got {v}"
                )));
            }
        }
        // The gammas scale a matrix that is subsequently inverted, so zero
        // is not usable even though it is formally "nonnegative".
        for (name, v) in [("gamma", self.gamma), ("gamma2", self.gamma2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be a positive real, got {v}"
                )));
            }
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter(
                "neighbor count k must be at least 1".into(),
            ));
        }
        if !(self.eps_reg >= 0.0 && self.eps_reg.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "eps_reg must be a nonnegative real, got {}",
                self.eps_reg
            )));
        }
        if let Some(spec) = &self.kernel {
            spec.validate()?;
        }
        Ok(())
    }
}

/// One decision plane: augmented coefficients (weights, then bias) and the
/// precomputed norm of the weight part.
///
/// In kernel mode the coefficients weight kernel evaluations against the
/// model's reference rows, and the norm is taken in the kernel metric
/// `√(uᵀ K(C,C) u)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Hyperplane {
    pub coefficients: DVector<f64>,
    pub weight_norm: f64,
}

impl Hyperplane {
    /// The bias (last augmented coefficient).
    pub fn bias(&self) -> f64 {
        self.coefficients[self.coefficients.len() - 1]
    }

    /// Distance from an augmented feature vector to this plane.
    pub fn distance(&self, x_aug: &DVector<f64>) -> Result<f64> {
        plane_distance(&self.coefficients, x_aug, self.weight_norm)
    }
}

/// `|wᵀx| / ‖w‖`, with the norm of the weight part supplied by the caller
/// (Euclidean in linear mode, kernel-metric in kernel mode). A norm below
/// [`DEGENERATE_NORM`] falls back to the unnormalized `|wᵀx|`.
pub fn plane_distance(w_aug: &DVector<f64>, x_aug: &DVector<f64>, weight_norm: f64) -> Result<f64> {
    if w_aug.len() != x_aug.len() {
        return Err(Error::DimensionMismatch {
            context: "plane distance",
            expected: format!("{} entries", w_aug.len()),
            found: format!("{} entries", x_aug.len()),
        });
    }
    let raw = w_aug.dot(x_aug).abs();
    if weight_norm < DEGENERATE_NORM {
        Ok(raw)
    } else {
        Ok(raw / weight_norm)
    }
}

/// Euclidean norm of the weight part (all but the trailing bias).
pub fn euclidean_weight_norm(w_aug: &DVector<f64>) -> f64 {
    let head = w_aug.len().saturating_sub(1);
    w_aug.rows(0, head).norm()
}

/// Kernel-metric norm `√(uᵀKu)` of the non-bias coefficients, clamped at
/// zero against round-off.
pub fn kernel_weight_norm(w_aug: &DVector<f64>, reference_gram: &DMatrix<f64>) -> Result<f64> {
    let head = w_aug.len().saturating_sub(1);
    if reference_gram.nrows() != head || reference_gram.ncols() != head {
        return Err(Error::DimensionMismatch {
            context: "kernel weight norm",
            expected: format!("{head}x{head} gram"),
            found: format!("{}x{}", reference_gram.nrows(), reference_gram.ncols()),
        });
    }
    let u = w_aug.rows(0, head);
    let val = (u.transpose() * reference_gram * u)[(0, 0)];
    Ok(val.max(0.0).sqrt())
}

/// Maps a certified dual solution to the two augmented plane vectors
/// (view A, view B) of the dual's direction.
pub fn recover_primal(
    dual: &DualProblem,
    solution: &QpSolution,
) -> Result<(DVector<f64>, DVector<f64>)> {
    dual.recover_planes(&solution.pi)
}

/// Solver outcome for one direction, kept for inspection and reporting.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DirectionDiagnostics {
    pub kkt_residual: f64,
    pub converged: bool,
    pub iterations: usize,
    pub min_eigenvalue_estimate: f64,
    /// Retained constraint-class samples / class size before pruning.
    pub kept: usize,
    pub constraint_class_size: usize,
    /// Ridges actually used for the two proximity inverses.
    pub eps_a: f64,
    pub eps_b: f64,
    /// Plane-engagement ratio of the dual point behind the stored planes;
    /// values near machine epsilon mean the point certified without putting
    /// any energy into the plane terms (see `DualProblem::plane_engagement`).
    #[serde(default)]
    pub plane_engagement: f64,
    /// True when this direction's planes come from the slack-lifted
    /// (positive-semidefinite) program instead: the original program's
    /// certified point carried no plane geometry and the lift's planes
    /// scored at least as well on the training data.
    #[serde(default)]
    pub used_slack_lift: bool,
}

/// Diagnostics for both directions of a fit.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub positive: DirectionDiagnostics,
    pub negative: DirectionDiagnostics,
}

/// A fitted multi-view twin classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct MpwtsvmModel {
    pub params: Hyperparameters,
    /// Feature scaling fitted on the training data, applied to every input.
    pub scaling: ScalingParams,
    /// Plane near the positive class, view A.
    pub plane_pos_a: Hyperplane,
    /// Plane near the positive class, view B.
    pub plane_pos_b: Hyperplane,
    /// Plane near the negative class, view A.
    pub plane_neg_a: Hyperplane,
    /// Plane near the negative class, view B.
    pub plane_neg_b: Hyperplane,
    /// Kernel reference rows for view A (scaled; positives stacked above
    /// negatives). `None` in linear mode.
    pub reference_a: Option<DMatrix<f64>>,
    /// Kernel reference rows for view B.
    pub reference_b: Option<DMatrix<f64>>,
    pub diagnostics: FitDiagnostics,
}

fn vstack(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

impl MpwtsvmModel {
    /// Scales the dataset to [0, 1] per feature and fits on the result.
    ///
    /// The fitted scaling is stored in the model and applied to every
    /// prediction input, so predictions take raw (unscaled) features.
    pub fn fit(ds: &MultiViewDataset, params: &Hyperparameters) -> Result<Self> {
        let (scaled, scaling) = minmax_scale(ds);
        Self::fit_prescaled(&scaled, params, scaling)
    }

    /// Fits on data that is already scaled, recording `scaling` for
    /// prediction-time use. Pass [`ScalingParams::identity`] to train on
    /// the features exactly as given.
    pub fn fit_prescaled(
        ds: &MultiViewDataset,
        params: &Hyperparameters,
        scaling: ScalingParams,
    ) -> Result<Self> {
        params.validate()?;
        let graphs = GraphSet::build(ds, params.k)?;
        let pos = solve_direction(ds, &graphs, params, DualDirection::Positive)?;
        let neg = solve_direction(ds, &graphs, params, DualDirection::Negative)?;

        let (reference_a, reference_b) = match &params.kernel {
            None => (None, None),
            Some(_) => {
                let split = ClassSplit::from_dataset(ds)?;
                (
                    Some(vstack(&split.pos_a, &split.neg_a)),
                    Some(vstack(&split.pos_b, &split.neg_b)),
                )
            }
        };
        let gram_a = match (&params.kernel, &reference_a) {
            (Some(spec), Some(c)) => Some(gram(c, spec)),
            _ => None,
        };
        let gram_b = match (&params.kernel, &reference_b) {
            (Some(spec), Some(c)) => Some(gram(c, spec)),
            _ => None,
        };
        let build = |planes_pos: &(DVector<f64>, DVector<f64>),
                     planes_neg: &(DVector<f64>, DVector<f64>),
                     diag_pos: &DirectionDiagnostics,
                     diag_neg: &DirectionDiagnostics,
                     scaling: ScalingParams|
         -> Result<Self> {
            let make_plane = |u: DVector<f64>, g: Option<&DMatrix<f64>>| -> Result<Hyperplane> {
                let weight_norm = match g {
                    None => euclidean_weight_norm(&u),
                    Some(g) => kernel_weight_norm(&u, g)?,
                };
                Ok(Hyperplane {
                    coefficients: u,
                    weight_norm,
                })
            };
            Ok(Self {
                params: params.clone(),
                scaling,
                plane_pos_a: make_plane(planes_pos.0.clone(), gram_a.as_ref())?,
                plane_pos_b: make_plane(planes_pos.1.clone(), gram_b.as_ref())?,
                plane_neg_a: make_plane(planes_neg.0.clone(), gram_a.as_ref())?,
                plane_neg_b: make_plane(planes_neg.1.clone(), gram_b.as_ref())?,
                reference_a: reference_a.clone(),
                reference_b: reference_b.clone(),
                diagnostics: FitDiagnostics {
                    positive: diag_pos.clone(),
                    negative: diag_neg.clone(),
                },
            })
        };

        if pos.fallback.is_none() && neg.fallback.is_none() {
            return build(&pos.planes, &neg.planes, &pos.diagnostics, &neg.diagnostics, scaling);
        }

        // At least one direction certified without plane geometry. Suspicion
        // is not proof — kernel fits can live at low engagement legitimately —
        // so arbitrate: score every combination of direct/fallback planes on
        // the training data and keep the best. Strict improvement is required
        // to substitute, and the enumeration order (direct first) makes the
        // choice deterministic.
        let identity = ScalingParams::identity(ds.view_a.ncols(), ds.view_b.ncols());
        let mut best: Option<((bool, bool), f64)> = None;
        for (sub_pos, sub_neg) in [(false, false), (true, false), (false, true), (true, true)] {
            if (sub_pos && pos.fallback.is_none()) || (sub_neg && neg.fallback.is_none()) {
                continue;
            }
            let (planes_pos, diag_pos) = select_candidate(sub_pos, &pos);
            let (planes_neg, diag_neg) = select_candidate(sub_neg, &neg);
            let candidate = build(planes_pos, planes_neg, diag_pos, diag_neg, identity.clone())?;
            let score = candidate.training_score(ds)?;
            if best.map_or(true, |(_, s)| score > s) {
                best = Some(((sub_pos, sub_neg), score));
            }
        }
        let ((sub_pos, sub_neg), _) = best.expect("the no-substitution candidate always evaluates");
        let (planes_pos, diag_pos) = select_candidate(sub_pos, &pos);
        let (planes_neg, diag_neg) = select_candidate(sub_neg, &neg);
        build(planes_pos, planes_neg, diag_pos, diag_neg, scaling)
    }

    /// Mean accuracy of the three prediction rules (per view and combined)
    /// on `ds`, which must already be in the space this model predicts on.
    fn training_score(&self, ds: &MultiViewDataset) -> Result<f64> {
        let a = accuracy(&self.predict_view_many(&ds.view_a, View::A)?, &ds.labels)?;
        let b = accuracy(&self.predict_view_many(&ds.view_b, View::B)?, &ds.labels)?;
        let both = accuracy(
            &self.predict_combined_many(&ds.view_a, &ds.view_b)?,
            &ds.labels,
        )?;
        Ok((a + b + both) / 3.0)
    }

    /// Scales a raw sample and maps it to the augmented feature vector the
    /// planes act on (features + bias, or kernel row + bias).
    fn view_features(&self, x_raw: &[f64], view: View) -> Result<DVector<f64>> {
        let scaled = self.scaling.transform_row(x_raw, view)?;
        match &self.params.kernel {
            None => {
                let mut phi = DVector::zeros(scaled.len() + 1);
                for (i, v) in scaled.iter().enumerate() {
                    phi[i] = *v;
                }
                phi[scaled.len()] = 1.0;
                Ok(phi)
            }
            Some(spec) => {
                let reference = match view {
                    View::A => self.reference_a.as_ref(),
                    View::B => self.reference_b.as_ref(),
                };
                let Some(c) = reference else {
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

    /// Distances of a raw sample to the view's (positive, negative) planes.
    pub fn view_distances(&self, x_raw: &[f64], view: View) -> Result<(f64, f64)> {
        let phi = self.view_features(x_raw, view)?;
        let (pos, neg) = match view {
            View::A => (&self.plane_pos_a, &self.plane_neg_a),
            View::B => (&self.plane_pos_b, &self.plane_neg_b),
        };
        Ok((pos.distance(&phi)?, neg.distance(&phi)?))
    }

    /// Classifies a raw sample by one view alone: the class of the nearer
    /// plane; exact ties go to +1.
    pub fn predict_view(&self, x_raw: &[f64], view: View) -> Result<i8> {
        let (d_pos, d_neg) = self.view_distances(x_raw, view)?;
        Ok(if d_pos <= d_neg { 1 } else { -1 })
    }

    /// Classifies a raw sample by both views: arg-min over the averaged
    /// per-view normalized distances; exact ties go to +1.
    pub fn predict_combined(&self, x_a_raw: &[f64], x_b_raw: &[f64]) -> Result<i8> {
        let (a_pos, a_neg) = self.view_distances(x_a_raw, View::A)?;
        let (b_pos, b_neg) = self.view_distances(x_b_raw, View::B)?;
        let d_pos = 0.5 * (a_pos + b_pos);
        let d_neg = 0.5 * (a_neg + b_neg);
        Ok(if d_pos <= d_neg { 1 } else { -1 })
    }

    /// [`Self::predict_view`] over the rows of a matrix.
    pub fn predict_view_many(&self, x: &DMatrix<f64>, view: View) -> Result<Vec<i8>> {
        (0..x.nrows())
            .map(|i| {
                let row: Vec<f64> = x.row(i).iter().copied().collect();
                self.predict_view(&row, view)
            })
            .collect()
    }

    /// [`Self::predict_combined`] over paired rows of two matrices.
    pub fn predict_combined_many(
        &self,
        x_a: &DMatrix<f64>,
        x_b: &DMatrix<f64>,
    ) -> Result<Vec<i8>> {
        if x_a.nrows() != x_b.nrows() {
            return Err(Error::DimensionMismatch {
                context: "combined prediction inputs",
                expected: format!("{} rows", x_a.nrows()),
                found: format!("{} rows", x_b.nrows()),
            });
        }
        (0..x_a.nrows())
            .map(|i| {
                let row_a: Vec<f64> = x_a.row(i).iter().copied().collect();
                let row_b: Vec<f64> = x_b.row(i).iter().copied().collect();
                self.predict_combined(&row_a, &row_b)
            })
            .collect()
    }
}

/// Engagement ratios below this mark a direction's dual point as suspect:
/// its planes carry (almost) no curvature energy, so the certified point may
/// be one of the geometry-free family. Healthy fits observed across linear
/// and kernel configurations sit several orders of magnitude above; suspect
/// directions are not rejected outright but arbitrated against the lifted
/// program's planes by training accuracy.
const ENGAGEMENT_FLOOR: f64 = 1e-3;

/// One direction's planes plus an alternative pair to arbitrate against.
struct DirectionFit {
    planes: (DVector<f64>, DVector<f64>),
    diagnostics: DirectionDiagnostics,
    /// Built only when the direct solve's engagement fell below
    /// [`ENGAGEMENT_FLOOR`]: a certified re-entry into the original program
    /// from the lifted basin when one exists, otherwise the lifted program's
    /// own solution.
    fallback: Option<((DVector<f64>, DVector<f64>), DirectionDiagnostics)>,
}

/// The fallback planes when `substitute` and a fallback exists, the direct
/// planes otherwise.
fn select_candidate(
    substitute: bool,
    fit: &DirectionFit,
) -> (&(DVector<f64>, DVector<f64>), &DirectionDiagnostics) {
    match (&fit.fallback, substitute) {
        (Some((planes, diag)), true) => (planes, diag),
        _ => (&fit.planes, &fit.diagnostics),
    }
}

fn diagnostics_from(
    dual: &DualProblem,
    solution: &QpSolution,
    plane_engagement: f64,
    used_slack_lift: bool,
) -> DirectionDiagnostics {
    DirectionDiagnostics {
        kkt_residual: solution.kkt_residual,
        converged: solution.converged,
        iterations: solution.iterations,
        min_eigenvalue_estimate: solution.min_eigenvalue_estimate,
        kept: dual.num_kept(),
        constraint_class_size: dual.constraint_class_size,
        eps_a: dual.eps_a,
        eps_b: dual.eps_b,
        plane_engagement,
        used_slack_lift,
    }
}

fn solve_direction(
    ds: &MultiViewDataset,
    graphs: &GraphSet,
    params: &Hyperparameters,
    direction: DualDirection,
) -> Result<DirectionFit> {
    let dual = assemble_dual(ds, graphs, params, direction)?;
    let solution = solve_qp(&dual.qp, SOLVER_TOLERANCE, SOLVER_MAX_ITER)?;
    let planes = recover_primal(&dual, &solution)?;
    let engagement = dual.plane_engagement(&solution.pi)?;
    let diagnostics = diagnostics_from(&dual, &solution, engagement, false);
    if params.convexify || engagement >= ENGAGEMENT_FLOOR {
        return Ok(DirectionFit { planes, diagnostics, fallback: None });
    }
    // The point certified but its planes carry essentially no curvature
    // energy — possibly one of the collapsed stationary points whose drives
    // cancel through the data map, leaving roundoff-sized normals and
    // meaningless predictions. The slack-lifted program is positive
    // semidefinite and lands on a useful solution from any start, so build a
    // second candidate from it: ideally a certified re-entry into the
    // original program warm-started at the lifted solution, otherwise the
    // lifted planes themselves. `fit_prescaled` keeps whichever candidate
    // scores better on the training data.
    let mut lifted_params = params.clone();
    lifted_params.convexify = true;
    let lifted_dual = assemble_dual(ds, graphs, &lifted_params, direction)?;
    let lifted_solution = solve_qp(&lifted_dual.qp, SOLVER_TOLERANCE, SOLVER_MAX_ITER)?;
    if lifted_solution.pi.len() == dual.qp.num_vars() {
        let polished = solve_qp_warm(&dual.qp, SOLVER_TOLERANCE, SOLVER_MAX_ITER, &lifted_solution)?;
        if polished.converged {
            let polished_engagement = dual.plane_engagement(&polished.pi)?;
            if polished_engagement >= ENGAGEMENT_FLOOR {
                let polished_planes = recover_primal(&dual, &polished)?;
                let polished_diag =
                    diagnostics_from(&dual, &polished, polished_engagement, false);
                return Ok(DirectionFit {
                    planes,
                    diagnostics,
                    fallback: Some((polished_planes, polished_diag)),
                });
            }
        }
    }
    let lifted_planes = recover_primal(&lifted_dual, &lifted_solution)?;
    let lifted_engagement = lifted_dual.plane_engagement(&lifted_solution.pi)?;
    let lifted_diag = diagnostics_from(&lifted_dual, &lifted_solution, lifted_engagement, true);
    Ok(DirectionFit {
        planes,
        diagnostics,
        fallback: Some((lifted_planes, lifted_diag)),
    })
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

/// Row-major dense matrix as stored in model files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect(),
        }
    }

    pub fn to_matrix(&self) -> Option<DMatrix<f64>> {
        if self.rows.checked_mul(self.cols)? != self.data.len() {
            return None;
        }
        Some(DMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct PlaneRecord {
    pub coefficients: Vec<f64>,
    pub weight_norm: f64,
}

impl PlaneRecord {
    fn from_plane(p: &Hyperplane) -> Self {
        Self {
            coefficients: p.coefficients.iter().copied().collect(),
            weight_norm: p.weight_norm,
        }
    }

    fn to_plane(&self) -> Hyperplane {
        Hyperplane {
            coefficients: DVector::from_column_slice(&self.coefficients),
            weight_norm: self.weight_norm,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct ModelRecord {
    schema_version: u32,
    model_type: String,
    hyperparameters: Hyperparameters,
    scaling: ScalingParams,
    plane_positive_a: PlaneRecord,
    plane_positive_b: PlaneRecord,
    plane_negative_a: PlaneRecord,
    plane_negative_b: PlaneRecord,
    reference_a: Option<MatrixRecord>,
    reference_b: Option<MatrixRecord>,
    diagnostics: FitDiagnostics,
}

pub(crate) fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

pub(crate) fn format_error(path: &Path, detail: impl Into<String>) -> Error {
    Error::ModelFormat {
        path: path.to_path_buf(),
        detail: detail.into(),
    }
}

/// Serializes any record as pretty JSON with a trailing newline.
pub(crate) fn write_pretty_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| format_error(path, format!("serialization failed: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Reads a JSON model file, enforcing the schema version and type tag
/// before the full parse, so version mismatches are reported as such
/// rather than as shape errors.
pub(crate) fn read_versioned_json(path: &Path, expected_type: &str) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| format_error(path, format!("not valid JSON: {e}")))?;
    let version = value
        .get("schema_version")
        .and_then(Value::as_u64)
        .ok_or_else(|| format_error(path, "missing schema_version field"))?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found: version as u32,
            supported: SCHEMA_VERSION,
        });
    }
    let model_type = value
        .get("model_type")
        .and_then(Value::as_str)
        .ok_or_else(|| format_error(path, "missing model_type field"))?;
    if model_type != expected_type {
        return Err(format_error(
            path,
            format!("model type {model_type:?}, expected {expected_type:?}"),
        ));
    }
    Ok(value)
}

/// Writes a fitted model to a JSON file (see the format reference in the
/// repository documentation). Numbers round-trip bit-exactly.
pub fn save_model(model: &MpwtsvmModel, path: &Path) -> Result<()> {
    let record = ModelRecord {
        schema_version: SCHEMA_VERSION,
        model_type: MODEL_TYPE.to_string(),
        hyperparameters: model.params.clone(),
        scaling: model.scaling.clone(),
        plane_positive_a: PlaneRecord::from_plane(&model.plane_pos_a),
        plane_positive_b: PlaneRecord::from_plane(&model.plane_pos_b),
        plane_negative_a: PlaneRecord::from_plane(&model.plane_neg_a),
        plane_negative_b: PlaneRecord::from_plane(&model.plane_neg_b),
        reference_a: model.reference_a.as_ref().map(MatrixRecord::from_matrix),
        reference_b: model.reference_b.as_ref().map(MatrixRecord::from_matrix),
        diagnostics: model.diagnostics.clone(),
    };
    write_pretty_json(path, &record)
}

/// Loads a model written by [`save_model`].
pub fn load_model(path: &Path) -> Result<MpwtsvmModel> {
    let value = read_versioned_json(path, MODEL_TYPE)?;
    let record: ModelRecord = serde_json::from_value(value)
        .map_err(|e| format_error(path, format!("bad field: {e}")))?;
    let to_ref = |m: &Option<MatrixRecord>| -> Result<Option<DMatrix<f64>>> {
        match m {
            None => Ok(None),
            Some(r) => r
                .to_matrix()
                .map(Some)
                .ok_or_else(|| format_error(path, "reference matrix shape disagrees with data")),
        }
    };
    let model = MpwtsvmModel {
        params: record.hyperparameters,
        scaling: record.scaling,
        plane_pos_a: record.plane_positive_a.to_plane(),
        plane_pos_b: record.plane_positive_b.to_plane(),
        plane_neg_a: record.plane_negative_a.to_plane(),
        plane_neg_b: record.plane_negative_b.to_plane(),
        reference_a: to_ref(&record.reference_a)?,
        reference_b: to_ref(&record.reference_b)?,
        diagnostics: record.diagnostics,
    };
    model.params.validate().map_err(|e| match e {
        Error::InvalidParameter(detail) => format_error(path, detail),
        other => other,
    })?;
    Ok(model)
}
