//! Assembly of the two coupled dual programs behind a trained model.
//!
//! Each binary problem is solved twice, once per *direction*: the positive
//! direction fits the plane pair that hugs the positive class and pushes the
//! negative class beyond unit distance, the negative direction mirrors the
//! roles. A direction's dual stacks six equally sized variable blocks
//! `π = (αᴬ, αᴮ, λᴬ, λᴮ, ξᴬ, ξᴮ)`, one entry per *retained* sample of the
//! constraint class:
//!
//! * `αᵛ` — multipliers of the unit-margin constraints in view `v`,
//! * `λᵛ` — multipliers of the cross-view slack bounds,
//! * `ξᵛ` — the (nonnegative) slack values themselves, which enter the dual
//!   as variables because the two views' slacks are penalised through their
//!   product.
//!
//! The quadratic blocks are `H_v = Z_v G_v Z_vᵀ`, where `Z_v` holds the
//! retained constraint-class rows of view `v` (augmented with a bias column
//! or mapped through the kernel), masked by that view's neighbourhood
//! indicator, and `G_v` is the regularized inverse of the degree-weighted
//! proximity matrix of the *own* class. The slack product contributes the
//! indefinite off-diagonal block `c·I` between the two slack blocks — the
//! assembled matrix therefore has smallest eigenvalue exactly `−c`, which
//! [`assemble_dual`] can optionally shift away (`convexify`).

use nalgebra::{DMatrix, DVector};

use super::{regularized_inverse, QpProblem};
use crate::data::MultiViewDataset;
use crate::error::{Error, Result};
use crate::graphs::WeightGraphs;
use crate::kernels::{augmented_kernel_block, KernelSpec};
use crate::model::Hyperparameters;

/// Which of the two plane pairs a dual program determines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualDirection {
    /// Planes close to the positive class; constraints over negative samples.
    Positive,
    /// Planes close to the negative class; constraints over positive samples.
    Negative,
}

/// Per-view feature rows split by class label.
#[derive(Debug, Clone)]
pub struct ClassSplit {
    pub pos_a: DMatrix<f64>,
    pub neg_a: DMatrix<f64>,
    pub pos_b: DMatrix<f64>,
    pub neg_b: DMatrix<f64>,
}

fn select_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

impl ClassSplit {
    /// Splits a dataset's views by label, requiring both classes present.
    pub fn from_dataset(ds: &MultiViewDataset) -> Result<Self> {
        let pos = ds.class_indices(1);
        let neg = ds.class_indices(-1);
        for (label, indices) in [(1i8, &pos), (-1i8, &neg)] {
            if indices.is_empty() {
                return Err(Error::ClassTooSmall {
                    label,
                    size: 0,
                    required: 1,
                    context: "plane-pair training",
                });
            }
        }
        Ok(Self {
            pos_a: select_rows(&ds.view_a, &pos),
            neg_a: select_rows(&ds.view_a, &neg),
            pos_b: select_rows(&ds.view_b, &pos),
            neg_b: select_rows(&ds.view_b, &neg),
        })
    }
}

/// Design rows entering the dual: raw features with a trailing bias column,
/// or kernel evaluations against the view's full training set plus the bias.
#[derive(Debug, Clone)]
pub struct DesignMatrices {
    pub pos_a: DMatrix<f64>,
    pub neg_a: DMatrix<f64>,
    pub pos_b: DMatrix<f64>,
    pub neg_b: DMatrix<f64>,
}

pub(crate) fn append_bias_column(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(m.nrows(), m.ncols() + 1);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out.column_mut(m.ncols()).fill(1.0);
    out
}

pub(crate) fn stack_rows(top: &DMatrix<f64>, bottom: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), (top.nrows(), top.ncols())).copy_from(top);
    out.view_mut((top.nrows(), 0), (bottom.nrows(), bottom.ncols()))
        .copy_from(bottom);
    out
}

impl DesignMatrices {
    /// Builds the four design blocks for a split.
    ///
    /// Without a kernel each block is the raw rows with a bias column. With
    /// one, rows are kernel evaluations against the view's reference set
    /// (positive rows stacked above negative rows) plus the bias column.
    pub fn build(split: &ClassSplit, kernel: Option<&KernelSpec>) -> Result<Self> {
        match kernel {
            None => Ok(Self {
                pos_a: append_bias_column(&split.pos_a),
                neg_a: append_bias_column(&split.neg_a),
                pos_b: append_bias_column(&split.pos_b),
                neg_b: append_bias_column(&split.neg_b),
            }),
            Some(spec) => {
                let ref_a = stack_rows(&split.pos_a, &split.neg_a);
                let ref_b = stack_rows(&split.pos_b, &split.neg_b);
                Ok(Self {
                    pos_a: augmented_kernel_block(&split.pos_a, &ref_a, spec)?,
                    neg_a: augmented_kernel_block(&split.neg_a, &ref_a, spec)?,
                    pos_b: augmented_kernel_block(&split.pos_b, &ref_b, spec)?,
                    neg_b: augmented_kernel_block(&split.neg_b, &ref_b, spec)?,
                })
            }
        }
    }
}

/// Neighbourhood graphs for both classes in both views.
#[derive(Debug, Clone)]
pub struct GraphSet {
    /// Own class = positive, view A (degrees of positives, indicator over negatives).
    pub pos_a: WeightGraphs,
    /// Own class = negative, view A.
    pub neg_a: WeightGraphs,
    /// Own class = positive, view B.
    pub pos_b: WeightGraphs,
    /// Own class = negative, view B.
    pub neg_b: WeightGraphs,
}

impl GraphSet {
    /// Builds all four graphs from a (scaled) dataset.
    ///
    /// Graphs always use the raw feature rows, never kernelized ones: for
    /// the distance orderings involved, the kernel map is monotone, so the
    /// neighbour sets would not change.
    pub fn build(ds: &MultiViewDataset, k: usize) -> Result<Self> {
        let split = ClassSplit::from_dataset(ds)?;
        Ok(Self {
            pos_a: WeightGraphs::build(&split.pos_a, &split.neg_a, k)?,
            neg_a: WeightGraphs::build(&split.neg_a, &split.pos_a, k)?,
            pos_b: WeightGraphs::build(&split.pos_b, &split.neg_b, k)?,
            neg_b: WeightGraphs::build(&split.neg_b, &split.pos_b, k)?,
        })
    }
}

/// One direction's assembled dual together with everything needed to map a
/// dual solution back to the two hyperplanes.
#[derive(Debug, Clone)]
pub struct DualProblem {
    /// The positive-variable quadratic program over the six stacked blocks.
    pub qp: QpProblem,
    pub direction: DualDirection,
    /// Indices (into the constraint class) of the retained samples. Each of
    /// the six blocks has one entry per element of `kept`, in this order.
    pub kept: Vec<usize>,
    /// Size of the constraint class before pruning.
    pub constraint_class_size: usize,
    /// Regularized inverse of view A's weighted proximity matrix.
    pub g_a: DMatrix<f64>,
    /// Regularized inverse of view B's (gamma-scaled) proximity matrix.
    pub g_b: DMatrix<f64>,
    /// `Z_Aᵀ`: retained, indicator-masked design rows of view A, transposed.
    pub zt_a: DMatrix<f64>,
    /// `Z_Bᵀ`.
    pub zt_b: DMatrix<f64>,
    /// Ridge actually applied when inverting view A's proximity matrix.
    pub eps_a: f64,
    /// Ridge actually applied when inverting view B's proximity matrix.
    pub eps_b: f64,
}

impl DualProblem {
    /// Number of retained constraint-class samples (the per-block length).
    pub fn num_kept(&self) -> usize {
        self.kept.len()
    }

    /// Maps a dual vector to the augmented plane coefficients of both views.
    ///
    /// View A's plane is driven by `αᴬ − λᴮ`, view B's by `αᴮ − λᴬ`; the
    /// positive direction's stationarity conditions carry a minus sign, the
    /// negative direction's a plus.
    pub fn recover_planes(&self, pi: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let l = self.num_kept();
        if pi.len() != 6 * l {
            return Err(Error::DimensionMismatch {
                context: "dual solution length",
                expected: (6 * l).to_string(),
                found: pi.len().to_string(),
            });
        }
        let sign = match self.direction {
            DualDirection::Positive => -1.0,
            DualDirection::Negative => 1.0,
        };
        let mut drive_a = DVector::zeros(l);
        let mut drive_b = DVector::zeros(l);
        for i in 0..l {
            drive_a[i] = pi[i] - pi[3 * l + i]; // αᴬ − λᴮ
            drive_b[i] = pi[l + i] - pi[2 * l + i]; // αᴮ − λᴬ
        }
        let u_a = &self.g_a * (&self.zt_a * drive_a) * sign;
        let u_b = &self.g_b * (&self.zt_b * drive_b) * sign;
        Ok((u_a, u_b))
    }

    /// Plane-engagement ratio of a dual point: the curvature energy its
    /// planes carry, relative to the point's linear driving mass.
    ///
    /// Each view contributes the energy `(Zᵀd)ᵀ G (Zᵀd)` of its drive `d`
    /// (equivalently `‖w‖²` in the proximity metric); the returned value is
    /// the smaller of the two divided by `1 + eᵀαᴬ + eᵀαᴮ`. The program
    /// admits certified points whose drives lie in the data map's near-null
    /// space: both energies then vanish, the objective is carried entirely by
    /// the linear and slack terms, and the recovered "planes" are
    /// roundoff-sized noise with no classification geometry. Such points
    /// report ratios near machine epsilon, points that genuinely engage the
    /// plane terms report ratios orders of magnitude higher; the model layer
    /// uses this to decide when a certified point deserves a second opinion.
    pub fn plane_engagement(&self, pi: &DVector<f64>) -> Result<f64> {
        let l = self.num_kept();
        if pi.len() != 6 * l {
            return Err(Error::DimensionMismatch {
                context: "dual solution length",
                expected: (6 * l).to_string(),
                found: pi.len().to_string(),
            });
        }
        let energy = |g: &DMatrix<f64>, zt: &DMatrix<f64>, drive: &DVector<f64>| -> f64 {
            let y = zt * drive;
            (y.transpose() * g * &y)[(0, 0)]
        };
        let drive_a = DVector::from_fn(l, |i, _| pi[i] - pi[3 * l + i]);
        let drive_b = DVector::from_fn(l, |i, _| pi[l + i] - pi[2 * l + i]);
        let energy_a = energy(&self.g_a, &self.zt_a, &drive_a);
        let energy_b = energy(&self.g_b, &self.zt_b, &drive_b);
        let mass: f64 = pi.iter().take(2 * l).sum();
        Ok(energy_a.min(energy_b) / (1.0 + mass))
    }
}

/// `XᵀDX` with `D = diag(weights)`, mirrored exactly symmetric.
pub(crate) fn weighted_proximity(x: &DMatrix<f64>, weights: &DVector<f64>) -> DMatrix<f64> {
    let mut scaled = x.clone();
    for (i, mut row) in scaled.row_iter_mut().enumerate() {
        row.scale_mut(weights[i]);
    }
    let mut m = x.transpose() * scaled;
    symmetrize(&mut m);
    m
}

/// `Z G Zᵀ`, mirrored exactly symmetric.
pub(crate) fn sandwich(z: &DMatrix<f64>, g: &DMatrix<f64>) -> DMatrix<f64> {
    let mut m = z * g * z.transpose();
    symmetrize(&mut m);
    m
}

fn symmetrize(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in 0..i {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
}

/// Assembles one direction's dual program from a (scaled) dataset.
///
/// Samples of the constraint class that no own-class sample lists among its
/// `k` nearest opposing neighbours in *either* view are pruned from all six
/// blocks; within the retained set, each view's rows are additionally masked
/// by that view's own indicator, so a sample retained only through the other
/// view contributes no quadratic or linear term here. Pruning never changes
/// the optimizer restricted to retained coordinates — dropped coordinates
/// are optimal at zero because their objective and constraint entries
/// vanish.
///
/// With `convexify` the slack diagonal is lifted by `c + 1e-8`, making the
/// matrix positive semidefinite at the cost of solving a slightly different
/// (more tightly regularized) program.
pub fn assemble_dual(
    ds: &MultiViewDataset,
    graphs: &GraphSet,
    params: &Hyperparameters,
    direction: DualDirection,
) -> Result<DualProblem> {
    assemble_impl(ds, graphs, params, direction, true)
}

/// [`assemble_dual`] without the pruning step: every constraint-class
/// sample keeps its six coordinates, with zero rows and zero linear terms
/// where an indicator is 0. Exists to let tests and debugging runs verify
/// that pruning does not move the recovered planes.
pub fn assemble_dual_unpruned(
    ds: &MultiViewDataset,
    graphs: &GraphSet,
    params: &Hyperparameters,
    direction: DualDirection,
) -> Result<DualProblem> {
    assemble_impl(ds, graphs, params, direction, false)
}

fn assemble_impl(
    ds: &MultiViewDataset,
    graphs: &GraphSet,
    params: &Hyperparameters,
    direction: DualDirection,
    prune: bool,
) -> Result<DualProblem> {
    params.validate()?;
    let split = ClassSplit::from_dataset(ds)?;
    let designs = DesignMatrices::build(&split, params.kernel.as_ref())?;

    // Select the direction's roles: proximity over the own class, margin
    // constraints over the other.
    let (own_a, own_b, con_a, con_b, graph_a, graph_b) = match direction {
        DualDirection::Positive => (
            &designs.pos_a,
            &designs.pos_b,
            &designs.neg_a,
            &designs.neg_b,
            &graphs.pos_a,
            &graphs.pos_b,
        ),
        DualDirection::Negative => (
            &designs.neg_a,
            &designs.neg_b,
            &designs.pos_a,
            &designs.pos_b,
            &graphs.neg_a,
            &graphs.neg_b,
        ),
    };
    let (c_view_a, c_view_b, c_coupling, gamma) = match direction {
        DualDirection::Positive => (params.c_a, params.c_b, params.c_coupling, params.gamma),
        DualDirection::Negative => (params.c_a2, params.c_b2, params.c_coupling2, params.gamma2),
    };

    if graph_a.degrees.len() != own_a.nrows() || graph_b.degrees.len() != own_b.nrows() {
        return Err(Error::DimensionMismatch {
            context: "graph degrees vs own-class design rows",
            expected: format!("{} and {}", own_a.nrows(), own_b.nrows()),
            found: format!("{} and {}", graph_a.degrees.len(), graph_b.degrees.len()),
        });
    }
    let constraint_class_size = con_a.nrows();
    let f_a = &graph_a.opposing_indicator;
    let f_b = &graph_b.opposing_indicator;
    if f_a.len() != constraint_class_size || f_b.len() != constraint_class_size {
        return Err(Error::DimensionMismatch {
            context: "opposing indicator vs constraint-class size",
            expected: constraint_class_size.to_string(),
            found: format!("{} and {}", f_a.len(), f_b.len()),
        });
    }

    // Union pruning: keep a sample if either view's indicator retains it.
    if (0..constraint_class_size).all(|j| f_a[j] == 0.0 && f_b[j] == 0.0) {
        return Err(Error::NoSupportVectorCandidates);
    }
    let kept: Vec<usize> = (0..constraint_class_size)
        .filter(|&j| !prune || f_a[j] != 0.0 || f_b[j] != 0.0)
        .collect();
    let l = kept.len();

    // Z_v: retained constraint rows of view v, zeroed where view v's own
    // indicator is 0 (retained only through the other view).
    let mut z_a = DMatrix::zeros(l, con_a.ncols());
    let mut z_b = DMatrix::zeros(l, con_b.ncols());
    for (row, &j) in kept.iter().enumerate() {
        if f_a[j] != 0.0 {
            z_a.row_mut(row).copy_from(&con_a.row(j));
        }
        if f_b[j] != 0.0 {
            z_b.row_mut(row).copy_from(&con_b.row(j));
        }
    }

    let m_a = weighted_proximity(own_a, &graph_a.degrees);
    let (g_a, eps_a) = regularized_inverse(&m_a, params.eps_reg)?;
    let m_b = weighted_proximity(own_b, &graph_b.degrees) * gamma;
    let (g_b, eps_b) = regularized_inverse(&m_b, params.eps_reg)?;

    let h_a = sandwich(&z_a, &g_a);
    let h_b = sandwich(&z_b, &g_b);

    // Blocks: 0=αᴬ 1=αᴮ 2=λᴬ 3=λᴮ 4=ξᴬ 5=ξᴮ. View A terms are driven by
    // αᴬ−λᴮ, view B terms by αᴮ−λᴬ, and the slack product couples ξᴬξᴮ.
    let n = 6 * l;
    let mut h = DMatrix::zeros(n, n);
    let mut put = |bi: usize, bj: usize, block: &DMatrix<f64>, scale: f64| {
        for i in 0..l {
            for j in 0..l {
                h[(bi * l + i, bj * l + j)] = scale * block[(i, j)];
            }
        }
    };
    put(0, 0, &h_a, 1.0);
    put(3, 3, &h_a, 1.0);
    put(0, 3, &h_a, -1.0);
    put(3, 0, &h_a, -1.0);
    put(1, 1, &h_b, 1.0);
    put(2, 2, &h_b, 1.0);
    put(1, 2, &h_b, -1.0);
    put(2, 1, &h_b, -1.0);
    for i in 0..l {
        h[(4 * l + i, 5 * l + i)] = c_coupling;
        h[(5 * l + i, 4 * l + i)] = c_coupling;
    }
    if params.convexify {
        let lift = c_coupling + 1e-8;
        for i in 4 * l..6 * l {
            h[(i, i)] += lift;
        }
    }

    // Linear term: −1 on each view's α entry where that view retained the
    // sample itself, 0 elsewhere.
    let mut p = DVector::zeros(n);
    for (row, &j) in kept.iter().enumerate() {
        p[row] = -f_a[j];
        p[l + row] = -f_b[j];
    }

    // Row i:      αᴬᵢ + λᴬᵢ − c·ξᴮᵢ ≤ C for view A,
    // Row l + i:  αᴮᵢ + λᴮᵢ − c·ξᴬᵢ ≤ C for view B.
    let mut a_ineq = DMatrix::zeros(2 * l, n);
    let mut b = DVector::zeros(2 * l);
    for i in 0..l {
        a_ineq[(i, i)] = 1.0;
        a_ineq[(i, 2 * l + i)] = 1.0;
        a_ineq[(i, 5 * l + i)] = -c_coupling;
        b[i] = c_view_a;
        a_ineq[(l + i, l + i)] = 1.0;
        a_ineq[(l + i, 3 * l + i)] = 1.0;
        a_ineq[(l + i, 4 * l + i)] = -c_coupling;
        b[l + i] = c_view_b;
    }

    Ok(DualProblem {
        qp: QpProblem::new(h, p, a_ineq, b)?,
        direction,
        kept,
        constraint_class_size,
        g_a,
        g_b,
        zt_a: z_a.transpose(),
        zt_b: z_b.transpose(),
        eps_a,
        eps_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qp::min_eigenvalue_estimate;
    use approx::assert_relative_eq;

    /// 2 positives at 0 and 1, 2 negatives at 3 and 4, on a line, both views
    /// identical. With k = 1, each positive's nearest negative is 3, so only
    /// negative sample 0 (the point 3) is retained for the positive
    /// direction.
    fn line_dataset() -> MultiViewDataset {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 3.0, 4.0]);
        MultiViewDataset::new(x.clone(), x, vec![1, 1, -1, -1]).unwrap()
    }

    fn params() -> Hyperparameters {
        Hyperparameters {
            k: 1,
            ..Hyperparameters::default()
        }
    }

    #[test]
    fn shapes_and_bounds_follow_block_layout() {
        // k = 3 saturates, so both negatives are retained: l = 2.
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.c_a = 2.0;
        p.c_b = 0.5;
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(dual.kept, vec![0, 1]);
        assert_eq!(dual.constraint_class_size, 2);
        assert_eq!(dual.qp.h.shape(), (12, 12));
        assert_eq!(dual.qp.a_ineq.shape(), (4, 12));
        assert_eq!(
            dual.qp.b,
            DVector::from_column_slice(&[2.0, 2.0, 0.5, 0.5])
        );
        // Constraint rows: α + λ (same view) − c·(other view's slack).
        let l = 2;
        for i in 0..l {
            assert_eq!(dual.qp.a_ineq[(i, i)], 1.0);
            assert_eq!(dual.qp.a_ineq[(i, 2 * l + i)], 1.0);
            assert_eq!(dual.qp.a_ineq[(i, 5 * l + i)], -p.c_coupling);
            assert_eq!(dual.qp.a_ineq[(l + i, l + i)], 1.0);
            assert_eq!(dual.qp.a_ineq[(l + i, 3 * l + i)], 1.0);
            assert_eq!(dual.qp.a_ineq[(l + i, 4 * l + i)], -p.c_coupling);
        }
    }

    #[test]
    fn slack_coupling_block_is_scaled_identity() {
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.c_coupling = 1.75;
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        let l = dual.num_kept();
        for i in 0..l {
            for j in 0..l {
                let expected = if i == j { 1.75 } else { 0.0 };
                assert_eq!(dual.qp.h[(4 * l + i, 5 * l + j)], expected);
                assert_eq!(dual.qp.h[(5 * l + i, 4 * l + j)], expected);
            }
        }
        // Slack diagonal itself stays zero without convexification.
        for i in 4 * l..6 * l {
            assert_eq!(dual.qp.h[(i, i)], 0.0);
        }
    }

    #[test]
    fn hand_computed_quadratic_block() {
        // Positives at 0 and 1 with k = 1: complete graph, degrees (1, 1).
        // Augmented rows (0,1),(1,1) give M = [[1,1],[1,2]], whose exact
        // inverse is [[2,-1],[-1,1]]. The only retained negative is 3 with
        // augmented row (3,1), so H_A[0,0] = (3,1)·G·(3,1)ᵀ = 13.
        let ds = line_dataset();
        let p = params();
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(dual.kept, vec![0]);
        let l = 1;
        assert_eq!(dual.qp.h.shape(), (6 * l, 6 * l));
        assert_relative_eq!(dual.qp.h[(0, 0)], 13.0, max_relative = 1e-12);
        // Identical views with gamma = 1 give the same block for view B.
        assert_relative_eq!(dual.qp.h[(l, l)], 13.0, max_relative = 1e-12);
        // Cross blocks carry the negated block.
        assert_relative_eq!(dual.qp.h[(0, 3 * l)], -13.0, max_relative = 1e-12);
        assert_relative_eq!(dual.qp.h[(l, 2 * l)], -13.0, max_relative = 1e-12);
        // Linear term: both views retained the sample themselves.
        assert_eq!(dual.qp.p[0], -1.0);
        assert_eq!(dual.qp.p[l], -1.0);
        assert_eq!(dual.qp.p[2 * l], 0.0);
    }

    #[test]
    fn gamma_scales_view_b_inverse() {
        // With identical views, eps 0 and gamma = 2, view B's proximity is
        // doubled before inversion, so H_B = H_A / 2 exactly.
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.gamma = 2.0;
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        let l = dual.num_kept();
        for i in 0..l {
            for j in 0..l {
                assert_relative_eq!(
                    dual.qp.h[(i, j)],
                    2.0 * dual.qp.h[(l + i, l + j)],
                    max_relative = 1e-10
                );
            }
        }
        assert_eq!(dual.eps_a, 0.0);
        assert_eq!(dual.eps_b, 0.0);
    }

    #[test]
    fn negative_direction_mirrors_roles_and_penalties() {
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.c_a2 = 4.0;
        p.c_b2 = 8.0;
        p.c_coupling2 = 0.25;
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Negative).unwrap();
        // Constraint class is now the positive one (2 samples, saturated k).
        assert_eq!(dual.kept, vec![0, 1]);
        let l = 2;
        assert_eq!(
            dual.qp.b,
            DVector::from_column_slice(&[4.0, 4.0, 8.0, 8.0])
        );
        assert_eq!(dual.qp.h[(4 * l, 5 * l)], 0.25);
        assert_eq!(dual.qp.a_ineq[(0, 5 * l)], -0.25);
    }

    #[test]
    fn pruning_drops_unretained_samples_from_all_blocks() {
        // Negatives at 3 and 40: with k = 1 no positive lists 40, in either
        // (identical) view, so it is pruned everywhere.
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 3.0, 40.0]);
        let ds = MultiViewDataset::new(x.clone(), x, vec![1, 1, -1, -1]).unwrap();
        let p = params();
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(dual.kept, vec![0]);
        assert_eq!(dual.constraint_class_size, 2);
        assert_eq!(dual.qp.h.shape(), (6, 6));
        assert_eq!(dual.qp.a_ineq.shape(), (2, 6));
        assert_eq!(dual.zt_a.shape(), (2, 1));
    }

    #[test]
    fn unpruned_assembly_keeps_zeroed_rows_in_place() {
        let x = DMatrix::from_row_slice(4, 1, &[0.0, 1.0, 3.0, 40.0]);
        let ds = MultiViewDataset::new(x.clone(), x, vec![1, 1, -1, -1]).unwrap();
        let p = params();
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let full = assemble_dual_unpruned(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(full.kept, vec![0, 1]);
        assert_eq!(full.qp.h.shape(), (12, 12));
        // The unretained sample contributes nothing: zero design column,
        // zero linear term; only its box constraint rows remain.
        assert!(full.zt_a.column(1).iter().all(|&v| v == 0.0));
        assert_eq!(full.qp.p[1], 0.0);
    }

    #[test]
    fn all_zero_indicators_are_rejected() {
        // Defensive path: real graph builds always retain at least one
        // opposing sample, so force the condition by hand.
        let ds = line_dataset();
        let p = params();
        let mut graphs = GraphSet::build(&ds, p.k).unwrap();
        graphs.pos_a.opposing_indicator = DVector::zeros(2);
        graphs.pos_b.opposing_indicator = DVector::zeros(2);
        let err = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap_err();
        assert!(matches!(err, Error::NoSupportVectorCandidates), "{err:?}");
    }

    #[test]
    fn view_masks_zero_rows_retained_through_other_view() {
        // Hand-edit the indicators so sample 1 is retained only via view B:
        // its view-A design row must be zeroed, its view-A linear term 0.
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        let mut graphs = GraphSet::build(&ds, p.k).unwrap();
        graphs.pos_a.opposing_indicator = DVector::from_column_slice(&[1.0, 0.0]);
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(dual.kept, vec![0, 1]);
        // Column 1 of Z_Aᵀ (sample 1's view-A row) is all zeros.
        assert!(dual.zt_a.column(1).iter().all(|&v| v == 0.0));
        assert!(dual.zt_b.column(1).iter().any(|&v| v != 0.0));
        assert_eq!(dual.qp.p[1], 0.0); // view A's α has no pull on sample 1
        assert_eq!(dual.qp.p[dual.num_kept() + 1], -1.0); // view B's does
    }

    #[test]
    fn convexify_lifts_smallest_eigenvalue_to_nonnegative() {
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.c_coupling = 2.0;
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let plain = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_relative_eq!(
            min_eigenvalue_estimate(&plain.qp.h),
            -2.0,
            max_relative = 1e-6
        );
        p.convexify = true;
        let lifted = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        let l = lifted.num_kept();
        for i in 4 * l..6 * l {
            assert_eq!(lifted.qp.h[(i, i)], 2.0 + 1e-8);
        }
        assert!(min_eigenvalue_estimate(&lifted.qp.h) >= -1e-6);
    }

    #[test]
    fn kernel_mode_sizes_blocks_by_reference_set() {
        let ds = line_dataset();
        let mut p = params();
        p.k = 3;
        p.kernel = Some(KernelSpec::Rbf { sigma: 1.0 });
        let split = ClassSplit::from_dataset(&ds).unwrap();
        let designs = DesignMatrices::build(&split, p.kernel.as_ref()).unwrap();
        // 4 reference points + bias = 5 columns.
        assert_eq!(designs.pos_a.shape(), (2, 5));
        assert_eq!(designs.neg_a.shape(), (2, 5));
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        assert_eq!(dual.zt_a.shape(), (5, 2));
        assert_eq!(dual.qp.h.shape(), (12, 12));
    }

    #[test]
    fn recover_planes_maps_zero_to_zero_and_respects_sign() {
        let ds = line_dataset();
        let p = params();
        let graphs = GraphSet::build(&ds, p.k).unwrap();
        let dual = assemble_dual(&ds, &graphs, &p, DualDirection::Positive).unwrap();
        let l = dual.num_kept();
        let (u_a, u_b) = dual.recover_planes(&DVector::zeros(6 * l)).unwrap();
        assert!(u_a.iter().all(|&v| v == 0.0));
        assert!(u_b.iter().all(|&v| v == 0.0));

        // αᴬ = 1 alone: u_a = −G_A z_a, i.e. −G·(3,1)ᵀ = −(2·3−1, −3+1) = (−5, 2).
        let mut pi = DVector::zeros(6 * l);
        pi[0] = 1.0;
        let (u_a, u_b) = dual.recover_planes(&pi).unwrap();
        assert_relative_eq!(u_a[0], -5.0, max_relative = 1e-12);
        assert_relative_eq!(u_a[1], 2.0, max_relative = 1e-12);
        // View B is driven by αᴮ − λᴬ, both zero here.
        assert!(u_b.iter().all(|&v| v == 0.0));

        // λᴮ = 1 cancels αᴬ = 1 exactly.
        pi[3 * l] = 1.0;
        let (u_a, _) = dual.recover_planes(&pi).unwrap();
        assert!(u_a.iter().all(|&v| v.abs() < 1e-15));

        // The negative direction flips the sign.
        let dual_neg = assemble_dual(&ds, &graphs, &p, DualDirection::Negative).unwrap();
        let ln = dual_neg.num_kept();
        let mut pi_neg = DVector::zeros(6 * ln);
        pi_neg[0] = 1.0;
        let (v_a, _) = dual_neg.recover_planes(&pi_neg).unwrap();
        // Own class is now the negatives; retained positives drive the plane
        // with a positive sign, so the result is +G_neg · z-row.
        assert!(v_a[0] > 0.0 || v_a[1] > 0.0);
        let wrong_len = DVector::zeros(6 * ln + 1);
        assert!(dual_neg.recover_planes(&wrong_len).is_err());
    }

    #[test]
    fn missing_class_is_reported() {
        let x = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let ds = MultiViewDataset::new(x.clone(), x, vec![1, 1]).unwrap();
        let err = ClassSplit::from_dataset(&ds).unwrap_err();
        assert!(matches!(err, Error::ClassTooSmall { label: -1, .. }), "{err:?}");
    }
}
