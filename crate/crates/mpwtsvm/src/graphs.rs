//! KNN-based intra-class weight matrices, degree vectors, and inter-class
//! indicator vectors.
//!
//! The intra-class graph weights each sample of a class by how centrally it
//! sits among its own class (degree of a symmetrized k-nearest-neighbor
//! graph). The inter-class indicator marks opposing-class samples that are
//! k-nearest neighbors of at least one sample of the class; only those can
//! become support vectors, so the remaining constraint rows are pruned.
//!
//! Distances are Euclidean. Ties in the k-th-neighbor distance break toward
//! the lower sample index, which makes every output deterministic.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Graphs for one class within one view: symmetric binary adjacency over the
/// class's samples, its row-sum degree vector, and the binary indicator over
/// the opposing class's samples.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightGraphs {
    pub adjacency: DMatrix<f64>,
    pub degrees: DVector<f64>,
    pub opposing_indicator: DVector<f64>,
}

impl WeightGraphs {
    /// Builds all three pieces for one class.
    ///
    /// `own` are the class's samples, `opposing` the other class's; `k` is
    /// clamped as documented on [`intra_class_weights`] and
    /// [`inter_class_indicator`]. A singleton class gets the degenerate
    /// 1×1 zero adjacency with unit degree, so that its (single-sample)
    /// proximity term still participates in the objective.
    pub fn build(own: &DMatrix<f64>, opposing: &DMatrix<f64>, k: usize) -> Result<Self> {
        let (adjacency, degrees) = if own.nrows() == 1 {
            (DMatrix::zeros(1, 1), DVector::from_element(1, 1.0))
        } else {
            let w = intra_class_weights(own, k)?;
            let d = degree_vector(&w)?;
            (w, d)
        };
        Ok(Self {
            adjacency,
            degrees,
            opposing_indicator: inter_class_indicator(own, opposing, k)?,
        })
    }

    /// Indices of opposing-class samples with indicator 1.
    pub fn retained_opposing(&self) -> Vec<usize> {
        (0..self.opposing_indicator.len())
            .filter(|&j| self.opposing_indicator[j] != 0.0)
            .collect()
    }
}

fn squared_distance(x: &DMatrix<f64>, i: usize, y: &DMatrix<f64>, j: usize) -> f64 {
    (0..x.ncols())
        .map(|c| {
            let d = x[(i, c)] - y[(j, c)];
            d * d
        })
        .sum()
}

/// Indices of the `k` nearest rows of `candidates` to row `query` of `from`,
/// optionally excluding one candidate index (the query itself), ties broken
/// by lower index.
fn k_nearest(
    from: &DMatrix<f64>,
    query: usize,
    candidates: &DMatrix<f64>,
    exclude: Option<usize>,
    k: usize,
) -> Vec<usize> {
    let mut order: Vec<(f64, usize)> = (0..candidates.nrows())
        .filter(|&j| Some(j) != exclude)
        .map(|j| (squared_distance(from, query, candidates, j), j))
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    order.truncate(k);
    order.into_iter().map(|(_, j)| j).collect()
}

/// Symmetric binary KNN adjacency over one class's samples.
///
/// `W[i,j] = 1` iff `i` is among the `k` nearest samples of `j` or vice
/// versa (Euclidean distance, self excluded). `k` is clamped to the class
/// size minus one.
pub fn intra_class_weights(x: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::ClassTooSmall {
            label: 0,
            size: n,
            required: 2,
            context: "intra-class KNN graph",
        });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("neighbor count k must be ≥ 1".into()));
    }
    let k = k.min(n - 1);
    let mut w = DMatrix::zeros(n, n);
    for j in 0..n {
        for i in k_nearest(x, j, x, Some(j), k) {
            w[(i, j)] = 1.0;
            w[(j, i)] = 1.0;
        }
    }
    Ok(w)
}

/// Row sums of a symmetric binary adjacency matrix.
pub fn degree_vector(w: &DMatrix<f64>) -> Result<DVector<f64>> {
    if w.nrows() != w.ncols() {
        return Err(Error::DimensionMismatch {
            context: "degree vector",
            expected: "square matrix".into(),
            found: format!("{}×{}", w.nrows(), w.ncols()),
        });
    }
    Ok(DVector::from_iterator(
        w.nrows(),
        (0..w.nrows()).map(|i| w.row(i).sum()),
    ))
}

/// Binary vector over `x_other`: entry `j` is 1 iff opposing sample `j` is
/// among the `k` nearest opposing samples of at least one sample of
/// `x_own`. `k` is clamped to the opposing class size.
pub fn inter_class_indicator(
    x_own: &DMatrix<f64>,
    x_other: &DMatrix<f64>,
    k: usize,
) -> Result<DVector<f64>> {
    for (m, label) in [(x_own, 0i8), (x_other, 1)] {
        if m.nrows() == 0 {
            return Err(Error::ClassTooSmall {
                label,
                size: 0,
                required: 1,
                context: "inter-class indicator",
            });
        }
    }
    if k == 0 {
        return Err(Error::InvalidParameter("neighbor count k must be ≥ 1".into()));
    }
    if x_own.ncols() != x_other.ncols() {
        return Err(Error::DimensionMismatch {
            context: "inter-class indicator",
            expected: format!("{} features", x_own.ncols()),
            found: format!("{} features", x_other.ncols()),
        });
    }
    let k = k.min(x_other.nrows());
    let mut f = DVector::zeros(x_other.nrows());
    for i in 0..x_own.nrows() {
        for j in k_nearest(x_own, i, x_other, None, k) {
            f[j] = 1.0;
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(points: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(points.len(), 1, points)
    }

    #[test]
    fn path_graph_on_the_line() {
        // 2's nearest is 1 (tie between 0 and 2 for point 1 breaks to index
        // 0); 10's nearest is 2: union gives the path 0-1-2-3.
        let w = intra_class_weights(&line(&[0.0, 1.0, 2.0, 10.0]), 1).unwrap();
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[
                0.0, 1.0, 0.0, 0.0, //
                1.0, 0.0, 1.0, 0.0, //
                0.0, 1.0, 0.0, 1.0, //
                0.0, 0.0, 1.0, 0.0,
            ],
        );
        assert_eq!(w, expected);
        assert_eq!(
            degree_vector(&w).unwrap(),
            DVector::from_column_slice(&[1.0, 2.0, 2.0, 1.0])
        );
    }

    #[test]
    fn saturated_k_gives_complete_graph() {
        let x = DMatrix::from_row_slice(3, 2, &[0.0, 0.0, 1.0, 0.0, 5.0, 5.0]);
        for k in [2, 3, 10] {
            let w = intra_class_weights(&x, k).unwrap();
            let complete = DMatrix::from_fn(3, 3, |i, j| if i == j { 0.0 } else { 1.0 });
            assert_eq!(w, complete, "k={k}");
        }
        assert_eq!(
            degree_vector(&intra_class_weights(&x, 5).unwrap()).unwrap(),
            DVector::from_column_slice(&[2.0, 2.0, 2.0])
        );
    }

    #[test]
    fn identical_points_form_single_edge() {
        let w = intra_class_weights(&line(&[3.0, 3.0]), 1).unwrap();
        assert_eq!(w, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    }

    #[test]
    fn degree_of_zero_matrix_is_zero() {
        let d = degree_vector(&DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(d, DVector::zeros(3));
        assert!(degree_vector(&DMatrix::<f64>::zeros(2, 3)).is_err());
    }

    #[test]
    fn rejects_degenerate_classes() {
        assert!(intra_class_weights(&line(&[1.0]), 1).is_err());
        assert!(intra_class_weights(&DMatrix::<f64>::zeros(0, 1), 1).is_err());
        assert!(inter_class_indicator(&line(&[1.0]), &DMatrix::<f64>::zeros(0, 1), 1).is_err());
    }

    #[test]
    fn indicator_marks_near_boundary_samples() {
        let own = line(&[0.0, 1.0]);
        let other = line(&[2.0, 3.0, 10.0]);
        assert_eq!(
            inter_class_indicator(&own, &other, 2).unwrap(),
            DVector::from_column_slice(&[1.0, 1.0, 0.0])
        );
        // Saturated k marks everything.
        assert_eq!(
            inter_class_indicator(&own, &other, 3).unwrap(),
            DVector::from_column_slice(&[1.0, 1.0, 1.0])
        );
        assert_eq!(
            inter_class_indicator(&line(&[0.0]), &line(&[5.0, 6.0]), 1).unwrap(),
            DVector::from_column_slice(&[1.0, 0.0])
        );
    }

    #[test]
    fn singleton_class_gets_unit_degree() {
        let g = WeightGraphs::build(&line(&[4.0]), &line(&[0.0, 1.0]), 3).unwrap();
        assert_eq!(g.adjacency, DMatrix::zeros(1, 1));
        assert_eq!(g.degrees, DVector::from_element(1, 1.0));
        assert_eq!(g.opposing_indicator, DVector::from_element(2, 1.0));
        assert_eq!(g.retained_opposing(), vec![0, 1]);
    }

    /// Independent oracle: i neighbors j iff fewer than k candidates sit
    /// strictly closer to j in the (distance, index) lexicographic order.
    fn oracle_is_neighbor(x: &DMatrix<f64>, i: usize, j: usize, k: usize) -> bool {
        let d_ij = squared_distance(x, i, x, j);
        let closer = (0..x.nrows())
            .filter(|&l| l != j && l != i)
            .filter(|&l| {
                let d_lj = squared_distance(x, l, x, j);
                d_lj < d_ij || (d_lj == d_ij && l < i)
            })
            .count();
        closer < k
    }

    prop_compose! {
        fn arbitrary_points()(
            n in 2usize..12,
            dim in 1usize..4,
            seed in any::<u64>(),
        ) -> DMatrix<f64> {
            // Small integer grid so distance ties actually occur.
            let mut state = seed;
            DMatrix::from_fn(n, dim, |_, _| {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                ((state >> 33) % 7) as f64
            })
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(128))]

        #[test]
        fn adjacency_matches_counting_oracle(x in arbitrary_points(), k in 1usize..5) {
            let w = intra_class_weights(&x, k).unwrap();
            let k_eff = k.min(x.nrows() - 1);
            for i in 0..x.nrows() {
                for j in 0..x.nrows() {
                    let expected = i != j
                        && (oracle_is_neighbor(&x, i, j, k_eff)
                            || oracle_is_neighbor(&x, j, i, k_eff));
                    prop_assert_eq!(w[(i, j)] == 1.0, expected, "entry ({}, {})", i, j);
                }
            }
        }

        #[test]
        fn adjacency_is_symmetric_zero_diagonal_binary(x in arbitrary_points(), k in 1usize..6) {
            let w = intra_class_weights(&x, k).unwrap();
            prop_assert_eq!(&w, &w.transpose());
            for i in 0..w.nrows() {
                prop_assert_eq!(w[(i, i)], 0.0);
            }
            prop_assert!(w.iter().all(|&v| v == 0.0 || v == 1.0));
            // Degrees reach at least k when the class is big enough.
            if x.nrows() > k {
                let d = degree_vector(&w).unwrap();
                prop_assert!(d.iter().all(|&di| di >= k as f64), "degrees {:?}", d);
            }
        }

        #[test]
        fn growing_k_never_removes_edges_or_indicators(x in arbitrary_points(), k in 1usize..5) {
            let w_small = intra_class_weights(&x, k).unwrap();
            let w_big = intra_class_weights(&x, k + 1).unwrap();
            prop_assert!(w_small.iter().zip(w_big.iter()).all(|(&a, &b)| a <= b));

            let own = x.clone();
            let f_small = inter_class_indicator(&own, &x, k).unwrap();
            let f_big = inter_class_indicator(&own, &x, k + 1).unwrap();
            prop_assert!(f_small.iter().zip(f_big.iter()).all(|(&a, &b)| a <= b));
            prop_assert!(f_small.iter().all(|&v| v == 0.0 || v == 1.0));
        }

        #[test]
        fn repeated_calls_are_bit_identical(x in arbitrary_points(), k in 1usize..6) {
            prop_assert_eq!(
                intra_class_weights(&x, k).unwrap(),
                intra_class_weights(&x, k).unwrap()
            );
            prop_assert_eq!(
                inter_class_indicator(&x, &x, k).unwrap(),
                inter_class_indicator(&x, &x, k).unwrap()
            );
        }

        #[test]
        fn indicator_count_is_bounded(x in arbitrary_points(), k in 1usize..5) {
            let f = inter_class_indicator(&x, &x, k).unwrap();
            let marked = f.iter().filter(|&&v| v == 1.0).count();
            prop_assert!(marked <= x.nrows().min(k * x.nrows()));
            prop_assert!(marked >= 1, "every own sample marks at least one neighbor");
        }
    }
}
