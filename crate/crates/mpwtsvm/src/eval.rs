//! Accuracy, cross-validation, grid search, and rank-based comparison
//! statistics (Friedman test with the Nemenyi post-hoc critical difference).

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::baseline::{fit_wltsvm, predict_wltsvm_many};
use crate::data::{stratified_kfold, MultiViewDataset, View};
use crate::error::{Error, Result};
use crate::kernels::KernelSpec;
use crate::model::{Hyperparameters, MpwtsvmModel};

/// Fraction of exact label matches.
pub fn accuracy(predictions: &[i8], labels: &[i8]) -> Result<f64> {
    if predictions.is_empty() {
        return Err(Error::InvalidParameter(
            "accuracy of an empty prediction set is undefined".into(),
        ));
    }
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch {
            context: "accuracy inputs",
            expected: format!("{} labels", predictions.len()),
            found: format!("{} labels", labels.len()),
        });
    }
    let hits = predictions
        .iter()
        .zip(labels)
        .filter(|(p, y)| p == y)
        .count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// Accuracies of the three decision rules on one fold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldStats {
    pub view_a: f64,
    pub view_b: f64,
    pub combined: f64,
}

/// Cross-validation outcome: per-fold accuracies plus their mean and
/// sample standard deviation, for each decision rule.
#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub folds: Vec<FoldStats>,
    pub mean: FoldStats,
    pub std: FoldStats,
}

fn sample_std(values: &[f64], mean: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

fn summarize(folds: Vec<FoldStats>) -> CvReport {
    let pick = |f: fn(&FoldStats) -> f64| -> (f64, f64) {
        let vals: Vec<f64> = folds.iter().map(f).collect();
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        (mean, sample_std(&vals, mean))
    };
    let (mean_a, std_a) = pick(|f| f.view_a);
    let (mean_b, std_b) = pick(|f| f.view_b);
    let (mean_c, std_c) = pick(|f| f.combined);
    CvReport {
        folds,
        mean: FoldStats {
            view_a: mean_a,
            view_b: mean_b,
            combined: mean_c,
        },
        std: FoldStats {
            view_a: std_a,
            view_b: std_b,
            combined: std_c,
        },
    }
}

/// Stratified k-fold cross-validation of the multi-view model.
///
/// Each fold scales on its training split only, fits there, and evaluates
/// all three decision rules on the raw held-out rows. Folds run in
/// parallel; results are assembled in fold order, so the report is
/// deterministic for a given `(ds, params, folds, seed)` regardless of
/// thread count.
pub fn cross_validate(
    ds: &MultiViewDataset,
    params: &Hyperparameters,
    folds: usize,
    seed: u64,
) -> Result<CvReport> {
    params.validate()?;
    let splits = stratified_kfold(ds, folds, seed)?;
    let fold_stats: Result<Vec<FoldStats>> = splits
        .par_iter()
        .map(|(train_rows, test_rows)| {
            let train = ds.subset(train_rows);
            let test = ds.subset(test_rows);
            let model = MpwtsvmModel::fit(&train, params)?;
            let labels = &test.labels;
            Ok(FoldStats {
                view_a: accuracy(&model.predict_view_many(&test.view_a, View::A)?, labels)?,
                view_b: accuracy(&model.predict_view_many(&test.view_b, View::B)?, labels)?,
                combined: accuracy(
                    &model.predict_combined_many(&test.view_a, &test.view_b)?,
                    labels,
                )?,
            })
        })
        .collect();
    Ok(summarize(fold_stats?))
}

/// Single-accuracy cross-validation report for the one-view baseline.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleViewCvReport {
    pub folds: Vec<f64>,
    pub mean: f64,
    pub std: f64,
}

/// Stratified k-fold cross-validation of the single-view baseline on one
/// view of the dataset. Uses the same fold partition as [`cross_validate`]
/// for the same `(folds, seed)`, so the two reports are comparable.
pub fn cross_validate_wltsvm(
    ds: &MultiViewDataset,
    view: View,
    c: f64,
    k: usize,
    kernel: Option<&KernelSpec>,
    folds: usize,
    seed: u64,
) -> Result<SingleViewCvReport> {
    let splits = stratified_kfold(ds, folds, seed)?;
    let fold_acc: Result<Vec<f64>> = splits
        .par_iter()
        .map(|(train_rows, test_rows)| {
            let train = ds.subset(train_rows);
            let test = ds.subset(test_rows);
            let x = match view {
                View::A => &train.view_a,
                View::B => &train.view_b,
            };
            let pos = train.class_indices(1);
            let neg = train.class_indices(-1);
            let x_pos = x.select_rows(pos.iter());
            let x_neg = x.select_rows(neg.iter());
            let model = fit_wltsvm(&x_pos, &x_neg, c, k, kernel.cloned())?;
            let test_x = match view {
                View::A => &test.view_a,
                View::B => &test.view_b,
            };
            accuracy(&predict_wltsvm_many(&model, test_x)?, &test.labels)
        })
        .collect();
    let folds_acc = fold_acc?;
    let mean = folds_acc.iter().sum::<f64>() / folds_acc.len() as f64;
    let std = sample_std(&folds_acc, mean);
    Ok(SingleViewCvReport {
        folds: folds_acc,
        mean,
        std,
    })
}

/// Hyperparameter grid: penalties are tied across all six slots, gamma is
/// shared by both directions, and `sigmas` applies only with `use_rbf`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub penalties: Vec<f64>,
    pub gammas: Vec<f64>,
    pub sigmas: Vec<f64>,
    pub ks: Vec<usize>,
    pub use_rbf: bool,
    /// Apply the slack-diagonal lift to every configuration.
    pub convexify: bool,
}

/// `10^-3 .. 10^3` in decade steps.
fn decade_grid() -> Vec<f64> {
    (-3..=3).map(|e| 10f64.powi(e)).collect()
}

impl GridSpec {
    /// The standard preset: penalties and gammas from `10^-3..10^3`,
    /// sigmas likewise (RBF mode), neighbor counts {3, 5, 7, 9, 11}.
    pub fn default_preset(use_rbf: bool) -> Self {
        Self {
            penalties: decade_grid(),
            gammas: decade_grid(),
            sigmas: decade_grid(),
            ks: vec![3, 5, 7, 9, 11],
            use_rbf,
            convexify: false,
        }
    }

    /// Number of configurations [`Self::configurations`] enumerates.
    pub fn len(&self) -> usize {
        let sigma_count = if self.use_rbf { self.sigmas.len() } else { 1 };
        self.penalties.len() * self.gammas.len() * sigma_count * self.ks.len()
    }

    /// True when the grid enumerates nothing.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Materializes the Cartesian product in the documented order:
    /// penalty (outermost), then gamma, then sigma, then k (innermost).
    pub fn configurations(&self) -> Vec<Hyperparameters> {
        let mut out = Vec::with_capacity(self.len());
        let sigmas: Vec<Option<f64>> = if self.use_rbf {
            self.sigmas.iter().map(|&s| Some(s)).collect()
        } else {
            vec![None]
        };
        for &penalty in &self.penalties {
            for &gamma in &self.gammas {
                for &sigma in &sigmas {
                    for &k in &self.ks {
                        let mut p = Hyperparameters::tied(penalty, gamma, k);
                        p.kernel = sigma.map(|s| KernelSpec::Rbf { sigma: s });
                        p.convexify = self.convexify;
                        out.push(p);
                    }
                }
            }
        }
        out
    }
}

/// Grid-search outcome: the winning configuration, its report, and the
/// full per-configuration reports in enumeration order.
#[derive(Debug, Clone)]
pub struct GridSearchOutcome {
    pub best: Hyperparameters,
    /// Position of the winner in the grid's enumeration order.
    pub best_index: usize,
    pub best_report: CvReport,
    /// One report per configuration, in enumeration order.
    pub reports: Vec<CvReport>,
    /// Total configurations evaluated.
    pub evaluated: usize,
}

/// Exhaustive search over the grid by mean combined CV accuracy.
///
/// All configurations share one fold partition (derived from `seed`), run
/// in parallel, and are compared in enumeration order: on ties the
/// earliest configuration wins, so the result is independent of thread
/// count.
pub fn grid_search(
    ds: &MultiViewDataset,
    grid: &GridSpec,
    folds: usize,
    seed: u64,
) -> Result<GridSearchOutcome> {
    let configurations = grid.configurations();
    if configurations.is_empty() {
        return Err(Error::InvalidParameter(
            "grid search needs at least one configuration".into(),
        ));
    }
    let reports: Result<Vec<CvReport>> = configurations
        .par_iter()
        .map(|params| cross_validate(ds, params, folds, seed))
        .collect();
    let reports = reports?;
    let mut best_index = 0;
    for (i, report) in reports.iter().enumerate() {
        if report.mean.combined > reports[best_index].mean.combined {
            best_index = i;
        }
    }
    Ok(GridSearchOutcome {
        best: configurations[best_index].clone(),
        best_index,
        best_report: reports[best_index].clone(),
        evaluated: configurations.len(),
        reports,
    })
}

/// Accuracy matrix turned into per-dataset ranks and average ranks.
#[derive(Debug, Clone, PartialEq)]
pub struct RankTable {
    /// N datasets × k algorithms, as given.
    pub accuracies: DMatrix<f64>,
    /// Real-valued ranks: best accuracy gets rank 1; ties share the
    /// average of their positions.
    pub ranks: DMatrix<f64>,
    /// Column means of `ranks`.
    pub average_ranks: Vec<f64>,
}

/// Ranks algorithms per dataset by descending accuracy with tie-averaging.
pub fn average_ranks(accuracies: &DMatrix<f64>) -> Result<RankTable> {
    let (n, k) = accuracies.shape();
    if n < 1 || k < 2 {
        return Err(Error::InvalidParameter(format!(
            "ranking needs at least 1 dataset and 2 algorithms, got {n}x{k}"
        )));
    }
    let mut ranks = DMatrix::zeros(n, k);
    for row in 0..n {
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| {
            accuracies[(row, b)]
                .total_cmp(&accuracies[(row, a)])
                .then(a.cmp(&b))
        });
        // Walk tie groups of equal accuracy; each member gets the average
        // of the 1-based positions the group spans.
        let mut start = 0;
        while start < k {
            let mut end = start + 1;
            while end < k
                && accuracies[(row, order[end])] == accuracies[(row, order[start])]
            {
                end += 1;
            }
            let avg = (start + 1..=end).sum::<usize>() as f64 / (end - start) as f64;
            for &col in &order[start..end] {
                ranks[(row, col)] = avg;
            }
            start = end;
        }
    }
    let average_ranks = (0..k)
        .map(|j| ranks.column(j).sum() / n as f64)
        .collect();
    Ok(RankTable {
        accuracies: accuracies.clone(),
        ranks,
        average_ranks,
    })
}

/// The rank-based omnibus statistic
/// `χ² = 12N/(k(k+1)) · (Σ R_j² − k(k+1)²/4)`.
pub fn friedman_statistic(average_ranks: &[f64], n_datasets: usize, k: usize) -> Result<f64> {
    if k < 2 || n_datasets < 1 {
        return Err(Error::InvalidParameter(format!(
            "the omnibus statistic needs k ≥ 2 and N ≥ 1, got k={k}, N={n_datasets}"
        )));
    }
    if average_ranks.len() != k {
        return Err(Error::DimensionMismatch {
            context: "average ranks",
            expected: format!("{k} entries"),
            found: format!("{} entries", average_ranks.len()),
        });
    }
    let kf = k as f64;
    let nf = n_datasets as f64;
    let sum_sq: f64 = average_ranks.iter().map(|r| r * r).sum();
    Ok(12.0 * nf / (kf * (kf + 1.0)) * (sum_sq - kf * (kf + 1.0) * (kf + 1.0) / 4.0))
}

/// Post-hoc critical difference `CD = q_α·√(k(k+1)/(6N))`: two algorithms
/// differ significantly when their average ranks differ by more than this.
pub fn nemenyi_cd(k: usize, n_datasets: usize, q_alpha: f64) -> Result<f64> {
    if k < 2 || n_datasets < 1 {
        return Err(Error::InvalidParameter(format!(
            "the critical difference needs k ≥ 2 and N ≥ 1, got k={k}, N={n_datasets}"
        )));
    }
    if !(q_alpha >= 0.0 && q_alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "q_alpha must be a nonnegative real, got {q_alpha}"
        )));
    }
    let kf = k as f64;
    Ok(q_alpha * (kf * (kf + 1.0) / (6.0 * n_datasets as f64)).sqrt())
}

/// Studentized-range constants at significance 0.05 for k = 2..=10
/// algorithms (index 0 ↔ k = 2).
pub const NEMENYI_Q_05: [f64; 9] = [
    1.960, 2.343, 2.569, 2.728, 2.850, 2.949, 3.031, 3.102, 3.164,
];

/// Looks up the 0.05-level studentized-range constant for `k` algorithms.
pub fn nemenyi_q_05(k: usize) -> Result<f64> {
    if (2..=10).contains(&k) {
        Ok(NEMENYI_Q_05[k - 2])
    } else {
        Err(Error::InvalidParameter(format!(
            "built-in q table covers 2..=10 algorithms, got {k}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic::two_view_blobs;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn accuracy_counts_matches() {
        assert_eq!(accuracy(&[1, -1, 1], &[1, -1, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[1, -1], &[-1, 1]).unwrap(), 0.0);
        assert_eq!(accuracy(&[1, 1, -1, -1], &[1, 1, -1, 1]).unwrap(), 0.75);
        assert!(accuracy(&[], &[]).is_err());
        assert!(accuracy(&[1], &[1, -1]).is_err());
    }

    #[test]
    fn cross_validation_is_perfect_on_separable_blobs() {
        let ds = two_view_blobs(50, 4.0, 0.3, 23);
        let report = cross_validate(&ds, &Hyperparameters::default(), 5, 7).unwrap();
        assert_eq!(report.folds.len(), 5);
        assert_eq!(report.mean.combined, 1.0);
        assert_eq!(report.std.combined, 0.0);
    }

    #[test]
    fn cross_validation_is_deterministic_per_seed() {
        let ds = two_view_blobs(40, 2.0, 0.45, 29);
        let a = cross_validate(&ds, &Hyperparameters::default(), 4, 11).unwrap();
        let b = cross_validate(&ds, &Hyperparameters::default(), 4, 11).unwrap();
        assert_eq!(a, b);
        let c = cross_validate(&ds, &Hyperparameters::default(), 4, 12).unwrap();
        // A different seed shuffles folds differently; the report may or
        // may not coincide numerically, but the partition differs, so at
        // minimum the computation must still succeed.
        assert_eq!(c.folds.len(), 4);
    }

    #[test]
    fn baseline_cross_validation_matches_fold_partition() {
        let ds = two_view_blobs(40, 4.0, 0.3, 31);
        let report = cross_validate_wltsvm(&ds, View::A, 1.0, 5, None, 4, 11).unwrap();
        assert_eq!(report.folds.len(), 4);
        assert!(report.mean >= 0.95);
    }

    #[test]
    fn preset_grid_sizes_match_the_documented_counts() {
        assert_eq!(GridSpec::default_preset(true).len(), 7 * 7 * 7 * 5);
        assert_eq!(GridSpec::default_preset(true).configurations().len(), 1715);
        assert_eq!(GridSpec::default_preset(false).len(), 7 * 7 * 5);
    }

    #[test]
    fn grid_enumeration_order_is_penalty_gamma_sigma_k() {
        let grid = GridSpec {
            penalties: vec![1.0, 2.0],
            gammas: vec![0.5, 1.5],
            sigmas: vec![0.1],
            ks: vec![3, 5],
            use_rbf: true,
            convexify: false,
        };
        let configs = grid.configurations();
        assert_eq!(configs.len(), 8);
        // k varies fastest…
        assert_eq!(configs[0].k, 3);
        assert_eq!(configs[1].k, 5);
        assert_eq!(configs[0].gamma, 0.5);
        // …then gamma…
        assert_eq!(configs[2].gamma, 1.5);
        assert_eq!(configs[2].c_a, 1.0);
        // …then penalty (outermost).
        assert_eq!(configs[4].c_a, 2.0);
        assert!(configs.iter().all(|c| c.kernel.is_some()));
        assert_eq!(configs[0].gamma2, configs[0].gamma);
        assert_eq!(configs[0].c_coupling2, configs[0].c_a);
    }

    #[test]
    fn singleton_grid_returns_its_only_point() {
        let ds = two_view_blobs(30, 4.0, 0.3, 37);
        let grid = GridSpec {
            penalties: vec![2.0],
            gammas: vec![0.5],
            sigmas: vec![],
            ks: vec![3],
            use_rbf: false,
            convexify: false,
        };
        let outcome = grid_search(&ds, &grid, 3, 5).unwrap();
        assert_eq!(outcome.evaluated, 1);
        assert_eq!(outcome.best_index, 0);
        assert_eq!(outcome.best.c_a, 2.0);
        assert_eq!(outcome.best.gamma, 0.5);
        assert_eq!(outcome.best.k, 3);
        assert!(outcome.best.kernel.is_none());
    }

    #[test]
    fn equal_configurations_tie_to_the_earliest() {
        let ds = two_view_blobs(30, 4.0, 0.3, 41);
        // Two identical penalty values make configs 0 and 1 byte-identical,
        // so their reports tie exactly.
        let grid = GridSpec {
            penalties: vec![1.0, 1.0],
            gammas: vec![1.0],
            sigmas: vec![],
            ks: vec![5],
            use_rbf: false,
            convexify: false,
        };
        let outcome = grid_search(&ds, &grid, 3, 5).unwrap();
        assert_eq!(outcome.evaluated, 2);
        assert_eq!(outcome.best_index, 0);
    }

    #[test]
    fn grid_search_is_exhaustive_on_a_tiny_grid() {
        let ds = two_view_blobs(24, 1.5, 0.5, 43);
        let grid = GridSpec {
            penalties: vec![0.1, 1.0],
            gammas: vec![1.0],
            sigmas: vec![],
            ks: vec![3, 5],
            use_rbf: false,
            convexify: false,
        };
        let outcome = grid_search(&ds, &grid, 3, 9).unwrap();
        for params in grid.configurations() {
            let report = cross_validate(&ds, &params, 3, 9).unwrap();
            assert!(
                outcome.best_report.mean.combined >= report.mean.combined,
                "missed a better grid point"
            );
        }
    }

    #[test]
    fn ranks_follow_descending_accuracy() {
        let acc = DMatrix::from_row_slice(2, 2, &[0.9, 0.8, 0.7, 0.6]);
        let table = average_ranks(&acc).unwrap();
        assert_eq!(table.ranks, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 1.0, 2.0]));
        assert_eq!(table.average_ranks, vec![1.0, 2.0]);
    }

    #[test]
    fn tied_accuracies_share_averaged_ranks() {
        let acc = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        let table = average_ranks(&acc).unwrap();
        assert_eq!(table.ranks[(0, 0)], 1.5);
        assert_eq!(table.ranks[(0, 1)], 1.5);

        let acc = DMatrix::from_row_slice(1, 3, &[0.9, 0.9, 0.1]);
        let table = average_ranks(&acc).unwrap();
        assert_eq!(table.ranks[(0, 0)], 1.5);
        assert_eq!(table.ranks[(0, 1)], 1.5);
        assert_eq!(table.ranks[(0, 2)], 3.0);
    }

    #[test]
    fn rank_validation_rejects_degenerate_shapes() {
        assert!(average_ranks(&DMatrix::from_row_slice(1, 1, &[0.5])).is_err());
        assert!(average_ranks(&DMatrix::zeros(0, 3)).is_err());
    }

    #[test]
    fn omnibus_statistic_hand_cases() {
        // Two algorithms, two datasets, ranks always (1, 2).
        assert_relative_eq!(
            friedman_statistic(&[1.0, 2.0], 2, 2).unwrap(),
            2.0,
            max_relative = 1e-15
        );
        // All ranks equal: the null value 0.
        assert_relative_eq!(
            friedman_statistic(&[2.5, 2.5, 2.5, 2.5], 9, 4).unwrap(),
            0.0,
            epsilon = 1e-12
        );
        assert!(friedman_statistic(&[1.0], 2, 1).is_err());
        assert!(friedman_statistic(&[1.0, 2.0, 3.0], 2, 2).is_err());
    }

    #[test]
    fn published_seven_algorithm_ranks_reproduce_the_statistic() {
        let ranks = [6.678, 3.011, 5.500, 5.756, 2.678, 2.911, 1.467];
        let chi = friedman_statistic(&ranks, 45, 7).unwrap();
        assert!(
            (219.0..=225.0).contains(&chi),
            "statistic {chi} outside the tolerance band"
        );
        let cd = nemenyi_cd(7, 45, nemenyi_q_05(7).unwrap()).unwrap();
        assert!((cd - 1.343).abs() <= 0.001, "critical difference {cd}");
    }

    #[test]
    fn omnibus_statistic_is_permutation_invariant() {
        let ranks = [6.678, 3.011, 5.500, 5.756, 2.678, 2.911, 1.467];
        let mut permuted = ranks;
        permuted.swap(0, 6);
        permuted.swap(2, 4);
        // Mathematically identical; summation order may differ by rounding.
        assert_relative_eq!(
            friedman_statistic(&ranks, 45, 7).unwrap(),
            friedman_statistic(&permuted, 45, 7).unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn critical_difference_scales_with_q_and_n() {
        assert_eq!(nemenyi_cd(7, 45, 0.0).unwrap(), 0.0);
        let base = nemenyi_cd(5, 20, 2.728).unwrap();
        let doubled = nemenyi_cd(5, 40, 2.728).unwrap();
        assert_relative_eq!(base / doubled, 2f64.sqrt(), max_relative = 1e-12);
        assert!(nemenyi_cd(1, 45, 2.0).is_err());
        assert!(nemenyi_cd(7, 0, 2.0).is_err());
        assert!(nemenyi_cd(7, 45, f64::NAN).is_err());
        assert!(nemenyi_q_05(11).is_err());
        assert_eq!(nemenyi_q_05(2).unwrap(), 1.960);
    }

    proptest! {
        #[test]
        fn rank_rows_always_sum_to_k_times_k_plus_1_halves(
            n in 1usize..6,
            k in 2usize..7,
            seed in any::<u64>(),
        ) {
            // Quantized accuracies force frequent ties.
            let mut state = seed;
            let mut next = || {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % 5) as f64 / 4.0
            };
            let acc = DMatrix::from_fn(n, k, |_, _| next());
            let table = average_ranks(&acc).unwrap();
            let expected = (k * (k + 1)) as f64 / 2.0;
            for row in 0..n {
                let sum: f64 = (0..k).map(|j| table.ranks[(row, j)]).sum();
                prop_assert!((sum - expected).abs() < 1e-9);
            }
            // The omnibus statistic over any real rank table is nonnegative.
            let chi = friedman_statistic(&table.average_ranks, n, k).unwrap();
            prop_assert!(chi >= -1e-9);
        }
    }
}
