//! One-vs-one reduction: a three-class two-view problem becomes three
//! binary problems, one per unordered class pair; prediction is a majority
//! vote with ties broken toward the smaller class id.
//!
//! Run with `cargo run --example multiclass_pairs`.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use mpwtsvm::data::{one_vs_one_pairs, MultiViewDataset};
use mpwtsvm::model::{Hyperparameters, MpwtsvmModel};

/// Three Gaussian classes per view, class `c` centered at angle 120°·c.
fn three_class_data(per_class: usize, seed: u64) -> (DMatrix<f64>, DMatrix<f64>, Vec<i64>) {
    let normal = Normal::new(0.0, 0.4).expect("valid noise");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = 3 * per_class;
    let mut view_a = DMatrix::zeros(n, 2);
    let mut view_b = DMatrix::zeros(n, 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = (i / per_class) as i64;
        let angle = 2.0 * std::f64::consts::PI * class as f64 / 3.0;
        // View B sees the same classes rotated by 60°.
        let angle_b = angle + std::f64::consts::PI / 3.0;
        view_a[(i, 0)] = 2.0 * angle.cos() + normal.sample(&mut rng);
        view_a[(i, 1)] = 2.0 * angle.sin() + normal.sample(&mut rng);
        view_b[(i, 0)] = 2.0 * angle_b.cos() + normal.sample(&mut rng);
        view_b[(i, 1)] = 2.0 * angle_b.sin() + normal.sample(&mut rng);
        labels.push(class);
    }
    (view_a, view_b, labels)
}

fn take_rows(m: &DMatrix<f64>, rows: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), m.ncols(), |i, j| m[(rows[i], j)])
}

fn main() -> mpwtsvm::Result<()> {
    let (train_a, train_b, train_labels) = three_class_data(30, 3001);
    let (test_a, test_b, test_labels) = three_class_data(60, 3002);

    // One binary model per unordered class pair.
    let pairs = one_vs_one_pairs(&train_labels)?;
    println!("{} classes → {} pairwise models", 3, pairs.len());

    let params = Hyperparameters::tied(1.0, 1.0, 5);
    let mut models = Vec::with_capacity(pairs.len());
    for pair in &pairs {
        let rows: Vec<usize> = pair
            .indices_a
            .iter()
            .chain(&pair.indices_b)
            .copied()
            .collect();
        let labels: Vec<i8> = rows
            .iter()
            .map(|&r| if train_labels[r] == pair.class_a { 1 } else { -1 })
            .collect();
        let sub = MultiViewDataset::new(
            take_rows(&train_a, &rows),
            take_rows(&train_b, &rows),
            labels,
        )?;
        let model = MpwtsvmModel::fit(&sub, &params)?;
        println!(
            "  {} vs {}: {} training samples",
            pair.class_a,
            pair.class_b,
            sub.len()
        );
        models.push(model);
    }

    // Majority vote across pairs; ties resolve to the smaller class id
    // because `votes` scans classes in ascending order.
    let mut correct = 0;
    for i in 0..test_labels.len() {
        let xa: Vec<f64> = test_a.row(i).iter().copied().collect();
        let xb: Vec<f64> = test_b.row(i).iter().copied().collect();
        let mut votes = std::collections::BTreeMap::new();
        for (pair, model) in pairs.iter().zip(&models) {
            let winner = if model.predict_combined(&xa, &xb)? == 1 {
                pair.class_a
            } else {
                pair.class_b
            };
            *votes.entry(winner).or_insert(0usize) += 1;
        }
        let mut decided = (i64::MAX, 0usize);
        for (&class, &count) in &votes {
            if count > decided.1 {
                decided = (class, count);
            }
        }
        let decided = decided.0;
        if decided == test_labels[i] {
            correct += 1;
        }
    }
    println!(
        "test accuracy: {:.4} ({} of {})",
        correct as f64 / test_labels.len() as f64,
        correct,
        test_labels.len()
    );
    Ok(())
}
