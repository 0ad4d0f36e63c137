//! Fit the multi-view classifier on a linearly separable two-view toy and
//! compare its three decision rules: view A's planes, view B's planes, and
//! the combined (averaged-distance) rule.
//!
//! Run with `cargo run --example train_and_predict`.

use mpwtsvm::data::View;
use mpwtsvm::eval::accuracy;
use mpwtsvm::model::{Hyperparameters, MpwtsvmModel};
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    // Two Gaussian blobs per view with a 6σ gap; fresh draws for testing.
    let train = two_view_blobs(120, 3.0, 0.5, 11);
    let test = two_view_blobs(400, 3.0, 0.5, 12);

    let params = Hyperparameters::tied(1.0, 1.0, 5);
    let model = MpwtsvmModel::fit(&train, &params)?;

    let view_a = model.predict_view_many(&test.view_a, View::A)?;
    let view_b = model.predict_view_many(&test.view_b, View::B)?;
    let combined = model.predict_combined_many(&test.view_a, &test.view_b)?;

    println!("trained on {} samples, evaluating {}", train.len(), test.len());
    println!("view A rule accuracy   : {:.4}", accuracy(&view_a, &test.labels)?);
    println!("view B rule accuracy   : {:.4}", accuracy(&view_b, &test.labels)?);
    println!("combined rule accuracy : {:.4}", accuracy(&combined, &test.labels)?);

    // The decision rule picks the class whose hyperplane is nearer; the two
    // distances are visible per sample.
    println!("\nfirst three test samples, view A plane distances:");
    for i in 0..3 {
        let row: Vec<f64> = test.view_a.row(i).iter().copied().collect();
        let (d_pos, d_neg) = model.view_distances(&row, View::A)?;
        println!(
            "  sample {i}: to positive plane {d_pos:7.4}, to negative plane {d_neg:7.4} \
             → predicted {:+}, actual {:+}",
            view_a[i], test.labels[i]
        );
    }
    Ok(())
}
