//! Seeded stratified k-fold cross-validation: per-fold accuracies for all
//! three decision rules, plus mean and sample standard deviation. The same
//! (dataset, parameters, folds, seed) always produces the same report.
//!
//! Run with `cargo run --example cross_validation`.

use mpwtsvm::eval::cross_validate;
use mpwtsvm::model::Hyperparameters;
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    let ds = two_view_blobs(200, 2.4, 0.4, 42);
    let params = Hyperparameters::tied(1.0, 1.0, 5);
    let folds = 5;
    let seed = 1729;

    let report = cross_validate(&ds, &params, folds, seed)?;

    println!("{folds}-fold stratified CV on {} samples (seed {seed})", ds.len());
    println!("fold   view A   view B   combined");
    for (i, fold) in report.folds.iter().enumerate() {
        println!(
            "{i:4}   {:.4}   {:.4}   {:.4}",
            fold.view_a, fold.view_b, fold.combined
        );
    }
    println!(
        "mean   {:.4}   {:.4}   {:.4}",
        report.mean.view_a, report.mean.view_b, report.mean.combined
    );
    println!(
        "std    {:.4}   {:.4}   {:.4}",
        report.std.view_a, report.std.view_b, report.std.combined
    );
    Ok(())
}
