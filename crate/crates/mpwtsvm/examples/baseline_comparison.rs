//! Compare the multi-view classifier against the single-view weighted
//! linear-loss twin SVM baseline, fold for fold: both use the same
//! stratified partition, so the accuracies are directly comparable.
//!
//! Run with `cargo run --example baseline_comparison`.

use mpwtsvm::data::View;
use mpwtsvm::eval::{cross_validate, cross_validate_wltsvm};
use mpwtsvm::model::Hyperparameters;
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    // Moderate overlap keeps the comparison interesting.
    let ds = two_view_blobs(200, 1.8, 0.45, 73);
    let (folds, seed) = (5, 1729);
    let (c, k) = (1.0, 5);

    let multi = cross_validate(&ds, &Hyperparameters::tied(c, 1.0, k), folds, seed)?;
    let base_a = cross_validate_wltsvm(&ds, View::A, c, k, None, folds, seed)?;
    let base_b = cross_validate_wltsvm(&ds, View::B, c, k, None, folds, seed)?;

    println!("{folds}-fold CV on {} samples, shared partition (seed {seed})", ds.len());
    println!();
    println!("model                         mean accuracy   std");
    println!(
        "multi-view, combined rule          {:.4}      {:.4}",
        multi.mean.combined, multi.std.combined
    );
    println!(
        "multi-view, view A rule            {:.4}      {:.4}",
        multi.mean.view_a, multi.std.view_a
    );
    println!(
        "multi-view, view B rule            {:.4}      {:.4}",
        multi.mean.view_b, multi.std.view_b
    );
    println!(
        "single-view baseline on A          {:.4}      {:.4}",
        base_a.mean, base_a.std
    );
    println!(
        "single-view baseline on B          {:.4}      {:.4}",
        base_b.mean, base_b.std
    );
    println!();
    println!("per-fold combined-rule margins over the better single view:");
    for i in 0..folds {
        let single = base_a.folds[i].max(base_b.folds[i]);
        println!(
            "  fold {i}: {:+.4}",
            multi.folds[i].combined - single
        );
    }
    Ok(())
}
