//! End-to-end file pipeline: write a dataset as the three CSV files the
//! tools consume, load it back, train, save the model as JSON, reload it,
//! and verify the reloaded model predicts identically.
//!
//! Run with `cargo run --example csv_pipeline`.

use mpwtsvm::data::{dataset_paths, load_multiview_csv, write_labels_csv, write_matrix_csv};
use mpwtsvm::eval::accuracy;
use mpwtsvm::model::{load_model, save_model, Hyperparameters, MpwtsvmModel};
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    let dir = tempfile::tempdir().expect("temporary directory");

    // A dataset directory holds view_a.csv, view_b.csv, labels.csv —
    // headerless CSV, one row per sample, labels ±1.
    let (path_a, path_b, path_labels) = dataset_paths(dir.path());
    let ds = two_view_blobs(100, 3.0, 0.5, 31);
    write_matrix_csv(&path_a, &ds.view_a)?;
    write_matrix_csv(&path_b, &ds.view_b)?;
    write_labels_csv(&path_labels, &ds.labels)?;
    println!("wrote dataset to {}", dir.path().display());

    let loaded = load_multiview_csv(&path_a, &path_b, &path_labels)?;
    println!(
        "loaded {} samples ({} + {} features per view)",
        loaded.len(),
        loaded.view_a.ncols(),
        loaded.view_b.ncols()
    );

    // fit() min/max-scales internally and records the scaling in the model,
    // so prediction takes raw features.
    let model = MpwtsvmModel::fit(&loaded, &Hyperparameters::tied(1.0, 1.0, 5))?;
    let before = model.predict_combined_many(&loaded.view_a, &loaded.view_b)?;
    println!(
        "training accuracy: {:.4}",
        accuracy(&before, &loaded.labels)?
    );

    // Models serialize to JSON with round-trip-exact floats.
    let model_path = dir.path().join("model.json");
    save_model(&model, &model_path)?;
    let reloaded = load_model(&model_path)?;
    let after = reloaded.predict_combined_many(&loaded.view_a, &loaded.view_b)?;

    assert_eq!(before, after, "reloaded model must predict identically");
    println!(
        "model round-tripped through {} — predictions identical",
        model_path.display()
    );
    Ok(())
}
