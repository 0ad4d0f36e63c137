//! The XOR cross defeats any linear separator; an RBF feature map handles
//! it. This example fits both variants on the same data and prints their
//! training accuracies side by side.
//!
//! Run with `cargo run --example kernel_xor`.

use mpwtsvm::eval::accuracy;
use mpwtsvm::kernels::KernelSpec;
use mpwtsvm::model::{Hyperparameters, MpwtsvmModel};
use mpwtsvm::synthetic::xor_cross;

fn main() -> mpwtsvm::Result<()> {
    // Four clusters at (±1, ±1); diagonal pair labeled +1, anti-diagonal −1.
    let ds = xor_cross(40, 0.08, 21);

    let linear = Hyperparameters::tied(1.0, 1.0, 5);
    let mut rbf = linear.clone();
    rbf.kernel = Some(KernelSpec::Rbf { sigma: 0.3 });

    let linear_model = MpwtsvmModel::fit(&ds, &linear)?;
    let rbf_model = MpwtsvmModel::fit(&ds, &rbf)?;

    let linear_acc = accuracy(
        &linear_model.predict_combined_many(&ds.view_a, &ds.view_b)?,
        &ds.labels,
    )?;
    let rbf_acc = accuracy(
        &rbf_model.predict_combined_many(&ds.view_a, &ds.view_b)?,
        &ds.labels,
    )?;

    println!("XOR cross, {} samples", ds.len());
    println!("linear features      : training accuracy {linear_acc:.4}");
    println!("RBF kernel (σ = 0.3) : training accuracy {rbf_acc:.4}");
    println!(
        "\nthe linear fit cannot beat chance by much on XOR; \
         the kernel fit separates all four clusters"
    );
    Ok(())
}
