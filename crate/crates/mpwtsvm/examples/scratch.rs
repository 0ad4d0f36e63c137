use mpwtsvm::data::View;
use mpwtsvm::eval::accuracy;
use mpwtsvm::model::{Hyperparameters, MpwtsvmModel};
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    for (n, seed) in [(200usize, 42u64), (160, 42), (120, 11), (200, 1729)] {
        let ds = two_view_blobs(n, 2.4, 0.4, seed);
        let params = Hyperparameters::tied(1.0, 1.0, 5);
        let model = MpwtsvmModel::fit(&ds, &params)?;
        let pa = accuracy(&model.predict_view_many(&ds.view_a, View::A)?, &ds.labels)?;
        let pb = accuracy(&model.predict_view_many(&ds.view_b, View::B)?, &ds.labels)?;
        let pc = accuracy(
            &model.predict_combined_many(&ds.view_a, &ds.view_b)?,
            &ds.labels,
        )?;
        println!("n {n:4} seed {seed:5}: train acc A {pa:.4} B {pb:.4} comb {pc:.4}");
        let d = &model.diagnostics;
        println!(
            "  pos dir: conv {} res {:.2e} it {} | neg dir: conv {} res {:.2e} it {}",
            d.positive.converged,
            d.positive.kkt_residual,
            d.positive.iterations,
            d.negative.converged,
            d.negative.kkt_residual,
            d.negative.iterations
        );
        for (label, plane) in [
            ("A+", &model.plane_pos_a),
            ("A-", &model.plane_neg_a),
            ("B+", &model.plane_pos_b),
            ("B-", &model.plane_neg_b),
        ] {
            println!(
                "  plane {label}: |u| {:.4e} weight_norm {:.4e} bias {:+.4e}",
                plane.coefficients.norm(),
                plane.weight_norm,
                plane.bias()
            );
        }
    }
    Ok(())
}
