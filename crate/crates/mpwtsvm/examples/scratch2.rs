use mpwtsvm::model::Hyperparameters;
use mpwtsvm::qp::{assemble_dual, solve_qp_from_scale, DualDirection, GraphSet};
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    for (n, seed) in [(200usize, 42u64), (160, 42), (200, 1729), (120, 11), (40, 91)] {
        let ds = two_view_blobs(n, 2.4, 0.4, seed);
        let mut params = Hyperparameters::tied(1.0, 1.0, 5);
        let graphs = GraphSet::build(&ds, params.k)?;
        println!("=== n {n} seed {seed} ===");
        for convexify in [false, true] {
            params.convexify = convexify;
            let dual = assemble_dual(&ds, &graphs, &params, DualDirection::Positive)?;
            for scale in [1.0, 0.1, 10.0, 0.01, 100.0] {
                let sol = solve_qp_from_scale(&dual.qp, 1e-8, 200, scale)?;
                let (u_a, u_b) = dual.recover_planes(&sol.pi)?;
                println!(
                    "  cvx {} scale {scale:6}: conv {} res {:.1e} it {:3} obj {:+.4e} planes A {:.3e} B {:.3e}",
                    convexify as u8,
                    sol.converged,
                    sol.kkt_residual,
                    sol.iterations,
                    sol.objective,
                    u_a.norm(),
                    u_b.norm()
                );
            }
        }
    }
    Ok(())
}
