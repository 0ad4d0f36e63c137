//! Look inside the training optimization: assemble the dual quadratic
//! program for one direction, solve it, and recompute the KKT certificate
//! the solver reports. The quadratic form is indefinite by construction
//! (the cross-view slack coupling contributes ± eigenvalue pairs), so the
//! certified point is a stationary saddle, not a global minimum — which is
//! exactly what the plane-recovery formulas need.
//!
//! Run with `cargo run --example qp_certificate`.

use mpwtsvm::model::Hyperparameters;
use mpwtsvm::qp::{assemble_dual, solve_qp, DualDirection, GraphSet};
use mpwtsvm::synthetic::two_view_blobs;

fn main() -> mpwtsvm::Result<()> {
    let ds = two_view_blobs(40, 3.0, 0.5, 91);
    let params = Hyperparameters::tied(1.0, 1.0, 5);
    let graphs = GraphSet::build(&ds, params.k)?;

    for direction in [DualDirection::Positive, DualDirection::Negative] {
        let dual = assemble_dual(&ds, &graphs, &params, direction)?;
        println!("{direction:?} direction:");
        println!(
            "  {} of {} constraint-class samples retained by pruning",
            dual.num_kept(),
            dual.constraint_class_size
        );
        println!(
            "  dual size: {} variables, {} inequality rows",
            dual.qp.num_vars(),
            dual.qp.num_constraints()
        );

        let sol = solve_qp(&dual.qp, 1e-8, 200)?;
        println!(
            "  solved in {} iterations, converged = {}",
            sol.iterations, sol.converged
        );
        println!(
            "  smallest eigenvalue of the quadratic form ≈ {:.3e}",
            sol.min_eigenvalue_estimate
        );

        // The certificate is recomputable from the returned point alone.
        let check = dual
            .qp
            .certificate(&sol.pi, &sol.ineq_multipliers, &sol.bound_multipliers);
        println!(
            "  KKT residuals: stationarity {:.2e}, feasibility {:.2e}, complementarity {:.2e}",
            check.stationarity, check.primal_feasibility, check.complementarity
        );
        assert_eq!(check.max(), sol.kkt_residual, "reported residual must reproduce");

        let (u_a, u_b) = dual.recover_planes(&sol.pi)?;
        println!(
            "  recovered plane coefficient norms: view A {:.4}, view B {:.4}\n",
            u_a.norm(),
            u_b.norm()
        );
    }
    Ok(())
}
