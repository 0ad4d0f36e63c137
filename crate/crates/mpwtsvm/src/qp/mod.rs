//! Assembly and certified solution of the two dual block quadratic
//! programs, in the canonical form
//!
//! ```text
//! minimize   ½ πᵀHπ + pᵀπ
//! subject to A·π ≤ b,   π ≥ 0.
//! ```
//!
//! The solver contract is a KKT certificate: stationarity, primal
//! feasibility, and complementarity residuals are all measured in the
//! ∞-norm and their maximum is reported on the solution. The slack-coupling
//! block makes the assembled `H` indefinite in general, so a certified KKT
//! point — not a global-optimality claim — is what a solve returns; the
//! solution also records an estimate of H's smallest eigenvalue.

mod assemble;
mod solver;

pub use assemble::{
    assemble_dual, assemble_dual_unpruned, ClassSplit, DesignMatrices, DualDirection,
    DualProblem, GraphSet,
};
pub(crate) use assemble::{append_bias_column, sandwich, stack_rows, weighted_proximity};
pub use solver::{solve_qp, solve_qp_from_scale};
pub(crate) use solver::solve_qp_warm;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A quadratic program in the canonical inequality form above.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    pub h: DMatrix<f64>,
    pub p: DVector<f64>,
    pub a_ineq: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl QpProblem {
    /// Validates shapes, exact symmetry of `H`, and finiteness.
    pub fn new(
        h: DMatrix<f64>,
        p: DVector<f64>,
        a_ineq: DMatrix<f64>,
        b: DVector<f64>,
    ) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n {
            return Err(Error::DimensionMismatch {
                context: "qp quadratic term",
                expected: "nonempty square matrix".into(),
                found: format!("{}×{}", h.nrows(), h.ncols()),
            });
        }
        if h != h.transpose() {
            return Err(Error::InvalidParameter(
                "qp quadratic term must be exactly symmetric".into(),
            ));
        }
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "qp linear term",
                expected: format!("length {n}"),
                found: format!("length {}", p.len()),
            });
        }
        if a_ineq.ncols() != n || a_ineq.nrows() != b.len() {
            return Err(Error::DimensionMismatch {
                context: "qp constraint system",
                expected: format!("{}×{n} with {} bounds", b.len(), b.len()),
                found: format!("{}×{}", a_ineq.nrows(), a_ineq.ncols()),
            });
        }
        let finite = h.iter().chain(p.iter()).chain(a_ineq.iter()).chain(b.iter());
        if finite.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("qp data must be finite".into()));
        }
        Ok(Self { h, p, a_ineq, b })
    }

    /// Number of decision variables.
    pub fn num_vars(&self) -> usize {
        self.h.nrows()
    }

    /// Number of inequality rows (excluding the π ≥ 0 bounds).
    pub fn num_constraints(&self) -> usize {
        self.b.len()
    }

    /// Objective value ½πᵀHπ + pᵀπ.
    pub fn objective(&self, pi: &DVector<f64>) -> f64 {
        0.5 * (pi.transpose() * &self.h * pi)[(0, 0)] + self.p.dot(pi)
    }

    /// KKT residuals of a candidate point with multipliers `mu` (for
    /// `Aπ ≤ b`) and `nu` (for `π ≥ 0`), each in the ∞-norm.
    pub fn certificate(
        &self,
        pi: &DVector<f64>,
        mu: &DVector<f64>,
        nu: &DVector<f64>,
    ) -> KktBreakdown {
        let stationarity = (&self.h * pi + &self.p + self.a_ineq.transpose() * mu - nu).amax();
        let slack_gap = &self.a_ineq * pi - &self.b;
        let primal_feasibility = slack_gap
            .iter()
            .map(|&g| g.max(0.0))
            .chain(pi.iter().map(|&x| (-x).max(0.0)))
            .fold(0.0f64, f64::max);
        let complementarity = mu
            .iter()
            .zip(slack_gap.iter())
            .map(|(&m, &g)| (m * g).abs())
            .chain(pi.iter().zip(nu.iter()).map(|(&x, &v)| (x * v).abs()))
            .fold(0.0f64, f64::max);
        KktBreakdown {
            stationarity,
            primal_feasibility,
            complementarity,
        }
    }
}

/// The three ∞-norm residual groups of a KKT certificate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktBreakdown {
    pub stationarity: f64,
    pub primal_feasibility: f64,
    pub complementarity: f64,
}

impl KktBreakdown {
    /// The overall certificate value: the worst of the three groups.
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal_feasibility)
            .max(self.complementarity)
    }
}

/// A certified candidate solution.
#[derive(Debug, Clone)]
pub struct QpSolution {
    /// Primal point.
    pub pi: DVector<f64>,
    /// Multipliers for the inequality rows `Aπ ≤ b`.
    pub ineq_multipliers: DVector<f64>,
    /// Multipliers for the bounds `π ≥ 0` (these house the β symbols of the
    /// primal derivation).
    pub bound_multipliers: DVector<f64>,
    /// Worst KKT residual at `pi` (see [`QpProblem::certificate`]).
    pub kkt_residual: f64,
    /// Objective value at `pi`.
    pub objective: f64,
    /// Whether `kkt_residual ≤ tol` was reached within the iteration limit.
    pub converged: bool,
    /// Interior-point iterations spent.
    pub iterations: usize,
    /// Estimate of the smallest eigenvalue of `H`; negative values flag an
    /// indefinite quadratic form (KKT point, not certified global optimum).
    pub min_eigenvalue_estimate: f64,
}

/// Max absolute row sum (the matrix ∞-norm).
fn norm_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum())
        .fold(0.0f64, f64::max)
}

/// Estimates the smallest eigenvalue of a symmetric matrix. Deterministic.
///
/// Up to 256×256 the value is exact (full symmetric eigendecomposition);
/// beyond that a Lanczos sweep with full reorthogonalization from a fixed
/// pseudo-random start approximates it. Extreme eigenvalues converge fast
/// under Lanczos, which is all the reporting contract needs.
pub fn min_eigenvalue_estimate(h: &DMatrix<f64>) -> f64 {
    let n = h.nrows();
    if n == 0 {
        return 0.0;
    }
    if norm_inf(h) == 0.0 {
        return 0.0;
    }
    if n <= 256 {
        return h.clone().symmetric_eigen().eigenvalues.min();
    }
    lanczos_min_eigenvalue(h, 96)
}

/// Smallest Ritz value of `steps` Lanczos iterations with full
/// reorthogonalization, started from a fixed pseudo-random vector.
fn lanczos_min_eigenvalue(h: &DMatrix<f64>, steps: usize) -> f64 {
    let n = h.nrows();
    let steps = steps.min(n);
    // Splitmix-style generator: deterministic, sign-varying start vector.
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut q = DVector::from_fn(n, |_, _| {
        state = state
            .wrapping_mul(6_364_136_223_846_793_005)
            .wrapping_add(1_442_695_040_888_963_407);
        ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
    });
    q /= q.norm();
    let mut basis: Vec<DVector<f64>> = vec![q.clone()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let breakdown = 1e-12 * norm_inf(h).max(1.0);
    for _ in 0..steps {
        let mut w = h * &q;
        let alpha = q.dot(&w);
        alphas.push(alpha);
        // Full reorthogonalization keeps the basis numerically orthonormal.
        for prev in &basis {
            let coeff = prev.dot(&w);
            w -= prev * coeff;
        }
        let beta = w.norm();
        if beta <= breakdown {
            break; // invariant subspace reached; Ritz values are exact on it
        }
        betas.push(beta);
        q = w / beta;
        basis.push(q.clone());
    }
    let k = alphas.len();
    let mut tri = DMatrix::zeros(k, k);
    for (i, &a) in alphas.iter().enumerate() {
        tri[(i, i)] = a;
    }
    for (i, &b) in betas.iter().take(k.saturating_sub(1)).enumerate() {
        tri[(i, i + 1)] = b;
        tri[(i + 1, i)] = b;
    }
    tri.symmetric_eigen().eigenvalues.min()
}

/// Returns `(M + eps·I)⁻¹` together with the `eps` actually applied.
///
/// The inverse comes from a Cholesky factorization of the symmetrized
/// input. If that factorization fails or the computed `κ∞ = ‖M+εI‖∞·
/// ‖(M+εI)⁻¹‖∞` exceeds 1e12, `eps` falls back to `1e-6·trace(M)/n`
/// (never below the caller's value) and the factorization is retried,
/// with a pivoted LU attempt as the last resort before reporting the
/// matrix singular.
pub fn regularized_inverse(m: &DMatrix<f64>, eps: f64) -> Result<(DMatrix<f64>, f64)> {
    let n = m.nrows();
    if n == 0 || m.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "regularized inverse",
            expected: "nonempty square matrix".into(),
            found: format!("{}×{}", m.nrows(), m.ncols()),
        });
    }
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "regularization eps must be a nonnegative real, got {eps}"
        )));
    }
    let sym = (m + m.transpose()) * 0.5;
    let shifted = |e: f64| {
        let mut s = sym.clone();
        for i in 0..n {
            s[(i, i)] += e;
        }
        s
    };
    let fallback = (eps + 1e-6 * sym.trace() / n as f64).max(eps);
    let mut attempts = vec![eps];
    if fallback > eps {
        attempts.push(fallback);
    }
    for &e in &attempts {
        let s = shifted(e);
        if let Some(chol) = s.clone().cholesky() {
            let mut inv = chol.inverse();
            let cond = norm_inf(&s) * norm_inf(&inv);
            if cond <= 1e12 || e >= fallback {
                // Mirror the lower triangle so the result is exactly
                // symmetric regardless of factorization rounding.
                for i in 0..n {
                    for j in 0..i {
                        let avg = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                        inv[(i, j)] = avg;
                        inv[(j, i)] = avg;
                    }
                }
                return Ok((inv, e));
            }
        }
    }
    // Cholesky could not handle M even with the fallback shift (e.g. an
    // indefinite input); pivoted LU still inverts anything nonsingular.
    let last = *attempts.last().expect("at least one attempt");
    match shifted(last).try_inverse() {
        Some(inv) => Ok(((&inv + inv.transpose()) * 0.5, last)),
        None => Err(Error::SingularMatrix { eps: last }),
    }
}
