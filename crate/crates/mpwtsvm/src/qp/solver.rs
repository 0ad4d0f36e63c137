//! Dense interior-point solver for
//! `min ½πᵀHπ + pᵀπ s.t. Aπ ≤ b, π ≥ 0`, usable on the indefinite
//! quadratic forms the slack-coupling block produces.
//!
//! The scheme is damped Newton iteration on the perturbed KKT system with
//! an infeasible start. Slacks `s > 0` are explicit variables, and each
//! iteration solves the Newton equations of the residual map
//!
//! `F_t(π, s, μ, ν) = (Hπ + p + Aᵀμ − ν,  Aπ + s − b,  π∘ν − t,  s∘μ − t)`
//!
//! at complementarity target `t = σ·μ̄`, where `μ̄` is the current average
//! complementarity and the centering weight `σ ∈ [0.1, 0.9]` comes from a
//! Mehrotra-style affine probe. All four blocks share one damped step
//! length chosen by a backtracking Armijo search on `½‖F_t‖²`; for the
//! exact Newton direction that merit's directional derivative is
//! `−‖F_t‖²` no matter what the curvature of `H` is, so the search
//! succeeds on indefinite problems as well. This matters here: the
//! quadratic form can be unbounded below on the feasible cone, so the
//! sought solution is a stationary saddle rather than a minimum, and any
//! objective-descent or barrier-merit globalization would slide down an
//! escape valley instead of closing in on it. The residual merit is blind
//! to flat objective directions, and convexifying diagonal shifts are used
//! only as a last resort when the reduced matrix is numerically singular —
//! a shift of size δ re-injects a stationarity defect `δ·‖Δπ‖` per step,
//! so the default factorization must tolerate indefiniteness (LU).
//!
//! The iteration stops as soon as the *recomputed* KKT certificate of the
//! iterate meets the tolerance, so the reported residual is always one an
//! independent check reproduces. On indefinite problems the residual merit
//! itself can have spurious local minima; a sweep that stalls in one is
//! retried from a short fixed ladder of coarser and finer interior scales,
//! which in practice reaches a certifiable point from one of the starts.
//!
//! Infeasibility is never inferred from divergence alone: the solver
//! returns an error only on an (approximate) separating-multiplier
//! certificate `Aᵀy ≥ 0, bᵀy < 0, y ≥ 0`, or when an auxiliary
//! minimum-violation problem — convex by construction — proves the minimal
//! achievable constraint violation is bounded away from zero. Everything is
//! sequential f64 arithmetic: identical inputs give bit-identical output.

use nalgebra::{DMatrix, DVector};

use super::{min_eigenvalue_estimate, norm_inf, QpProblem, QpSolution};
use crate::error::{Error, Result};

/// Fraction-to-boundary factor keeping iterates strictly interior.
const STEP_DAMPING: f64 = 0.995;
/// Armijo parameter for the residual-norm line search: a trial step of
/// length α must shrink `½‖F_t‖²` below `(1 − 2·c·α)` times its value.
const ARMIJO_SLOPE: f64 = 1e-4;
/// Centering weight bounds. The lower bound keeps the Newton target close
/// to the current iterate; the upper bound guarantees progress.
const SIGMA_MIN: f64 = 0.1;
const SIGMA_MAX: f64 = 0.9;
/// No single step may move any coordinate by more than this multiple of
/// the current iterate scale (guards against near-singular directions).
const STEP_CAP: f64 = 1e3;
/// Interior scales tried, in order, when the sweep from the unit start
/// stalls. Each restart is a fresh sweep with every block initialized to
/// the given constant.
const RESTART_SCALES: [f64; 4] = [0.1, 10.0, 0.01, 100.0];

/// Largest step in [0, 1] keeping `x + α·dx` strictly positive.
fn max_step(x: &DVector<f64>, dx: &DVector<f64>) -> f64 {
    x.iter()
        .zip(dx.iter())
        .filter(|(_, &d)| d < 0.0)
        .map(|(&xi, &di)| -xi / di)
        .fold(1.0_f64, f64::min)
}

/// Half squared norm of the perturbed KKT residual at target `t`.
/// Infinite outside the open orthant, which the line search treats as a
/// rejected trial.
fn residual_merit(
    qp: &QpProblem,
    pi: &DVector<f64>,
    s: &DVector<f64>,
    mu: &DVector<f64>,
    nu: &DVector<f64>,
    t: f64,
) -> f64 {
    if pi.iter().any(|&v| v <= 0.0)
        || nu.iter().any(|&v| v <= 0.0)
        || s.iter().any(|&v| v <= 0.0)
        || mu.iter().any(|&v| v <= 0.0)
    {
        return f64::INFINITY;
    }
    let r_d = &qp.h * pi + &qp.p + qp.a_ineq.transpose() * mu - nu;
    let mut value = r_d.norm_squared();
    if qp.num_constraints() > 0 {
        let r_p = &qp.a_ineq * pi + s - &qp.b;
        value += r_p.norm_squared();
        value += s
            .iter()
            .zip(mu.iter())
            .map(|(&si, &mi)| (si * mi - t).powi(2))
            .sum::<f64>();
    }
    value += pi
        .iter()
        .zip(nu.iter())
        .map(|(&xi, &vi)| (xi * vi - t).powi(2))
        .sum::<f64>();
    0.5 * value
}

/// Strictly interior starting point for a warm-started sweep.
struct StartPoint {
    pi: DVector<f64>,
    s: DVector<f64>,
    mu: DVector<f64>,
    nu: DVector<f64>,
}

impl StartPoint {
    /// Builds a start from a (possibly boundary-touching) solution by
    /// clamping every block a relative margin into the open orthant.
    fn from_solution(qp: &QpProblem, sol: &QpSolution) -> Self {
        let floor = |v: &DVector<f64>| {
            let eps = 1e-10 * (1.0 + v.amax());
            v.map(|x| x.max(eps))
        };
        let pi = floor(&sol.pi);
        let s = if qp.num_constraints() > 0 {
            floor(&(&qp.b - &qp.a_ineq * &pi))
        } else {
            DVector::zeros(0)
        };
        Self {
            pi,
            s,
            mu: floor(&sol.ineq_multipliers),
            nu: floor(&sol.bound_multipliers),
        }
    }
}

/// Runs a single sweep warm-started from `from`, a solution of a related
/// problem with the same dimensions (for instance a diagonally lifted
/// variant of `qp`). Infeasibility checks are skipped: the caller has
/// already solved a problem with the identical constraint system.
pub(crate) fn solve_qp_warm(
    qp: &QpProblem,
    tol: f64,
    max_iter: usize,
    from: &QpSolution,
) -> Result<QpSolution> {
    let w = StartPoint::from_solution(qp, from);
    solve_inner(qp, tol, max_iter, false, Some(&w))
}

/// Solves the QP to a certified KKT point.
///
/// A sweep from the unit interior point handles most problems. If it
/// stalls, further sweeps run from a fixed ladder of other interior
/// scales: the residual merit that globalizes each sweep can have spurious
/// local minima on indefinite problems, and a different starting scale
/// lands in a different basin. Every sweep certifies against the same
/// problem, so a converged restart is exactly as trustworthy as a
/// converged first sweep.
///
/// Returns the first iterate whose recomputed KKT residual is ≤ `tol`. If
/// every sweep runs out of iterations or stalls, the best iterate seen is
/// returned with `converged = false` and its residual (`iterations` then
/// counts the sweep that produced it). An infeasible constraint system is
/// reported as an error, but only once certified (see the module
/// documentation) — a feasible problem the solver merely struggles with is
/// returned unconverged, never misreported.
/// Runs a single sweep from the interior point with every coordinate set
/// to `scale`, with no restart ladder. Exists so callers that can judge
/// solution *quality* (beyond the KKT certificate) can drive their own
/// retry policy; most callers want [`solve_qp`].
pub fn solve_qp_from_scale(
    qp: &QpProblem,
    tol: f64,
    max_iter: usize,
    scale: f64,
) -> Result<QpSolution> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "start scale must be a positive real, got {scale}"
        )));
    }
    let n = qp.num_vars();
    let m = qp.num_constraints();
    let w = StartPoint {
        pi: DVector::from_element(n, scale),
        nu: DVector::from_element(n, scale),
        s: DVector::from_element(m, scale),
        mu: DVector::from_element(m, scale),
    };
    solve_inner(qp, tol, max_iter, true, Some(&w))
}

pub fn solve_qp(qp: &QpProblem, tol: f64, max_iter: usize) -> Result<QpSolution> {
    let direct = solve_inner(qp, tol, max_iter, true, None)?;
    if direct.converged {
        return Ok(direct);
    }
    let n = qp.num_vars();
    let m = qp.num_constraints();
    let mut best = direct;
    for &c in &RESTART_SCALES {
        let w = StartPoint {
            pi: DVector::from_element(n, c),
            nu: DVector::from_element(n, c),
            s: DVector::from_element(m, c),
            mu: DVector::from_element(m, c),
        };
        let sol = solve_inner(qp, tol, max_iter, false, Some(&w))?;
        if sol.converged {
            return Ok(sol);
        }
        if sol.kkt_residual < best.kkt_residual {
            best = sol;
        }
    }
    Ok(best)
}

fn solve_inner(
    qp: &QpProblem,
    tol: f64,
    max_iter: usize,
    check_phase1: bool,
    start: Option<&StartPoint>,
) -> Result<QpSolution> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "solver tolerance must be a positive real, got {tol}"
        )));
    }
    let n = qp.num_vars();
    let m = qp.num_constraints();
    let min_eig = min_eigenvalue_estimate(&qp.h);

    let (mut pi, mut nu, mut s, mut mu) = match start {
        Some(w) => (w.pi.clone(), w.nu.clone(), w.s.clone(), w.mu.clone()),
        None => (
            DVector::from_element(n, 1.0),
            DVector::from_element(n, 1.0),
            DVector::from_element(m, 1.0),
            DVector::from_element(m, 1.0),
        ),
    };

    let mut best_cert = f64::INFINITY;
    let mut best_primal = f64::INFINITY;
    let mut best = (pi.clone(), mu.clone(), nu.clone());
    let mut iterations = 0usize;

    for iter in 0..=max_iter {
        let breakdown = qp.certificate(&pi, &mu, &nu);
        let cert = breakdown.max();
        if cert < best_cert {
            best_cert = cert;
            best_primal = breakdown.primal_feasibility;
            best = (pi.clone(), mu.clone(), nu.clone());
        }
        if cert <= tol {
            let objective = qp.objective(&pi);
            return Ok(QpSolution {
                pi,
                ineq_multipliers: mu,
                bound_multipliers: nu,
                kkt_residual: cert,
                objective,
                converged: true,
                iterations: iter,
                min_eigenvalue_estimate: min_eig,
            });
        }
        // Opportunistic infeasibility certificate: a normalized multiplier
        // vector y with Aᵀy ≥ 0 and bᵀy < 0 proves the feasible set empty.
        if m > 0 {
            let mu_peak = mu.amax();
            if mu_peak > 1e8 {
                let mu_hat = mu.map(|v| v / mu_peak);
                let pulled = qp.a_ineq.transpose() * &mu_hat;
                if pulled.min() >= -1e-8 && qp.b.dot(&mu_hat) <= -1e-6 {
                    return Err(Error::InfeasibleProgram(
                        "constraint rows admit a separating multiplier certificate".into(),
                    ));
                }
            }
        }
        if iter == max_iter {
            break;
        }
        let magnitude = pi
            .amax()
            .max(nu.amax())
            .max(if m > 0 { mu.amax().max(s.amax()) } else { 0.0 });
        if !magnitude.is_finite() || magnitude > 1e16 {
            break; // diverged; report the best certified iterate instead
        }

        let r_d = &qp.h * &pi + &qp.p + qp.a_ineq.transpose() * &mu - &nu;
        let r_p = &qp.a_ineq * &pi + &s - &qp.b;
        let mu_bar = (pi.dot(&nu) + s.dot(&mu)) / (n + m) as f64;

        // Reduced normal matrix K = H + X⁻¹V + AᵀS⁻¹MA. Eliminating
        // (Δν, Δμ, Δs) from the Newton equations leaves K·Δπ = rhs; K is
        // symmetric but in general indefinite, so it is factored by LU.
        let mut k = qp.h.clone();
        for i in 0..n {
            k[(i, i)] += nu[i] / pi[i];
        }
        if m > 0 {
            let mut scaled_a = qp.a_ineq.clone();
            for r in 0..m {
                let w = mu[r] / s[r];
                scaled_a.row_mut(r).scale_mut(w);
            }
            k += qp.a_ineq.transpose() * scaled_a;
        }
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (k[(i, j)] + k[(j, i)]);
                k[(i, j)] = avg;
                k[(j, i)] = avg;
            }
        }

        // Factor K as-is; escalate a diagonal shift only if factorization
        // or the solve breaks down numerically. A shift costs Newton
        // exactness, so it is strictly a fallback.
        let k_scale = norm_inf(&k).max(1.0);
        let mut factor = nalgebra::LU::new(k.clone());
        let mut delta = 1e-13 * k_scale;
        let probe = DVector::from_element(n, 1.0);
        for _ in 0..40 {
            let usable = factor
                .solve(&probe)
                .map(|x| x.iter().all(|v| v.is_finite()))
                .unwrap_or(false);
            if usable {
                break;
            }
            let mut shifted = k.clone();
            for i in 0..n {
                shifted[(i, i)] += delta;
            }
            factor = nalgebra::LU::new(shifted);
            delta *= 10.0;
        }

        // One Newton solve for a given pair of complementarity residuals.
        let solve_direction = |r_xv: &DVector<f64>, r_sm: &DVector<f64>| {
            let mut rhs = -&r_d;
            for i in 0..n {
                rhs[i] -= r_xv[i] / pi[i];
            }
            if m > 0 {
                let mut w = DVector::zeros(m);
                for r in 0..m {
                    w[r] = r_sm[r] / s[r] - mu[r] / s[r] * r_p[r];
                }
                rhs += qp.a_ineq.transpose() * w;
            }
            let d_pi = factor.solve(&rhs)?;
            if d_pi.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let d_s = -&r_p - &qp.a_ineq * &d_pi;
            let mut d_mu = DVector::zeros(m);
            for r in 0..m {
                d_mu[r] = -(r_sm[r] + mu[r] * d_s[r]) / s[r];
            }
            let mut d_nu = DVector::zeros(n);
            for i in 0..n {
                d_nu[i] = -(r_xv[i] + nu[i] * d_pi[i]) / pi[i];
            }
            Some((d_pi, d_s, d_mu, d_nu))
        };

        // Affine probe (target 0) only to size the centering weight.
        let prod_xv = pi.component_mul(&nu);
        let prod_sm = s.component_mul(&mu);
        let Some(aff) = solve_direction(&prod_xv, &prod_sm) else {
            break; // reduced system beyond repair: report best iterate
        };
        let alpha_aff = max_step(&pi, &aff.0)
            .min(max_step(&s, &aff.1))
            .min(max_step(&mu, &aff.2))
            .min(max_step(&nu, &aff.3))
            .min(1.0);
        let mu_aff = ((&pi + &aff.0 * alpha_aff).dot(&(&nu + &aff.3 * alpha_aff))
            + (&s + &aff.1 * alpha_aff).dot(&(&mu + &aff.2 * alpha_aff)))
            / (n + m) as f64;
        let sigma = if mu_bar > 0.0 {
            (mu_aff / mu_bar).powi(3).clamp(SIGMA_MIN, SIGMA_MAX)
        } else {
            SIGMA_MIN
        };
        let t = (sigma * mu_bar).max(1e-300);

        // Newton direction for the perturbed KKT system at target t.
        let r_xv = &prod_xv - DVector::from_element(n, t);
        let r_sm = &prod_sm - DVector::from_element(m, t);
        let Some((d_pi, d_s, d_mu, d_nu)) = solve_direction(&r_xv, &r_sm) else {
            break;
        };

        // Step bound: fraction-to-boundary on all four blocks jointly,
        // then a cap on how far a single move may carry the iterate.
        let mut alpha_max = max_step(&pi, &d_pi)
            .min(max_step(&s, &d_s))
            .min(max_step(&mu, &d_mu))
            .min(max_step(&nu, &d_nu))
            .min(1.0);
        let d_scale = d_pi
            .amax()
            .max(d_nu.amax())
            .max(if m > 0 { d_s.amax().max(d_mu.amax()) } else { 0.0 });
        let x_scale = 1.0 + magnitude;
        if d_scale > 0.0 {
            alpha_max = alpha_max.min(STEP_CAP * x_scale / d_scale);
        }
        alpha_max *= STEP_DAMPING;
        if !(alpha_max > 1e-13) {
            break; // boundary pinch: report best iterate
        }

        // Backtracking line search on ½‖F_t‖². The exact Newton direction
        // has directional derivative −‖F_t‖², independent of the curvature
        // of H, so sufficient decrease is achievable even at saddle-type
        // targets; the slack absorbs rounding at ulp scale.
        let merit0 = residual_merit(qp, &pi, &s, &mu, &nu, t);
        let merit_slack = 1e-15 * (1.0 + merit0);
        let mut alpha = alpha_max;
        let mut accepted = false;
        for _ in 0..45 {
            let trial_pi = &pi + &d_pi * alpha;
            let trial_s = &s + &d_s * alpha;
            let trial_mu = &mu + &d_mu * alpha;
            let trial_nu = &nu + &d_nu * alpha;
            let trial = residual_merit(qp, &trial_pi, &trial_s, &trial_mu, &trial_nu, t);
            if trial <= (1.0 - 2.0 * ARMIJO_SLOPE * alpha) * merit0 + merit_slack {
                pi = trial_pi;
                s = trial_s;
                mu = trial_mu;
                nu = trial_nu;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            break; // residual refuses to decrease: report best iterate
        }
        iterations = iter + 1;
    }

    // The loop ended without a certificate. Before reporting the best
    // iterate, rule infeasibility in or out when the evidence warrants it:
    // only a problem with a negative bound can be infeasible at all, and
    // the minimum-violation auxiliary problem (strictly convex, always
    // feasible) settles the question.
    let b_floor = qp.b.iter().fold(0.0f64, |a, &v| a.min(v));
    let b_scale = 1.0 + qp.b.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let feas_tol = (1e-6 * b_scale).max(tol);
    if check_phase1 && m > 0 && b_floor < 0.0 && best_primal > feas_tol {
        let mut h1 = DMatrix::zeros(n + 1, n + 1);
        for i in 0..=n {
            h1[(i, i)] = 1e-8;
        }
        let mut p1 = DVector::zeros(n + 1);
        p1[n] = 1.0;
        let mut a1 = DMatrix::zeros(m, n + 1);
        a1.view_mut((0, 0), (m, n)).copy_from(&qp.a_ineq);
        for r in 0..m {
            a1[(r, n)] = -1.0;
        }
        let phase1 = QpProblem::new(h1, p1, a1, qp.b.clone())
            .expect("auxiliary feasibility problem is well-formed by construction");
        let aux = solve_inner(&phase1, 1e-8, 300, false, None)?;
        if aux.converged && aux.pi[n] > 1e-5 * b_scale {
            return Err(Error::InfeasibleProgram(format!(
                "no feasible point: minimal constraint violation ≈ {:.3e}",
                aux.pi[n]
            )));
        }
    }

    let (pi, mu, nu) = best;
    let objective = qp.objective(&pi);
    Ok(QpSolution {
        kkt_residual: best_cert,
        objective,
        converged: false,
        iterations,
        min_eigenvalue_estimate: min_eig,
        pi,
        ineq_multipliers: mu,
        bound_multipliers: nu,
    })
}
