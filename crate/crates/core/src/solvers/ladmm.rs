use nalgebra::DMatrix;

use super::{check_finite, LrrProblem, SolverConfig, SolverSolution};
use crate::error::{Error, Result};
use crate::linalg::singular_values;
use crate::prox;

/// Weighted nuclear norm LRR via linearized ADMM.
///
/// The quadratic coupling term is linearized at the current `Z` with a
/// proximal term of weight `μη`, so each `Z` update is a single weighted
/// singular value shrinkage and no split variable is needed.
pub fn solve_wnnm_lrr_ladmm(problem: &LrrProblem, cfg: &SolverConfig) -> Result<SolverSolution> {
    cfg.validate()?;
    let x = problem.data();
    let weights = problem.weights();
    let (m, n) = x.shape();
    let lambda = cfg.resolved_lambda(n);
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }

    let norm_x = x.norm();
    if n == 0 || norm_x == 0.0 {
        return Ok(SolverSolution::zero(m, n));
    }

    let sigma_max = singular_values(x)[0];
    let lipschitz = sigma_max * sigma_max;
    let eta = match cfg.eta {
        Some(eta) if eta <= lipschitz => {
            return Err(Error::domain(format!(
                "eta = {eta} must exceed the squared spectral norm of X ({lipschitz})"
            )));
        }
        Some(eta) => eta,
        None => 1.02 * lipschitz,
    };
    let mut mu = cfg.ladmm_mu0.unwrap_or((1.0 / sigma_max).min(1e-2));
    let mu_max = cfg.ladmm_mu_max.max(mu);

    let xt = x.transpose();
    let mut z = DMatrix::<f64>::zeros(n, n);
    let mut xz = DMatrix::<f64>::zeros(m, n);
    let mut e = DMatrix::<f64>::zeros(m, n);
    let mut y = DMatrix::<f64>::zeros(m, n);

    let mut history = Vec::new();
    let mut mu_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        mu_history.push(mu);

        let e_next = prox::l21_prox(&(x - &xz + &y / mu), lambda / mu);

        // Gradient step on the augmented term, then the weighted prox.
        let step = &xt * (&y + (x - &xz - &e_next) * mu);
        let center = &z + step / (mu * eta);
        let z_next = prox::weighted_svt(&center, weights, mu * eta)?;
        let xz_next = x * &z_next;

        let feasibility = x - &xz_next - &e_next;
        y += &feasibility * mu;

        let change = (&z_next - &z).norm().max((&e_next - &e).norm()) / norm_x;
        let residual = feasibility.norm() / norm_x;
        let settled = mu * change < cfg.eps2;

        z = z_next;
        xz = xz_next;
        e = e_next;
        if settled {
            mu = (cfg.rho0 * mu).min(mu_max);
        }

        check_finite(iterations, "Z", &z)?;
        check_finite(iterations, "E", &e)?;
        check_finite(iterations, "Y", &y)?;

        history.push(residual);
        if iterations % 100 == 0 {
            log::debug!(
                "ladmm iter {iterations}: mu = {mu:.3e}, residual = {residual:.3e}, change = {change:.3e}"
            );
        }
        if residual < cfg.eps1 && change < cfg.eps2 {
            converged = true;
            break;
        }
    }

    Ok(SolverSolution {
        z,
        e,
        iterations,
        primal_residual_history: history,
        mu_history,
        converged,
    })
}
