use nalgebra::DMatrix;

use super::{check_finite, LrrProblem, SolverConfig, SolverSolution};
use crate::error::{Error, Result};
use crate::linalg::{ensure_finite, max_abs};
use crate::prox::{self, WeightVector};

/// The proximal step applied to the split variable `J`.
enum Shrinkage<'a> {
    Weighted(&'a WeightVector),
    Partial(usize),
}

impl Shrinkage<'_> {
    fn apply(&self, y: &DMatrix<f64>, mu: f64) -> Result<DMatrix<f64>> {
        match self {
            Shrinkage::Weighted(w) => prox::weighted_svt(y, w, mu),
            Shrinkage::Partial(protected) => prox::partial_svt(y, *protected, 1.0 / mu),
        }
    }
}

/// Weighted nuclear norm LRR via ADMM on the split `Z = J`.
pub fn solve_wnnm_lrr_admm(problem: &LrrProblem, cfg: &SolverConfig) -> Result<SolverSolution> {
    let x = problem.data();
    let lambda = cfg.resolved_lambda(x.ncols());
    run(x, lambda, Shrinkage::Weighted(problem.weights()), cfg)
}

/// Nuclear norm LRR: the weighted solver with all weights equal to one.
pub fn solve_lrr(x: &DMatrix<f64>, lambda: f64, cfg: &SolverConfig) -> Result<SolverSolution> {
    ensure_finite(x, "data matrix")?;
    let ones = WeightVector::constant(1.0, x.ncols())?;
    run(x, lambda, Shrinkage::Weighted(&ones), cfg)
}

/// LRR with the partial sum of singular values beyond the top `protected`.
///
/// The regularizer is non-convex; the result is a stationary point of the
/// ADMM iteration with no optimality guarantee.
pub fn solve_pssv_lrr(
    x: &DMatrix<f64>,
    lambda: f64,
    protected: usize,
    cfg: &SolverConfig,
) -> Result<SolverSolution> {
    ensure_finite(x, "data matrix")?;
    if protected > x.ncols() {
        return Err(Error::domain(format!(
            "protected rank {protected} exceeds n = {}",
            x.ncols()
        )));
    }
    run(x, lambda, Shrinkage::Partial(protected), cfg)
}

fn run(
    x: &DMatrix<f64>,
    lambda: f64,
    shrink: Shrinkage<'_>,
    cfg: &SolverConfig,
) -> Result<SolverSolution> {
    cfg.validate()?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
    }
    let (m, n) = x.shape();
    if n == 0 {
        return Ok(SolverSolution::zero(m, n));
    }

    let xt = x.transpose();
    let xtx = &xt * x;
    let gram = DMatrix::<f64>::identity(n, n) + &xtx;
    let factor = gram
        .cholesky()
        .ok_or_else(|| Error::domain("I + XᵀX is not positive definite"))?;

    let mut z = DMatrix::<f64>::zeros(n, n);
    let mut e = DMatrix::<f64>::zeros(m, n);
    let mut y1 = DMatrix::<f64>::zeros(m, n);
    let mut y2 = DMatrix::<f64>::zeros(n, n);
    let mut mu = cfg.mu0;

    let mut history = Vec::new();
    let mut mu_history = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    while iterations < cfg.max_iters {
        iterations += 1;
        mu_history.push(mu);

        let j = shrink.apply(&(&z + &y2 / mu), mu)?;

        let rhs = &xtx - &xt * &e + &j + (&xt * &y1 - &y2) / mu;
        z = factor.solve(&rhs);

        let xz = x * &z;
        e = prox::l21_prox(&(x - &xz + &y1 / mu), lambda / mu);

        let feasibility = x - &xz - &e;
        let split = &z - &j;
        y1 += &feasibility * mu;
        y2 += &split * mu;
        mu = (cfg.rho * mu).min(cfg.mu_max);

        check_finite(iterations, "Z", &z)?;
        check_finite(iterations, "E", &e)?;
        check_finite(iterations, "Y1", &y1)?;
        check_finite(iterations, "Y2", &y2)?;

        let r_feas = max_abs(&feasibility);
        let r_split = max_abs(&split);
        history.push(r_feas.max(r_split));
        if iterations % 100 == 0 {
            log::debug!(
                "admm iter {iterations}: mu = {mu:.3e}, |X-XZ-E|inf = {r_feas:.3e}, |Z-J|inf = {r_split:.3e}"
            );
        }
        if r_feas < cfg.eps && r_split < cfg.eps {
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
