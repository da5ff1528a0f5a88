//! Solvers for the low-rank representation family.
//!
//! All variants solve `min R(Z) + λ‖E‖₂,₁ s.t. X = XZ + E` with the data
//! matrix as its own dictionary, differing in the regularizer `R` and the
//! splitting scheme.

mod admm;
mod config;
mod ladmm;

use nalgebra::DMatrix;
use serde::Serialize;

pub use admm::{solve_lrr, solve_pssv_lrr, solve_wnnm_lrr_admm};
pub use config::{default_lambda, SolverConfig, Variant};
pub use ladmm::solve_wnnm_lrr_ladmm;

use crate::error::{Error, Result};
use crate::linalg::ensure_finite;
use crate::prox::{self, WeightVector};

/// Data matrix (one sample per column) plus the singular-value weights.
#[derive(Debug, Clone)]
pub struct LrrProblem {
    x: DMatrix<f64>,
    weights: WeightVector,
}

impl LrrProblem {
    pub fn new(x: DMatrix<f64>, weights: WeightVector) -> Result<Self> {
        ensure_finite(&x, "data matrix")?;
        if weights.len() != x.ncols() {
            return Err(Error::domain(format!(
                "weight vector has length {}, expected n = {}",
                weights.len(),
                x.ncols()
            )));
        }
        Ok(LrrProblem { x, weights })
    }

    /// Builds the problem with weights `σᵢ(X)^gamma`.
    pub fn with_gamma(x: DMatrix<f64>, gamma: f64) -> Result<Self> {
        let weights = prox::compute_weights(&x, gamma, x.ncols())?;
        Self::new(x, weights)
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn weights(&self) -> &WeightVector {
        &self.weights
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverSolution {
    #[serde(skip)]
    pub z: DMatrix<f64>,
    #[serde(skip)]
    pub e: DMatrix<f64>,
    pub iterations: usize,
    /// Feasibility residual after each iteration, in the norm the
    /// algorithm's stopping rule uses.
    pub primal_residual_history: Vec<f64>,
    /// Penalty parameter used by each iteration.
    pub mu_history: Vec<f64>,
    pub converged: bool,
}

impl SolverSolution {
    fn zero(m: usize, n: usize) -> Self {
        SolverSolution {
            z: DMatrix::zeros(n, n),
            e: DMatrix::zeros(m, n),
            iterations: 0,
            primal_residual_history: Vec::new(),
            mu_history: Vec::new(),
            converged: true,
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.primal_residual_history.last().copied().unwrap_or(0.0)
    }
}

/// Runs the solver selected by `cfg.variant` with weights derived from `cfg.gamma`.
pub fn solve(x: &DMatrix<f64>, cfg: &SolverConfig) -> Result<SolverSolution> {
    let lambda = cfg.resolved_lambda(x.ncols());
    match cfg.variant {
        Variant::WnnmAdmm => solve_wnnm_lrr_admm(&LrrProblem::with_gamma(x.clone(), cfg.gamma)?, cfg),
        Variant::WnnmLadmm => {
            solve_wnnm_lrr_ladmm(&LrrProblem::with_gamma(x.clone(), cfg.gamma)?, cfg)
        }
        Variant::NnmLrr => solve_lrr(x, lambda, cfg),
        Variant::PssvLrr(protected) => solve_pssv_lrr(x, lambda, protected, cfg),
    }
}

/// `‖Z‖_{w,*} + λ‖E‖₂,₁`.
pub fn objective(z: &DMatrix<f64>, e: &DMatrix<f64>, weights: &WeightVector, lambda: f64) -> f64 {
    prox::weighted_nuclear_norm(z, weights) + lambda * prox::l21_norm(e)
}

fn check_finite(iteration: usize, what: &'static str, m: &DMatrix<f64>) -> Result<()> {
    if crate::linalg::all_finite(m) {
        Ok(())
    } else {
        Err(Error::Numerical { iteration, what })
    }
}
