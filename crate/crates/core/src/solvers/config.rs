use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which model and algorithm a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    /// Weighted nuclear norm, ADMM with an auxiliary split variable.
    WnnmAdmm,
    /// Weighted nuclear norm, linearized ADMM without the split variable.
    WnnmLadmm,
    /// Plain nuclear norm baseline.
    NnmLrr,
    /// Partial sum of singular values with the given number of protected values.
    PssvLrr(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Weight of the ‖E‖₂,₁ term; `None` resolves to `1/√ln n`.
    pub lambda: Option<f64>,
    /// Exponent of the singular-value weights.
    pub gamma: f64,
    pub mu0: f64,
    pub mu_max: f64,
    pub rho: f64,
    /// ADMM stopping tolerance on the ∞-norm residuals.
    pub eps: f64,
    /// LADMM tolerance on the relative feasibility residual.
    pub eps1: f64,
    /// LADMM tolerance on the relative iterate change.
    pub eps2: f64,
    /// LADMM linearization constant; `None` resolves to `1.02·σ²_max(X)`.
    pub eta: Option<f64>,
    /// LADMM initial penalty; `None` resolves to `min(1e-2, 1/‖X‖₂)`.
    pub ladmm_mu0: Option<f64>,
    pub ladmm_mu_max: f64,
    /// LADMM penalty growth factor applied when iterates have settled.
    pub rho0: f64,
    pub max_iters: usize,
    pub variant: Variant,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: None,
            gamma: 1.0 / 3.0,
            mu0: 1e-6,
            mu_max: 1e6,
            rho: 1.1,
            eps: 1e-8,
            eps1: 1e-6,
            eps2: 1e-5,
            eta: None,
            ladmm_mu0: None,
            ladmm_mu_max: 1e10,
            rho0: 1.9,
            max_iters: 1000,
            variant: Variant::WnnmAdmm,
        }
    }
}

impl SolverConfig {
    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::domain(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("mu0", self.mu0)?;
        positive("eps", self.eps)?;
        positive("eps1", self.eps1)?;
        positive("eps2", self.eps2)?;
        if let Some(l) = self.lambda {
            positive("lambda", l)?;
        }
        if let Some(m) = self.ladmm_mu0 {
            positive("ladmm_mu0", m)?;
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(Error::domain(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.mu_max.is_nan() || self.mu_max < self.mu0 {
            return Err(Error::domain(format!(
                "mu_max ({}) must be at least mu0 ({})",
                self.mu_max, self.mu0
            )));
        }
        if self.rho.is_nan() || self.rho <= 1.0 || self.rho0.is_nan() || self.rho0 <= 1.0 {
            return Err(Error::domain(format!(
                "growth factors must exceed 1 (rho = {}, rho0 = {})",
                self.rho, self.rho0
            )));
        }
        if self.ladmm_mu_max.is_nan() || self.ladmm_mu_max <= 0.0 {
            return Err(Error::domain("ladmm_mu_max must be positive"));
        }
        Ok(())
    }

    /// `λ` for a problem with `n` samples.
    pub fn resolved_lambda(&self, n: usize) -> f64 {
        self.lambda.unwrap_or_else(|| default_lambda(n))
    }
}

/// `1/√ln n`; falls back to 1 when `n < 2` where the logarithm vanishes.
pub fn default_lambda(n: usize) -> f64 {
    if n < 2 {
        1.0
    } else {
        1.0 / (n as f64).ln().sqrt()
    }
}
