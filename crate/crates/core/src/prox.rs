//! Scalar and spectral shrinkage operators.
//!
//! Every spectral operator takes one SVD of its input, maps the singular
//! values and reassembles with the input's singular vectors. Results depend
//! only on the reconstructed matrix, so rotations the SVD backend picks
//! inside blocks of equal singular values are irrelevant.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::SingularTriplet;

/// Singular values below this fraction of the largest are zero when forming weights.
pub const WEIGHT_CUTOFF: f64 = 1e-12;

/// Non-negative, non-ascending penalty weights for the singular values.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if let Some(i) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::domain(format!(
                "weight {i} is {} (must be finite and non-negative)",
                weights[i]
            )));
        }
        if let Some(i) = weights.windows(2).position(|p| p[1] > p[0]) {
            return Err(Error::Precondition(format!(
                "weights ascend at index {} ({} < {}); only non-ascending weights give a convex problem",
                i + 1,
                weights[i],
                weights[i + 1]
            )));
        }
        Ok(WeightVector(weights))
    }

    pub fn constant(value: f64, len: usize) -> Result<Self> {
        Self::new(vec![value; len])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// `S_eps(x)`: shrink `x` towards zero by `eps`.
pub fn soft_threshold(x: f64, eps: f64) -> f64 {
    if x > eps {
        x - eps
    } else if x < -eps {
        x + eps
    } else {
        0.0
    }
}

/// Best rank-`r` approximation of `d` in Frobenius norm (hard thresholding).
pub fn truncated_svd(d: &DMatrix<f64>, r: usize) -> Result<DMatrix<f64>> {
    let full = d.nrows().min(d.ncols());
    if r > full {
        return Err(Error::domain(format!(
            "rank {r} exceeds min(m, n) = {full}"
        )));
    }
    let svd = SingularTriplet::decompose(d);
    let values = DVector::from_fn(full, |i, _| if i < r { svd.values[i] } else { 0.0 });
    Ok(svd.reassemble(&values))
}

/// Proximal map of `tau·‖·‖_*`: soft-thresholds every singular value by `tau`.
pub fn svt(y: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    assert!(tau >= 0.0, "svt threshold must be non-negative, got {tau}");
    let svd = SingularTriplet::decompose(y);
    let shrunk = svd.values.map(|s| soft_threshold(s, tau));
    svd.reassemble(&shrunk)
}

/// Solves `min Σ wᵢδᵢ + (mu/2)Σ(δᵢ − σᵢ)²` over `δ₁ ≥ … ≥ δᵣ ≥ 0`.
///
/// The objective equals `(mu/2)Σ(δᵢ − tᵢ)²` up to a constant with
/// `tᵢ = σᵢ − wᵢ/mu`, so the minimizer is the antitonic regression of `t`
/// (pool adjacent violators) clipped at zero.
pub fn weighted_shrink(sigma: &[f64], weights: &[f64], mu: f64) -> Vec<f64> {
    assert_eq!(sigma.len(), weights.len());
    let targets = sigma.iter().zip(weights).map(|(s, w)| s - w / mu);
    let mut fitted = pool_non_increasing(targets);
    for v in &mut fitted {
        *v = v.max(0.0);
    }
    fitted
}

/// Least-squares fit of a non-increasing sequence with unit weights.
fn pool_non_increasing(values: impl Iterator<Item = f64>) -> Vec<f64> {
    // (sum, count) per pooled block
    let mut blocks: Vec<(f64, usize)> = Vec::new();
    for v in values {
        let mut sum = v;
        let mut count = 1;
        while let Some(&(prev_sum, prev_count)) = blocks.last() {
            if prev_sum / (prev_count as f64) < sum / (count as f64) {
                sum += prev_sum;
                count += prev_count;
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push((sum, count));
    }
    blocks
        .into_iter()
        .flat_map(|(sum, count)| std::iter::repeat_n(sum / count as f64, count))
        .collect()
}

/// Proximal map of the weighted nuclear norm:
/// `argmin_X ‖X‖_{w,*} + (mu/2)‖Y − X‖²_F`.
///
/// Only the first `min(m, n)` weights are used.
pub fn weighted_svt(y: &DMatrix<f64>, weights: &WeightVector, mu: f64) -> Result<DMatrix<f64>> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::domain(format!("mu must be positive and finite, got {mu}")));
    }
    let r = y.nrows().min(y.ncols());
    if weights.len() < r {
        return Err(Error::domain(format!(
            "{} weights supplied for {r} singular values",
            weights.len()
        )));
    }
    let svd = SingularTriplet::decompose(y);
    let shrunk = weighted_shrink(svd.values.as_slice(), &weights.as_slice()[..r], mu);
    Ok(svd.reassemble(&DVector::from_vec(shrunk)))
}

/// Proximal map of `tau·Σ_{i>N} σᵢ`: the top `protected` singular values are
/// kept, the rest are soft-thresholded by `tau`.
pub fn partial_svt(y: &DMatrix<f64>, protected: usize, tau: f64) -> Result<DMatrix<f64>> {
    let r = y.nrows().min(y.ncols());
    if protected > r {
        return Err(Error::domain(format!(
            "protected rank {protected} exceeds min(m, n) = {r}"
        )));
    }
    if tau.is_nan() || tau < 0.0 {
        return Err(Error::domain(format!("threshold must be non-negative, got {tau}")));
    }
    let svd = SingularTriplet::decompose(y);
    let values = DVector::from_fn(r, |i, _| {
        if i < protected {
            svd.values[i]
        } else {
            soft_threshold(svd.values[i], tau)
        }
    });
    Ok(svd.reassemble(&values))
}

/// Proximal map of `tau·‖·‖₂,₁`: each column is shrunk towards zero by `tau`
/// in Euclidean norm.
pub fn l21_prox(q: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    assert!(tau >= 0.0, "l2,1 threshold must be non-negative, got {tau}");
    let mut out = q.clone();
    for mut col in out.column_iter_mut() {
        let norm = col.norm();
        if norm > tau {
            col *= 1.0 - tau / norm;
        } else {
            col.fill(0.0);
        }
    }
    out
}

/// Weights `wᵢ = σᵢ(X)^gamma`, zero-padded (or one-padded when `gamma = 0`)
/// up to `length`.
///
/// Singular values below `WEIGHT_CUTOFF·σ₁` count as zero, and `0⁰ = 1`, so
/// `gamma = 0` always yields the plain nuclear norm.
pub fn compute_weights(x: &DMatrix<f64>, gamma: f64, length: usize) -> Result<WeightVector> {
    if !(gamma >= 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be non-negative, got {gamma}")));
    }
    let sigma = crate::linalg::singular_values(x);
    let cutoff = sigma.get(0).copied().unwrap_or(0.0) * WEIGHT_CUTOFF;
    let power = |s: f64| {
        if gamma == 0.0 {
            1.0
        } else if s <= cutoff {
            0.0
        } else {
            s.powf(gamma)
        }
    };
    let mut weights = Vec::with_capacity(length);
    let mut running = f64::INFINITY;
    for i in 0..length {
        let w = power(sigma.get(i).copied().unwrap_or(0.0));
        running = running.min(w);
        weights.push(running);
    }
    WeightVector::new(weights)
}

/// `‖X‖_{w,*} + (mu/2)‖Y − X‖²_F`, the objective minimized by [`weighted_svt`].
pub fn weighted_prox_objective(
    x: &DMatrix<f64>,
    y: &DMatrix<f64>,
    weights: &WeightVector,
    mu: f64,
) -> f64 {
    weighted_nuclear_norm(x, weights) + 0.5 * mu * (y - x).norm_squared()
}

pub fn weighted_nuclear_norm(x: &DMatrix<f64>, weights: &WeightVector) -> f64 {
    crate::linalg::singular_values(x)
        .iter()
        .zip(weights.as_slice())
        .map(|(s, w)| s * w)
        .sum()
}

pub fn nuclear_norm(x: &DMatrix<f64>) -> f64 {
    crate::linalg::singular_values(x).sum()
}

/// Sum of column Euclidean norms.
pub fn l21_norm(e: &DMatrix<f64>) -> f64 {
    e.column_iter().map(|c| c.norm()).sum()
}
