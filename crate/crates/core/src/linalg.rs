//! Small dense linear-algebra helpers shared by the operators and solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A thin singular value decomposition with values sorted non-increasing.
#[derive(Debug, Clone)]
pub struct SingularTriplet {
    /// m×r matrix with orthonormal columns.
    pub left_vectors: DMatrix<f64>,
    /// Length-r, non-negative, non-increasing.
    pub values: DVector<f64>,
    /// n×r matrix with orthonormal columns.
    pub right_vectors: DMatrix<f64>,
}

impl SingularTriplet {
    /// Decomposes `a` into `U diag(s) Vᵀ` with `r = min(m, n)` triplets.
    pub fn decompose(a: &DMatrix<f64>) -> Self {
        let (m, n) = a.shape();
        let r = m.min(n);
        if r == 0 {
            return SingularTriplet {
                left_vectors: DMatrix::zeros(m, 0),
                values: DVector::zeros(0),
                right_vectors: DMatrix::zeros(n, 0),
            };
        }
        let svd = a.clone().svd(true, true);
        let u = svd.u.expect("left singular vectors requested");
        let v_t = svd.v_t.expect("right singular vectors requested");
        let s = svd.singular_values;

        let mut order: Vec<usize> = (0..r).collect();
        // Stable sort keeps the backend order among equal values.
        order.sort_by(|&i, &j| s[j].total_cmp(&s[i]));

        let mut left = DMatrix::zeros(m, r);
        let mut right = DMatrix::zeros(n, r);
        let mut values = DVector::zeros(r);
        for (dst, &src) in order.iter().enumerate() {
            left.set_column(dst, &u.column(src));
            right.set_column(dst, &v_t.row(src).transpose());
            values[dst] = s[src].max(0.0);
        }
        SingularTriplet {
            left_vectors: left,
            values,
            right_vectors: right,
        }
    }

    pub fn rank(&self) -> usize {
        self.values.len()
    }

    /// Rebuilds `U diag(values) Vᵀ` with replacement singular values.
    pub fn reassemble(&self, values: &DVector<f64>) -> DMatrix<f64> {
        assert_eq!(values.len(), self.rank());
        let mut scaled = self.left_vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= values[j];
        }
        scaled * self.right_vectors.transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.reassemble(&self.values)
    }
}

/// Singular values of `a`, sorted non-increasing.
pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.nrows().min(a.ncols()) == 0 {
        return DVector::zeros(0);
    }
    let mut s: Vec<f64> = a.singular_values().iter().map(|v| v.max(0.0)).collect();
    s.sort_by(|x, y| y.total_cmp(x));
    DVector::from_vec(s)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

pub fn all_finite(a: &DMatrix<f64>) -> bool {
    a.iter().all(|v| v.is_finite())
}

pub(crate) fn ensure_finite(a: &DMatrix<f64>, what: &str) -> Result<()> {
    if all_finite(a) {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} contains non-finite entries")))
    }
}

/// `‖a − b‖_F / ‖b‖_F`, or the absolute difference when `b` is zero.
pub fn relative_frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let diff = (a - b).norm();
    let base = b.norm();
    if base > 0.0 {
        diff / base
    } else {
        diff
    }
}
