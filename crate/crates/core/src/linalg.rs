//! Dense solves and spectral-radius estimation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Reciprocal 1-norm condition number below which a matrix is treated as
/// singular.
pub(crate) const RCOND_THRESHOLD: f64 = 1e-12;

const POWER_MAX_ITER: usize = 1000;

fn norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Inverse by LU with partial pivoting, with its reciprocal 1-norm
/// condition number `1 / (||M||_1 ||M^-1||_1)`. `None` when the
/// factorization hits an exactly zero pivot.
pub(crate) fn inverse_with_rcond(m: &DMatrix<f64>) -> Option<(DMatrix<f64>, f64)> {
    let inv = m.clone().lu().try_inverse()?;
    let denom = norm1(m) * norm1(&inv);
    let rcond = if denom.is_finite() && denom > 0.0 {
        1.0 / denom
    } else {
        0.0
    };
    Some((inv, rcond))
}

/// Solves `M x = b` by LU with partial pivoting.
pub(crate) fn solve(m: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    m.clone().lu().solve(b)
}

/// Power-iteration estimate of the spectral radius of a nonnegative matrix,
/// bracketed by Collatz-Wielandt bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Estimates `rho(M)` for nonnegative `M`.
///
/// Iterates on `(I + M) / 2`, which shares the Perron vector of `M` but has a
/// positive diagonal, so the iterate stays strictly positive and the bounds
/// `min_i (Mx)_i / x_i <= rho(M) <= max_i (Mx)_i / x_i` hold at every step.
/// Stops when the bracket is narrower than `1e-12` (relative) or after 1000
/// iterations.
pub fn spectral_radius(m: &DMatrix<f64>) -> SpectralEstimate {
    let n = m.nrows();
    if n == 0 {
        return SpectralEstimate {
            estimate: 0.0,
            lower: 0.0,
            upper: 0.0,
            iterations: 0,
        };
    }
    let max_row_sum = m.row_iter().map(|r| r.sum()).fold(0.0, f64::max);
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut lower = 0.0;
    let mut upper = max_row_sum;
    let mut iterations = 0;
    for it in 1..=POWER_MAX_ITER {
        iterations = it;
        let mx = m * &x;
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            let r = mx[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        lower = f64::max(lower, lo);
        upper = upper.min(hi);
        if upper - lower <= 1e-12 * upper.max(1.0) {
            break;
        }
        x = (&x + &mx) * 0.5;
        let s = x.sum();
        x /= s;
    }
    SpectralEstimate {
        estimate: 0.5 * (lower + upper),
        lower,
        upper,
        iterations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn half_swap_has_radius_one_half() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.5, 0.5, 0.0]);
        let est = spectral_radius(&m);
        assert!((est.estimate - 0.5).abs() < 1e-12);
        assert!(est.lower <= 0.5 + 1e-15 && est.upper >= 0.5 - 1e-15);
    }

    #[test]
    fn bracket_contains_radius_of_triangular_matrix() {
        // eigenvalues are the diagonal: 0.3, 0.7
        let m = DMatrix::from_row_slice(2, 2, &[0.3, 0.2, 0.0, 0.7]);
        let est = spectral_radius(&m);
        assert!(est.lower <= 0.7 + 1e-12 && est.upper >= 0.7 - 1e-12);
        assert!((est.estimate - 0.7).abs() < 1e-6);
    }

    #[test]
    fn periodic_stochastic_matrix_has_radius_one() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let est = spectral_radius(&m);
        assert!((est.estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rcond_flags_singular_matrix() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]);
        assert!(inverse_with_rcond(&m).is_none_or(|(_, r)| r < RCOND_THRESHOLD));
        let (inv, rcond) = inverse_with_rcond(&DMatrix::identity(3, 3)).unwrap();
        assert_eq!(inv, DMatrix::identity(3, 3));
        assert_eq!(rcond, 1.0);
    }
}
