//! Net-influence centrality.
//!
//! `v_ij` of the limit matrix `V` is the share of node `j`'s initial state in
//! node `i`'s final state, so the column means `r = (1/n) V^T 1` measure each
//! node's average net influence and sum to 1.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg;
use crate::matrix::InfluenceMatrix;
use crate::structure::structure_class;

const ROW_STOCHASTIC_TOL: f64 = 1e-10;
const POWER_TOL: f64 = 1e-12;
const POWER_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct CentralityVector(Vec<f64>);

impl CentralityVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `(node, score)` pairs, highest score first; ties keep index order.
    pub fn ranked(&self) -> Vec<(usize, f64)> {
        let mut r: Vec<(usize, f64)> = self.0.iter().copied().enumerate().collect();
        r.sort_by(|x, y| y.1.total_cmp(&x.1));
        r
    }
}

/// `r = (1/n) V^T 1`, the column means of a row-stochastic `V`.
pub fn net_influence(v: &DMatrix<f64>) -> Result<CentralityVector> {
    let (n, cols) = v.shape();
    if n != cols || n == 0 {
        return Err(Error::dims(format!(
            "V must be square and nonempty, got {n}x{cols}"
        )));
    }
    for (i, row) in v.row_iter().enumerate() {
        let sum = row.sum();
        if (sum - 1.0).abs() > ROW_STOCHASTIC_TOL || row.iter().any(|&x| x < -ROW_STOCHASTIC_TOL) {
            return Err(Error::Structure(format!(
                "V is not row-stochastic: row {} sums to {sum}",
                i + 1
            )));
        }
    }
    let r = v.row_mean().transpose();
    Ok(CentralityVector(r.as_slice().to_vec()))
}

/// The `A = alpha I` case: solves `(I - alpha W^T) r = (1 - alpha)/n 1`
/// directly, which is the fixed point `r = (1 - alpha)/n + alpha W^T r`.
pub fn alpha_centrality(w: &InfluenceMatrix, alpha: f64) -> Result<CentralityVector> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    let n = w.n();
    let lhs = DMatrix::identity(n, n) - w.as_matrix().transpose() * alpha;
    let rhs = DVector::from_element(n, (1.0 - alpha) / n as f64);
    let r = linalg::solve(&lhs, &rhs)
        .ok_or_else(|| Error::Structure("I - alpha W^T is singular".into()))?;
    Ok(CentralityVector(r.as_slice().to_vec()))
}

/// Left Perron vector of an irreducible aperiodic `W`, L1-normalized: the
/// common row of `lim W^k`.
///
/// Power iteration on `W^T` from the uniform vector; stops when the relative
/// L1 change falls below `1e-12` or after `10^5` iterations.
pub fn perron_centrality(w: &InfluenceMatrix) -> Result<CentralityVector> {
    let s = structure_class(w);
    if !s.is_primitive() {
        return Err(Error::Structure(format!(
            "perron centrality needs an irreducible aperiodic W; W is {}",
            s.describe()
        )));
    }
    let n = w.n();
    let wt = w.as_matrix().transpose();
    let mut r = DVector::from_element(n, 1.0 / n as f64);
    for _ in 0..POWER_MAX_ITER {
        let mut next = &wt * &r;
        let total = next.sum();
        next /= total;
        let change = (&next - &r).lp_norm(1) / next.lp_norm(1);
        r = next;
        if change < POWER_TOL {
            break;
        }
    }
    Ok(CentralityVector(r.as_slice().to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn w(rows: &[&[f64]]) -> InfluenceMatrix {
        InfluenceMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn net_influence_examples() {
        let v = DMatrix::from_row_slice(2, 2, &[2.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
        assert_abs_diff_eq!(
            net_influence(&v).unwrap().as_slice()[0],
            0.5,
            epsilon = 1e-15
        );

        let r = net_influence(&DMatrix::identity(4, 4)).unwrap();
        assert_eq!(r.as_slice(), &[0.25; 4]);

        let p = [0.2, 0.3, 0.5];
        let v = DMatrix::from_fn(3, 3, |_, j| p[j]);
        let r = net_influence(&v).unwrap();
        for (x, y) in r.as_slice().iter().zip(p) {
            assert_abs_diff_eq!(*x, y, epsilon = 1e-15);
        }
    }

    #[test]
    fn net_influence_rejects_non_stochastic() {
        let v = DMatrix::from_row_slice(2, 2, &[0.5, 0.4, 0.0, 1.0]);
        assert!(net_influence(&v).is_err());
    }

    #[test]
    fn alpha_centrality_examples() {
        let r = alpha_centrality(&w(&[&[0.0, 1.0], &[1.0, 0.0]]), 0.5).unwrap();
        assert_abs_diff_eq!(r.as_slice()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(r.as_slice()[1], 0.5, epsilon = 1e-15);

        let ds = w(&[&[0.2, 0.3, 0.5], &[0.5, 0.2, 0.3], &[0.3, 0.5, 0.2]]);
        for alpha in [0.1, 0.5, 0.95] {
            for &x in alpha_centrality(&ds, alpha).unwrap().as_slice() {
                assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-14);
            }
        }
        assert!(alpha_centrality(&ds, 0.0).is_err());
        assert!(alpha_centrality(&ds, 1.0).is_err());
    }

    #[test]
    fn perron_centrality_examples() {
        let r = perron_centrality(&w(&[&[0.5, 0.5], &[1.0, 0.0]])).unwrap();
        assert_abs_diff_eq!(r.as_slice()[0], 2.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.as_slice()[1], 1.0 / 3.0, epsilon = 1e-12);

        let ds = w(&[&[0.2, 0.3, 0.5], &[0.5, 0.2, 0.3], &[0.3, 0.5, 0.2]]);
        for &x in perron_centrality(&ds).unwrap().as_slice() {
            assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn perron_centrality_rejects_periodic_and_reducible() {
        let err = perron_centrality(&w(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap_err();
        assert!(err.to_string().contains("period 2"));
        let err = perron_centrality(&w(&[&[1.0, 0.0], &[0.5, 0.5]])).unwrap_err();
        assert!(err.to_string().contains("unilateral"));
    }

    #[test]
    fn ranking_is_descending() {
        let r = CentralityVector(vec![0.2, 0.5, 0.3]);
        assert_eq!(
            r.ranked().iter().map(|x| x.0).collect::<Vec<_>>(),
            vec![1, 2, 0]
        );
    }
}
