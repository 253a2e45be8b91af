//! Inverse design: which `{A, X(0)}` reach a target end state `X(inf)`.
//!
//! At a fixed point `X(inf) = A W X(inf) + (I - A) X(0)`, so
//!
//! * given `{W, A, X(inf)}` with `0 < A < I` the initial state is unique,
//!   `X(0) = (I - A)^-1 (I - AW) X(inf)`;
//! * given `{W, X(0), X(inf)}` each `a_ii` must solve the scalar equations
//!   `x_ih(inf) - x_ih(0) = a_ii [(W X(inf))_ih - x_ih(0)]` for every
//!   dimension `h` at once, which may have no solution in `(0, 1)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::dynamics::closed_form_limit;
use crate::error::{Error, Result};
use crate::matrix::{check_state_rows, DampingMatrix, InfluenceMatrix, StateMatrix};

/// A feasible `{A, X(0)}` pair for a target end state.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub a: DampingMatrix,
    pub x0: StateMatrix,
    /// Max-abs difference between the target and the closed-form limit of
    /// `{W, A, X(0)}`.
    pub residual: f64,
}

/// Per-node verdict of [`solve_damping`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Diagnosis {
    Ok,
    ZeroDenominator,
    SignMismatch,
    MagnitudeExceeded,
    CrossDimensionInconsistent,
    /// The solved `a_ii` is 0 or 1 (within `interval_eps`).
    Boundary,
}

impl Diagnosis {
    pub fn as_str(self) -> &'static str {
        match self {
            Diagnosis::Ok => "ok",
            Diagnosis::ZeroDenominator => "zero-denominator",
            Diagnosis::SignMismatch => "sign-mismatch",
            Diagnosis::MagnitudeExceeded => "magnitude-exceeded",
            Diagnosis::CrossDimensionInconsistent => "cross-dimension-inconsistent",
            Diagnosis::Boundary => "boundary",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeDiagnosis {
    pub node: usize,
    pub diagnosis: Diagnosis,
    /// Solved `a_ii` (mean of the per-dimension candidates), when defined.
    pub a: Option<f64>,
    /// Dimension that triggered a failure, if any.
    pub dimension: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    /// The damping vector; present only when feasible.
    pub a: Option<Vec<f64>>,
    pub per_node: Vec<NodeDiagnosis>,
}

/// Tolerances used by [`solve_damping`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityTolerances {
    /// `a_ii` must lie in `(eps, 1 - eps)`.
    pub interval_eps: f64,
    /// Per-dimension candidates for one node must agree within this.
    pub consistency_eps: f64,
    /// Numerators and denominators with magnitude at most
    /// `zero_eps * max(1, max|X(0)|, max|X(inf)|)` count as zero.
    pub zero_eps: f64,
}

impl Default for FeasibilityTolerances {
    fn default() -> Self {
        FeasibilityTolerances {
            interval_eps: 1e-9,
            consistency_eps: 1e-7,
            zero_eps: 1e-12,
        }
    }
}

/// `x_ih(0) = (x_ih(inf) - a_ii (W X(inf))_ih) / (1 - a_ii)`; callers check
/// `a_ii != 1`.
fn initial_for(w: &InfluenceMatrix, a: &[f64], x_inf: &DMatrix<f64>) -> DMatrix<f64> {
    let wx = w.as_matrix() * x_inf;
    DMatrix::from_fn(x_inf.nrows(), x_inf.ncols(), |i, h| {
        (x_inf[(i, h)] - a[i] * wx[(i, h)]) / (1.0 - a[i])
    })
}

fn forward_residual(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    x0: &StateMatrix,
    target: &StateMatrix,
) -> Result<f64> {
    let lim = closed_form_limit(w, a, x0)?;
    Ok(lim.x_inf.max_abs_diff(target))
}

fn require_interior(a: &DampingMatrix) -> Result<()> {
    match a.first_non_interior() {
        Some((node, value)) => Err(Error::NotStrictInterior {
            node: node + 1,
            value,
        }),
        None => Ok(()),
    }
}

/// The unique `X(0) = (I - A)^-1 (I - AW) X(inf)` for strictly interior `A`.
pub fn solve_initial(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    x_inf: &StateMatrix,
) -> Result<StateMatrix> {
    crate::matrix::check_dims(w, a, x_inf)?;
    require_interior(a)?;
    Ok(StateMatrix::from_matrix_unchecked(initial_for(
        w,
        a.as_slice(),
        x_inf.as_matrix(),
    )))
}

/// Member of the infinite family of `{A, X(0)}` reaching `x_inf`, selected by
/// the damping vector `a` (each entry in `(0, 1)`).
pub fn design_family(
    w: &InfluenceMatrix,
    x_inf: &StateMatrix,
    a: &[f64],
) -> Result<DesignSolution> {
    let a = DampingMatrix::new(a.to_vec())?;
    let x0 = solve_initial(w, &a, x_inf)?;
    let residual = forward_residual(w, &a, &x0, x_inf)?;
    Ok(DesignSolution { a, x0, residual })
}

/// The `A = I/2` member: `x_ih(0) = 2 x_ih(inf) - (W X(inf))_ih`.
pub fn unbiased_design(w: &InfluenceMatrix, x_inf: &StateMatrix) -> Result<DesignSolution> {
    check_state_rows(w, x_inf)?;
    let xm = x_inf.as_matrix();
    let wx = w.as_matrix() * xm;
    let x0 = StateMatrix::from_matrix_unchecked(xm * 2.0 - wx);
    let a = DampingMatrix::uniform(w.n(), 0.5)?;
    let residual = forward_residual(w, &a, &x0, x_inf)?;
    Ok(DesignSolution { a, x0, residual })
}

/// `alpha + beta * X`, entrywise.
pub fn affine_map(x: &StateMatrix, alpha: f64, beta: f64) -> StateMatrix {
    StateMatrix::from_matrix_unchecked(x.as_matrix().map(|v| alpha + beta * v))
}

/// Solves for the damping values that carry `x0` to `x_inf` under `w`.
///
/// For node `i` and dimension `h` the candidate is
/// `(x_ih(inf) - x_ih(0)) / ((W X(inf))_ih - x_ih(0))`. Dimensions where both
/// parts are zero place no constraint on `a_ii`. A node is feasible when
/// every remaining candidate is defined, nonnegative, at most 1 in
/// magnitude, the candidates agree, and their mean lies strictly inside
/// `(0, 1)`. A node with no constraining dimension gets `a_ii = 0.5`.
pub fn solve_damping(
    w: &InfluenceMatrix,
    x0: &StateMatrix,
    x_inf: &StateMatrix,
    tol: &FeasibilityTolerances,
) -> Result<FeasibilityReport> {
    check_state_rows(w, x0)?;
    check_state_rows(w, x_inf)?;
    if x0.m() != x_inf.m() {
        return Err(Error::dims(format!(
            "X(0) has {} columns but X(inf) has {}",
            x0.m(),
            x_inf.m()
        )));
    }
    let (xs, xt) = (x0.as_matrix(), x_inf.as_matrix());
    let wx = w.as_matrix() * xt;
    let scale = xs
        .iter()
        .chain(xt.iter())
        .fold(1.0f64, |s, v| s.max(v.abs()));
    let zero = tol.zero_eps * scale;

    let per_node: Vec<NodeDiagnosis> = (0..w.n())
        .map(|i| {
            let mut candidates = Vec::with_capacity(xs.ncols());
            for h in 0..xs.ncols() {
                let num = xt[(i, h)] - xs[(i, h)];
                let den = wx[(i, h)] - xs[(i, h)];
                let fail = |diagnosis| NodeDiagnosis {
                    node: i,
                    diagnosis,
                    a: None,
                    dimension: Some(h),
                };
                if den.abs() <= zero {
                    if num.abs() <= zero {
                        continue;
                    }
                    return fail(Diagnosis::ZeroDenominator);
                }
                let num = if num.abs() <= zero { 0.0 } else { num };
                if num != 0.0 && num.signum() != den.signum() {
                    return fail(Diagnosis::SignMismatch);
                }
                if num.abs() > den.abs() {
                    return fail(Diagnosis::MagnitudeExceeded);
                }
                candidates.push((h, num / den));
            }
            if candidates.is_empty() {
                return NodeDiagnosis {
                    node: i,
                    diagnosis: Diagnosis::Ok,
                    a: Some(0.5),
                    dimension: None,
                };
            }
            let lo = candidates.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
            let hi = candidates
                .iter()
                .map(|c| c.1)
                .fold(f64::NEG_INFINITY, f64::max);
            let mean = candidates.iter().map(|c| c.1).sum::<f64>() / candidates.len() as f64;
            if hi - lo > tol.consistency_eps {
                let worst = candidates
                    .iter()
                    .max_by(|x, y| (x.1 - mean).abs().total_cmp(&(y.1 - mean).abs()))
                    .map(|c| c.0);
                return NodeDiagnosis {
                    node: i,
                    diagnosis: Diagnosis::CrossDimensionInconsistent,
                    a: None,
                    dimension: worst,
                };
            }
            let diagnosis = if mean <= tol.interval_eps || mean >= 1.0 - tol.interval_eps {
                Diagnosis::Boundary
            } else {
                Diagnosis::Ok
            };
            NodeDiagnosis {
                node: i,
                diagnosis,
                a: Some(mean),
                dimension: None,
            }
        })
        .collect();

    let feasible = per_node.iter().all(|d| d.diagnosis == Diagnosis::Ok);
    let a = feasible.then(|| per_node.iter().map(|d| d.a.unwrap_or(0.5)).collect());
    Ok(FeasibilityReport {
        feasible,
        a,
        per_node,
    })
}
