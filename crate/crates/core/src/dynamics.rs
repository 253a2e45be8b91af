//! Forward evolution of `X(k+1) = A W X(k) + (I - A) X(0)`.
//!
//! The state after `k` steps is `X(k) = V(k) X(0)` with the matrix polynomial
//!
//! ```text
//! V(0) = I,    V(k) = A W V(k-1) + (I - A)
//! ```
//!
//! Every `V(k)` is row-stochastic, so every state stays in the convex hull of
//! `X(0)`. When the sequence converges and `I - AW` is nonsingular the limit
//! is `V = (I - AW)^-1 (I - A)`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SpectralEstimate, RCOND_THRESHOLD};
use crate::matrix::{check_dims, max_abs_diff, DampingMatrix, InfluenceMatrix, StateMatrix};
use crate::structure;

/// Steps without a new minimum of the per-step change before a run is
/// flagged as a suspected oscillation.
const PERIODIC_WINDOW: usize = 100;

/// `AW`: row `i` of `W` scaled by `a_ii`.
pub(crate) fn aw(w: &InfluenceMatrix, a: &DampingMatrix) -> DMatrix<f64> {
    let mut m = w.as_matrix().clone();
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= a.get(i);
    }
    m
}

/// Scales column `j` of `m` by `1 - a_jj`, i.e. returns `m (I - A)`.
fn times_one_minus_a(mut m: DMatrix<f64>, a: &DampingMatrix) -> DMatrix<f64> {
    for (j, mut col) in m.column_iter_mut().enumerate() {
        col *= 1.0 - a.get(j);
    }
    m
}

fn step_unchecked(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    xk: &DMatrix<f64>,
    x0: &DMatrix<f64>,
) -> DMatrix<f64> {
    let mut next = w.as_matrix() * xk;
    for i in 0..next.nrows() {
        let ai = a.get(i);
        for h in 0..next.ncols() {
            next[(i, h)] = ai * next[(i, h)] + (1.0 - ai) * x0[(i, h)];
        }
    }
    next
}

/// One application of the process: `A W X(k) + (I - A) X(0)`.
pub fn step(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    xk: &StateMatrix,
    x0: &StateMatrix,
) -> Result<StateMatrix> {
    check_dims(w, a, x0)?;
    if xk.n() != x0.n() || xk.m() != x0.m() {
        return Err(Error::dims(format!(
            "X(k) is {}x{} but X(0) is {}x{}",
            xk.n(),
            xk.m(),
            x0.n(),
            x0.m()
        )));
    }
    Ok(StateMatrix::from_matrix_unchecked(step_unchecked(
        w,
        a,
        xk.as_matrix(),
        x0.as_matrix(),
    )))
}

/// `V(k)` by the defining recursion.
pub fn evolve_v(w: &InfluenceMatrix, a: &DampingMatrix, k: usize) -> Result<DMatrix<f64>> {
    let n = w.n();
    if a.n() != n {
        return Err(Error::dims(format!(
            "W is {n}x{n} but a has length {}",
            a.n()
        )));
    }
    let m = aw(w, a);
    let anchor = DMatrix::from_diagonal(&a.diag().map(|v| 1.0 - v));
    let mut v = DMatrix::identity(n, n);
    for _ in 0..k {
        v = &m * &v + &anchor;
    }
    Ok(v)
}

/// `V(k)` in `O(n^3 log k)` by doubling `(S(k), P(k)) = (sum_{t<k} M^t, M^k)`
/// with `M = AW`; `V(k) = S(k)(I - A) + P(k)`.
fn v_at(m: &DMatrix<f64>, a: &DampingMatrix, k: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let combine = |(s1, p1): &(DMatrix<f64>, DMatrix<f64>),
                   (s2, p2): &(DMatrix<f64>, DMatrix<f64>)| {
        (s1 + p1 * s2, p1 * p2)
    };
    let mut acc = (DMatrix::zeros(n, n), DMatrix::identity(n, n));
    let mut base = (DMatrix::identity(n, n), m.clone());
    let mut k = k;
    while k > 0 {
        if k & 1 == 1 {
            acc = combine(&acc, &base);
        }
        k >>= 1;
        if k > 0 {
            base = combine(&base, &base);
        }
    }
    times_one_minus_a(acc.0, a) + acc.1
}

/// Which of the damping regimes a system falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceCase {
    /// `A = 0`: `V = I`.
    Identity,
    /// `A = I`: the DeGroot process `X(k) = W^k X(0)`.
    Stochastic,
    /// `0 <= A <= I` with some, but not all, `a_ii = 1`.
    SubstochasticMixed,
    /// `0 <= A < I`, `A != 0`.
    StrictlySubstochastic,
}

impl ConvergenceCase {
    pub fn as_str(self) -> &'static str {
        match self {
            ConvergenceCase::Identity => "identity",
            ConvergenceCase::Stochastic => "stochastic",
            ConvergenceCase::SubstochasticMixed => "substochastic-mixed",
            ConvergenceCase::StrictlySubstochastic => "strictly-substochastic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceClass {
    pub case: ConvergenceCase,
    pub converges: bool,
    pub reason: String,
    /// `I - AW` is nonsingular, so the closed-form limit applies.
    pub nonsingular: bool,
    /// Estimate of `rho(AW)`; only computed in the substochastic cases.
    pub spectral_radius_estimate: Option<SpectralEstimate>,
    /// Reciprocal 1-norm condition number of `I - AW`; mixed case only.
    pub rcond: Option<f64>,
}

/// Closed classes of `AW` that are stochastic carry the eigenvalue 1.
/// Returns the periods of those classes.
fn unit_classes(m: &DMatrix<f64>, a: &DampingMatrix) -> Vec<usize> {
    structure::analyze(m)
        .components
        .into_iter()
        .filter(|c| c.terminal && c.nodes.iter().all(|&i| a.get(i) == 1.0))
        .map(|c| c.period)
        .collect()
}

/// Classifies the system by its damping regime and decides convergence.
///
/// Structure decides; numerics are reported alongside. For `A = I` and the
/// mixed case, the limit exists iff every closed stochastic class of `AW` is
/// aperiodic, and `I - AW` is nonsingular iff there is no such class.
pub fn classify(w: &InfluenceMatrix, a: &DampingMatrix) -> Result<ConvergenceClass> {
    let n = w.n();
    if a.n() != n {
        return Err(Error::dims(format!(
            "W is {n}x{n} but a has length {}",
            a.n()
        )));
    }
    if a.is_zero() {
        return Ok(ConvergenceClass {
            case: ConvergenceCase::Identity,
            converges: true,
            reason: "A = 0: V = I and X(inf) = X(0)".into(),
            nonsingular: true,
            spectral_radius_estimate: None,
            rcond: None,
        });
    }
    let m = aw(w, a);
    if a.is_strictly_below_identity() {
        let max_a = a.diag().max();
        return Ok(ConvergenceClass {
            case: ConvergenceCase::StrictlySubstochastic,
            converges: true,
            reason: format!("A < I: rho(AW) <= max a_ii = {max_a} < 1"),
            nonsingular: true,
            spectral_radius_estimate: Some(linalg::spectral_radius(&m)),
            rcond: None,
        });
    }

    let periods = unit_classes(&m, a);
    let periodic: Vec<usize> = periods.iter().copied().filter(|&p| p != 1).collect();
    let converges = periodic.is_empty();
    let nonsingular = periods.is_empty();

    if a.is_identity() {
        let s = structure::analyze(&m);
        let reason = if converges {
            format!("A = I: W is {}; W^k converges", s.describe())
        } else {
            format!(
                "A = I: W is {}; eigenvalues on the unit circle other than 1, W^k oscillates",
                s.describe()
            )
        };
        return Ok(ConvergenceClass {
            case: ConvergenceCase::Stochastic,
            converges,
            reason,
            nonsingular,
            spectral_radius_estimate: None,
            rcond: None,
        });
    }

    let rcond = linalg::inverse_with_rcond(&(DMatrix::identity(n, n) - &m)).map_or(0.0, |(_, r)| r);
    let reason = if nonsingular {
        format!("some a_ii = 1: no closed stochastic class in AW, I - AW nonsingular (rcond {rcond:.3e})")
    } else if converges {
        format!(
            "some a_ii = 1: {} closed stochastic class(es) in AW, all aperiodic; limit exists but I - AW is singular",
            periods.len()
        )
    } else {
        format!("some a_ii = 1: closed stochastic class(es) in AW with periods {periodic:?}; (AW)^k oscillates")
    };
    Ok(ConvergenceClass {
        case: ConvergenceCase::SubstochasticMixed,
        converges,
        reason,
        nonsingular,
        spectral_radius_estimate: Some(linalg::spectral_radius(&m)),
        rcond: Some(rcond),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LimitMethod {
    ClosedForm,
    Iterative,
    Neumann,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LimitResult {
    pub v: DMatrix<f64>,
    pub x_inf: StateMatrix,
    pub method: LimitMethod,
}

/// `V = (I - AW)^-1 (I - A)` and `X(inf) = V X(0)`.
pub fn closed_form_limit(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    x0: &StateMatrix,
) -> Result<LimitResult> {
    check_dims(w, a, x0)?;
    let v = closed_form_v(w, a)?;
    let x_inf = StateMatrix::from_matrix_unchecked(&v * x0.as_matrix());
    Ok(LimitResult {
        v,
        x_inf,
        method: LimitMethod::ClosedForm,
    })
}

pub(crate) fn closed_form_v(w: &InfluenceMatrix, a: &DampingMatrix) -> Result<DMatrix<f64>> {
    let n = w.n();
    let lhs = DMatrix::identity(n, n) - aw(w, a);
    match linalg::inverse_with_rcond(&lhs) {
        Some((inv, rcond)) if rcond >= RCOND_THRESHOLD => Ok(times_one_minus_a(inv, a)),
        Some((_, rcond)) => Err(Error::Singular { rcond }),
        None => Err(Error::Singular { rcond: 0.0 }),
    }
}

/// Partial Neumann sum `[sum_{k=0}^{K} (AW)^k] (I - A)`.
pub fn neumann_limit(w: &InfluenceMatrix, a: &DampingMatrix, terms: usize) -> Result<DMatrix<f64>> {
    let n = w.n();
    if a.n() != n {
        return Err(Error::dims(format!(
            "W is {n}x{n} but a has length {}",
            a.n()
        )));
    }
    if let Some(node) = a.as_slice().iter().position(|&v| v >= 1.0) {
        return Err(Error::SeriesNotGuaranteed { node: node + 1 });
    }
    let m = aw(w, a);
    let eye = DMatrix::<f64>::identity(n, n);
    let mut sum = eye.clone();
    for _ in 0..terms {
        sum = &eye + &m * &sum;
    }
    Ok(times_one_minus_a(sum, a))
}

/// Stopping rule and recording stride for [`iterate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterateOptions {
    pub tol: f64,
    pub k_max: usize,
    pub record_every: usize,
}

impl IterateOptions {
    /// Defaults: `tol = 1e-10`, `k_max = 1_000_000`, and every step recorded
    /// unless the state has more than `10^4` entries (then every 10th).
    pub fn for_size(n: usize, m: usize) -> Self {
        IterateOptions {
            tol: 1e-10,
            k_max: 1_000_000,
            record_every: if n * m <= 10_000 { 1 } else { 10 },
        }
    }
}

/// Recorded run of the process.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    /// Snapshots at `steps`; always starts with `X(0)` and ends with the
    /// final state.
    pub states: Vec<StateMatrix>,
    pub steps: Vec<usize>,
    pub converged: bool,
    /// Max-abs change in the last step.
    pub final_delta: f64,
    /// Number of steps taken.
    pub iterations: usize,
    /// The change failed to reach a new minimum for 100 consecutive steps.
    pub periodic_suspect: bool,
    /// State one step before the final one.
    pub penultimate: Option<StateMatrix>,
}

impl Trajectory {
    pub fn final_state(&self) -> &StateMatrix {
        self.states.last().expect("trajectory always holds X(0)")
    }
}

/// Runs the process until the max-abs change of a step drops below `tol`
/// or `k_max` steps have been taken. The returned limit carries
/// `V(k_final)`, so `x_inf = V x0` holds at the stopping step.
pub fn iterate(
    w: &InfluenceMatrix,
    a: &DampingMatrix,
    x0: &StateMatrix,
    opts: &IterateOptions,
) -> Result<(Trajectory, LimitResult)> {
    check_dims(w, a, x0)?;
    if opts.tol <= 0.0 || opts.tol.is_nan() {
        return Err(Error::OutOfRange {
            name: "tol",
            value: opts.tol,
            range: "(0, inf)",
        });
    }
    let stride = opts.record_every.max(1);
    let x0m = x0.as_matrix();
    let mut x = x0m.clone();
    let mut prev = None;
    let mut states = vec![x0.clone()];
    let mut steps = vec![0];
    let mut converged = false;
    let mut final_delta = 0.0;
    let mut k = 0;
    let mut best = f64::INFINITY;
    let mut since_best = 0;
    let mut periodic_suspect = false;

    while k < opts.k_max {
        k += 1;
        let next = step_unchecked(w, a, &x, x0m);
        final_delta = max_abs_diff(&next, &x);
        prev = Some(std::mem::replace(&mut x, next));
        if k % stride == 0 {
            states.push(StateMatrix::from_matrix_unchecked(x.clone()));
            steps.push(k);
        }
        if final_delta < opts.tol {
            converged = true;
            break;
        }
        if final_delta < best {
            best = final_delta;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= PERIODIC_WINDOW && !periodic_suspect {
                periodic_suspect = true;
                log::warn!("no decrease in step change over {PERIODIC_WINDOW} steps at k = {k}; periodic suspect");
            }
        }
    }
    if *steps.last().unwrap() != k {
        states.push(StateMatrix::from_matrix_unchecked(x.clone()));
        steps.push(k);
    }

    let v = v_at(&aw(w, a), a, k);
    let limit = LimitResult {
        v,
        x_inf: StateMatrix::from_matrix_unchecked(x),
        method: LimitMethod::Iterative,
    };
    let trajectory = Trajectory {
        states,
        steps,
        converged,
        final_delta,
        iterations: k,
        periodic_suspect,
        penultimate: prev.map(StateMatrix::from_matrix_unchecked),
    };
    Ok((trajectory, limit))
}
