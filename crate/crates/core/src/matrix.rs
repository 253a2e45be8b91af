//! Validated matrix types for the process and the checks that guard them.
//!
//! Constructors reject anything that violates the model constraints:
//! `W` nonnegative with unit row sums, `0 <= a_ii <= 1`, finite states.
//! [`validate_system`] runs the same checks on raw matrices and reports
//! every violation instead of stopping at the first.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Row sums of an influence matrix must be within this distance of 1.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// A single broken constraint. Indices are 0-based; `Display` prints them
/// 1-based.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NotSquare {
        rows: usize,
        cols: usize,
    },
    Empty {
        what: &'static str,
    },
    NonFinite {
        what: &'static str,
        row: usize,
        col: usize,
    },
    NegativeEntry {
        row: usize,
        col: usize,
        value: f64,
    },
    RowSum {
        row: usize,
        sum: f64,
    },
    DampingOutOfRange {
        node: usize,
        value: f64,
    },
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
}

fn diag_label(i: usize) -> String {
    let i = i + 1;
    if i < 10 {
        format!("a_{i}{i}")
    } else {
        format!("a_{i},{i}")
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotSquare { rows, cols } => {
                write!(f, "W is {rows}x{cols}, expected a square matrix")
            }
            Violation::Empty { what } => write!(f, "{what} is empty"),
            Violation::NonFinite { what, row, col } => {
                write!(f, "{what} entry ({}, {}) is not finite", row + 1, col + 1)
            }
            Violation::NegativeEntry { row, col, value } => {
                write!(f, "w_{},{} = {value} is negative", row + 1, col + 1)
            }
            Violation::RowSum { row, sum } => write!(f, "row {} sums to {sum}", row + 1),
            Violation::DampingOutOfRange { node, value } => {
                write!(f, "{} out of [0,1] (value {value})", diag_label(*node))
            }
            Violation::DimensionMismatch {
                what,
                expected,
                found,
            } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
        }
    }
}

/// Outcome of [`validate_system`]; an empty list means the system is valid.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn check_influence(w: &DMatrix<f64>, out: &mut Vec<Violation>) {
    let (rows, cols) = w.shape();
    if rows != cols {
        out.push(Violation::NotSquare { rows, cols });
        return;
    }
    if rows == 0 {
        out.push(Violation::Empty { what: "W" });
        return;
    }
    for i in 0..rows {
        let mut sum = 0.0;
        let mut finite = true;
        for j in 0..cols {
            let v = w[(i, j)];
            if !v.is_finite() {
                out.push(Violation::NonFinite {
                    what: "W",
                    row: i,
                    col: j,
                });
                finite = false;
            } else if v < 0.0 {
                out.push(Violation::NegativeEntry {
                    row: i,
                    col: j,
                    value: v,
                });
            }
            sum += v;
        }
        if finite && (sum - 1.0).abs() > ROW_SUM_TOL {
            out.push(Violation::RowSum { row: i, sum });
        }
    }
}

fn check_damping(a: &[f64], out: &mut Vec<Violation>) {
    for (i, &v) in a.iter().enumerate() {
        if !(0.0..=1.0).contains(&v) {
            out.push(Violation::DampingOutOfRange { node: i, value: v });
        }
    }
}

fn check_state(what: &'static str, x: &DMatrix<f64>, out: &mut Vec<Violation>) {
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            if !x[(i, j)].is_finite() {
                out.push(Violation::NonFinite {
                    what,
                    row: i,
                    col: j,
                });
            }
        }
    }
}

/// Checks every model constraint on raw inputs and lists all violations.
pub fn validate_system(w: &DMatrix<f64>, a: &DVector<f64>, x0: &DMatrix<f64>) -> ValidationReport {
    let mut violations = Vec::new();
    check_influence(w, &mut violations);
    check_damping(a.as_slice(), &mut violations);
    check_state("X0", x0, &mut violations);
    let n = w.nrows();
    if a.len() != n {
        violations.push(Violation::DimensionMismatch {
            what: "length of a",
            expected: n,
            found: a.len(),
        });
    }
    if x0.nrows() != n {
        violations.push(Violation::DimensionMismatch {
            what: "rows of X0",
            expected: n,
            found: x0.nrows(),
        });
    }
    ValidationReport { violations }
}

/// Nonnegative row-stochastic `n x n` matrix `W`; `w_ij` is the weight node
/// `i` places on node `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfluenceMatrix(DMatrix<f64>);

impl InfluenceMatrix {
    /// Validates `w`. Rows whose sums are within [`ROW_SUM_TOL`] of 1 but not
    /// exactly 1 are rescaled.
    pub fn new(mut w: DMatrix<f64>) -> Result<Self> {
        let mut violations = Vec::new();
        check_influence(&w, &mut violations);
        ValidationReport { violations }.into_result()?;
        for i in 0..w.nrows() {
            let sum: f64 = w.row(i).sum();
            if sum != 1.0 {
                log::debug!("renormalizing row {} of W (sum {sum:e})", i + 1);
                w.row_mut(i).unscale_mut(sum);
            }
        }
        Ok(InfluenceMatrix(w))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        InfluenceMatrix(DMatrix::identity(n, n))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Relabels nodes: row/column `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        InfluenceMatrix(DMatrix::from_fn(n, n, |i, j| self.0[(perm[i], perm[j])]))
    }
}

/// Diagonal damping (susceptibility) matrix `A`, stored as its diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DampingMatrix(DVector<f64>);

impl DampingMatrix {
    pub fn new(diag: Vec<f64>) -> Result<Self> {
        let mut violations = Vec::new();
        check_damping(&diag, &mut violations);
        ValidationReport { violations }.into_result()?;
        Ok(DampingMatrix(DVector::from_vec(diag)))
    }

    pub fn uniform(n: usize, a: f64) -> Result<Self> {
        Self::new(vec![a; n])
    }

    pub fn zeros(n: usize) -> Self {
        DampingMatrix(DVector::zeros(n))
    }

    pub fn ones(n: usize) -> Self {
        DampingMatrix(DVector::from_element(n, 1.0))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn diag(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn as_slice(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// `A = 0`.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&a| a == 0.0)
    }

    /// `A = I`.
    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|&a| a == 1.0)
    }

    /// `A < I`: every `a_ii < 1`.
    pub fn is_strictly_below_identity(&self) -> bool {
        self.0.iter().all(|&a| a < 1.0)
    }

    /// First node with `a_ii` outside the open interval `(0, 1)`, if any.
    pub fn first_non_interior(&self) -> Option<(usize, f64)> {
        self.0
            .iter()
            .copied()
            .enumerate()
            .find(|&(_, a)| !(a > 0.0 && a < 1.0))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&self.0)
    }
}

/// `n x m` real matrix of point coordinates (`X(0)`, `X(k)`, `X(inf)`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateMatrix(DMatrix<f64>);

impl StateMatrix {
    pub fn new(x: DMatrix<f64>) -> Result<Self> {
        let mut violations = Vec::new();
        check_state("X", &x, &mut violations);
        ValidationReport { violations }.into_result()?;
        Ok(StateMatrix(x))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        Self::new(rows_to_matrix(rows)?)
    }

    /// One-dimensional state from a list of point values.
    pub fn column(values: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_column_slice(values.len(), 1, values))
    }

    pub(crate) fn from_matrix_unchecked(x: DMatrix<f64>) -> Self {
        StateMatrix(x)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn m(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, h: usize) -> f64 {
        self.0[(i, h)]
    }

    /// Largest absolute componentwise difference.
    pub fn max_abs_diff(&self, other: &StateMatrix) -> f64 {
        max_abs_diff(&self.0, &other.0)
    }

    /// Largest spread between rows, over all columns.
    pub fn row_spread(&self) -> f64 {
        self.0
            .column_iter()
            .map(|c| c.max() - c.min())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != cols) {
        return Err(Error::dims(format!(
            "row {} has {} entries, expected {cols}",
            i + 1,
            r.len()
        )));
    }
    Ok(DMatrix::from_row_iterator(
        rows.len(),
        cols,
        rows.iter().flatten().copied(),
    ))
}

/// A complete `{W, A, X(0)}` system with agreeing dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct System {
    pub w: InfluenceMatrix,
    pub a: DampingMatrix,
    pub x0: StateMatrix,
}

impl System {
    pub fn new(w: InfluenceMatrix, a: DampingMatrix, x0: StateMatrix) -> Result<Self> {
        check_dims(&w, &a, &x0)?;
        Ok(System { w, a, x0 })
    }
}

pub(crate) fn check_dims(w: &InfluenceMatrix, a: &DampingMatrix, x: &StateMatrix) -> Result<()> {
    let n = w.n();
    if a.n() != n {
        return Err(Error::dims(format!(
            "W is {n}x{n} but a has length {}",
            a.n()
        )));
    }
    check_state_rows(w, x)
}

pub(crate) fn check_state_rows(w: &InfluenceMatrix, x: &StateMatrix) -> Result<()> {
    if x.n() != w.n() {
        return Err(Error::dims(format!(
            "W is {n}x{n} but the state has {} rows",
            x.n(),
            n = w.n()
        )));
    }
    Ok(())
}

/// Axis-aligned box spanned by the per-column minima and maxima of a state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn m(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, x: &StateMatrix, tol: f64) -> Result<bool> {
        if x.m() != self.m() {
            return Err(Error::dims(format!(
                "box has {} dimensions, state has {}",
                self.m(),
                x.m()
            )));
        }
        Ok(x.as_matrix().column_iter().enumerate().all(|(h, col)| {
            col.iter()
                .all(|&v| v >= self.lo[h] - tol && v <= self.hi[h] + tol)
        }))
    }
}

pub fn bounding_box(x: &StateMatrix) -> Result<BoundingBox> {
    if x.n() == 0 || x.m() == 0 {
        return Err(Error::EmptyState);
    }
    let cols = x.as_matrix().column_iter();
    let (lo, hi) = cols.map(|c| (c.min(), c.max())).unzip();
    Ok(BoundingBox { lo, hi })
}

/// True iff every entry of column `h` of `x` lies in `[lo_h - tol, hi_h + tol]`.
pub fn contains(bbox: &BoundingBox, x: &StateMatrix, tol: f64) -> Result<bool> {
    bbox.contains(x, tol)
}
