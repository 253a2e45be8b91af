//! Second-order convex-combination state-space process
//!
//! ```text
//! X(k+1) = A W X(k) + (I - A) X(0)
//! ```
//!
//! `W` is a row-stochastic influence matrix, `A` a diagonal damping matrix
//! with `0 <= a_ii <= 1`, and `X(0)` an `n x m` matrix of point coordinates.
//! The crate covers forward simulation, convergence classification, the
//! closed-form limit `V = (I - AW)^-1 (I - A)`, inverse design of initial
//! states and damping values for a target end state, net-influence
//! centrality, and the scenario generators used by the `polydyn` CLI.

pub mod centrality;
pub mod dynamics;
mod error;
pub mod inverse;
pub mod io;
mod linalg;
pub mod matrix;
pub mod rng;
pub mod scenarios;
pub mod structure;

pub use centrality::{alpha_centrality, net_influence, perron_centrality, CentralityVector};
pub use dynamics::{
    classify, closed_form_limit, evolve_v, iterate, neumann_limit, step, ConvergenceCase,
    ConvergenceClass, IterateOptions, LimitMethod, LimitResult, Trajectory,
};
pub use error::{Error, Result};
pub use inverse::{
    affine_map, design_family, solve_damping, solve_initial, unbiased_design, DesignSolution,
    Diagnosis, FeasibilityReport, FeasibilityTolerances, NodeDiagnosis,
};
pub use linalg::{spectral_radius, SpectralEstimate};
pub use matrix::{
    bounding_box, contains, validate_system, BoundingBox, DampingMatrix, InfluenceMatrix,
    StateMatrix, System, ValidationReport, Violation, ROW_SUM_TOL,
};
pub use scenarios::{
    cleavage_scenario, histogram, polytope_init, random_strong_w, two_value_damping,
    uniform_damping, CleavageParams, Histogram, ScenarioKind, ScenarioSpec,
};
pub use structure::{structure_class, Component, Connectivity, StructureClass};

pub use nalgebra::{DMatrix, DVector};
