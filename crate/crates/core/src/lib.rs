//! Spectra, topological-degree certificates, solution branches, and eigenpair
//! maps for perturbed eigenvalue problems Lx + sN(x) = lambda Cx on the unit
//! sphere, in finite-dimensional truncations.
//!
//! Modules follow the pipeline: [`operator`] builds the problems, [`spectrum`]
//! computes eigenvalues and hypothesis certificates, [`orientation`] and
//! [`degree`] evaluate oriented degree contributions, [`continuation`] traces
//! the global solution branches, and [`eigenpairs`] maps the eigenpair set in
//! the s-lambda plane.

// Negated comparisons like !(a < b) are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops over grids read better than iterator chains with cross-row access.
#![allow(clippy::needless_range_loop)]

pub mod config;
pub mod continuation;
pub mod degree;
pub mod eigenpairs;
pub mod error;
pub mod linalg;
pub mod operator;
pub mod orientation;
pub mod spectrum;

pub use config::ProblemSpec;
pub use continuation::{
    classify_component, detect_bifurcation_points, find_trivial_solutions, trace_branch, Branch,
    ComponentVerdict, SolutionPoint, Termination, TraceSettings,
};
pub use degree::{
    conjecture_check, degree_on_interval, eigenset_contribution, ls_sign, simple_eigenpoint_sign,
    ConjectureRecord, DegreeMethod, DegreeReport, OrientationConvention,
};
pub use eigenpairs::{
    eigenpair_det, fit_conic, trace_components, ComponentKind, ConicFit, EigenpairComponent,
    MapWindow,
};
pub use error::{Error, Result};
pub use operator::{
    build_c, build_paper_n, build_tk, example_problem, Pencil, Perturbation, PerturbedProblem,
};
pub use spectrum::{
    certify, eigensphere_dim, kernel_basis, pencil_eigenvalues, EigenvalueInfo,
    HypothesisCertificate,
};
