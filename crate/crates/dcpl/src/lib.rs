//! Discrete conformal PL-maps on triangular lattices.
//!
//! The crate builds triangulated patches of a congruent-triangle lattice
//! inside a region, solves a Dirichlet boundary value problem for vertex
//! scale factors (the discrete analogue of `log |f'|`), lays out the
//! resulting piecewise-linear map in the plane, and measures how fast the
//! discrete map converges to a conformal map as the lattice is refined.

pub mod analytic;
pub mod error;
pub mod geometry;
pub mod lattice;
pub mod layout;
pub mod solver;
pub mod verify;

pub use analytic::{
    angle_sum_defect, builtin_maps, normalization_for, predicted_constant, schwarzian,
    ConformalMap, TaylorConstant,
};
pub use error::{Error, Result};
pub use geometry::{
    angle_sum_at, lambda_of, rescaled_lengths, star_sum_perturbed, theta, theta_partials,
    triangle_inequalities_hold, LogLengthPair, TriangleLengths,
};
pub use lattice::{
    build_lattice_patch, classify_vertices, validate_disc_topology, LatticeSpec, Region,
    Subcomplex, TopologyReport, VertexCoord,
};
pub use layout::{
    edge_rotation, evaluate, holonomy_diagnostic, layout, triangle_derivatives, Normalization,
    PLMap,
};
pub use solver::{
    feasibility, gradient, harmonic_extension, hessian, solve_dirichlet, ScaleField, SolveResult,
    SolverOptions, SparseMatrix,
};
pub use verify::{
    barrier_constants, barrier_fields, barrier_inequality_check, build_trap,
    inward_gradient_check, BarrierConstants, BarrierReport, InwardGradientReport, TrapSet,
};
