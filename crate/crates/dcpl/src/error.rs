//! Error type shared across the crate, with a stable mapping to process exit
//! codes for the command-line harness.

use thiserror::Error;

/// All failure modes of lattice construction, the scale-factor solver, layout
/// and the study harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on plain input data was violated (bad angles, wrong
    /// vector length, non-finite number, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The region cannot hold a single lattice triangle around the origin, or
    /// the origin vertex is not interior after pruning.
    #[error("region too small: {0}")]
    RegionTooSmall(String),

    /// Pruning could not reduce the triangle set to a disc-topology complex.
    #[error("could not reach disc topology: {0}")]
    TopologyFailure(String),

    /// A (rescaled) triangle violates the strict triangle inequalities, so the
    /// angle function is undefined.
    #[error("infeasible triangle: {0}")]
    InfeasibleTriangle(String),

    /// An edge of zero length was encountered where a positive length is
    /// required.
    #[error("degenerate edge: zero length")]
    DegenerateEdge,

    /// A triangle with vanishing area was encountered.
    #[error("degenerate triangle: vanishing area")]
    DegenerateTriangle,

    /// A scale field makes some triangle of the complex infeasible.
    #[error("infeasible scale field: {0}")]
    InfeasibleScaleField(String),

    /// The Dirichlet solver requires all lattice angles strictly below pi/2.
    #[error("lattice angle not strictly acute: {0}")]
    NotAcute(String),

    /// Backtracking could not find a feasible step that decreases the
    /// gradient norm.
    #[error("line search failed at iteration {iteration} (gradient max-norm {gradient_norm:.3e})")]
    LineSearchFailure { iteration: usize, gradient_norm: f64 },

    /// The Newton iteration hit its iteration cap before reaching tolerance.
    #[error("no convergence after {iterations} iterations (gradient max-norm {gradient_norm:.3e})")]
    MaxIterations { iterations: usize, gradient_norm: f64 },

    /// A placed image triangle came out clockwise.
    #[error("orientation flip in image triangle {0}")]
    OrientationFlip(usize),

    /// A point handed to evaluation lies outside the support of the complex.
    #[error("point outside the support of the subcomplex")]
    OutsideSupport,

    /// A point lies outside the declared domain of a conformal map.
    #[error("point outside the domain of map `{0}`")]
    OutsideDomain(String),

    /// Lookup of a conformal map by name failed.
    #[error("unknown map: {0}")]
    UnknownMap(String),

    /// Not enough data points for a fit or extrapolation.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    /// File system failure while reading configs or writing outputs.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code for the CLI: 1 for configuration/input problems,
    /// 2 for solver failures, 3 for violated theory preconditions.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::RegionTooSmall(_)
            | Error::TopologyFailure(_)
            | Error::UnknownMap(_)
            | Error::InsufficientData(_)
            | Error::Config(_)
            | Error::OutsideDomain(_)
            | Error::Io(_) => 1,
            Error::InfeasibleTriangle(_)
            | Error::DegenerateEdge
            | Error::DegenerateTriangle
            | Error::InfeasibleScaleField(_)
            | Error::LineSearchFailure { .. }
            | Error::MaxIterations { .. }
            | Error::OrientationFlip(_)
            | Error::OutsideSupport => 2,
            Error::NotAcute(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
