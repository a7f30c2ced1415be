use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the toolkit.
///
/// Variants fall into two families: violations of the single-well
/// hypotheses on the potential (see [`Error::is_hypothesis_violation`]) and
/// numerical failures raised while computing turning points, actions,
/// expansions or spectra.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("power {power} is not allowed in the {list} term list")]
    ParityViolation { list: &'static str, power: u32 },
    #[error("potential term list `{0}` is empty")]
    EmptySpec(&'static str),
    #[error("leading coefficient of V0 must be positive, got {0}")]
    NonConfining(f64),
    #[error("expected one sublevel interval bounded by two crossings, found {crossings} crossings")]
    SingleWellViolation { crossings: usize },
    #[error("turning point at x = {x} has slope {slope:e}")]
    DegenerateTurningPoint { x: f64, slope: f64 },

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:e})")]
    NewtonDivergence { iterations: usize, residual: f64 },
    #[error("turning point {at} is not simple (|V'| = {slope:e})")]
    NonSimpleTurningPoint { at: Complex64, slope: f64 },
    #[error("both seeds converged to the same turning point {at}")]
    RootCollision { at: Complex64 },

    #[error("square-root branch is ambiguous near {at}")]
    BranchJump { at: Complex64 },
    #[error("quadrature did not converge with {nodes} nodes (estimated error {est_error:e})")]
    NotConverged { nodes: usize, est_error: f64 },
    #[error("integration path passes within {distance:e} of turning point {at}")]
    PathThroughTurningPoint { at: Complex64, distance: f64 },
    #[error("grid too coarse: step-halving difference {difference:e} exceeds {tolerance:e}")]
    GridTooCoarse { difference: f64, tolerance: f64 },

    #[error("energy window [{lo}, {hi}] is empty")]
    EmptyWindow { lo: f64, hi: f64 },
    #[error("no shooting eigenvalue found for index {k}")]
    OracleMissing { k: u32 },

    #[error("integration became unstable at x = {x}")]
    StepUnstable { x: f64 },
    #[error("box half-width {box_l} is inside the classically allowed region")]
    BoxTooSmall { box_l: f64 },
    #[error("Wronskian at real E = {energy} has relative imaginary part {ratio:e}")]
    ImaginaryResidue { energy: f64, ratio: f64 },
    #[error("Wronskian nearly vanishes on the contour at E = {energy}")]
    ZeroOnBoundary { energy: Complex64 },
    #[error("argument increments could not be resolved ({detail})")]
    InsufficientResolution { detail: String },
    #[error("line tracing stalled at {at}")]
    StalledStep { at: Complex64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed potential file: {0}")]
    SpecFormat(String),
}

impl Error {
    /// Variant name, used on the CLI diagnostic stream.
    pub fn name(&self) -> &'static str {
        match self {
            Error::ParityViolation { .. } => "ParityViolation",
            Error::EmptySpec(_) => "EmptySpec",
            Error::NonConfining(_) => "NonConfining",
            Error::SingleWellViolation { .. } => "SingleWellViolation",
            Error::DegenerateTurningPoint { .. } => "DegenerateTurningPoint",
            Error::NewtonDivergence { .. } => "NewtonDivergence",
            Error::NonSimpleTurningPoint { .. } => "NonSimpleTurningPoint",
            Error::RootCollision { .. } => "RootCollision",
            Error::BranchJump { .. } => "BranchJump",
            Error::NotConverged { .. } => "NotConverged",
            Error::PathThroughTurningPoint { .. } => "PathThroughTurningPoint",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::OracleMissing { .. } => "OracleMissing",
            Error::StepUnstable { .. } => "StepUnstable",
            Error::BoxTooSmall { .. } => "BoxTooSmall",
            Error::ImaginaryResidue { .. } => "ImaginaryResidue",
            Error::ZeroOnBoundary { .. } => "ZeroOnBoundary",
            Error::InsufficientResolution { .. } => "InsufficientResolution",
            Error::StalledStep { .. } => "StalledStep",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::SpecFormat(_) => "SpecFormat",
        }
    }

    /// True for errors that mean the potential does not satisfy the
    /// structural single-well hypotheses.
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::ParityViolation { .. }
                | Error::EmptySpec(_)
                | Error::NonConfining(_)
                | Error::SingleWellViolation { .. }
                | Error::DegenerateTurningPoint { .. }
        )
    }
}
