use thiserror::Error;

/// Every failure mode surfaced by the library. The variant name is what the
/// CLI prints, so keep the names stable.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid covering data: {0}")]
    InvalidCovering(String),
    #[error("point {gamma} is within {distance:e} of a pole of R")]
    PoleHit { gamma: String, distance: f64 },
    #[error("critical point {index} is not simple (|R''| = {second:e})")]
    DegenerateCritical { index: usize, second: f64 },
    #[error("covering is not generic: {0}")]
    NonGenericCovering(String),
    #[error("continuation segment passes within {distance:e} of branch point {index}")]
    PathThroughBranchPoint { index: usize, distance: f64 },
    #[error("point lies within {distance:e} of critical point {index}")]
    CriticalPointHit { index: usize, distance: f64 },
    #[error("collision during deformation flow: {0}")]
    CriticalCollision(String),
    #[error("step size underflow at s = {s} (h = {h:e})")]
    StepFailure { s: f64, h: f64 },
    #[error("Newton iteration did not converge: {0}")]
    NewtonDivergence(String),
    #[error("singular Jacobian: {0}")]
    JacobianSingular(String),
    #[error("quadrature degraded: singularity at distance {distance:e}, node spacing {spacing:e}")]
    QuadratureDegraded { distance: f64, spacing: f64 },
    #[error("evaluation point lies on the contour")]
    OnContour,
    #[error("pole collision in the Schlesinger sector: {0}")]
    PoleCollision(String),
    #[error("anchor point coincides with critical point {0}")]
    AnchorAtBranchPoint(usize),
    #[error("monodromy loop passes within {distance:e} of a pole")]
    LoopThroughPole { distance: f64 },
    #[error("resonant residue: eigenvalues of A_{index} differ by an integer")]
    ResonantResidue { index: usize },
    #[error("denominator moment vanishes for index {0}")]
    ZeroDenominator(usize),
    #[error("gradient catastrophe: hodograph Jacobian singular (sigma_min = {sigma_min:e})")]
    GradientCatastrophe { sigma_min: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("configuration error: {0}")]
    ConfigParse(String),
}

impl Error {
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidCovering(_) => "InvalidCovering",
            Error::PoleHit { .. } => "PoleHit",
            Error::DegenerateCritical { .. } => "DegenerateCritical",
            Error::NonGenericCovering(_) => "NonGenericCovering",
            Error::PathThroughBranchPoint { .. } => "PathThroughBranchPoint",
            Error::CriticalPointHit { .. } => "CriticalPointHit",
            Error::CriticalCollision(_) => "CriticalCollision",
            Error::StepFailure { .. } => "StepFailure",
            Error::NewtonDivergence(_) => "NewtonDivergence",
            Error::JacobianSingular(_) => "JacobianSingular",
            Error::QuadratureDegraded { .. } => "QuadratureDegraded",
            Error::OnContour => "OnContour",
            Error::PoleCollision(_) => "PoleCollision",
            Error::AnchorAtBranchPoint(_) => "AnchorAtBranchPoint",
            Error::LoopThroughPole { .. } => "LoopThroughPole",
            Error::ResonantResidue { .. } => "ResonantResidue",
            Error::ZeroDenominator(_) => "ZeroDenominator",
            Error::GradientCatastrophe { .. } => "GradientCatastrophe",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::ConfigParse(_) => "ConfigParse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
