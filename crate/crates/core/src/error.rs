use thiserror::Error;

/// Failure modes shared by every solver in the crate.
///
/// The `Display` strings are stable identifiers; the CLI writes them verbatim
/// into its structured error output.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid-polyline: {0}")]
    InvalidPolyline(String),
    #[error("invalid-field: {0}")]
    InvalidField(String),
    #[error("curve-too-short")]
    CurveTooShort,
    #[error("insufficient-scales")]
    InsufficientScales,
    #[error("invalid-radius")]
    InvalidRadius,
    #[error("cfl-violation: dt = {dt:e} exceeds limit {limit:e}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("identical-inputs")]
    IdenticalInputs,
    #[error("curve-extinct")]
    Extinct,
    #[error("gradient-blowup: |grad u| = {0} exceeds cap")]
    GradientBlowup(f64),
    #[error("grid-mismatch")]
    GridMismatch,
    #[error("flows-coincide")]
    FlowsCoincide,
    #[error("axis-collision: vertex {index} at r = {r:e}")]
    AxisCollision { index: usize, r: f64 },
    #[error("profile-closure-failed: residual {0:e}")]
    ProfileClosureFailed(f64),
    #[error("infeasible-profile: {0}")]
    InfeasibleProfile(String),
    #[error("intersection-too-large")]
    IntersectionTooLarge,
    #[error("insufficient-samples: {0}")]
    InsufficientSamples(String),
    #[error("config: {0}")]
    Config(String),
    #[error("empty-verdict-list")]
    EmptyVerdictList,
    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable code (the part before any `:`).
    pub fn code(&self) -> String {
        let s = self.to_string();
        s.split(':').next().unwrap_or_default().to_string()
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
