use thiserror::Error;

/// Which way a sphere/ball intersection failed to produce a proper cap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DegenerateCap {
    /// The sphere lies entirely outside the ball.
    Disjoint,
    /// The sphere touches the ball boundary in a single point.
    Tangent,
    /// The sphere lies entirely inside the ball.
    Contained,
    /// The ball lies strictly inside the sphere without touching it.
    Enclosed,
}

impl std::fmt::Display for DegenerateCap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            DegenerateCap::Disjoint => "sphere and ball are disjoint",
            DegenerateCap::Tangent => "sphere is tangent to the ball",
            DegenerateCap::Contained => "sphere is contained in the ball",
            DegenerateCap::Enclosed => "ball is enclosed by the sphere",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid density: {0}")]
    InvalidDensity(String),
    #[error("quadrature did not reach tolerance {tol:e} within {max_intervals} subintervals (estimated relative error {estimate:e})")]
    Precision {
        tol: f64,
        max_intervals: usize,
        estimate: f64,
    },
    #[error("degenerate cap: {0}")]
    DegenerateCap(DegenerateCap),
    #[error("growth functional undefined: inner ball has zero measure")]
    UndefinedGrowth,
    #[error("test function is empty: mu(B(0, vR)) = 0")]
    EmptyTestFunction,
    #[error("hypothesis violated (verified on grid): {0}")]
    HypothesisViolation(String),
    #[error("hypothesis inconclusive: {0}")]
    InconclusiveHypothesis(String),
    #[error("oracle failure: {0}")]
    Oracle(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Process exit status for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisViolation(_) | Error::InconclusiveHypothesis(_) => 2,
            Error::Oracle(_) => 3,
            _ => 1,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
