//! Error type shared by every module, with the CLI exit-code mapping.

use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The pattern vanishes everywhere it was sampled.
    #[error("degenerate pattern: {0}")]
    DegeneratePattern(String),

    #[error("degenerate excitation: radiated power a^T B a* = {0:e}")]
    DegenerateExcitation(f64),

    #[error("degenerate steering vector: {0}")]
    DegenerateSteering(String),

    #[error("coupling matrix is singular beyond regularization: {0}")]
    SingularCoupling(String),

    #[error("direction (theta={theta_deg:.6} deg, phi={phi_deg:.6} deg) lies outside the sampled lattice")]
    InterpolationDomain { theta_deg: f64, phi_deg: f64 },

    #[error("route mismatch: {0}")]
    RouteMismatch(String),

    #[error("ill-conditioned network: {0}")]
    IllConditionedNetwork(String),

    #[error("matrix is not Hermitian: relative asymmetry {0:e}")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite: eigenvalue ratio {ratio:e} below -{tol:e}")]
    NotPositiveSemidefinite { ratio: f64, tol: f64 },

    #[error("normalized variance undefined: main-lobe field a^T v0 vanishes")]
    UndefinedVariance,

    #[error("constraint matrix xi*v0*v0^H - D_f0 is singular at xi = {0}")]
    ConstraintDegenerate(f64),

    #[error("numerical conditioning failure: {0}")]
    NumericalConditioning(String),

    #[error("infeasible constraint xi = {xi}: {reason}")]
    InfeasibleConstraint { xi: f64, bound: f64, reason: String },

    #[error("{}:{line}: {msg}", path.display())]
    Parse { path: PathBuf, line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status for this error: 2 usage, 3 input parse, 4 infeasible
    /// constraint, 5 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::RouteMismatch(_) => 2,
            Error::Parse { .. } | Error::Io { .. } => 3,
            Error::InfeasibleConstraint { .. } => 4,
            Error::InterpolationDomain { .. } => 2,
            _ => 5,
        }
    }
}
