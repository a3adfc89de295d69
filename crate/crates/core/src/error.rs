use thiserror::Error;

/// Errors raised by the model evaluations, solvers and scenario loader.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of a growth law or vector field.
    #[error("domain error: {0}")]
    Domain(String),

    /// A parameter record violates one of its invariants.
    #[error("invalid parameter: {0}")]
    Invariant(String),

    #[error("effort {effort} outside [0, {e_max}]")]
    EffortOutOfBounds { effort: f64, e_max: f64 },

    #[error("no nontrivial equilibrium: {0}")]
    NoNontrivialEquilibrium(String),

    #[error("threshold undefined: {0}")]
    ThresholdUndefined(String),

    #[error("effort undefined at zero stock")]
    EffortUndefined,

    #[error("interior equilibrium nonpositive: {0}")]
    NonpositiveEquilibrium(String),

    /// A numerical solver failed; `stage` names the failing step.
    #[error("solver failure in {stage}: {message}")]
    Solver {
        stage: &'static str,
        message: String,
    },

    #[error("integration diverged at t = {time}: {message}")]
    Divergence { time: f64, message: String },

    #[error("scenario error: {0}")]
    Scenario(String),
}

impl Error {
    pub(crate) fn solver(stage: &'static str, message: impl Into<String>) -> Self {
        Error::Solver {
            stage,
            message: message.into(),
        }
    }

    /// True for failures caused by bad input rather than by a numerical solve.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Invariant(_)
                | Error::EffortOutOfBounds { .. }
                | Error::Scenario(_)
                | Error::ThresholdUndefined(_)
                | Error::NoNontrivialEquilibrium(_)
                | Error::NonpositiveEquilibrium(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
