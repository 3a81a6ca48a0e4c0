use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("singular state: bodies {0} and {1} are {2:e} apart")]
    Singular(usize, usize, f64),

    #[error("{what} = {value} is outside its domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("not a central configuration (acceleration ratio spread {0:e})")]
    NotCentral(f64),

    #[error("step size collapsed at t = {t}")]
    StepCollapse { t: f64 },

    #[error("exceeded {steps} steps at t = {t}")]
    MaxSteps { steps: usize, t: f64 },

    #[error("no sign change of {0} in the bracket")]
    NoSignChange(String),

    #[error("root search did not converge: {0}")]
    NoConvergence(String),

    #[error("triple collision is not a central-configuration collapse; motion cannot be continued")]
    NonCentralCollapse,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Singular(..)
                | Error::StepCollapse { .. }
                | Error::MaxSteps { .. }
                | Error::NoConvergence(_)
                | Error::NonCentralCollapse
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
