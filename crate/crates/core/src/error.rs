use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate denominator: {what} vanishes at order {index}")]
    DegenerateDenominator { what: &'static str, index: usize },

    #[error("argument z must be nonzero")]
    ZeroArgument,

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("singular configuration: guard `{guard}` violated at index {index}")]
    SingularConfiguration { guard: &'static str, index: usize },

    #[error("square-root branch degenerate at index {index}: z^2 - 4*gamma*delta*q vanishes")]
    BranchDegenerate { index: usize },

    #[error("eigenvalue iteration did not converge after {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("trajectory became singular at t = {time}: {reason}")]
    SingularTrajectory { time: f64, reason: String },
}

impl Error {
    /// True for the errors that mean "this parameter point is not generic".
    pub fn is_configuration(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator { .. }
                | Error::DegenerateConfiguration(_)
                | Error::SingularConfiguration { .. }
                | Error::BranchDegenerate { .. }
                | Error::SingularTrajectory { .. }
                | Error::ZeroArgument
        )
    }
}
