use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("evaluation singularity: {0}")]
    Singularity(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Catastrophe times came out complex on the real window.
    #[error("complex catastrophe time (max |Im/Re| = {ratio:.3e}); apply a reality phase to the initial profile")]
    ComplexCatastropheTime { ratio: f64 },

    #[error("catastrophe class inconclusive (|u_x| growth {ux_growth:.3}, |u_xx| growth {uxx_growth:.3})")]
    Inconclusive { ux_growth: f64, uxx_growth: f64 },

    #[error("branch selection failed: {0}")]
    Branch(String),

    #[error("integration blew up at t = {last_stable_time}")]
    BlowUp { last_stable_time: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("io: {0}")]
    Io(String),
}

impl Error {
    /// Errors caused by malformed user input, as opposed to numerical failures.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Syntax { .. } | Error::UnknownIdentifier { .. } | Error::UnknownScenario(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
