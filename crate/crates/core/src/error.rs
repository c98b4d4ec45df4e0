use crate::solver::SolveStats;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A turbine ended up with no candidate cable at all.
    #[error("turbine {node} has no candidate cable within range")]
    IsolatedNode { node: usize },

    /// A plan or graph is structurally unusable (non-radial, disconnected, ...).
    #[error("invalid topology: {0}")]
    Structure(String),

    /// Branch-and-bound finished without a usable incumbent.
    #[error("no feasible integer solution within limits (best bound {})", stats.bound)]
    Unsolved { stats: SolveStats },

    #[error("mps parse error at line {line}: {msg}")]
    MpsParse { line: usize, msg: String },

    #[error("pipeline stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn in_stage(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }
}
