use thiserror::Error;

/// Errors produced by tree construction, parsing, counting, and the
/// star-transfer procedures.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed tree or forest file; `line` is 1-based.
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid perfect-tree parameters or a tree that is not perfect
    /// where a perfect one is required.
    #[error("invalid shape: {0}")]
    Shape(String),

    /// Vertex id outside the host structure.
    #[error("vertex {0} out of range")]
    VertexRange(usize),

    /// A documented precondition of an operation does not hold.
    /// The message names the violated condition.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A monitored loop invariant failed mid-run. These indicate a bug
    /// in the procedure (or its preconditions) and are surfaced as
    /// findings, never patched over.
    #[error("invariant `{name}` violated at iteration {iteration}: {detail}")]
    Monitor {
        name: &'static str,
        iteration: u64,
        detail: String,
    },

    /// Request outside the configured desk-scale caps.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub(crate) fn monitor(name: &'static str, iteration: u64, detail: impl Into<String>) -> Self {
        Error::Monitor {
            name,
            iteration,
            detail: detail.into(),
        }
    }
}
