use thiserror::Error;

/// Errors raised by system loading and by analyses whose hypotheses fail.
#[derive(Debug, Error)]
pub enum Error {
    /// The system document is syntactically or semantically invalid.
    #[error("invalid system document: {0}")]
    Document(String),

    /// An analysis that assumes irreducibility was given a reducible kernel.
    #[error("kernel is reducible; strongly connected components: {}", format_components(.components))]
    Reducible { components: Vec<Vec<String>> },

    /// An analysis that assumes aperiodicity was given a periodic kernel.
    #[error("kernel is periodic with period {period}")]
    Periodic { period: usize },

    /// A precondition other than irreducibility/aperiodicity does not hold.
    #[error("{0}")]
    Unsupported(String),

    /// A size-bounded enumeration ran past its cap.
    #[error("{what} exceeded cap {cap} (reached {reached} before stopping)")]
    CapExceeded {
        what: String,
        cap: usize,
        reached: usize,
    },

    /// Two routes that must agree disagreed; always a bug, never an input error.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn format_components(components: &[Vec<String>]) -> String {
    let parts: Vec<String> = components
        .iter()
        .map(|c| format!("{{{}}}", c.join(",")))
        .collect();
    parts.join(" ")
}

impl Error {
    /// Process exit code the CLI maps this error to: input errors are 2,
    /// analysis refusals (unmet hypotheses, caps, internal checks) are 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Document(_) => 2,
            _ => 1,
        }
    }
}
