use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the toolkit. Variants carry enough structure for the CLI
/// to render machine-readable error JSON and pick an exit code.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violates its documented invariant (misconfiguration).
    #[error("invalid parameter `{name}`: {message}")]
    InvalidParameter { name: &'static str, message: String },

    /// A state-space point lies outside the domain of the requested kind.
    #[error("x = {x} is outside the {kind} state space")]
    OutsideStateSpace { kind: &'static str, x: f64 },

    /// An integer chain state outside {0, ..., n}.
    #[error("state {state} is outside {{0, ..., {n}}}")]
    StateOutOfRange { state: i64, n: u64 },

    /// The floor embedding of x0 does not fit in {0, ..., n}: n is too small.
    #[error("x0 = {x0} embeds to {embedded} outside {{0, ..., {n}}}; n too small")]
    EmbeddingOutOfRange { x0: f64, n: u64, embedded: f64 },

    /// A chain path is shorter than the index the time change requires.
    #[error("path has {available} states but index {required} is needed")]
    PathExhausted { required: u64, available: u64 },

    /// Renewal query beyond the sampled horizon.
    #[error("t = {t} exceeds the sampled horizon {horizon}")]
    HorizonExceeded { t: f64, horizon: f64 },

    /// Subordinator path ends before reaching the query time.
    #[error("subordinator path ends {deficit} short of the query time")]
    PathTooShort { deficit: f64 },

    /// Argument outside the numerically validated range of a routine.
    #[error("unsupported argument for {what}: {detail}")]
    UnsupportedArgument { what: &'static str, detail: String },

    /// Orthonormal system failed its self-check (Gram residual too large).
    #[error("numerical degeneracy in {what}: residual {residual:e} exceeds {threshold:e}")]
    NumericalDegeneracy {
        what: &'static str,
        residual: f64,
        threshold: f64,
    },

    /// A sampled function is too coarse or misaligned for the requested point.
    #[error("insufficient sampling: {detail}")]
    InsufficientSampling { detail: String },

    /// An ensemble has no samples.
    #[error("empty result: {what}")]
    EmptyResult { what: &'static str },

    /// A per-path failure inside an ensemble, tagged with the path index.
    #[error("path {path} failed: {source}")]
    PathFailure {
        path: u64,
        #[source]
        source: Box<Error>,
    },

    /// Configuration file or schema error.
    #[error("config error: {message}")]
    Config { message: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable code for error JSON.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::OutsideStateSpace { .. } => "outside_state_space",
            Error::StateOutOfRange { .. } => "state_out_of_range",
            Error::EmbeddingOutOfRange { .. } => "embedding_out_of_range",
            Error::PathExhausted { .. } => "path_exhausted",
            Error::HorizonExceeded { .. } => "horizon_exceeded",
            Error::PathTooShort { .. } => "path_too_short",
            Error::UnsupportedArgument { .. } => "unsupported_argument",
            Error::NumericalDegeneracy { .. } => "numerical_degeneracy",
            Error::InsufficientSampling { .. } => "insufficient_sampling",
            Error::EmptyResult { .. } => "empty_result",
            Error::PathFailure { .. } => "path_failure",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
        }
    }
}
