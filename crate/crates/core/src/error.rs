use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid pmf: {0}")]
    InvalidPmf(String),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid distortion measure: {0}")]
    InvalidDistortion(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("variable subsets must be disjoint: `{0}` appears twice")]
    OverlappingSubsets(String),

    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("empty support")]
    EmptySupport,

    #[error("KL divergence undefined: p has mass where q does not (cell {0})")]
    KlSupport(String),

    #[error("argument out of range: {0}")]
    ArgOutOfRange(String),

    #[error("pmf document parse error: {0}")]
    Parse(String),

    #[error("distortion target {d} is below the minimum achievable distortion {underline_d}")]
    InfeasibleDistortion { d: f64, underline_d: f64 },

    #[error("closed-form binary region is not applicable at delta = {delta}")]
    ClosedFormNotApplicable { delta: f64 },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("degenerate result: {0}")]
    DegenerateResult(String),
}

pub type Result<T> = std::result::Result<T, Error>;
