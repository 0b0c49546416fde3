//! Error type shared by the whole library.

use thiserror::Error;

/// Errors reported by mechanisms, sensitivity checks and the applications.
#[derive(Debug, Error)]
pub enum Error {
    /// A privacy budget must be a finite, strictly positive epsilon.
    #[error("invalid privacy budget epsilon = {0}, must be finite and > 0")]
    InvalidEpsilon(f64),

    /// Budget splits and sequential schedules need at least one call.
    #[error("cannot split a budget across {0} calls, need at least 1")]
    InvalidCallCount(usize),

    /// Selection over an empty candidate set is undefined.
    #[error("candidate set is empty")]
    EmptyCandidates,

    /// A candidate set was smaller than the operation requires.
    #[error("candidate set has {got} elements, need at least {need}")]
    TooFewCandidates { need: usize, got: usize },

    /// A utility evaluation produced NaN or an infinity.
    #[error("utility of candidate {candidate} is not finite ({value})")]
    NonFiniteUtility { candidate: usize, value: f64 },

    /// A sensitivity evaluation must be finite and non-negative.
    #[error("sensitivity value {value} at distance {t} is invalid, must be finite and >= 0")]
    InvalidSensitivity { t: u32, value: f64 },

    /// A global sensitivity bound was required but the sensitivity only
    /// supports per-instance evaluation.
    #[error("mechanism needs a global sensitivity bound, got a purely local sensitivity")]
    MissingGlobalBound,

    /// All utilities are equal is the only valid case for a zero global bound.
    #[error("global sensitivity bound is 0 but candidate utilities differ")]
    ZeroSensitivityWithSpread,

    /// The dampening walk ran past its knot window without locating the
    /// utility value.
    #[error(
        "dampening window exhausted for candidate {candidate}: |u| = {target} > {reached} \
         after {window} knots"
    )]
    WindowExhausted {
        candidate: usize,
        target: f64,
        reached: f64,
        window: usize,
    },

    /// The brute force sensitivity oracle refused to enumerate further.
    #[error("enumeration budget of {budget} datasets exhausted during brute force search")]
    EnumerationBudgetExhausted { budget: usize },

    /// Selection weights degenerated to an all-zero vector.
    #[error("all selection weights are zero, no candidate can be drawn")]
    DegenerateWeights,

    /// An aggregation weight must be finite.
    #[error("aggregation weight {index} is not finite ({value})")]
    NonFiniteWeight { index: usize, value: f64 },

    /// Objective lists of mismatched lengths, missing objectives, and similar
    /// structural mistakes.
    #[error("{0}")]
    InvalidArgument(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
