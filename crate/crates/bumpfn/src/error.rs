use thiserror::Error;

/// Errors surfaced by the library.
///
/// Numeric out-of-range *values* are not errors: evaluation reports
/// overflow/underflow through [`crate::eval::EvalStatus`] instead. Errors here
/// are contract violations (bad indices, bad intervals, bad covers).
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("coefficient index out of range: (i = {i}, k = {k}); need i >= 1 and 0 <= k <= i - 1")]
    CoeffIndex { i: u32, k: u32 },

    #[error(
        "coefficient triangle inconsistency at (i = {i}, k = {k}): recurrence gives {recurrence}, closed form gives {closed_form}"
    )]
    TriangleInconsistent {
        i: u32,
        k: u32,
        recurrence: String,
        closed_form: String,
    },

    #[error("t = 0 is not a jump point of {function}")]
    NotAJumpPoint { function: String },

    #[error("monotone approach toward 0 from the {side} failed for {function}: {detail}")]
    LimitEvidence {
        function: String,
        side: String,
        detail: String,
    },

    #[error("evaluation of {function} derivative {order} at t = {t} is {status}; no finite value")]
    NonFiniteEval {
        function: String,
        order: u32,
        t: f64,
        status: String,
    },

    #[error("interval {interval} is not inside the domain of {function}")]
    IntervalOutsideDomain { function: String, interval: String },

    #[error("invalid interval {interval}: {reason}")]
    InvalidInterval { interval: String, reason: String },

    #[error("{function} is not strictly positive on {interval}; log-based check undefined")]
    NotPositiveOnInterval { function: String, interval: String },

    #[error("invalid patch [{lower}, {upper}] with ramp {ramp}: {reason}")]
    InvalidPatch {
        lower: f64,
        upper: f64,
        ramp: f64,
        reason: String,
    },

    #[error("cover has no patches")]
    EmptyCover,

    #[error("cover does not cover its domain: no patch contains x = {x} in its open core")]
    CoverageGap { x: f64 },

    #[error("jet order {order} exceeds the supported maximum {max}")]
    JetOrderTooLarge { order: usize, max: usize },

    #[error("bad cover description: {0}")]
    CoverParse(String),
}
