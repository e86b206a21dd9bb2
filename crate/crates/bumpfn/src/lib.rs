//! Exact and numeric calculus for the bump-function family
//! `f(t) = exp(-1/t)` on `t > 0` (glued to zero), `g(t) = exp(-1/t)`, and
//! `h(t) = exp(1/t)`.
//!
//! The crate has four parts:
//!
//! * [`coeff`] — the exact integer coefficient triangle behind every
//!   derivative of `exp(±1/t)`, built by recurrence and cross-checked against
//!   a closed form and a symbolic-differentiation oracle.
//! * [`eval`] — overflow-safe evaluation of `f^(i)`, `g^(i)`, `h^(i)` at real
//!   arguments, with a `(sign, log magnitude)` side channel for values outside
//!   the double range, and the one-sided limit classification at `t = 0`.
//! * [`monotone`] — executable complete/absolute/logarithmic monotonicity
//!   checks over intervals, with exact sign arguments where they exist and
//!   deterministic sampling elsewhere.
//! * [`pou`] — smooth steps, bumps, and normalized partitions of unity over
//!   finite 1-D interval covers, with derivatives carried by truncated Taylor
//!   ([`jet`]) arithmetic seeded from the exact formulas.

pub mod coeff;
pub mod error;
pub mod eval;
pub mod jet;
pub mod monotone;
pub mod pou;

pub use error::Error;
pub use eval::{eval_derivative, EvalResult, EvalStatus, FunctionId};
