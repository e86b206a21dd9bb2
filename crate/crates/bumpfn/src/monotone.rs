//! Executable monotonicity checks: complete (CM), absolute (AM), and
//! logarithmically complete (LCM) monotonicity of `f`, `g`, `h` over
//! intervals.
//!
//! Where a sign argument exists the verdict is `proved_exact` and depends only
//! on coefficient positivity and interval-sign reasoning — no floating-point
//! value is consulted. Everywhere else a deterministic log-spaced grid is
//! sampled; roundoff is forgiven only in a narrow band around zero so it can
//! never forge a counterexample, and a `violated` verdict always carries a
//! witness point.

use std::fmt;

use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::coeff::{factorial, shared_row};
use crate::error::Error;
use crate::eval::{eval_derivative, EvalStatus, FunctionId};

/// Interval with extended-real endpoints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalSpec {
    pub lower: f64,
    pub upper: f64,
    /// Openness of the (lower, upper) ends.
    pub open_ends: (bool, bool),
}

impl IntervalSpec {
    pub fn new(lower: f64, upper: f64) -> Result<Self, Error> {
        if lower.is_nan() || upper.is_nan() || !(lower < upper) {
            return Err(Error::InvalidInterval {
                interval: format!("{lower}:{upper}"),
                reason: "need lower < upper".into(),
            });
        }
        Ok(IntervalSpec {
            lower,
            upper,
            open_ends: (true, true),
        })
    }

    /// `(0, +inf)`.
    pub fn positive_axis() -> Self {
        IntervalSpec {
            lower: 0.0,
            upper: f64::INFINITY,
            open_ends: (true, true),
        }
    }

    /// `(-inf, 0)`.
    pub fn negative_axis() -> Self {
        IntervalSpec {
            lower: f64::NEG_INFINITY,
            upper: 0.0,
            open_ends: (true, true),
        }
    }

    /// Entirely inside `(0, +inf)`.
    pub fn within_positive(&self) -> bool {
        self.lower > 0.0 || (self.lower == 0.0 && self.open_ends.0)
    }

    /// Entirely inside `(-inf, 0)`.
    pub fn within_negative(&self) -> bool {
        self.upper < 0.0 || (self.upper == 0.0 && self.open_ends.1)
    }
}

impl fmt::Display for IntervalSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: f64| -> String {
            if v == f64::INFINITY {
                "inf".into()
            } else if v == f64::NEG_INFINITY {
                "-inf".into()
            } else {
                format!("{v}")
            }
        };
        write!(f, "{}:{}", end(self.lower), end(self.upper))
    }
}

impl std::str::FromStr for IntervalSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parse_end = |text: &str| -> Result<f64, Error> {
            match text {
                "inf" | "+inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => other.parse::<f64>().map_err(|_| Error::InvalidInterval {
                    interval: s.to_string(),
                    reason: format!("bad endpoint '{other}'"),
                }),
            }
        };
        let (lo, hi) = s.split_once(':').ok_or_else(|| Error::InvalidInterval {
            interval: s.to_string(),
            reason: "expected 'a:b'".into(),
        })?;
        IntervalSpec::new(parse_end(lo)?, parse_end(hi)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotonicityKind {
    Cm,
    Am,
    Lcm,
}

impl fmt::Display for MonotonicityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            MonotonicityKind::Cm => "cm",
            MonotonicityKind::Am => "am",
            MonotonicityKind::Lcm => "lcm",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ProvedExact,
    VerifiedSampled,
    Violated,
}

/// A sampled point where the checked inequality failed. `value` is the raw
/// derivative (or log-derivative) at the point; re-evaluating it reproduces
/// the violating sign.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Witness {
    pub order: u32,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    pub kind: MonotonicityKind,
    pub function: String,
    pub interval: String,
    pub max_order: u32,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub samples_per_order: usize,
}

impl MonotonicityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Deterministic log-spaced grid over `[lo, hi]`, endpoints included.
/// Both bounds must be positive and finite.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo && hi.is_finite());
    if n <= 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|j| (a + (b - a) * j as f64 / (n - 1) as f64).exp())
        .collect()
}

/// Unbounded ends are truncated here for sampling; the closed-half-axis tails
/// are covered by the exact arguments and known asymptotics.
const TRUNCATE_LO: f64 = 1e-3;
const TRUNCATE_HI: f64 = 1e3;

/// Sampling grid for an interval: log-spaced over the truncated positive
/// part, mirrored over the truncated negative part, both when the interval
/// spans zero (only `f` admits that).
fn sample_grid(interval: &IntervalSpec, samples: usize) -> Vec<f64> {
    let n = samples.max(1);
    let positive_part = |lo: f64, hi: f64| -> Vec<f64> {
        let mut a = lo.max(TRUNCATE_LO);
        let mut b = hi.min(TRUNCATE_HI);
        if !(a < b) {
            // Interval entirely outside the default window; span a decade
            // around what we can, staying inside the interval.
            if lo > TRUNCATE_HI {
                a = lo;
                b = if hi.is_finite() { hi } else { lo * 10.0 };
            } else {
                b = hi;
                a = (b / 10.0).max(lo);
            }
        }
        log_grid(a, b, n)
    };
    let mut grid = Vec::new();
    if interval.lower < 0.0 {
        let lo = if interval.upper >= 0.0 {
            f64::MIN_POSITIVE
        } else {
            -interval.upper
        };
        let hi = -interval.lower;
        grid.extend(positive_part(lo, hi).into_iter().map(|t| -t));
    }
    if interval.upper > 0.0 {
        let lo = interval.lower.max(0.0);
        grid.extend(positive_part(lo, interval.upper));
    }
    grid
}

/// Roundoff forgiveness on sampled paths only: a value in `(-1e-14 * scale, 0)`
/// counts as zero, where the scale is the value's own magnitude floored at 1.
/// Decidedly negative values are never forgiven.
fn effectively_nonneg(x: f64) -> bool {
    x >= -1e-14 * x.abs().max(1.0)
}

fn domain_check(function: FunctionId, interval: &IntervalSpec) -> Result<(), Error> {
    let ok = match function {
        FunctionId::F => true,
        FunctionId::G | FunctionId::H => interval.within_positive() || interval.within_negative(),
    };
    if !ok {
        return Err(Error::IntervalOutsideDomain {
            function: function.to_string(),
            interval: interval.to_string(),
        });
    }
    Ok(())
}

/// Confirms, on the exact integers, that every triangle entry up to
/// `max_order` is strictly positive. This is the entire content of the exact
/// sign arguments: each polynomial term then has a fixed sign on a half-axis.
fn verify_rows_positive(max_order: u32) -> bool {
    (1..=max_order).all(|i| shared_row(i).entries().iter().all(|a| !a.is_zero()))
}

/// Outcome of a sampled sweep: first witness found, if any.
fn sampled_sweep(
    function: FunctionId,
    grid: &[f64],
    max_order: u32,
    oriented: impl Fn(u32, f64) -> f64,
) -> Option<Witness> {
    for order in 0..=max_order {
        for &t in grid {
            let r = eval_derivative(function, order, t);
            let quantity = match r.status {
                EvalStatus::Finite => oriented(order, r.value),
                EvalStatus::UnderflowZero => 0.0,
                EvalStatus::OverflowInf => oriented(order, r.sign() as f64),
                EvalStatus::UndefinedAtZero => continue,
            };
            if !effectively_nonneg(quantity) {
                return Some(Witness {
                    order,
                    t,
                    value: r.value,
                });
            }
        }
    }
    None
}

/// Complete monotonicity: `(-1)^n q^(n)(t) >= 0` for `n = 0..=max_order`.
///
/// For `h` on intervals inside `(0, inf)` the verdict is exact: every term of
/// `exp(1/t) t^{-2i} * sum_k a[i][k] t^k` is positive there, so the check
/// reduces to entry positivity of the triangle. Other combinations sample a
/// deterministic grid.
pub fn check_cm(
    function: FunctionId,
    interval: IntervalSpec,
    max_order: u32,
    samples: usize,
) -> Result<MonotonicityReport, Error> {
    domain_check(function, &interval)?;
    if function == FunctionId::H && interval.within_positive() && verify_rows_positive(max_order) {
        return Ok(MonotonicityReport {
            kind: MonotonicityKind::Cm,
            function: function.to_string(),
            interval: interval.to_string(),
            max_order,
            verdict: Verdict::ProvedExact,
            witnesses: Vec::new(),
            samples_per_order: 0,
        });
    }
    let grid = sample_grid(&interval, samples);
    let witness = sampled_sweep(function, &grid, max_order, |order, v| {
        if order % 2 == 0 {
            v
        } else {
            -v
        }
    });
    Ok(MonotonicityReport {
        kind: MonotonicityKind::Cm,
        function: function.to_string(),
        interval: interval.to_string(),
        max_order,
        verdict: if witness.is_some() {
            Verdict::Violated
        } else {
            Verdict::VerifiedSampled
        },
        witnesses: witness.into_iter().collect(),
        samples_per_order: grid.len(),
    })
}

/// Absolute monotonicity: `q^(n)(t) >= 0` for `n = 0..=max_order`.
///
/// For `g` on intervals inside `(-inf, 0)` the verdict is exact: with `t < 0`
/// each term `(-1)^k a[i][k] t^k = a[i][k] |t|^k` is positive and so is the
/// prefactor `exp(-1/t) t^{-2i}`.
pub fn check_am(
    function: FunctionId,
    interval: IntervalSpec,
    max_order: u32,
    samples: usize,
) -> Result<MonotonicityReport, Error> {
    domain_check(function, &interval)?;
    if function == FunctionId::G && interval.within_negative() && verify_rows_positive(max_order) {
        return Ok(MonotonicityReport {
            kind: MonotonicityKind::Am,
            function: function.to_string(),
            interval: interval.to_string(),
            max_order,
            verdict: Verdict::ProvedExact,
            witnesses: Vec::new(),
            samples_per_order: 0,
        });
    }
    let grid = sample_grid(&interval, samples);
    let witness = sampled_sweep(function, &grid, max_order, |_, v| v);
    Ok(MonotonicityReport {
        kind: MonotonicityKind::Am,
        function: function.to_string(),
        interval: interval.to_string(),
        max_order,
        verdict: if witness.is_some() {
            Verdict::Violated
        } else {
            Verdict::VerifiedSampled
        },
        witnesses: witness.into_iter().collect(),
        samples_per_order: grid.len(),
    })
}

/// The k-th derivative of `sign * (1/t)`: `sign * (-1)^k * k! * t^{-(k+1)}`,
/// with the factorial exact and a single floating division.
pub fn log_derivative_one_over_t(k: u32, t: f64, sign: i8) -> f64 {
    assert!(k >= 1, "derivative order must be at least 1");
    assert!(t != 0.0, "t must be nonzero");
    assert!(sign == 1 || sign == -1, "sign must be +1 or -1");
    let parity = if k % 2 == 0 { 1.0 } else { -1.0 };
    let fact = factorial(k).to_f64().unwrap_or(f64::INFINITY);
    sign as f64 * parity * fact / t.powi(k as i32 + 1)
}

/// A function whose logarithm is `±1/t`: one of `f`, `g`, `h`, or a
/// reciprocal. Reciprocals stay in log space (`ln(1/q) = -ln q`); they are
/// never folded through a numeric `1/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcmTarget {
    pub function: FunctionId,
    pub reciprocal: bool,
}

impl LcmTarget {
    pub fn plain(function: FunctionId) -> Self {
        LcmTarget {
            function,
            reciprocal: false,
        }
    }

    pub fn reciprocal(function: FunctionId) -> Self {
        LcmTarget {
            function,
            reciprocal: true,
        }
    }

    /// Sign `s` in `ln(target) = s/t`.
    fn log_sign(&self) -> i8 {
        let base = match self.function {
            FunctionId::H => 1,
            FunctionId::F | FunctionId::G => -1,
        };
        if self.reciprocal {
            -base
        } else {
            base
        }
    }
}

impl fmt::Display for LcmTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.reciprocal {
            write!(f, "1/{}", self.function)
        } else {
            write!(f, "{}", self.function)
        }
    }
}

/// Logarithmically complete monotonicity over the interval, `k = 1..=max_order`.
///
/// On intervals inside `(0, inf)` the checked quantity is
/// `(-1)^k [ln q]^(k)(t)`; on intervals inside `(-inf, 0)` the definition is
/// applied to the reflection `q(-s)` on the mirrored interval, which works out
/// to checking `[ln q]^(k)(t) >= 0` directly. In both orientations the exact
/// cases collapse to `k! * |t|^{-(k+1)} > 0`: that holds for `h` and `1/g` on
/// the positive side (`ln = +1/t`) and for `g` and `1/h` on the negative side
/// (`ln = -1/t`), and those four are proved without consulting any float.
pub fn check_lcm(
    target: LcmTarget,
    interval: IntervalSpec,
    max_order: u32,
) -> Result<MonotonicityReport, Error> {
    domain_check(target.function, &interval)?;
    // Strict positivity of the target on the interval: f vanishes on t <= 0.
    if target.function == FunctionId::F && !interval.within_positive() {
        return Err(Error::NotPositiveOnInterval {
            function: target.to_string(),
            interval: interval.to_string(),
        });
    }
    let s = target.log_sign();
    let positive_side = interval.within_positive();
    // Oriented quantity's sign is s * (+1) on the positive side and -s on the
    // negative side, uniformly in k and t.
    let exact_sign = if positive_side { s } else { -s };
    if exact_sign == 1 && max_order >= 1 && !factorial(max_order).is_zero() {
        return Ok(MonotonicityReport {
            kind: MonotonicityKind::Lcm,
            function: target.to_string(),
            interval: interval.to_string(),
            max_order,
            verdict: Verdict::ProvedExact,
            witnesses: Vec::new(),
            samples_per_order: 0,
        });
    }
    // Violating side: sample to produce a concrete witness.
    let samples = 200;
    let grid = sample_grid(&interval, samples);
    let mut witness = None;
    'outer: for k in 1..=max_order {
        for &t in &grid {
            let log_derivative = log_derivative_one_over_t(k, t, s);
            let quantity = if positive_side {
                if k % 2 == 0 {
                    log_derivative
                } else {
                    -log_derivative
                }
            } else {
                log_derivative
            };
            if !effectively_nonneg(quantity) {
                witness = Some(Witness {
                    order: k,
                    t,
                    value: log_derivative,
                });
                break 'outer;
            }
        }
    }
    Ok(MonotonicityReport {
        kind: MonotonicityKind::Lcm,
        function: target.to_string(),
        interval: interval.to_string(),
        max_order,
        verdict: if witness.is_some() {
            Verdict::Violated
        } else {
            Verdict::VerifiedSampled
        },
        witnesses: witness.into_iter().collect(),
        samples_per_order: grid.len(),
    })
}

/// Pointwise identity behind the CM/AM reflection equivalence:
/// `(-1)^n h^(n)(t) = g^(n)(-t)` for sampled `t > 0` and `n <= max_order`,
/// to a relative tolerance of `1e-12`.
///
/// Where both sides leave the double range the comparison moves to the
/// `(sign, log magnitude)` representation.
pub fn cm_am_reflection_equivalence(max_order: u32, samples: usize) -> bool {
    let grid = log_grid(TRUNCATE_LO, TRUNCATE_HI, samples.max(2));
    for n in 0..=max_order {
        let parity: i8 = if n % 2 == 0 { 1 } else { -1 };
        for &t in &grid {
            let h_side = eval_derivative(FunctionId::H, n, t);
            let g_side = eval_derivative(FunctionId::G, n, -t);
            let equal = if h_side.is_finite() && g_side.is_finite() {
                let lhs = parity as f64 * h_side.value;
                let rhs = g_side.value;
                (lhs - rhs).abs() <= 1e-12 * lhs.abs().max(rhs.abs()).max(f64::MIN_POSITIVE)
            } else {
                match (h_side.log_form, g_side.log_form) {
                    (Some(a), Some(b)) => {
                        parity * a.sign == b.sign
                            && (a.log_magnitude - b.log_magnitude).abs()
                                <= 1e-12 * a.log_magnitude.abs().max(1.0)
                    }
                    _ => false,
                }
            };
            if !equal {
                return false;
            }
        }
    }
    true
}
