//! Numeric evaluation of the derivatives of `f`, `g`, `h` at real arguments.
//!
//! `f(t) = exp(-1/t)` for `t > 0` and `0` for `t <= 0`; `g(t) = exp(-1/t)` and
//! `h(t) = exp(1/t)` on the punctured line. The closed forms put every
//! derivative into the shape `sign * exp(±1/t) * t^{-2i} * S(t)` with `S` an
//! integer-coefficient polynomial, so evaluation is done in pieces: polynomial
//! part in Horner order, exponential and power parts in log space. When the
//! result leaves the double range the status says so and a `(sign, log
//! magnitude)` pair is still reported; silent infinities would poison the
//! property suites downstream.

use std::fmt;
use std::io;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::coeff::{shared_row, shared_row_f64, CoefficientRow};
use crate::error::Error;

/// Which member of the family is meant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FunctionId {
    /// `exp(-1/t)` glued to `0` on `t <= 0`; smooth on all of the line.
    F,
    /// `exp(-1/t)` on the punctured line.
    G,
    /// `exp(1/t)` on the punctured line.
    H,
}

impl FunctionId {
    /// Sign of the exponent argument: `exp(sign/t)`.
    pub fn exp_sign(self) -> f64 {
        match self {
            FunctionId::H => 1.0,
            FunctionId::F | FunctionId::G => -1.0,
        }
    }

    /// Whether the polynomial sum carries `(-1)^k` per term.
    pub fn alternating(self) -> bool {
        matches!(self, FunctionId::F | FunctionId::G)
    }

    /// True when the function is identically zero on `t <= 0`.
    pub fn zero_for_nonpositive(self) -> bool {
        matches!(self, FunctionId::F)
    }

    pub fn contains(self, t: f64) -> bool {
        match self {
            FunctionId::F => true,
            FunctionId::G | FunctionId::H => t != 0.0,
        }
    }
}

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            FunctionId::F => "f",
            FunctionId::G => "g",
            FunctionId::H => "h",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for FunctionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f" | "F" => Ok(FunctionId::F),
            "g" | "G" => Ok(FunctionId::G),
            "h" | "H" => Ok(FunctionId::H),
            other => Err(format!("unknown function '{other}' (expected f, g, or h)")),
        }
    }
}

/// Symbolic closed form of the order-`i` derivative:
/// `sign_factor * exp(exp_sign/t) * t^{-power} * sum_k c_k t^k` where
/// `c_k = (-1)^k row[k]` when `alternating`, else `row[k]`.
#[derive(Debug, Clone)]
pub struct DerivativeForm {
    pub function: FunctionId,
    pub order: u32,
    /// `(-1)^i` for `h`, `+1` for `g` and `f`.
    pub sign_factor: i8,
    /// Exponent of the `1/t^power` factor; always `2 * order`.
    pub power: u32,
    pub row: Arc<CoefficientRow>,
    pub alternating: bool,
}

impl DerivativeForm {
    /// True when the form carries the glued identically-zero branch on `t <= 0`.
    pub fn zero_for_nonpositive(&self) -> bool {
        self.function.zero_for_nonpositive()
    }
}

/// The closed form of the order-`i` derivative, `i >= 1`.
pub fn derivative_form(function: FunctionId, order: u32) -> DerivativeForm {
    assert!(order >= 1, "derivative_form needs order >= 1");
    let sign_factor = match function {
        FunctionId::H => {
            if order % 2 == 0 {
                1
            } else {
                -1
            }
        }
        FunctionId::F | FunctionId::G => 1,
    };
    DerivativeForm {
        function,
        order,
        sign_factor,
        power: 2 * order,
        row: shared_row(order),
        alternating: function.alternating(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalStatus {
    Finite,
    UnderflowZero,
    OverflowInf,
    UndefinedAtZero,
}

impl fmt::Display for EvalStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EvalStatus::Finite => "finite",
            EvalStatus::UnderflowZero => "underflow_zero",
            EvalStatus::OverflowInf => "overflow_inf",
            EvalStatus::UndefinedAtZero => "undefined_at_zero",
        };
        f.write_str(s)
    }
}

/// Sign and natural-log magnitude of a value, valid far outside the double range.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LogForm {
    /// -1, 0, or +1.
    pub sign: i8,
    pub log_magnitude: f64,
}

/// Outcome of a derivative evaluation.
///
/// `value` is the double-precision result when `status` is `finite`, `0` on
/// underflow, `±inf` on overflow, and NaN when undefined. For every defined,
/// nonzero evaluation `log_form` carries the exact sign and the log magnitude
/// `±1/t - 2i*ln|t| + ln|S|`; when `status` is `finite` it agrees with `value`
/// to a relative error of a few units in the last place times `|log_magnitude|`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvalResult {
    pub value: f64,
    pub status: EvalStatus,
    pub log_form: Option<LogForm>,
}

impl EvalResult {
    fn exact_zero() -> Self {
        EvalResult {
            value: 0.0,
            status: EvalStatus::Finite,
            log_form: None,
        }
    }

    fn undefined_at_zero() -> Self {
        EvalResult {
            value: f64::NAN,
            status: EvalStatus::UndefinedAtZero,
            log_form: None,
        }
    }

    /// Exact sign of the mathematical value: -1, 0, or +1.
    pub fn sign(&self) -> i8 {
        match self.log_form {
            Some(lf) => lf.sign,
            None => {
                if self.value == 0.0 || self.value.is_nan() {
                    0
                } else if self.value > 0.0 {
                    1
                } else {
                    -1
                }
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.status == EvalStatus::Finite
    }
}

const LN_MAX: f64 = 709.782712893384;
const LN_MIN_NORMAL: f64 = -708.3964185322641;
/// Direct (non-log) evaluation is used only when every partial product stays
/// comfortably inside the double range.
const SAFE_EXP_BAND: f64 = 700.0;
/// Rows longer than this are summed with error-free transformations; the
/// coefficients reach `i!` and plain Horner starts shedding digits.
const COMPENSATED_LEN: usize = 25;
/// Row construction cost grows quadratically; keep requests desk-scale.
const MAX_ORDER: u32 = 512;

/// Evaluates the order-`i` derivative of the chosen function at `t`.
///
/// All finite real `t` are accepted; out-of-domain and out-of-range outcomes
/// are reported through the status, never as panics. `order = 0` is the
/// function value itself.
///
/// ```
/// use bumpfn::eval::{eval_derivative, EvalStatus, FunctionId};
///
/// // h'(1) = -e
/// let r = eval_derivative(FunctionId::H, 1, 1.0);
/// assert!((r.value + std::f64::consts::E).abs() < 1e-14);
///
/// // far below the double range: value underflows, the log form survives
/// let r = eval_derivative(FunctionId::G, 0, 1e-3);
/// assert_eq!(r.status, EvalStatus::UnderflowZero);
/// assert_eq!(r.log_form.unwrap().log_magnitude, -1000.0);
/// ```
pub fn eval_derivative(function: FunctionId, order: u32, t: f64) -> EvalResult {
    assert!(t.is_finite(), "t must be a finite real number");
    assert!(
        order <= MAX_ORDER,
        "order {order} beyond supported {MAX_ORDER}"
    );
    match function {
        FunctionId::F if t <= 0.0 => return EvalResult::exact_zero(),
        FunctionId::G | FunctionId::H if t == 0.0 => return EvalResult::undefined_at_zero(),
        _ => {}
    }
    let exp_arg = function.exp_sign() / t;
    if order == 0 {
        // exp(±1/t): polynomial part is the empty product.
        return assemble(1, exp_arg, 0.0, 0.0, 1.0, 1.0);
    }
    let sign_factor: i8 = match function {
        FunctionId::H if order % 2 == 1 => -1,
        _ => 1,
    };
    let u = if function.alternating() { -t } else { t };
    let poly = poly_parts(order, u);
    if poly.sign == 0 {
        // The polynomial sum cancelled to zero at working precision; the
        // closed form then evaluates to zero exactly as computed.
        return EvalResult::exact_zero();
    }
    let power_log = -2.0 * order as f64 * t.abs().ln();
    let power = t.abs().powi(-2 * order as i32);
    assemble(
        sign_factor * poly.sign,
        exp_arg,
        power_log,
        poly.ln_abs,
        poly.value.abs(),
        power,
    )
}

/// Combines `sign * exp(exp_arg) * power * s_abs` given also the log-space
/// pieces, choosing the representation the double range allows.
fn assemble(
    sign: i8,
    exp_arg: f64,
    power_log: f64,
    s_ln_abs: f64,
    s_abs: f64,
    power: f64,
) -> EvalResult {
    let log_magnitude = exp_arg + power_log + s_ln_abs;
    let log_form = Some(LogForm {
        sign,
        log_magnitude,
    });
    if log_magnitude > LN_MAX {
        return EvalResult {
            value: sign as f64 * f64::INFINITY,
            status: EvalStatus::OverflowInf,
            log_form,
        };
    }
    if log_magnitude < LN_MIN_NORMAL {
        return EvalResult {
            value: 0.0,
            status: EvalStatus::UnderflowZero,
            log_form,
        };
    }
    let direct_safe = exp_arg.abs() <= SAFE_EXP_BAND
        && power_log.abs() <= SAFE_EXP_BAND
        && (exp_arg + power_log).abs() <= SAFE_EXP_BAND
        && log_magnitude.abs() <= SAFE_EXP_BAND
        && s_abs.is_finite()
        && power.is_finite();
    let value = if direct_safe {
        sign as f64 * (exp_arg.exp() * power * s_abs)
    } else {
        sign as f64 * log_magnitude.exp()
    };
    EvalResult {
        value,
        status: EvalStatus::Finite,
        log_form,
    }
}

struct PolyParts {
    value: f64,
    sign: i8,
    ln_abs: f64,
}

/// Condition-number gates for keeping the floating mixed-sign sum. With
/// exactly-converted coefficients the compensated sum is wrong only by
/// `~cond * eps^2`, so a large gate is safe; once the coefficients themselves
/// round (order 19 and up), `cond * eps/2` of conversion error is irreducible
/// in floats and the gate must stay small.
const COND_LIMIT_EXACT_ROW: f64 = 1e8;
const COND_LIMIT_ROUNDED_ROW: f64 = 1e3;

/// Value, exact sign, and robust `ln|.|` of `sum_k a[i][k] u^k`.
///
/// For `u > 0` every term is positive: the sign is structural, no
/// cancellation can occur, and the floating sum is forward stable. For
/// `u < 0` the terms alternate; the compensated floating sum is kept only
/// while its estimated condition number is benign, and otherwise the sum is
/// redone in exact scaled-integer arithmetic (`u` is a dyadic rational, the
/// coefficients are exact integers), which makes the sign exact and leaves a
/// single rounding at the end.
fn poly_parts(order: u32, u: f64) -> PolyParts {
    let row = shared_row_f64(order);
    let coeffs = &row.values;
    let value = if u < 0.0 || coeffs.len() > COMPENSATED_LEN {
        horner_compensated(coeffs, u)
    } else {
        horner(coeffs, u)
    };
    if value.is_finite() && coeffs.iter().all(|c| c.is_finite()) {
        if u > 0.0 {
            return PolyParts {
                value,
                sign: 1,
                ln_abs: value.ln(),
            };
        }
        let magnitude = horner(coeffs, -u);
        let gate = if row.exact {
            COND_LIMIT_EXACT_ROW
        } else {
            COND_LIMIT_ROUNDED_ROW
        };
        if value != 0.0 && magnitude.is_finite() && magnitude <= gate * value.abs() {
            return PolyParts {
                value,
                sign: if value > 0.0 { 1 } else { -1 },
                ln_abs: value.abs().ln(),
            };
        }
    }
    poly_exact(order, u)
}

/// Exact evaluation of `sum_k a[i][k] u^k` with `u = p * 2^e` (every double
/// is a dyadic rational): all terms are brought to the common scale
/// `2^min(0, e*(i-1))` as integers and summed exactly.
fn poly_exact(order: u32, u: f64) -> PolyParts {
    use num_bigint::BigInt;
    use num_traits::Float;

    let row = shared_row(order);
    let n = row.entries().len();
    let (mant, exp, sign) = Float::integer_decode(u);
    let mut p = BigInt::from(mant);
    if sign < 0 {
        p = -p;
    }
    let mut sum = BigInt::from(0u32);
    let mut p_pow = BigInt::from(1u32);
    for (k, c) in row.entries().iter().enumerate() {
        let term = BigInt::from(c.clone()) * &p_pow;
        let shift = if exp >= 0 {
            exp as u64 * k as u64
        } else {
            (-(exp as i64)) as u64 * (n - 1 - k) as u64
        };
        sum += term << shift;
        if k + 1 < n {
            p_pow *= &p;
        }
    }
    if sum == BigInt::from(0u32) {
        return PolyParts {
            value: 0.0,
            sign: 0,
            ln_abs: f64::NEG_INFINITY,
        };
    }
    let scale: i64 = if exp >= 0 {
        0
    } else {
        exp as i64 * (n as i64 - 1)
    };
    let sign: i8 = if sum > BigInt::from(0u32) { 1 } else { -1 };
    let magnitude = sum.magnitude();
    let ln_abs = ln_biguint(magnitude) + scale as f64 * std::f64::consts::LN_2;
    // Round once: top 64 bits of the magnitude times the exact power of two.
    let bits = magnitude.bits();
    let shift = bits.saturating_sub(64);
    let top = (magnitude >> shift).to_u64().expect("top bits fit") as f64;
    let pow2 = (shift as i64 + scale).clamp(-1100, 1100) as i32;
    let value = sign as f64 * top * 2f64.powi(pow2);
    PolyParts {
        value,
        sign,
        ln_abs,
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc.mul_add(x, c))
}

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bp = s - a;
    let e = (a - (s - bp)) + (b - bp);
    (s, e)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// Horner with error-free transformations; the rounding errors of every
/// product and sum are carried in a parallel expansion and folded back in.
fn horner_compensated(coeffs: &[f64], x: f64) -> f64 {
    let n = coeffs.len();
    let mut s = coeffs[n - 1];
    let mut comp = 0.0f64;
    for k in (0..n - 1).rev() {
        let (p, pe) = two_prod(s, x);
        let (t, te) = two_sum(p, coeffs[k]);
        s = t;
        comp = comp.mul_add(x, pe + te);
    }
    s + comp
}

/// Natural log of an exact nonnegative integer, valid past the double range.
fn ln_biguint(v: &BigUint) -> f64 {
    let approx = v.to_f64().unwrap_or(f64::INFINITY);
    if approx.is_finite() && approx > 0.0 {
        return approx.ln();
    }
    let bits = v.bits();
    let shift = bits - 64;
    let top = (v >> shift).to_u64().expect("top bits fit u64");
    (top as f64).ln() + shift as f64 * std::f64::consts::LN_2
}

/// Approach side for the classification of `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroSide {
    LeftOfZero,
    RightOfZero,
}

impl fmt::Display for ZeroSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ZeroSide::LeftOfZero => "left_of_zero",
            ZeroSide::RightOfZero => "right_of_zero",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for ZeroSide {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left" | "left_of_zero" => Ok(ZeroSide::LeftOfZero),
            "right" | "right_of_zero" => Ok(ZeroSide::RightOfZero),
            other => Err(format!("unknown side '{other}' (expected left or right)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitValue {
    Zero,
    PlusInfinity,
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LimitValue::Zero => "zero",
            LimitValue::PlusInfinity => "plus_infinity",
        };
        f.write_str(s)
    }
}

/// One-sided limit of `g` or `h` at `t = 0`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitClassification {
    pub function: FunctionId,
    pub side: ZeroSide,
    pub limit: LimitValue,
}

/// Classifies the one-sided limit of `g` or `h` at zero and verifies it by
/// monotone sampling toward 0. `f` is continuous there and is rejected.
///
/// The four cases: `h` explodes from the right and vanishes from the left;
/// `g` mirrors it. Together they make `t = 0` a jump-infinite discontinuity.
pub fn limit_at_zero(function: FunctionId, side: ZeroSide) -> Result<LimitClassification, Error> {
    if function == FunctionId::F {
        return Err(Error::NotAJumpPoint {
            function: function.to_string(),
        });
    }
    let limit = match (function, side) {
        (FunctionId::H, ZeroSide::RightOfZero) | (FunctionId::G, ZeroSide::LeftOfZero) => {
            LimitValue::PlusInfinity
        }
        _ => LimitValue::Zero,
    };
    // Monotone approach: t_j = ±10^-j. The log magnitude must move strictly
    // in the direction of the classified limit the whole way down.
    let sgn = match side {
        ZeroSide::LeftOfZero => -1.0,
        ZeroSide::RightOfZero => 1.0,
    };
    let mut previous: Option<f64> = None;
    for j in 1..=6 {
        let t = sgn * 10f64.powi(-j);
        let r = eval_derivative(function, 0, t);
        let lf = r.log_form.ok_or_else(|| Error::LimitEvidence {
            function: function.to_string(),
            side: side.to_string(),
            detail: format!("no log form at t = {t}"),
        })?;
        if lf.sign != 1 {
            return Err(Error::LimitEvidence {
                function: function.to_string(),
                side: side.to_string(),
                detail: format!("non-positive sample at t = {t}"),
            });
        }
        if let Some(prev) = previous {
            let ok = match limit {
                LimitValue::Zero => lf.log_magnitude < prev,
                LimitValue::PlusInfinity => lf.log_magnitude > prev,
            };
            if !ok {
                return Err(Error::LimitEvidence {
                    function: function.to_string(),
                    side: side.to_string(),
                    detail: format!("magnitude not monotone at t = {t}"),
                });
            }
        }
        previous = Some(lf.log_magnitude);
    }
    Ok(LimitClassification {
        function,
        side,
        limit,
    })
}

/// Relative residual of the reflection identity
/// `g^(i)(t) = (-1)^i h^(i)(-t)`, i.e.
/// `|g^(i)(t) - (-1)^i h^(i)(-t)| / max(1, |g^(i)(t)|)`.
///
/// Both sides must land in the double range; otherwise the offending status
/// is propagated as an error.
pub fn reflection_residual(order: u32, t: f64) -> Result<f64, Error> {
    assert!(t != 0.0, "reflection residual needs t != 0");
    let g_side = eval_derivative(FunctionId::G, order, t);
    if !g_side.is_finite() {
        return Err(Error::NonFiniteEval {
            function: "g".into(),
            order,
            t,
            status: g_side.status.to_string(),
        });
    }
    let h_side = eval_derivative(FunctionId::H, order, -t);
    if !h_side.is_finite() {
        return Err(Error::NonFiniteEval {
            function: "h".into(),
            order,
            t: -t,
            status: h_side.status.to_string(),
        });
    }
    let parity = if order % 2 == 0 { 1.0 } else { -1.0 };
    let diff = (g_side.value - parity * h_side.value).abs();
    Ok(diff / g_side.value.abs().max(1.0))
}

/// Writes evaluation rows `(fn, i, t, value, status, sign, log_magnitude)` as
/// CSV for plot pipelines. Missing log forms leave the trailing fields empty.
pub fn write_trace_csv<W: io::Write>(
    w: &mut W,
    function: FunctionId,
    order: u32,
    points: &[f64],
) -> io::Result<()> {
    writeln!(w, "fn,i,t,value,status,sign,log_magnitude")?;
    for &t in points {
        let r = eval_derivative(function, order, t);
        match r.log_form {
            Some(lf) => writeln!(
                w,
                "{},{},{},{},{},{},{}",
                function, order, t, r.value, r.status, lf.sign, lf.log_magnitude
            )?,
            None => writeln!(
                w,
                "{},{},{},{},{},{},",
                function,
                order,
                t,
                r.value,
                r.status,
                r.sign()
            )?,
        }
    }
    Ok(())
}
