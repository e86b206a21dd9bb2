//! Exact integer coefficient triangle `a[i][k]` behind every derivative of
//! `exp(1/t)` and `exp(-1/t)`.
//!
//! The i-th derivative of `exp(1/t)` is `(-1)^i exp(1/t) t^{-2i} * sum_k a[i][k] t^k`
//! with `a[i][k] = C(i,k) * C(i-1,k) * k!` for `0 <= k <= i-1`. The triangle is
//! built by the row recurrence and cross-checked entry by entry against the
//! closed form at construction time; a disagreement is an error, never a wrong
//! table. Entries are arbitrary-precision: `a[i][i-1] = i!` already overflows
//! `u64` at `i = 21`.

use std::fmt::Write as _;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Exact nonnegative coefficient value. Every legal entry is >= 1.
pub type BigCoeff = BigUint;

/// Rows beyond this are computed on demand and memoized.
pub const DEFAULT_PRECOMPUTE_ORDER: u32 = 64;

/// `n!` as an exact integer.
pub fn factorial(n: u32) -> BigUint {
    let mut acc = BigUint::one();
    for j in 2..=n {
        acc *= BigUint::from(j);
    }
    acc
}

/// `C(n, k)` as an exact integer (0 when `k > n`).
pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for j in 0..k {
        acc = acc * BigUint::from(n - j) / BigUint::from(j + 1);
    }
    acc
}

/// The closed form `a[i][k] = C(i,k) * C(i-1,k) * k!`, computed exactly.
pub fn closed_form(i: u32, k: u32) -> Result<BigCoeff, Error> {
    if i < 1 || k > i - 1 {
        return Err(Error::CoeffIndex { i, k });
    }
    Ok(binomial(i, k) * binomial(i - 1, k) * factorial(k))
}

/// Equivalent restatement of the closed form counted from the top entry:
/// `a[i][i-m] = C(i-1, m-1) * i! / m!` for `1 <= m <= i`.
///
/// Kept as an independent route for cross-validation; the division is exact.
pub fn closed_form_reindexed(i: u32, m: u32) -> Result<BigCoeff, Error> {
    if i < 1 || m < 1 || m > i {
        return Err(Error::CoeffIndex {
            i,
            k: i.wrapping_sub(m),
        });
    }
    // i!/m! without forming i! first.
    let mut falling = BigUint::one();
    for j in (m + 1)..=i {
        falling *= BigUint::from(j);
    }
    Ok(binomial(i - 1, m - 1) * falling)
}

/// One row of the triangle: the `i` coefficients of the order-`i` derivative.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoefficientRow {
    order: u32,
    entries: Vec<BigCoeff>,
}

impl CoefficientRow {
    /// Builds row `i` directly from the closed form.
    pub fn from_closed_form(i: u32) -> Result<Self, Error> {
        let entries = (0..i)
            .map(|k| closed_form(i, k))
            .collect::<Result<_, _>>()?;
        Ok(CoefficientRow { order: i, entries })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn entries(&self) -> &[BigCoeff] {
        &self.entries
    }

    pub fn entry(&self, k: u32) -> Result<&BigCoeff, Error> {
        self.entries
            .get(k as usize)
            .ok_or(Error::CoeffIndex { i: self.order, k })
    }
}

/// The inductive step: row `i` to row `i+1`.
///
/// `b[0] = a[i][0]`, `b[k] = a[i][k] + (2i - k + 1) * a[i][k-1]` for
/// `1 <= k <= i-1`, and `b[i] = (i+1) * a[i][i-1]`.
pub fn row_recurrence(row: &CoefficientRow) -> CoefficientRow {
    let i = row.order;
    let a = &row.entries;
    let mut b = Vec::with_capacity(i as usize + 1);
    b.push(a[0].clone());
    for k in 1..i {
        let carry = BigUint::from(2 * i - k + 1) * &a[(k - 1) as usize];
        b.push(&a[k as usize] + carry);
    }
    b.push(BigUint::from(i + 1) * &a[(i - 1) as usize]);
    CoefficientRow {
        order: i + 1,
        entries: b,
    }
}

/// Rows 1..=max_order, built by the recurrence and verified against the
/// closed form.
#[derive(Debug, Clone)]
pub struct CoefficientTriangle {
    rows: Vec<Arc<CoefficientRow>>,
}

impl CoefficientTriangle {
    /// Builds the triangle, failing fast on the first entry (never expected)
    /// where recurrence and closed form disagree.
    ///
    /// ```
    /// use bumpfn::coeff::CoefficientTriangle;
    ///
    /// let t = CoefficientTriangle::build(4).unwrap();
    /// let row4: Vec<String> = t.row(4).unwrap().entries().iter().map(|a| a.to_string()).collect();
    /// assert_eq!(row4, ["1", "12", "36", "24"]);
    /// ```
    pub fn build(max_order: u32) -> Result<Self, Error> {
        assert!(max_order >= 1, "max_order must be at least 1");
        let mut rows: Vec<Arc<CoefficientRow>> = Vec::with_capacity(max_order as usize);
        let mut current = CoefficientRow {
            order: 1,
            entries: vec![BigUint::one()],
        };
        for i in 1..=max_order {
            verify_row(&current)?;
            let next = if i < max_order {
                Some(row_recurrence(&current))
            } else {
                None
            };
            rows.push(Arc::new(current));
            match next {
                Some(n) => current = n,
                None => break,
            }
        }
        Ok(CoefficientTriangle { rows })
    }

    pub fn max_order(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn row(&self, i: u32) -> Result<&CoefficientRow, Error> {
        if i < 1 || i > self.max_order() {
            return Err(Error::CoeffIndex { i, k: 0 });
        }
        Ok(&self.rows[(i - 1) as usize])
    }

    pub fn rows(&self) -> impl Iterator<Item = &CoefficientRow> {
        self.rows.iter().map(|r| r.as_ref())
    }

    /// CSV with columns `i,k,a_ik`, entries as decimal strings.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,k,a_ik\n");
        for row in self.rows() {
            for (k, a) in row.entries().iter().enumerate() {
                let _ = writeln!(out, "{},{},{}", row.order(), k, a);
            }
        }
        out
    }

    /// JSON array of rows, each row an array of decimal strings. Strings, not
    /// numbers: entries outgrow the 53-bit integer range JSON consumers give.
    pub fn to_json(&self) -> String {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.entries().iter().map(|a| a.to_string()).collect())
            .collect();
        serde_json::to_string(&rows).expect("string table serializes")
    }
}

fn verify_row(row: &CoefficientRow) -> Result<(), Error> {
    let i = row.order;
    for k in 0..i {
        let expected = closed_form(i, k)?;
        let got = &row.entries[k as usize];
        if *got != expected {
            return Err(Error::TriangleInconsistent {
                i,
                k,
                recurrence: got.to_string(),
                closed_form: expected.to_string(),
            });
        }
    }
    Ok(())
}

/// Independent oracle: the order-`i` coefficient row recovered by literal
/// term-by-term symbolic differentiation of `exp(1/t) * P(1/t)`.
///
/// The carrier is a polynomial in `1/t` with exact integer coefficients
/// (`coeffs[m]` multiplies `t^{-m}`), and the only rules used are
/// `d/dt exp(1/t) = -t^{-2} exp(1/t)` and `d/dt t^{-m} = -m t^{-m-1}`.
/// Shares nothing with [`closed_form`] or [`row_recurrence`].
pub fn symbolic_derivative_row(i: u32) -> CoefficientRow {
    assert!(i >= 1, "order must be at least 1");
    // P_0 = 1; after each step h^{(n)}(t) = exp(1/t) * P_n(1/t).
    let mut p: Vec<BigInt> = vec![BigInt::one()];
    for _ in 0..i {
        let mut next: Vec<BigInt> = vec![BigInt::zero(); p.len() + 2];
        for (m, c) in p.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            // product rule on exp(1/t) * c * t^{-m}
            next[m + 2] -= c; // exp factor: -t^{-2} exp(1/t)
            if m > 0 {
                next[m + 1] -= c * BigInt::from(m); // power: -m t^{-m-1}
            }
        }
        p = next;
    }
    // Normalize to (-1)^i t^{-2i} sum_k a[i][k] t^k: the t^{-m} coefficient is
    // (-1)^i a[i][2i-m], so powers below i+1 or above 2i must be absent.
    let two_i = 2 * i as usize;
    assert_eq!(p.len(), two_i + 1);
    let negate = i % 2 == 1;
    let mut entries = Vec::with_capacity(i as usize);
    for k in 0..i as usize {
        let m = two_i - k;
        let c = if negate { -&p[m] } else { p[m].clone() };
        assert!(
            c.is_positive(),
            "oracle produced a non-positive entry at (i={i}, k={k})"
        );
        entries.push(c.to_biguint().expect("positive"));
    }
    for (m, c) in p.iter().enumerate().take(i as usize + 1) {
        assert!(c.is_zero(), "oracle left a stray t^-{m} term at order {i}");
    }
    CoefficientRow { order: i, entries }
}

static ROW_CACHE: OnceLock<Mutex<RowCache>> = OnceLock::new();

/// A row converted once to `f64` for the numeric evaluator.
#[derive(Debug)]
pub struct RowF64 {
    pub values: Vec<f64>,
    /// True when every entry converted without rounding (entries stay within
    /// 53 significant bits through roughly order 18). Rounded rows need an
    /// exact-arithmetic escape under cancellation.
    pub exact: bool,
}

fn fits_f64_exactly(a: &BigUint) -> bool {
    let bits = a.bits();
    let trailing = a.trailing_zeros().unwrap_or(0);
    bits <= 1024 && bits - trailing <= 53
}

struct RowCache {
    rows: Vec<Arc<CoefficientRow>>,
    rows_f64: Vec<Arc<RowF64>>,
}

impl RowCache {
    fn ensure(&mut self, order: u32) {
        let target = order.max(DEFAULT_PRECOMPUTE_ORDER);
        if self.rows.len() as u32 >= target {
            return;
        }
        let mut current = match self.rows.last() {
            Some(last) => row_recurrence(last),
            None => CoefficientRow {
                order: 1,
                entries: vec![BigUint::one()],
            },
        };
        while (self.rows.len() as u32) < target {
            verify_row(&current).expect("recurrence and closed form agree");
            let next = row_recurrence(&current);
            self.rows_f64.push(Arc::new(RowF64 {
                values: current
                    .entries()
                    .iter()
                    .map(|a| a.to_f64().unwrap_or(f64::INFINITY))
                    .collect(),
                exact: current.entries().iter().all(fits_f64_exactly),
            }));
            self.rows.push(Arc::new(current));
            current = next;
        }
    }
}

fn with_cache<T>(order: u32, f: impl FnOnce(&RowCache) -> T) -> T {
    let cache = ROW_CACHE.get_or_init(|| {
        Mutex::new(RowCache {
            rows: Vec::new(),
            rows_f64: Vec::new(),
        })
    });
    let mut guard = cache.lock().expect("row cache lock");
    guard.ensure(order);
    f(&guard)
}

/// Memoized, verification-checked row `i`. Thread-safe.
pub fn shared_row(i: u32) -> Arc<CoefficientRow> {
    assert!(i >= 1, "order must be at least 1");
    with_cache(i, |c| Arc::clone(&c.rows[(i - 1) as usize]))
}

/// The same row converted once to `f64` (entries beyond the double range
/// saturate to infinity; the log-space evaluator never reads those directly).
pub fn shared_row_f64(i: u32) -> Arc<RowF64> {
    assert!(i >= 1, "order must be at least 1");
    with_cache(i, |c| Arc::clone(&c.rows_f64[(i - 1) as usize]))
}
