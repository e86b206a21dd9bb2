//! Smooth steps, bumps, and normalized partitions of unity over finite open
//! covers of a 1-D interval.
//!
//! The step is the conventional quotient `sigma(t) = f(t) / (f(t) + f(1-t))`,
//! which is identically 0 for `t <= 0`, identically 1 for `t >= 1`, and smooth
//! everywhere because the denominator never vanishes (`t` and `1-t` cannot
//! both be nonpositive). Bumps are affine-reparameterized steps glued around a
//! plateau, and partition weights are bumps normalized by their sum. All
//! derivatives ride along in jet arithmetic seeded by the exact closed forms.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::eval::{eval_derivative, FunctionId};
use crate::jet::{factorial_f64, Jet};

/// Default expansion order for weight jets.
pub const DEFAULT_JET_ORDER: usize = 6;
/// Beyond this the factorial scaling of high coefficients degrades doubles.
pub const MAX_JET_ORDER: usize = 16;

/// Within this distance of the support edge the jet switches to the exact
/// zero branch.
const EDGE_EPS: f64 = 1e-8;
/// Log-magnitude floor: values below `exp(-700)` contribute nothing
/// representable to a normalized weight, so their jets are zeroed too. This
/// keeps 0/0 out of the normalization while preserving support containment.
const LOG_FLOOR: f64 = -700.0;

/// Jet of `f(t) = exp(-1/t) [t > 0]` at `t`: coefficients `f^(i)(t)/i!`.
pub fn jet_of_f(t: f64, order: usize) -> Jet {
    if t <= EDGE_EPS || -1.0 / t < LOG_FLOOR {
        return Jet::zero(t, order);
    }
    let coeffs = (0..=order)
        .map(|i| eval_derivative(FunctionId::F, i as u32, t).value / factorial_f64(i))
        .collect();
    Jet::new(t, coeffs)
}

/// Jet of the smooth step `sigma(t) = f(t) / (f(t) + f(1-t))`.
///
/// `sigma` is 0 on `t <= 0`, 1 on `t >= 1`, strictly increasing between, and
/// satisfies `sigma(t) + sigma(1-t) = 1`.
pub fn smooth_step(t: f64, order: usize) -> Jet {
    let rising = jet_of_f(t, order);
    // x -> f(1-x) at x = t: the f-jet at 1-t with the chain factor (-1)^k.
    let mirrored = jet_of_f(1.0 - t, order).chain_affine(t, -1.0);
    let denominator = rising.add(&mirrored);
    // t and 1-t cannot both be nonpositive, so one of the two summands has a
    // constant term of at least exp(-2); asserted inside div.
    rising.div(&denominator)
}

/// One open patch of a cover with a smooth ramp at each end.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Patch {
    pub lower: f64,
    pub upper: f64,
    pub ramp: f64,
}

impl Patch {
    pub fn new(lower: f64, upper: f64, ramp: f64) -> Result<Self, Error> {
        let bad = |reason: &str| Error::InvalidPatch {
            lower,
            upper,
            ramp,
            reason: reason.into(),
        };
        if !(lower.is_finite() && upper.is_finite() && ramp.is_finite()) {
            return Err(bad("endpoints and ramp must be finite"));
        }
        if !(lower < upper) {
            return Err(bad("need lower < upper"));
        }
        if !(ramp > 0.0 && ramp <= (upper - lower) / 2.0) {
            return Err(bad("need 0 < ramp <= (upper - lower)/2"));
        }
        Ok(Patch { lower, upper, ramp })
    }

    /// The region where the bump is identically 1.
    pub fn plateau(&self) -> (f64, f64) {
        (self.lower + self.ramp, self.upper - self.ramp)
    }

    pub fn contains_open(&self, x: f64) -> bool {
        self.lower < x && x < self.upper
    }
}

/// Jet of the bump subordinate to `patch`: rises 0 to 1 across
/// `[lower, lower+ramp]`, holds 1 on the plateau, falls back across
/// `[upper-ramp, upper]`, and is exactly zero outside `[lower, upper]`.
pub fn bump(patch: &Patch, t: f64, order: usize) -> Jet {
    if t <= patch.lower || t >= patch.upper {
        return Jet::zero(t, order);
    }
    let (plateau_lo, plateau_hi) = patch.plateau();
    if t < plateau_lo {
        let u = (t - patch.lower) / patch.ramp;
        smooth_step(u, order).chain_affine(t, 1.0 / patch.ramp)
    } else if t > plateau_hi {
        let u = (patch.upper - t) / patch.ramp;
        smooth_step(u, order).chain_affine(t, -1.0 / patch.ramp)
    } else {
        Jet::constant(t, 1.0, order)
    }
}

/// A finite open cover of a closed interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Cover {
    domain: (f64, f64),
    patches: Vec<Patch>,
}

/// Serialization shape of a cover: `{"domain":[A,B],"patches":[{...}]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverSpec {
    pub domain: [f64; 2],
    pub patches: Vec<Patch>,
}

impl Cover {
    /// Validates patch invariants and that every point of the domain lies in
    /// the open core of some patch.
    pub fn new(domain: (f64, f64), patches: Vec<Patch>) -> Result<Self, Error> {
        if patches.is_empty() {
            return Err(Error::EmptyCover);
        }
        let (a, b) = domain;
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::CoverParse(format!(
                "domain [{a}, {b}] must be a finite interval with A < B"
            )));
        }
        for p in &patches {
            Patch::new(p.lower, p.upper, p.ramp)?;
        }
        // Sweep: repeatedly extend the covered prefix [A, cur] by the
        // farthest-reaching patch whose open core contains cur.
        let mut cur = a;
        loop {
            let reach = patches
                .iter()
                .filter(|p| p.lower < cur)
                .map(|p| p.upper)
                .fold(f64::NEG_INFINITY, f64::max);
            if reach <= cur {
                return Err(Error::CoverageGap { x: cur });
            }
            cur = reach;
            if cur > b {
                break;
            }
        }
        Ok(Cover { domain, patches })
    }

    pub fn from_spec(spec: &CoverSpec) -> Result<Self, Error> {
        Cover::new((spec.domain[0], spec.domain[1]), spec.patches.clone())
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let spec: CoverSpec =
            serde_json::from_str(text).map_err(|e| Error::CoverParse(e.to_string()))?;
        Cover::from_spec(&spec)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn patches(&self) -> &[Patch] {
        &self.patches
    }
}

/// Normalized smooth weights subordinate to a cover: at every covered point
/// the weights are nonnegative, sum to 1, and vanish identically outside
/// their patch.
#[derive(Debug, Clone)]
pub struct PartitionOfUnity {
    cover: Cover,
}

impl PartitionOfUnity {
    pub fn new(cover: Cover) -> Self {
        PartitionOfUnity { cover }
    }

    pub fn cover(&self) -> &Cover {
        &self.cover
    }

    /// Weight jets of every patch at `x`, to the requested order.
    pub fn weights_at(&self, x: f64, order: usize) -> Result<Vec<Jet>, Error> {
        if order > MAX_JET_ORDER {
            return Err(Error::JetOrderTooLarge {
                order,
                max: MAX_JET_ORDER,
            });
        }
        let bumps: Vec<Jet> = self
            .cover
            .patches
            .iter()
            .map(|p| bump(p, x, order))
            .collect();
        let mut total = Jet::zero(x, order);
        for b in &bumps {
            total = total.add(b);
        }
        if !(total.value() > 0.0) {
            return Err(Error::CoverageGap { x });
        }
        Ok(bumps
            .into_iter()
            .map(|b| {
                if b.is_zero() {
                    b // keep exact zeros exact: support containment
                } else {
                    b.div(&total)
                }
            })
            .collect())
    }
}

/// Weight jets of all patches at one query point.
#[derive(Debug, Clone)]
pub struct PointWeights {
    pub point: f64,
    pub weights: Vec<Jet>,
}

/// Evaluates the partition of unity over `cover` at each query point.
/// An empty point list yields an empty result.
///
/// ```
/// use bumpfn::pou::{pou_over_cover, Cover, Patch};
///
/// let cover = Cover::new(
///     (0.0, 1.0),
///     vec![
///         Patch::new(-0.6, 0.7, 0.3).unwrap(),
///         Patch::new(0.3, 1.6, 0.3).unwrap(),
///     ],
/// )
/// .unwrap();
/// let rows = pou_over_cover(&cover, &[0.2, 0.5, 0.8], 4).unwrap();
/// for row in &rows {
///     let total: f64 = row.weights.iter().map(|w| w.value()).sum();
///     assert!((total - 1.0).abs() < 1e-12);
/// }
/// ```
pub fn pou_over_cover(
    cover: &Cover,
    points: &[f64],
    order: usize,
) -> Result<Vec<PointWeights>, Error> {
    let pou = PartitionOfUnity::new(cover.clone());
    points
        .iter()
        .map(|&x| {
            Ok(PointWeights {
                point: x,
                weights: pou.weights_at(x, order)?,
            })
        })
        .collect()
}

/// CSV rows `(x, patch, weight, d1, .., dm)`; derivatives are true derivative
/// values (coefficients rescaled by the factorials).
pub fn write_pou_csv<W: io::Write>(
    w: &mut W,
    rows: &[PointWeights],
    order: usize,
) -> io::Result<()> {
    let mut header = String::from("x,patch,weight");
    for m in 1..=order {
        header.push_str(&format!(",d{m}"));
    }
    writeln!(w, "{header}")?;
    for row in rows {
        for (j, jet) in row.weights.iter().enumerate() {
            let mut line = format!("{},{},{}", row.point, j, jet.value());
            for m in 1..=order {
                line.push_str(&format!(",{}", jet.derivative(m)));
            }
            writeln!(w, "{line}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn f_jet_examples() {
        let zero = jet_of_f(-1.0, 5);
        assert!(zero.is_zero());
        assert_eq!(zero.order(), 5);

        let v = jet_of_f(1.0, 0);
        assert_relative_eq!(v.value(), (-1f64).exp(), max_relative = 1e-15);

        let j = jet_of_f(1.0, 2);
        let e_inv = (-1f64).exp();
        assert_relative_eq!(j.coeff(0), e_inv, max_relative = 1e-14);
        assert_relative_eq!(j.coeff(1), e_inv, max_relative = 1e-14);
        assert_relative_eq!(j.coeff(2), -e_inv / 2.0, max_relative = 1e-14);
    }

    #[test]
    fn step_midpoint_and_branches() {
        assert_eq!(smooth_step(0.5, 0).value(), 0.5);
        assert!(smooth_step(-2.0, 3).is_zero());
        let v = smooth_step(0.25, 0).value();
        let expected = (-4f64).exp() / ((-4f64).exp() + (-4f64 / 3.0).exp());
        assert_relative_eq!(v, expected, max_relative = 1e-14);
        assert!(0.0 < v && v < 0.5);
        assert_eq!(smooth_step(1.0, 4).coeffs(), &[1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn step_complement_sums_to_one() {
        for &t in &[0.1, 0.25, 0.4, 0.5, 0.63, 0.9, 1.3, -0.2] {
            let s = smooth_step(t, 0).value() + smooth_step(1.0 - t, 0).value();
            assert_relative_eq!(s, 1.0, max_relative = 1e-15);
        }
    }

    #[test]
    fn bump_shape() {
        let patch = Patch::new(0.0, 2.0, 0.5).unwrap();
        assert_relative_eq!(bump(&patch, 1.0, 0).value(), 1.0);
        assert!(bump(&patch, 0.0, 3).is_zero());
        assert!(bump(&patch, 2.0, 3).is_zero());
        assert!(bump(&patch, -0.7, 3).is_zero());
        assert_eq!(bump(&patch, 0.25, 0).value(), 0.5);
        let v = bump(&patch, 1.8, 0).value();
        assert!(0.0 < v && v < 1.0);
    }

    #[test]
    fn patch_invariants_enforced() {
        assert!(Patch::new(0.0, 1.0, 0.4).is_ok());
        assert!(Patch::new(1.0, 0.0, 0.1).is_err());
        assert!(Patch::new(0.0, 1.0, 0.6).is_err());
        assert!(Patch::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cover_detects_gap() {
        let patches = vec![
            Patch::new(-0.1, 0.4, 0.1).unwrap(),
            Patch::new(0.5, 1.1, 0.1).unwrap(),
        ];
        match Cover::new((0.0, 1.0), patches) {
            Err(Error::CoverageGap { x }) => assert_relative_eq!(x, 0.4),
            other => panic!("expected coverage gap, got {other:?}"),
        }
    }

    #[test]
    fn single_plateau_patch_gives_unit_weight() {
        let cover = Cover::new((0.0, 1.0), vec![Patch::new(-0.5, 1.5, 0.3).unwrap()]).unwrap();
        let rows = pou_over_cover(&cover, &[0.0, 0.25, 0.5, 0.75, 1.0], 4).unwrap();
        for row in rows {
            assert_eq!(row.weights[0].value(), 1.0);
            for m in 1..=4 {
                assert_eq!(row.weights[0].derivative(m), 0.0);
            }
        }
    }

    #[test]
    fn identical_patches_split_evenly() {
        let p = Patch::new(-0.5, 1.5, 0.3).unwrap();
        let cover = Cover::new((0.0, 1.0), vec![p, p]).unwrap();
        let rows = pou_over_cover(&cover, &[0.5], 2).unwrap();
        assert_eq!(rows[0].weights[0].value(), 0.5);
        assert_eq!(rows[0].weights[1].value(), 0.5);
    }

    #[test]
    fn isolated_plateau_takes_all_weight() {
        let cover = Cover::new(
            (0.0, 2.0),
            vec![
                Patch::new(-0.2, 1.0, 0.2).unwrap(),
                Patch::new(0.8, 2.2, 0.2).unwrap(),
            ],
        )
        .unwrap();
        // x = 0.5 is in the first patch's plateau and outside the second's
        // support entirely.
        let rows = pou_over_cover(&cover, &[0.5], 3).unwrap();
        assert_eq!(rows[0].weights[0].value(), 1.0);
        assert!(rows[0].weights[1].is_zero());
    }

    #[test]
    fn symmetric_two_patch_cover_splits_the_midpoint() {
        // Mirror-image patches split the center evenly (up to the roundoff
        // of the not-exactly-representable edge distances).
        let cover = Cover::new(
            (0.0, 1.0),
            vec![
                Patch::new(-0.6, 0.7, 0.3).unwrap(),
                Patch::new(0.3, 1.6, 0.3).unwrap(),
            ],
        )
        .unwrap();
        let rows = pou_over_cover(&cover, &[0.5], 2).unwrap();
        assert_relative_eq!(rows[0].weights[0].value(), 0.5, max_relative = 1e-14);
        assert_relative_eq!(rows[0].weights[1].value(), 0.5, max_relative = 1e-14);
    }

    #[test]
    fn empty_points_give_empty_result() {
        let cover = Cover::new((0.0, 1.0), vec![Patch::new(-0.5, 1.5, 0.3).unwrap()]).unwrap();
        assert!(pou_over_cover(&cover, &[], 2).unwrap().is_empty());
    }

    #[test]
    fn cover_json_round_trip_and_errors() {
        let cover = Cover::from_json(
            r#"{"domain":[0.0,1.0],"patches":[{"lower":-0.5,"upper":1.5,"ramp":0.3}]}"#,
        )
        .unwrap();
        assert_eq!(cover.patches().len(), 1);
        assert!(matches!(
            Cover::from_json("{not json"),
            Err(Error::CoverParse(_))
        ));
    }

    #[test]
    fn order_cap_enforced() {
        let cover = Cover::new((0.0, 1.0), vec![Patch::new(-0.5, 1.5, 0.3).unwrap()]).unwrap();
        assert!(matches!(
            pou_over_cover(&cover, &[0.5], MAX_JET_ORDER + 1),
            Err(Error::JetOrderTooLarge { .. })
        ));
    }

    #[test]
    fn pou_csv_shape() {
        let cover = Cover::new((0.0, 1.0), vec![Patch::new(-0.5, 1.5, 0.3).unwrap()]).unwrap();
        let rows = pou_over_cover(&cover, &[0.5], 2).unwrap();
        let mut buf = Vec::new();
        write_pou_csv(&mut buf, &rows, 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,patch,weight,d1,d2\n"));
        assert!(text.contains("0.5,0,1,0,0"));
    }
}
