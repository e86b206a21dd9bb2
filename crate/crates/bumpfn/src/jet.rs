//! Truncated Taylor (jet) arithmetic.
//!
//! A jet stores `c[k] = w^(k)(x0) / k!` for `k = 0..=m` and propagates those
//! coefficients exactly through truncated ring operations. The partition-of-
//! unity builder combines closed-form seeds with quotients and affine
//! reparameterizations, which is all this needs to support.

/// Factorials up to 20! are exact in `f64`; jet orders stay far below that.
pub(crate) fn factorial_f64(n: usize) -> f64 {
    (1..=n).map(|j| j as f64).product()
}

/// Truncated Taylor expansion at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn new(center: f64, coeffs: Vec<f64>) -> Self {
        assert!(
            !coeffs.is_empty(),
            "a jet needs at least the value coefficient"
        );
        Jet { center, coeffs }
    }

    pub fn constant(center: f64, value: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    pub fn zero(center: f64, order: usize) -> Self {
        Jet {
            center,
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// The function value at the center.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Taylor coefficient `w^(k)(x0)/k!`.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The derivative value `w^(m)(x0)` (coefficient scaled back by `m!`).
    pub fn derivative(&self, m: usize) -> f64 {
        self.coeffs[m] * factorial_f64(m)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    fn check_compatible(&self, rhs: &Jet) {
        assert_eq!(self.order(), rhs.order(), "jet orders differ");
        assert!(
            self.center == rhs.center,
            "jet centers differ: {} vs {}",
            self.center,
            rhs.center
        );
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Jet {
            center: self.center,
            coeffs,
        }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let coeffs = self
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Jet {
            center: self.center,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Cauchy product truncated at the common order.
    pub fn mul(&self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        let n = self.coeffs.len();
        let coeffs = (0..n)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * rhs.coeffs[k - j]).sum())
            .collect();
        Jet {
            center: self.center,
            coeffs,
        }
    }

    /// Truncated quotient. The divisor must have a nonzero constant term;
    /// a zero there means the quotient has no Taylor expansion at all, so it
    /// is a hard error rather than a NaN factory.
    pub fn div(&self, rhs: &Jet) -> Jet {
        self.check_compatible(rhs);
        assert!(
            rhs.coeffs[0] != 0.0,
            "jet division by a jet with zero constant term"
        );
        let n = self.coeffs.len();
        let mut q = vec![0.0; n];
        for k in 0..n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                acc -= rhs.coeffs[j] * q[k - j];
            }
            q[k] = acc / rhs.coeffs[0];
        }
        Jet {
            center: self.center,
            coeffs: q,
        }
    }

    /// Rewrites the jet of `v` at `u0` as the jet of `x -> v(u(x))` where `u`
    /// is affine with `du/dx = slope`: `c[k] *= slope^k`. The caller supplies
    /// the new center.
    pub fn chain_affine(&self, new_center: f64, slope: f64) -> Jet {
        let mut factor = 1.0;
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| {
                let out = c * factor;
                factor *= slope;
                out
            })
            .collect();
        Jet {
            center: new_center,
            coeffs,
        }
    }
}
