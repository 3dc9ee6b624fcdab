//! Probit loss family used by every Gibbs formula and every objective.
//!
//! All functions take a normalized margin `a = y (w·x)/‖x‖` (or `(w·x)/‖x‖`
//! for unlabeled points). `phi(a)` is the probability that a classifier drawn
//! from the unit-variance Gaussian posterior centred on `w` errs on a point of
//! normalized margin `a`.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{invalid, Result};

/// Past this magnitude the normal tail is below 1e-300 and is clamped.
pub const SATURATION: f64 = 40.0;

/// `1/√(2π)`, the standard normal density at zero.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// A validated, finite normalized margin.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct NormalizedMargin(f64);

impl NormalizedMargin {
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(Self(value))
        } else {
            Err(invalid(format!("normalized margin must be finite, got {value}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn phi(self) -> f64 {
        phi(self.0)
    }

    pub fn phi_prime(self) -> f64 {
        phi_prime(self.0)
    }

    pub fn phi_cvx(self) -> f64 {
        phi_cvx(self.0)
    }

    pub fn phi_cvx_prime(self) -> f64 {
        phi_cvx_prime(self.0)
    }

    pub fn phi_dis(self) -> f64 {
        phi_dis(self.0)
    }

    pub fn phi_dis_prime(self) -> f64 {
        phi_dis_prime(self.0)
    }
}

impl TryFrom<f64> for NormalizedMargin {
    type Error = crate::Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

/// Standard normal upper tail `½[1 − erf(a/√2)]`, evaluated as `½ erfc(a/√2)`
/// so that the right tail keeps full relative precision.
#[inline]
pub fn phi(a: f64) -> f64 {
    debug_assert!(a.is_finite(), "phi called with {a}");
    if a > SATURATION {
        0.0
    } else if a < -SATURATION {
        1.0
    } else {
        0.5 * libm::erfc(a * FRAC_1_SQRT_2)
    }
}

/// Derivative of [`phi`]: minus the standard normal density.
#[inline]
pub fn phi_prime(a: f64) -> f64 {
    debug_assert!(a.is_finite(), "phi_prime called with {a}");
    -INV_SQRT_2PI * (-0.5 * a * a).exp()
}

/// Convex relaxation `max{phi(a), ½ − a/√(2π)}`.
#[inline]
pub fn phi_cvx(a: f64) -> f64 {
    if a <= 0.0 {
        0.5 - a * INV_SQRT_2PI
    } else {
        phi(a)
    }
}

#[inline]
pub fn phi_cvx_prime(a: f64) -> f64 {
    if a < 0.0 {
        -INV_SQRT_2PI
    } else {
        phi_prime(a)
    }
}

/// Expected disagreement of two posterior draws on a point: `2 phi(a) phi(−a)`.
#[inline]
pub fn phi_dis(a: f64) -> f64 {
    if a.abs() > SATURATION {
        0.0
    } else {
        2.0 * phi(a) * phi(-a)
    }
}

#[inline]
pub fn phi_dis_prime(a: f64) -> f64 {
    if a.abs() > SATURATION {
        0.0
    } else {
        2.0 * phi_prime(a) * (phi(-a) - phi(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    // Adaptive quadrature of the normal density on [1, ∞), 30 digits.
    const PHI_1: f64 = 0.158_655_253_931_457_05;
    const PHI_DIS_1: f64 = 0.266_967_528_662_803_87;

    #[test]
    fn phi_reference_values() {
        assert_eq!(phi(0.0), 0.5);
        assert_abs_diff_eq!(phi(1.0), PHI_1, epsilon = 1e-15);
        assert_abs_diff_eq!(phi(-1.0), 1.0 - PHI_1, epsilon = 1e-15);
    }

    #[test]
    fn phi_prime_reference_values() {
        assert_abs_diff_eq!(phi_prime(0.0), -INV_SQRT_2PI, epsilon = 1e-16);
        assert_abs_diff_eq!(INV_SQRT_2PI, 1.0 / (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-16);
        let h = 1e-5;
        let fd = (phi(2.0 + h) - phi(2.0 - h)) / (2.0 * h);
        assert_abs_diff_eq!(phi_prime(2.0), fd, epsilon = 1e-7);
    }

    #[test]
    fn phi_cvx_reference_values() {
        assert_eq!(phi_cvx(0.0), 0.5);
        assert_abs_diff_eq!(phi_cvx(-2.0), 1.297_884_560_802_865_4, epsilon = 1e-15);
        assert_eq!(phi_cvx(1.0), phi(1.0));
        assert_eq!(phi_cvx_prime(0.0), phi_prime(0.0));
        assert_abs_diff_eq!(phi_cvx_prime(-1e-300), phi_prime(0.0), epsilon = 1e-16);
    }

    #[test]
    fn phi_dis_reference_values() {
        assert_eq!(phi_dis(0.0), 0.5);
        assert_abs_diff_eq!(phi_dis(1.0), PHI_DIS_1, epsilon = 1e-15);
        assert_eq!(phi_dis_prime(0.0), 0.0);
    }

    #[test]
    fn saturation_clamps() {
        assert_eq!(phi(41.0), 0.0);
        assert_eq!(phi(-41.0), 1.0);
        assert_eq!(phi_dis(-50.0), 0.0);
        assert_eq!(phi_dis_prime(50.0), 0.0);
    }

    #[test]
    fn margin_rejects_non_finite() {
        assert!(NormalizedMargin::new(f64::NAN).is_err());
        assert!(NormalizedMargin::new(f64::INFINITY).is_err());
        assert!(NormalizedMargin::try_from(f64::NEG_INFINITY).is_err());
        assert_eq!(NormalizedMargin::new(0.0).unwrap().phi(), 0.5);
    }

    proptest! {
        #[test]
        fn phi_complement(a in -60.0f64..60.0) {
            prop_assert!((phi(a) + phi(-a) - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn phi_cvx_dominates_phi(a in -40.0f64..40.0) {
            prop_assert!(phi_cvx(a) >= phi(a));
            if a >= 0.0 {
                prop_assert_eq!(phi_cvx(a), phi(a));
            } else if a < -1e-6 {
                prop_assert!(phi_cvx(a) > phi(a));
            }
        }

        #[test]
        fn phi_cvx_midpoint_convex(a in -20.0f64..20.0, b in -20.0f64..20.0) {
            let mid = phi_cvx(0.5 * (a + b));
            prop_assert!(mid <= 0.5 * (phi_cvx(a) + phi_cvx(b)) + 1e-12);
        }

        #[test]
        fn phi_dis_even_and_bounded(a in -40.0f64..40.0) {
            prop_assert_eq!(phi_dis(a), phi_dis(-a));
            prop_assert!(phi_dis(a) <= 0.5);
            if a.abs() > 1e-6 {
                prop_assert!(phi_dis(a) < 0.5);
            }
        }

        #[test]
        fn phi_prime_even(a in -40.0f64..40.0) {
            prop_assert_eq!(phi_prime(a), phi_prime(-a));
        }

        #[test]
        fn phi_dis_prime_odd(a in -40.0f64..40.0) {
            prop_assert_eq!(phi_dis_prime(a), -phi_dis_prime(-a));
        }
    }
}
