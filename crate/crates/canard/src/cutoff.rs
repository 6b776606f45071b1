//! Smooth cut-off machinery: the exponential partition-of-unity step and the
//! left/right cut-off pair used to cap a transition core at the values -1, 1.
//!
//! The step is exactly 0 / exactly 1 outside its ramp (not just to rounding),
//! which makes the piecewise branch formulas of a transition agree bitwise
//! through the joints.

use crate::error::{Error, Result};

/// g(t) = exp(-1/t) for t > 0, extended by 0. All derivatives vanish at 0+.
#[inline]
fn bump(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let u = (-1.0 / t).exp();
    // u' = u/t^2, u'' = u(1-2t)/t^4; u underflows to 0 long before the
    // rational factors can overflow.
    let t2 = t * t;
    (u, u / t2, u * (1.0 - 2.0 * t) / (t2 * t2))
}

/// Smooth step s with s = 0 on (-inf, 0], s = 1 on [1, inf), s' > 0 on (0, 1):
/// s(t) = g(t) / (g(t) + g(1-t)). Returns (s, s', s'').
pub fn smooth_step(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    if t >= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    let (u, du, ddu) = bump(t);
    let (v, dv_raw, ddv_raw) = bump(1.0 - t);
    let dv = -dv_raw; // chain rule through 1 - t
    let ddv = ddv_raw;
    let d = u + v;
    let s = u / d;
    let n = du * v - u * dv;
    let s1 = n / (d * d);
    let n1 = ddu * v - u * ddv;
    let s2 = (n1 * d - 2.0 * n * (du + dv)) / (d * d * d);
    (s, s1, s2)
}

/// Rescaled step: 0 on (-inf, lo], 1 on [hi, inf), strictly increasing between.
#[derive(Clone, Copy, Debug)]
pub struct SmoothStepOn {
    pub lo: f64,
    pub hi: f64,
}

impl SmoothStepOn {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter {
                name: "smooth step interval",
                message: format!("need lo < hi, got [{lo}, {hi}]"),
            });
        }
        Ok(SmoothStepOn { lo, hi })
    }

    pub fn eval012(&self, x: f64) -> (f64, f64, f64) {
        let w = 1.0 / (self.hi - self.lo);
        let (s, s1, s2) = smooth_step((x - self.lo) * w);
        (s, s1 * w, s2 * w * w)
    }
}

/// Cut-off pair on the collars of the unit stripe:
/// A = 0 on (-inf, rho], A = 1 on [1, inf), A' > 0 on (rho, 1);
/// B is the mirror image, B(x) = A(-x).
#[derive(Clone, Copy, Debug)]
pub struct CutoffPair {
    pub rho: f64,
    right: SmoothStepOn,
}

/// Build the cut-off pair for a core radius rho in (0, 1).
pub fn make_cutoffs(rho: f64) -> Result<CutoffPair> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter {
            name: "rho",
            message: format!("core radius must lie in (0, 1), got {rho}"),
        });
    }
    Ok(CutoffPair {
        rho,
        right: SmoothStepOn::new(rho, 1.0)?,
    })
}

impl CutoffPair {
    /// (A, A', A'') at x.
    pub fn a012(&self, x: f64) -> (f64, f64, f64) {
        self.right.eval012(x)
    }

    /// (B, B', B'') at x.
    pub fn b012(&self, x: f64) -> (f64, f64, f64) {
        let (a, a1, a2) = self.right.eval012(-x);
        (a, -a1, a2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn step_endpoint_values_are_exact() {
        assert_eq!(smooth_step(0.0), (0.0, 0.0, 0.0));
        assert_eq!(smooth_step(-3.0), (0.0, 0.0, 0.0));
        assert_eq!(smooth_step(1.0), (1.0, 0.0, 0.0));
        assert_eq!(smooth_step(7.0), (1.0, 0.0, 0.0));
        // symmetry point: g/(g+g) computes to exactly one half
        assert_eq!(smooth_step(0.5).0, 0.5);
    }

    #[test]
    fn cutoff_contract() {
        let c = make_cutoffs(0.55).unwrap();
        assert_eq!(c.a012(0.55), (0.0, 0.0, 0.0));
        assert_eq!(c.a012(0.2), (0.0, 0.0, 0.0));
        assert_eq!(c.a012(1.0), (1.0, 0.0, 0.0));
        assert_eq!(c.b012(-0.55), (0.0, 0.0, 0.0));
        assert_eq!(c.b012(-1.0), (1.0, 0.0, 0.0));
        // strict monotonicity on the open collars
        for k in 1..100 {
            let x = 0.55 + 0.45 * k as f64 / 100.0;
            assert!(c.a012(x).1 > 0.0, "A' must be positive at {x}");
            assert!(c.b012(-x).1 < 0.0, "B' must be negative at {}", -x);
        }
        // mirror identity
        for k in 0..=40 {
            let x = -1.1 + 2.2 * k as f64 / 40.0;
            assert_eq!(c.b012(x).0, c.a012(-x).0);
        }
    }

    #[test]
    fn bad_rho_is_rejected() {
        assert!(make_cutoffs(0.0).is_err());
        assert!(make_cutoffs(1.0).is_err());
        assert!(make_cutoffs(-0.3).is_err());
        assert!(make_cutoffs(f64::NAN).is_err());
    }

    proptest! {
        // analytic derivatives agree with central differences away from the
        // flat tails (the payoff: every downstream derivative formula rests
        // on these three values)
        #[test]
        fn step_derivatives_match_finite_differences(t in 0.05f64..0.95) {
            let h = 1e-6;
            let (_, s1, s2) = smooth_step(t);
            let (sp, sp1, _) = smooth_step(t + h);
            let (sm, sm1, _) = smooth_step(t - h);
            let fd1 = (sp - sm) / (2.0 * h);
            let fd2 = (sp1 - sm1) / (2.0 * h);
            prop_assert!((s1 - fd1).abs() < 1e-6 * (1.0 + s1.abs()));
            prop_assert!((s2 - fd2).abs() < 1e-5 * (1.0 + s2.abs()));
        }

        #[test]
        fn step_range_and_monotonicity(t in 0.0f64..1.0) {
            let (s, s1, _) = smooth_step(t);
            prop_assert!((0.0..=1.0).contains(&s));
            // strictly increasing except in the tails where exp(-1/t)
            // underflows to an exact zero
            if t > 3e-3 && t < 1.0 - 3e-3 {
                prop_assert!(s1 > 0.0);
            } else {
                prop_assert!(s1 >= 0.0);
            }
        }
    }
}
