//! Piecewise-linear planar systems split along the line x = 0, their
//! phi-linear regularizations, and the slow-fast systems obtained by the
//! rescale x -> eps x. Contact points of the critical curve are classified
//! from the (f, g) jet at eps = 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::transition::TransitionSpec;

/// Affine vector field (a0 + a1x x + a1y y, b0 + b1x x + b1y y).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffinePlanarField {
    #[serde(default)]
    pub a0: f64,
    #[serde(default)]
    pub a1x: f64,
    #[serde(default)]
    pub a1y: f64,
    #[serde(default)]
    pub b0: f64,
    #[serde(default)]
    pub b1x: f64,
    #[serde(default)]
    pub b1y: f64,
}

impl AffinePlanarField {
    pub fn comp1(&self, x: f64, y: f64) -> f64 {
        self.a0 + self.a1x * x + self.a1y * y
    }

    pub fn comp2(&self, x: f64, y: f64) -> f64 {
        self.b0 + self.b1x * x + self.b1y * y
    }

    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        [self.comp1(x, y), self.comp2(x, y)]
    }

    pub fn validate(&self) -> Result<()> {
        let cs = [self.a0, self.a1x, self.a1y, self.b0, self.b1x, self.b1y];
        if cs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "field coefficients",
                message: format!("must be finite, got {cs:?}"),
            });
        }
        Ok(())
    }
}

/// Two affine fields separated by the switching line x = 0: `plus` acts on
/// x > 0 and `minus` on x < 0.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PwlSystem {
    #[serde(alias = "X")]
    pub plus: AffinePlanarField,
    #[serde(alias = "Y")]
    pub minus: AffinePlanarField,
}

impl PwlSystem {
    pub fn validate(&self) -> Result<()> {
        self.plus.validate()?;
        self.minus.validate()
    }
}

/// The blend ((1 + phi(x/eps))/2) X + ((1 - phi(x/eps))/2) Y. Because phi is
/// exactly +-1 outside (-1, 1), the field coincides with X for x >= eps and
/// with Y for x <= -eps, bit for bit.
#[derive(Debug, Clone)]
pub struct RegularizedField {
    pub pwl: PwlSystem,
    pub phi: TransitionSpec,
    pub eps: f64,
}

pub fn regularize(pwl: PwlSystem, phi: TransitionSpec, eps: f64) -> Result<RegularizedField> {
    pwl.validate()?;
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            message: format!("regularization scale must be positive and finite, got {eps}"),
        });
    }
    Ok(RegularizedField { pwl, phi, eps })
}

impl RegularizedField {
    pub fn eval(&self, x: f64, y: f64) -> [f64; 2] {
        let p = self.phi.eval(x / self.eps);
        let wx = (1.0 + p) / 2.0;
        let wy = (1.0 - p) / 2.0;
        let xv = self.pwl.plus.eval(x, y);
        let yv = self.pwl.minus.eval(x, y);
        [wx * xv[0] + wy * yv[0], wx * xv[1] + wy * yv[1]]
    }
}

/// Rescaled system x_dot = f(x, y, eps), y_dot = eps g(x, y, eps), where
///   f = (X1 + Y1)/2 + phi(x) (X1 - Y1)/2,
///   g = (X2 + Y2)/2 + phi(x) (X2 - Y2)/2,
/// all evaluated at (eps x, y). At eps = 0 the set {f = 0} is the critical
/// curve.
#[derive(Debug, Clone)]
pub struct SlowFastField {
    pub pwl: PwlSystem,
    pub phi: TransitionSpec,
    pub eps: f64,
}

pub fn rescale(pwl: PwlSystem, phi: TransitionSpec, eps: f64) -> Result<SlowFastField> {
    pwl.validate()?;
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter {
            name: "eps",
            message: format!("eps must be nonnegative and finite, got {eps}"),
        });
    }
    Ok(SlowFastField { pwl, phi, eps })
}

impl SlowFastField {
    pub fn f(&self, x: f64, y: f64) -> f64 {
        let xv = self.pwl.plus.comp1(self.eps * x, y);
        let yv = self.pwl.minus.comp1(self.eps * x, y);
        0.5 * (xv + yv) + self.phi.eval(x) * 0.5 * (xv - yv)
    }

    pub fn g(&self, x: f64, y: f64) -> f64 {
        let xv = self.pwl.plus.comp2(self.eps * x, y);
        let yv = self.pwl.minus.comp2(self.eps * x, y);
        0.5 * (xv + yv) + self.phi.eval(x) * 0.5 * (xv - yv)
    }

    /// (x_dot, y_dot) = (f, eps g).
    pub fn rhs(&self, x: f64, y: f64) -> [f64; 2] {
        [self.f(x, y), self.eps * self.g(x, y)]
    }

    /// Jet of (f, g) at (x, y) with eps = 0. The eps-rescale kills the
    /// affine x-dependence, so all x-derivatives come from phi alone.
    pub fn contact_jet(&self, x: f64, y: f64) -> ContactJet {
        let (p, p1, p2) = self.phi.eval012(x);
        let x1 = self.pwl.plus.comp1(0.0, y);
        let y1 = self.pwl.minus.comp1(0.0, y);
        let x2 = self.pwl.plus.comp2(0.0, y);
        let y2 = self.pwl.minus.comp2(0.0, y);
        let d1 = 0.5 * (x1 - y1);
        let d2 = 0.5 * (x2 - y2);
        ContactJet {
            f: 0.5 * (x1 + y1) + p * d1,
            f_x: p1 * d1,
            f_xx: p2 * d1,
            f_y: 0.5 * (self.pwl.plus.a1y + self.pwl.minus.a1y)
                + p * 0.5 * (self.pwl.plus.a1y - self.pwl.minus.a1y),
            g: 0.5 * (x2 + y2) + p * d2,
            g_x: p1 * d2,
        }
    }

    pub fn classify(&self, x: f64, y: f64) -> Result<Classification> {
        self.contact_jet(x, y).classify(x, y)
    }

    /// Height kappa(x) of the critical curve f(x, ., 0) = 0 near y_seed,
    /// by Newton iteration (f is affine in y here, so one step is exact
    /// whenever df/dy does not vanish).
    pub fn critical_height(&self, x: f64, y_seed: f64) -> Result<f64> {
        let mut y = y_seed;
        for _ in 0..60 {
            let j = self.contact_jet(x, y);
            if j.f_y.abs() < 1e-300 {
                return Err(Error::Domain(format!(
                    "critical curve is not a graph over x = {x}: df/dy = 0"
                )));
            }
            let step = j.f / j.f_y;
            y -= step;
            if step.abs() <= 1e-14 * (1.0 + y.abs()) {
                return Ok(y);
            }
        }
        Err(Error::Domain(format!(
            "no convergence solving f({x}, y, 0) = 0 from y = {y_seed}"
        )))
    }

    /// Slow vector field x' = -(df/dy / df/dx) g on the critical curve,
    /// with the L'Hospital extension -(df/dy g_x) / f_xx at a slow-fast
    /// Hopf point.
    pub fn slow_vector_field(&self, x: f64, y_seed: f64) -> Result<f64> {
        let y = self.critical_height(x, y_seed)?;
        let j = self.contact_jet(x, y);
        slow_value_from_jet(&j, x)
    }
}

/// First and second order data of (f, g) at a point of the eps = 0 system.
#[derive(Debug, Clone, Copy)]
pub struct ContactJet {
    pub f: f64,
    pub f_x: f64,
    pub f_xx: f64,
    pub f_y: f64,
    pub g: f64,
    pub g_x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    NormallyHyperbolic { attracting: bool },
    SlowFastHopf,
    GenericJump,
    Degenerate,
}

// All constructions are polynomial in the model coefficients, so true zeros
// sit at machine level relative to the jet magnitude.
const CLASSIFY_RTOL: f64 = 1e-9;

impl ContactJet {
    pub fn scale(&self) -> f64 {
        [self.f, self.f_x, self.f_xx, self.f_y, self.g, self.g_x]
            .iter()
            .fold(1.0f64, |m, v| m.max(v.abs()))
    }

    pub fn classify(&self, x: f64, y: f64) -> Result<Classification> {
        let tol = CLASSIFY_RTOL * self.scale();
        if self.f.abs() > tol {
            return Err(Error::NotOnCriticalCurve {
                x,
                y,
                residual: self.f,
            });
        }
        if self.f_x.abs() > tol {
            return Ok(Classification::NormallyHyperbolic {
                attracting: self.f_x < 0.0,
            });
        }
        // contact point: quadratic tangency required for either named type
        if self.f_xx.abs() <= tol {
            return Ok(Classification::Degenerate);
        }
        if self.g.abs() <= tol {
            // singularity of the slow flow: Hopf type needs g_x f_y < 0
            if self.g_x.abs() > tol && self.f_y.abs() > tol && self.g_x * self.f_y < 0.0 {
                Ok(Classification::SlowFastHopf)
            } else {
                Ok(Classification::Degenerate)
            }
        } else if self.f_y.abs() > tol {
            Ok(Classification::GenericJump)
        } else {
            Ok(Classification::Degenerate)
        }
    }
}

fn slow_value_from_jet(j: &ContactJet, x: f64) -> Result<f64> {
    let tol = CLASSIFY_RTOL * j.scale();
    if j.f_x.abs() > tol {
        return Ok(-(j.f_y / j.f_x) * j.g);
    }
    match j.classify(x, f64::NAN) {
        // kappa'(x0) = 0 at the contact, so L'Hospital gives
        // -(f_y g_x)/f_xx
        Ok(Classification::SlowFastHopf) => Ok(-(j.f_y * j.g_x) / j.f_xx),
        _ => Err(Error::ContactPoint { x }),
    }
}

/// Slow-fast Lienard family produced by regularizing the template
/// X = (a1 + b1 x + y, b2 x), Y = (alpha1 + beta1 x + y, beta2 x):
///   x_dot = y + (a1 + alpha1 + (b1 + beta1) eps x
///               + (a1 - alpha1 + (b1 - beta1) eps x) phi(x)) / 2,
///   y_dot = eps^2 (x/2) (b2 + beta2 + (b2 - beta2) phi(x)).
/// The eps = 0 critical curve is y = F(x) with
/// F = -(a1 + alpha1 + (a1 - alpha1) phi)/2.
#[derive(Debug, Clone)]
pub struct GeneralizedLienard {
    pub a1: f64,
    pub alpha1: f64,
    pub b1: f64,
    pub beta1: f64,
    pub b2: f64,
    pub beta2: f64,
    pub phi: TransitionSpec,
}

pub fn lienard_from_pwl(pwl: PwlSystem, phi: TransitionSpec) -> Result<GeneralizedLienard> {
    pwl.validate()?;
    let check = |f: &AffinePlanarField, which: &str| -> Result<()> {
        if f.a1y != 1.0 || f.b0 != 0.0 || f.b1y != 0.0 {
            return Err(Error::UnsupportedForm(format!(
                "{which} field must have the shape (c + d x + y, e x); \
                 got a1y = {}, b0 = {}, b1y = {}",
                f.a1y, f.b0, f.b1y
            )));
        }
        Ok(())
    };
    check(&pwl.plus, "x > 0")?;
    check(&pwl.minus, "x < 0")?;
    Ok(GeneralizedLienard {
        a1: pwl.plus.a0,
        alpha1: pwl.minus.a0,
        b1: pwl.plus.a1x,
        beta1: pwl.minus.a1x,
        b2: pwl.plus.b1x,
        beta2: pwl.minus.b1x,
        phi,
    })
}

impl GeneralizedLienard {
    pub fn f(&self, x: f64, y: f64, eps: f64) -> f64 {
        let p = self.phi.eval(x);
        y + 0.5
            * (self.a1
                + self.alpha1
                + (self.b1 + self.beta1) * eps * x
                + (self.a1 - self.alpha1 + (self.b1 - self.beta1) * eps * x) * p)
    }

    /// y_dot = eps^2 g2(x); the slow component carries two powers of eps.
    pub fn g2(&self, x: f64) -> f64 {
        let p = self.phi.eval(x);
        0.5 * x * (self.b2 + self.beta2 + (self.b2 - self.beta2) * p)
    }

    pub fn rhs(&self, x: f64, y: f64, eps: f64) -> [f64; 2] {
        [self.f(x, y, eps), eps * eps * self.g2(x)]
    }

    /// Critical-curve height F(x) at eps = 0, with two derivatives.
    pub fn big_f012(&self, x: f64) -> (f64, f64, f64) {
        let (p, p1, p2) = self.phi.eval012(x);
        let half = 0.5 * (self.a1 - self.alpha1);
        (
            -0.5 * (self.a1 + self.alpha1) - half * p,
            -half * p1,
            -half * p2,
        )
    }

    pub fn big_f(&self, x: f64) -> f64 {
        self.big_f012(x).0
    }

    /// True when the template degenerates to the classical form
    /// x_dot = y - F(x), y_dot = -eps^2 x.
    pub fn is_classical(&self) -> bool {
        self.b1 == 0.0 && self.beta1 == 0.0 && self.b2 == -1.0 && self.beta2 == -1.0
    }

    pub fn contact_jet(&self, x: f64, y: f64) -> ContactJet {
        let (bf, bf1, bf2) = self.big_f012(x);
        let (p, p1, _) = self.phi.eval012(x);
        let dgx = 0.5 * (self.b2 + self.beta2 + (self.b2 - self.beta2) * p)
            + 0.5 * x * (self.b2 - self.beta2) * p1;
        ContactJet {
            f: y - bf,
            f_x: -bf1,
            f_xx: -bf2,
            f_y: 1.0,
            g: self.g2(x),
            g_x: dgx,
        }
    }

    pub fn classify(&self, x: f64, y: f64) -> Result<Classification> {
        self.contact_jet(x, y).classify(x, y)
    }

    /// Slow vector field on y = F(x); for the classical form this is
    /// -x / F'(x), extended through a slow-fast Hopf point.
    pub fn slow_vector_field(&self, x: f64) -> Result<f64> {
        let j = self.contact_jet(x, self.big_f(x));
        slow_value_from_jet(&j, x)
    }
}

/// Provider of eps = 0 jets, so the jump-connection test runs on either
/// representation of a slow-fast system.
pub trait JetAt {
    fn jet_at(&self, x: f64, y: f64) -> ContactJet;
}

impl JetAt for SlowFastField {
    fn jet_at(&self, x: f64, y: f64) -> ContactJet {
        self.contact_jet(x, y)
    }
}

impl JetAt for GeneralizedLienard {
    fn jet_at(&self, x: f64, y: f64) -> ContactJet {
        self.contact_jet(x, y)
    }
}

/// Decide whether two contact points carry a jump connection: both generic
/// jump points at one height, joined by a regular fast orbit, with matching
/// curvature of the critical curve, opposite signs of g, and slow flow
/// oriented with the fast orbit (toward the departure point, away from the
/// landing point).
pub fn jump_connection<S: JetAt>(sys: &S, p0: (f64, f64), p1: (f64, f64)) -> Result<bool> {
    let (mut x0, mut y0) = p0;
    let (mut x1, mut y1) = p1;
    if x0 > x1 {
        std::mem::swap(&mut x0, &mut x1);
        std::mem::swap(&mut y0, &mut y1);
    }
    let j0 = sys.jet_at(x0, y0);
    let j1 = sys.jet_at(x1, y1);
    if j0.classify(x0, y0)? != Classification::GenericJump
        || j1.classify(x1, y1)? != Classification::GenericJump
    {
        return Ok(false);
    }
    let tol = CLASSIFY_RTOL * j0.scale().max(j1.scale());
    if (y0 - y1).abs() > tol * (1.0 + y0.abs()) {
        return Ok(false);
    }

    // fast orbit: f keeps one sign strictly between the tangencies
    let n = 400;
    let mut fast_sign = 0.0f64;
    for k in 1..n {
        let x = x0 + (x1 - x0) * k as f64 / n as f64;
        let f = sys.jet_at(x, y0).f;
        if f == 0.0 {
            return Ok(false);
        }
        if fast_sign == 0.0 {
            fast_sign = f.signum();
        } else if f.signum() != fast_sign {
            return Ok(false);
        }
    }
    if fast_sign == 0.0 {
        return Ok(false);
    }

    // same-side curvature: kappa'' = -f_xx / f_y at a tangency
    let k0 = -j0.f_xx / j0.f_y;
    let k1 = -j1.f_xx / j1.f_y;
    if k0 * k1 <= 0.0 {
        return Ok(false);
    }
    // slow flow must run toward one jump point and away from the other
    if j0.g * j1.g >= 0.0 {
        return Ok(false);
    }

    // orientation: on the outer branches the slow flow moves with the fast
    // orbit (x' matches the fast direction at both ends)
    let d = 0.02 * (x1 - x0);
    let probe = |x: f64, y_seed: f64| -> Result<f64> {
        // one Newton step suffices: f is affine in y
        let j = sys.jet_at(x, y_seed);
        let y = y_seed - j.f / j.f_y;
        let j = sys.jet_at(x, y);
        slow_value_from_jet(&j, x)
    };
    let s0 = probe(x0 - d, y0)?;
    let s1 = probe(x1 + d, y1)?;
    Ok(s0.signum() == fast_sign.signum() && s1.signum() == fast_sign.signum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cutoff::make_cutoffs;
    use crate::poly::Poly;
    use crate::transition::{build_hopf_transition, build_jump_transition, PolyCore};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn hopf_phi() -> TransitionSpec {
        // core x^2/2 - 2 with cut-offs at rho = 0.55
        let core = Arc::new(PolyCore::new(Poly::new(vec![-2.0, 0.0, 0.5])));
        build_hopf_transition(core, make_cutoffs(0.55).unwrap()).unwrap()
    }

    fn jump_phi() -> TransitionSpec {
        // core x^4/4 - x^2/8 - 2: double well with turning points 0, +-1/2
        let core = Arc::new(PolyCore::new(Poly::new(vec![-2.0, 0.0, -0.125, 0.0, 0.25])));
        build_jump_transition(core, make_cutoffs(0.9).unwrap()).unwrap()
    }

    /// Template system whose critical curve is y = phi(x) + 2.
    fn template_pwl() -> PwlSystem {
        PwlSystem {
            plus: AffinePlanarField {
                a0: -3.0,
                a1x: 0.0,
                a1y: 1.0,
                b0: 0.0,
                b1x: -1.0,
                b1y: 0.0,
            },
            minus: AffinePlanarField {
                a0: -1.0,
                a1x: 0.0,
                a1y: 1.0,
                b0: 0.0,
                b1x: -1.0,
                b1y: 0.0,
            },
        }
    }

    #[test]
    fn regularization_is_exact_outside_the_strip() {
        let pwl = PwlSystem {
            plus: AffinePlanarField {
                a0: 0.3,
                a1x: -1.2,
                a1y: 2.0,
                b0: 0.7,
                b1x: 0.4,
                b1y: -0.9,
            },
            minus: AffinePlanarField {
                a0: -2.0,
                a1x: 5.0,
                a1y: 0.1,
                b0: 0.0,
                b1x: 1.0,
                b1y: 1.0,
            },
        };
        let eps = 0.25;
        let z = regularize(pwl, hopf_phi(), eps).unwrap();
        for y in [-1.0, 0.0, 2.5] {
            let x = 2.0 * eps;
            assert_eq!(z.eval(x, y), pwl.plus.eval(x, y));
            assert_eq!(z.eval(-x, y), pwl.minus.eval(-x, y));
            assert_eq!(z.eval(eps, y), pwl.plus.eval(eps, y));
            assert_eq!(z.eval(-eps, y), pwl.minus.eval(-eps, y));
        }
        // equal one-sided fields blend to themselves for any x
        let same = PwlSystem {
            plus: pwl.plus,
            minus: pwl.plus,
        };
        let z = regularize(same, hopf_phi(), eps).unwrap();
        for x in [-0.3, -0.01, 0.0, 0.17] {
            let got = z.eval(x, 1.0);
            let want = pwl.plus.eval(x, 1.0);
            assert_relative_eq!(got[0], want[0], max_relative = 1e-15);
            assert_relative_eq!(got[1], want[1], max_relative = 1e-15);
        }

        assert!(regularize(pwl, hopf_phi(), 0.0).is_err());
        assert!(regularize(pwl, hopf_phi(), -0.1).is_err());
    }

    #[test]
    fn rescaled_template_gives_the_lienard_equations() {
        // X2 = eps a - x turns the slow component into eps^2 (a - x)
        let a = 0.7;
        let eps = 0.05;
        let mut pwl = template_pwl();
        pwl.plus.b0 = eps * a;
        pwl.minus.b0 = eps * a;
        let sf = rescale(pwl, hopf_phi(), eps).unwrap();
        for (x, y) in [(0.0, 0.0), (0.3, 1.0), (-0.8, -0.4), (1.5, 2.0)] {
            let psi_plus_2 = sf.phi.eval(x) + 2.0;
            assert_relative_eq!(sf.f(x, y), y - psi_plus_2, epsilon = 1e-14);
            let rhs = sf.rhs(x, y);
            assert_relative_eq!(rhs[1], eps * eps * (a - x), epsilon = 1e-15);
        }
    }

    #[test]
    fn lienard_reduction_commutes_with_rescale() {
        let pwl = PwlSystem {
            plus: AffinePlanarField {
                a0: -3.0,
                a1x: 0.4,
                a1y: 1.0,
                b0: 0.0,
                b1x: -1.3,
                b1y: 0.0,
            },
            minus: AffinePlanarField {
                a0: -1.0,
                a1x: -0.2,
                a1y: 1.0,
                b0: 0.0,
                b1x: -0.7,
                b1y: 0.0,
            },
        };
        let phi = hopf_phi();
        let gl = lienard_from_pwl(pwl, phi.clone()).unwrap();
        for eps in [0.0, 0.02, 0.3] {
            let sf = rescale(pwl, phi.clone(), eps).unwrap();
            for (x, y) in [(0.0, 0.0), (0.45, 2.0), (-0.9, -1.0), (2.0, 0.3)] {
                assert_relative_eq!(sf.f(x, y), gl.f(x, y, eps), epsilon = 1e-13);
                // l = 1 slow component eps*g equals the l = 2 form eps^2 g2
                assert_relative_eq!(eps * sf.g(x, y), eps * eps * gl.g2(x), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn template_mismatch_is_rejected() {
        let mut pwl = template_pwl();
        pwl.plus.b1y = 0.5;
        let err = lienard_from_pwl(pwl, hopf_phi()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedForm(_)), "{err}");
    }

    #[test]
    fn classical_f_matches_the_core_plus_two() {
        let gl = lienard_from_pwl(template_pwl(), hopf_phi()).unwrap();
        assert!(gl.is_classical());
        for x in [-2.0, -0.4, 0.0, 0.3, 0.54, 1.1] {
            assert_relative_eq!(gl.big_f(x), gl.phi.eval(x) + 2.0, epsilon = 1e-15);
        }
        // equal one-sided constants make F constant (no phi term)
        let mut flat = template_pwl();
        flat.minus.a0 = flat.plus.a0;
        let gl = lienard_from_pwl(flat, hopf_phi()).unwrap();
        for x in [-1.0, 0.0, 0.8] {
            assert_relative_eq!(gl.big_f(x), 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn classification_on_the_parabola() {
        // F(x) = x^2/2 on the core region
        let gl = lienard_from_pwl(template_pwl(), hopf_phi()).unwrap();
        // fold at the origin: slow-fast Hopf
        let c = gl.classify(0.0, gl.big_f(0.0)).unwrap();
        assert_eq!(c, Classification::SlowFastHopf);
        // whenever Hopf is reported the transition has a flat derivative
        assert!(gl.phi.eval012(0.0).1.abs() < 1e-12);

        // regular points: attracting to the right, repelling to the left
        let c = gl.classify(0.3, 0.045).unwrap();
        assert_eq!(c, Classification::NormallyHyperbolic { attracting: true });
        let c = gl.classify(-0.3, 0.045).unwrap();
        assert_eq!(c, Classification::NormallyHyperbolic { attracting: false });

        // off the curve
        let err = gl.classify(0.3, 1.0).unwrap_err();
        assert!(matches!(err, Error::NotOnCriticalCurve { .. }), "{err}");
    }

    #[test]
    fn jump_classification_on_the_double_well() {
        let gl = lienard_from_pwl(template_pwl(), jump_phi()).unwrap();
        // F = F0 = x^4/4 - x^2/8 on the core; folds at +-1/2 are generic
        // jump points, the hilltop at 0 is a slow-fast Hopf point
        let eta = 0.5;
        let y_fold = gl.big_f(eta);
        assert_relative_eq!(y_fold, eta.powi(4) / 4.0 - eta * eta / 8.0, epsilon = 1e-14);
        assert_eq!(
            gl.classify(eta, y_fold).unwrap(),
            Classification::GenericJump
        );
        assert_eq!(
            gl.classify(-eta, gl.big_f(-eta)).unwrap(),
            Classification::GenericJump
        );
        assert_eq!(
            gl.classify(0.0, gl.big_f(0.0)).unwrap(),
            Classification::SlowFastHopf
        );
    }

    #[test]
    fn degenerate_contact_is_not_guessed() {
        // core x^4/4 - 2 has a quartic (non-Morse) turning point at 0;
        // assemble directly since the builder enforces Morse shape
        let core = Arc::new(PolyCore::new(Poly::new(vec![-2.0, 0.0, 0.0, 0.0, 0.25])));
        let phi = TransitionSpec::assemble(core, make_cutoffs(0.55).unwrap());
        let gl = lienard_from_pwl(template_pwl(), phi).unwrap();
        assert_eq!(
            gl.classify(0.0, gl.big_f(0.0)).unwrap(),
            Classification::Degenerate
        );
    }

    #[test]
    fn slow_vector_field_values() {
        let gl = lienard_from_pwl(template_pwl(), hopf_phi()).unwrap();
        // classical slow flow -x/F'(x) with F' = x on the core
        assert_relative_eq!(gl.slow_vector_field(0.5).unwrap(), -1.0, epsilon = 1e-12);
        assert_relative_eq!(gl.slow_vector_field(-0.2).unwrap(), -1.0, epsilon = 1e-12);
        // removable extension through the Hopf point: -1/F''(0) = -1
        assert_relative_eq!(gl.slow_vector_field(0.0).unwrap(), -1.0, epsilon = 1e-12);

        // jump fold is a true singularity of the slow flow
        let gj = lienard_from_pwl(template_pwl(), jump_phi()).unwrap();
        let err = gj.slow_vector_field(0.5).unwrap_err();
        assert!(matches!(err, Error::ContactPoint { .. }), "{err}");
        // slow flow right of the fold runs toward it (leftward)
        assert!(gj.slow_vector_field(0.7).unwrap() < 0.0);
    }

    #[test]
    fn general_slow_vector_field_via_newton() {
        // l = 1 system with constant second components: g(0, y) = 1
        let pwl = PwlSystem {
            plus: AffinePlanarField {
                a0: -3.0,
                a1x: 0.0,
                a1y: 1.0,
                b0: 1.0,
                b1x: 0.0,
                b1y: 0.0,
            },
            minus: AffinePlanarField {
                a0: -1.0,
                a1x: 0.0,
                a1y: 1.0,
                b0: 1.0,
                b1x: 0.0,
                b1y: 0.0,
            },
        };
        let sf = rescale(pwl, hopf_phi(), 0.0).unwrap();
        // curve: y = phi(x) + 2, slow flow = -g f_y / f_x = -1/(-F') = 1/x
        let x = 0.5;
        let kappa = sf.critical_height(x, 0.0).unwrap();
        assert_relative_eq!(kappa, sf.phi.eval(x) + 2.0, epsilon = 1e-13);
        assert_relative_eq!(sf.slow_vector_field(x, 0.0).unwrap(), 2.0, epsilon = 1e-11);
    }

    #[test]
    fn first_order_systems_have_no_hopf_points_inside_the_strip() {
        // same template under l = 1 reading: at any contact point in
        // (-1, 1), f_x = 0 forces phi' = 0, hence g_x = 0, never Hopf
        let mut pwl = template_pwl();
        pwl.plus.b0 = 0.8;
        pwl.minus.b0 = 0.3;
        pwl.plus.b1x = 0.0;
        pwl.minus.b1x = 0.0;
        let sf = rescale(pwl, jump_phi(), 0.0).unwrap();
        for x in [-0.5, 0.0, 0.5] {
            let y = sf.critical_height(x, 0.0).unwrap();
            let c = sf.classify(x, y).unwrap();
            assert_ne!(c, Classification::SlowFastHopf, "at x = {x}");
        }
        // and a contact point with g != 0 is a bona fide jump point
        let y = sf.critical_height(0.5, 0.0).unwrap();
        assert_eq!(sf.classify(0.5, y).unwrap(), Classification::GenericJump);
    }

    #[test]
    fn jump_connection_holds_for_the_double_well() {
        let gl = lienard_from_pwl(template_pwl(), jump_phi()).unwrap();
        let eta = 0.5;
        let p0 = (-eta, gl.big_f(-eta));
        let p1 = (eta, gl.big_f(eta));
        assert!(jump_connection(&gl, p0, p1).unwrap());
        assert!(jump_connection(&gl, p1, p0).unwrap());
        // a normally hyperbolic partner is not a connection
        let q = (0.7, gl.big_f(0.7));
        assert!(!jump_connection(&gl, p0, q).unwrap_or(false));
    }

    #[test]
    fn equal_g_signs_block_the_connection_for_first_order_systems() {
        // l = 1: both contact points share the phi value, hence the g
        // value, so the slow flow orientation cannot be compatible
        let mut pwl = template_pwl();
        pwl.plus.b0 = 1.0;
        pwl.minus.b0 = -2.0;
        pwl.plus.b1x = 0.0;
        pwl.minus.b1x = 0.0;
        let sf = rescale(pwl, jump_phi(), 0.0).unwrap();
        let eta = 0.5;
        let y0 = sf.critical_height(-eta, 0.0).unwrap();
        let y1 = sf.critical_height(eta, 0.0).unwrap();
        assert_relative_eq!(y0, y1, epsilon = 1e-13);
        assert_eq!(sf.classify(-eta, y0).unwrap(), Classification::GenericJump);
        assert_eq!(sf.classify(eta, y1).unwrap(), Classification::GenericJump);
        let j0 = sf.contact_jet(-eta, y0);
        let j1 = sf.contact_jet(eta, y1);
        assert!(j0.g * j1.g > 0.0, "g = {} and {}", j0.g, j1.g);
        assert!(!jump_connection(&sf, (-eta, y0), (eta, y1)).unwrap());
    }
}
