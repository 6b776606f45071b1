//! The two model Liénard families and their slow divergence integrals.
//!
//! The turning-point family `HopfModel` has F(x) = x²/2 + δ·F_o(x) with an
//! odd polynomial F_o seeded by prescribed zeros. The fold family `JumpModel`
//! has F_b(x) = x⁴/4 − η²x²/2 + b·x + δ·P_o(x), where P_o is the odd
//! companion solving 2sP_o − (s²−η²)P_o' = P̃' on [η,∞). In both cases the
//! divergence integral along a balanced cycle vanishes, to leading order in
//! δ, exactly at the seeds, and this module locates and certifies those
//! zeros.

use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};
use std::sync::Arc;

use serde::Serialize;

use crate::cutoff::{make_cutoffs, SmoothStepOn};
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::quad;
use crate::rootfind;
use crate::transition::{
    build_hopf_transition, build_jump_transition, CoreFn, PolyCore, TransitionSpec,
};

pub const DEFAULT_DELTA: f64 = 1e-2;
pub const DEFAULT_C_PLUS: f64 = 3.0;
pub const DEFAULT_C_MINUS: f64 = 1.0;
/// Default working radius: brackets, hypothesis grids, and profile domains
/// stay inside (-0.95, 0.95).
pub const WORKING_RADIUS: f64 = 0.95;

const SDI_ABS_TOL: f64 = 1e-12;
/// Profiles whose largest |I| stays below this are identically zero as far
/// as the quadrature can tell; sign changes there are noise, not zeros.
const NULL_FLOOR: f64 = 1e-11;
/// A zero is simple when the centred slope estimate exceeds this fraction of
/// the profile's largest |I|.
const SIMPLE_SLOPE_FACTOR: f64 = 1e-3;
const ZERO_XTOL: f64 = 1e-10;
const HYPOTHESIS_GRID: usize = 10_000;

fn check_seed_order(seeds: &[f64]) -> Result<()> {
    for w in seeds.windows(2) {
        if !(w[0] < w[1]) {
            return Err(Error::InvalidParameter {
                name: "seeds",
                message: format!("must be strictly increasing, got {} before {}", w[0], w[1]),
            });
        }
    }
    Ok(())
}

/// Turning-point family F(x) = x²/2 + δ·F_o(x), F_o(x) = x³·∏(x²−x̃ᵢ²).
///
/// The seeds x̃ᵢ are the prescribed zeros of the leading-order divergence
/// integral; c_plus/c_minus set the plateau heights of the associated
/// transition core (F − C₊)/C₋.
#[derive(Debug, Clone)]
pub struct HopfModel {
    delta: f64,
    seeds: Vec<f64>,
    c_plus: f64,
    c_minus: f64,
    rho: f64,
    f: Poly,
    f1: Poly,
    f2: Poly,
    f_odd: Poly,
    // F'(s)²/s; exact because the numerator has a double root at 0
    sdi_integrand: Poly,
}

impl HopfModel {
    pub fn new(delta: f64, seeds: &[f64], c_plus: f64, c_minus: f64) -> Result<Self> {
        Self::with_rho(delta, seeds, c_plus, c_minus, WORKING_RADIUS)
    }

    pub fn with_rho(
        delta: f64,
        seeds: &[f64],
        c_plus: f64,
        c_minus: f64,
        rho: f64,
    ) -> Result<Self> {
        if !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "delta",
                message: "must be finite".into(),
            });
        }
        // plateau condition 1 < 2*c_minus < 2*c_plus
        if !(c_minus > 0.5 && c_plus > c_minus) {
            return Err(Error::InvalidParameter {
                name: "c_plus/c_minus",
                message: format!("need 0.5 < c_minus < c_plus, got ({c_plus}, {c_minus})"),
            });
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                message: format!("working radius must lie in (0, 1), got {rho}"),
            });
        }
        check_seed_order(seeds)?;
        for &s in seeds {
            if !(s > 0.0 && s <= 0.85) {
                return Err(Error::InvalidParameter {
                    name: "seeds",
                    message: format!("turning-point seeds must lie in (0, 0.85], got {s}"),
                });
            }
        }

        let mut f_odd = Poly::new(vec![0.0, 0.0, 0.0, 1.0]);
        for &s in seeds {
            f_odd = &f_odd * &Poly::new(vec![-s * s, 0.0, 1.0]);
        }
        let f = &Poly::new(vec![0.0, 0.0, 0.5]) + &f_odd.scale(delta);
        let f1 = f.deriv();
        let f2 = f1.deriv();

        // slope condition: F'(x)/x > 0 away from 0 on the working interval
        let half = HYPOTHESIS_GRID / 2;
        for j in 1..=half {
            let x = rho * j as f64 / half as f64;
            for x in [x, -x] {
                if !(f1.eval(x) * x > 0.0) {
                    return Err(Error::PreconditionFailed {
                        what: format!("slope condition F'(x)/x > 0 fails at x = {x}"),
                        lo: -rho,
                        hi: rho,
                    });
                }
            }
        }

        let (sdi_integrand, c0) = (&f1 * &f1).divide_by_x();
        debug_assert_eq!(c0, 0.0);

        Ok(HopfModel {
            delta,
            seeds: seeds.to_vec(),
            c_plus,
            c_minus,
            rho,
            f,
            f1,
            f2,
            f_odd,
            sdi_integrand,
        })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seeds(&self) -> &[f64] {
        &self.seeds
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Plateau midpoint and half-gap (C₊, C₋) = ((c₊+c₋)/2, (c₊−c₋)/2).
    pub fn c_big(&self) -> (f64, f64) {
        (
            0.5 * (self.c_plus + self.c_minus),
            0.5 * (self.c_plus - self.c_minus),
        )
    }

    pub fn big_f(&self, x: f64) -> f64 {
        self.f.eval(x)
    }

    pub fn big_f012(&self, x: f64) -> (f64, f64, f64) {
        (self.f.eval(x), self.f1.eval(x), self.f2.eval(x))
    }

    pub fn f_poly(&self) -> &Poly {
        &self.f
    }

    pub fn f_odd_poly(&self) -> &Poly {
        &self.f_odd
    }

    /// Right edge of the default profile window: past the last seed with a
    /// margin, so every prescribed zero sits inside.
    pub fn x_window(&self) -> f64 {
        self.seeds.last().map(|s| s + 0.1).unwrap_or(0.3)
    }

    /// Default sampling interval for divergence-integral profiles.
    pub fn sdi_domain(&self) -> (f64, f64) {
        (0.05, self.x_window())
    }

    /// Core (F − C₊)/C₋ fed to the transition assembly.
    pub fn core_poly(&self) -> Poly {
        let (cp, cm) = self.c_big();
        &self.f.scale(1.0 / cm) - &Poly::constant(cp / cm)
    }

    /// Non-monotone transition built on this family; single interior
    /// critical point at the turning point.
    pub fn transition(&self) -> Result<TransitionSpec> {
        build_hopf_transition(
            Arc::new(PolyCore::new(self.core_poly())),
            make_cutoffs(self.rho)?,
        )
    }
}

/// Left endpoint L < 0 with F(L) = F(x), for 0 < x inside the working
/// radius. Errors when x is past the canard domain (no balance point above
/// -rho).
pub fn fast_relation_hopf(m: &HopfModel, x: f64) -> Result<f64> {
    let rho = m.rho;
    if !(x > 0.0 && x <= rho) {
        return Err(Error::Domain(format!(
            "fast relation needs 0 < x <= {rho}, got {x}"
        )));
    }
    let target = m.big_f(x);
    let g = |l: f64| m.big_f(l) - target;
    let dg = |l: f64| m.big_f012(l).1;
    // F(0) = 0 < F(x), so a sign change on (-rho, 0) exists exactly when the
    // left branch reaches the height F(x) before the working radius.
    rootfind::solve_bracketed(&g, &dg, -rho, 0.0, 1e-9).map_err(|_| {
        Error::Domain(format!(
            "x = {x} outside canard domain: no left balance point in (-{rho}, 0)"
        ))
    })
}

/// Divergence integral along the balanced cycle through x, by adaptive
/// quadrature of F'(s)²/s from x to the left endpoint. The ratio extends by
/// 0 at s = 0 (F' vanishes there to first order); splitting the interval at
/// 0 keeps the rule away from the hole.
pub fn sdi_hopf(m: &HopfModel, x: f64) -> Result<f64> {
    let l = fast_relation_hopf(m, x)?;
    let integrand = |s: f64| {
        if s == 0.0 {
            0.0
        } else {
            let d = m.f1.eval(s);
            d * d / s
        }
    };
    Ok(quad::integrate_split(integrand, &[x, 0.0, l], SDI_ABS_TOL)?.value)
}

/// Same integral by exact coefficient arithmetic: F'(s)²/s is a polynomial.
pub fn sdi_hopf_exact(m: &HopfModel, x: f64) -> Result<f64> {
    let l = fast_relation_hopf(m, x)?;
    Ok(m.sdi_integrand.integral(x, l))
}

/// Odd companion of the fold family: the right-branch polynomial p on
/// [η, ∞), its odd reflection -p(-x) on (-∞, -η], and a smooth blend
/// S(x)p(x) − S(−x)p(−x) across the middle, where S steps from 0 on
/// (-∞, 0] to 1 on [η, ∞). Globally odd and C^∞, and equal to the branch
/// polynomials (to the bit) outside (-η, η).
#[derive(Debug, Clone)]
pub struct OddBlendPo {
    p: Poly,
    p1: Poly,
    p2: Poly,
    step: SmoothStepOn,
}

impl OddBlendPo {
    pub fn eval012(&self, x: f64) -> (f64, f64, f64) {
        let (sp, sp1, sp2) = self.step.eval012(x);
        let (sm, sm1, sm2) = self.step.eval012(-x);
        let (pp, pp1, pp2) = (self.p.eval(x), self.p1.eval(x), self.p2.eval(x));
        let (pm, pm1, pm2) = (self.p.eval(-x), self.p1.eval(-x), self.p2.eval(-x));
        let v = sp * pp - sm * pm;
        let d1 = sp1 * pp + sp * pp1 + sm1 * pm + sm * pm1;
        let d2 = sp2 * pp + 2.0 * sp1 * pp1 + sp * pp2 - sm2 * pm - 2.0 * sm1 * pm1 - sm * pm2;
        (v, d1, d2)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval012(x).0
    }

    /// The branch polynomial valid on [η, ∞).
    pub fn right_branch(&self) -> &Poly {
        &self.p
    }
}

/// Build the odd companion for gap parameter η and the given seeds.
///
/// On [η, ∞) the defining relation 2sP_o − (s²−η²)P_o' = P̃' has the exact
/// polynomial solution P_o = −(s²−η²)·R with R' = 6sQ + (s²−η²)Q',
/// R(η) = 0, Q(s) = ∏(s−x̃ᵢ); no quadrature is involved.
pub fn build_po(eta: f64, seeds: &[f64]) -> Result<OddBlendPo> {
    if !(eta > 0.0 && eta < FRAC_1_SQRT_2) {
        return Err(Error::InvalidParameter {
            name: "eta",
            message: format!("must lie in (0, {FRAC_1_SQRT_2}), got {eta}"),
        });
    }
    check_seed_order(seeds)?;
    let gate = SQRT_2 * eta;
    for &s in seeds {
        if !(s > gate && s < 1.0) {
            return Err(Error::InvalidParameter {
                name: "seeds",
                message: format!("fold seeds must lie in ({gate}, 1), got {s}"),
            });
        }
    }
    let shift = Poly::new(vec![-eta * eta, 0.0, 1.0]); // s² − η²
    let q = Poly::from_roots(seeds);
    let w = &(&Poly::new(vec![0.0, 6.0]) * &q) + &(&shift * &q.deriv());
    let r0 = w.antideriv();
    let r = &r0 - &Poly::constant(r0.eval(eta));
    let p = (&shift * &r).scale(-1.0);
    let p1 = p.deriv();
    let p2 = p1.deriv();
    Ok(OddBlendPo {
        p,
        p1,
        p2,
        step: SmoothStepOn::new(0.0, eta)?,
    })
}

/// Fold family F_b(x) = x⁴/4 − η²x²/2 + b·x + δ·P_o(x) with two balanced
/// fold points near ±η broken by b.
#[derive(Debug, Clone)]
pub struct JumpModel {
    eta: f64,
    b: f64,
    delta: f64,
    seeds: Vec<f64>,
    c_plus: f64,
    c_minus: f64,
    rho: f64,
    p_e: Poly,
    pe1: Poly,
    pe2: Poly,
    p_tilde: Poly,
    po: OddBlendPo,
    // (F₀')² on each side of 0, as exact polynomials in s
    sq_right: Poly,
    sq_left: Poly,
}

impl JumpModel {
    pub fn new(
        eta: f64,
        b: f64,
        delta: f64,
        seeds: &[f64],
        c_plus: f64,
        c_minus: f64,
    ) -> Result<Self> {
        Self::with_rho(eta, b, delta, seeds, c_plus, c_minus, WORKING_RADIUS)
    }

    pub fn with_rho(
        eta: f64,
        b: f64,
        delta: f64,
        seeds: &[f64],
        c_plus: f64,
        c_minus: f64,
        rho: f64,
    ) -> Result<Self> {
        if !b.is_finite() || !delta.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b/delta",
                message: "must be finite".into(),
            });
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::InvalidParameter {
                name: "rho",
                message: format!("working radius must lie in (0, 1), got {rho}"),
            });
        }
        let floor = 0.25 - 0.5 * eta * eta;
        if !(c_minus > floor && c_plus > c_minus) {
            return Err(Error::InvalidParameter {
                name: "c_plus/c_minus",
                message: format!(
                    "need {floor} < c_minus < c_plus for eta = {eta}, got ({c_plus}, {c_minus})"
                ),
            });
        }
        let po = build_po(eta, seeds)?; // validates eta, seed order, seed range
        let gate = SQRT_2 * eta;
        for &s in seeds {
            // keep each prescribed zero, plus its O(delta) drift, strictly
            // inside the profile window
            if !(s > gate + 0.01 && s < 0.94) {
                return Err(Error::InvalidParameter {
                    name: "seeds",
                    message: format!(
                        "fold seeds must lie in ({}, 0.94) to stay inside the profile window, got {s}",
                        gate + 0.01
                    ),
                });
            }
        }

        let p_e = Poly::new(vec![0.0, 0.0, -0.5 * eta * eta, 0.0, 0.25]);
        let pe1 = p_e.deriv();
        let pe2 = pe1.deriv();
        let shift = Poly::new(vec![-eta * eta, 0.0, 1.0]);
        let p_tilde = &(&(&shift * &shift) * &shift) * &Poly::from_roots(seeds);

        let d_right = &pe1 + &po.p1.scale(delta);
        let d_left = &pe1 + &po.p1.compose_neg().scale(delta);
        let sq_right = &d_right * &d_right;
        let sq_left = &d_left * &d_left;

        let m = JumpModel {
            eta,
            b,
            delta,
            seeds: seeds.to_vec(),
            c_plus,
            c_minus,
            rho,
            p_e,
            pe1,
            pe2,
            p_tilde,
            po,
            sq_right,
            sq_left,
        };

        // branch condition: x·F₀'(x) > 0 outward of the folds, to the edge
        // of the stripe
        let reach = (eta + rho).min(1.0);
        let half = HYPOTHESIS_GRID / 2;
        for j in 1..=half {
            let x = eta + (reach - eta) * j as f64 / half as f64;
            for x in [x, -x] {
                if !(m.f0_012(x).1 * x > 0.0) {
                    return Err(Error::PreconditionFailed {
                        what: format!("branch condition x·F₀'(x) > 0 fails at x = {x}"),
                        lo: eta,
                        hi: reach,
                    });
                }
            }
        }
        Ok(m)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn seeds(&self) -> &[f64] {
        &self.seeds
    }

    pub fn c_plus(&self) -> f64 {
        self.c_plus
    }

    pub fn c_minus(&self) -> f64 {
        self.c_minus
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn c_big(&self) -> (f64, f64) {
        (
            0.5 * (self.c_plus + self.c_minus),
            0.5 * (self.c_plus - self.c_minus),
        )
    }

    /// Same family at a different breaking parameter; the cached polynomials
    /// do not depend on b.
    pub fn with_b(&self, b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::InvalidParameter {
                name: "b",
                message: "must be finite".into(),
            });
        }
        let mut m = self.clone();
        m.b = b;
        Ok(m)
    }

    pub fn p_e_poly(&self) -> &Poly {
        &self.p_e
    }

    pub fn p_tilde_poly(&self) -> &Poly {
        &self.p_tilde
    }

    pub fn po(&self) -> &OddBlendPo {
        &self.po
    }

    /// Unbroken layer function F₀ = P_e + δ·P_o and two derivatives.
    pub fn f0_012(&self, x: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.po.eval012(x);
        (
            self.p_e.eval(x) + self.delta * v,
            self.pe1.eval(x) + self.delta * d1,
            self.pe2.eval(x) + self.delta * d2,
        )
    }

    pub fn f0(&self, x: f64) -> f64 {
        self.p_e.eval(x) + self.delta * self.po.eval(x)
    }

    /// F_b = F₀ + b·x and two derivatives.
    pub fn fb_012(&self, x: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.f0_012(x);
        (v + self.b * x, d1 + self.b, d2)
    }

    pub fn fb(&self, x: f64) -> f64 {
        self.f0(x) + self.b * x
    }

    /// Profile window [lo, 0.95] past the fold gate √2·η. The lower edge
    /// slides down (never below √2η + 0.01) when the first seed sits within
    /// 0.04 of the nominal √2η + 0.05, so every prescribed zero stays
    /// interior.
    pub fn d1(&self) -> (f64, f64) {
        let gate = SQRT_2 * self.eta;
        let base_lo = gate + 0.05;
        let lo = match self.seeds.first() {
            Some(&s) => (gate + 0.01).max(base_lo.min(s - 0.04)),
            None => base_lo,
        };
        (lo, WORKING_RADIUS)
    }

    /// Right edge of the default cycle window.
    pub fn x_window(&self) -> f64 {
        self.seeds
            .last()
            .map(|s| (s + 0.05).min(0.93))
            .unwrap_or(((SQRT_2 * self.eta) + 0.1).min(0.93))
    }

    /// Non-monotone transition built on this family; three interior Morse
    /// critical points (the two folds and the hilltop between them).
    pub fn transition(&self) -> Result<TransitionSpec> {
        let (cp, cm) = self.c_big();
        let fb0 = &self.p_e + &Poly::new(vec![0.0, self.b]);
        let core = JumpCore {
            fb1: fb0.deriv(),
            fb2: self.pe2.clone(),
            fb0,
            delta: self.delta,
            po: self.po.clone(),
            cp,
            cm,
        };
        build_jump_transition(Arc::new(core), make_cutoffs(self.rho)?)
    }
}

struct JumpCore {
    fb0: Poly,
    fb1: Poly,
    fb2: Poly,
    delta: f64,
    po: OddBlendPo,
    cp: f64,
    cm: f64,
}

impl CoreFn for JumpCore {
    fn eval012(&self, x: f64) -> (f64, f64, f64) {
        let (v, d1, d2) = self.po.eval012(x);
        (
            (self.fb0.eval(x) + self.delta * v - self.cp) / self.cm,
            (self.fb1.eval(x) + self.delta * d1) / self.cm,
            (self.fb2.eval(x) + self.delta * d2) / self.cm,
        )
    }
}

/// Left endpoint L ∈ (−1, −√2η) with F₀(L) = F₀(x), for x in the profile
/// window. Uses the unbroken layer (b = 0).
pub fn fast_relation_jump(m: &JumpModel, x: f64) -> Result<f64> {
    if m.b != 0.0 {
        return Err(Error::InvalidParameter {
            name: "b",
            message: format!(
                "fast relation uses the unbroken layer (b = 0), got b = {}",
                m.b
            ),
        });
    }
    let (lo, hi) = m.d1();
    if !(x >= lo - 1e-12 && x <= hi + 1e-12) {
        return Err(Error::Domain(format!(
            "x = {x} outside profile window [{lo}, {hi}]"
        )));
    }
    let gate = SQRT_2 * m.eta;
    let target = m.f0(x);
    let g = |l: f64| m.f0(l) - target;
    let dg = |l: f64| m.f0_012(l).1;
    rootfind::solve_bracketed(&g, &dg, -1.0, -gate, 1e-9).map_err(|_| {
        Error::Domain(format!(
            "x = {x} outside canard domain: no left balance point in (-1, -{gate})"
        ))
    })
}

/// Divergence integral of the unbroken fold family: the two slow segments
/// contribute ∫ₓ^η F₀'(s)²/s ds and ∫₋η^{L} F₀'(s)²/s ds; neither interval
/// touches 0.
pub fn sdi_jump(m: &JumpModel, x: f64) -> Result<f64> {
    let l = fast_relation_jump(m, x)?;
    let eta = m.eta;
    let integrand = |s: f64| {
        let d = m.f0_012(s).1;
        d * d / s
    };
    let right = quad::integrate(integrand, x, eta, SDI_ABS_TOL)?;
    let left = quad::integrate(integrand, -eta, l, SDI_ABS_TOL)?;
    Ok(right.value + left.value)
}

/// Same integral by exact arithmetic: on each side of 0 the integrand is a
/// polynomial plus c/s, handled by `integral_over_s`.
pub fn sdi_jump_exact(m: &JumpModel, x: f64) -> Result<f64> {
    let l = fast_relation_jump(m, x)?;
    let eta = m.eta;
    Ok(m.sq_right.integral_over_s(x, eta)? + m.sq_left.integral_over_s(-eta, l)?)
}

/// Leading-order profile ∫_η^x (2sP_o − (s²−η²)P_o') ds by quadrature.
/// Coincides with the seed polynomial P̃ on [η, ∞); the gap between the two
/// is a direct measure of quadrature plus construction error.
pub fn i1(m: &JumpModel, x: f64) -> Result<f64> {
    let eta = m.eta;
    if !(x >= eta) {
        return Err(Error::Domain(format!("I1 needs x >= {eta}, got {x}")));
    }
    let w = |s: f64| {
        let (v, d1, _) = m.po.eval012(s);
        2.0 * s * v - (s * s - eta * eta) * d1
    };
    Ok(quad::integrate(w, eta, x, SDI_ABS_TOL)?.value)
}

/// Fold points x₋(b) < 0 < x₊(b): the roots of F_b' near ∓η. Errors when
/// |b| is too large for the folds to survive.
pub fn jump_points(m: &JumpModel) -> Result<(f64, f64)> {
    let eta = m.eta;
    let d = |x: f64| m.fb_012(x).1;
    let d2 = |x: f64| m.fb_012(x).2;
    let xp = rootfind::solve_bracketed(&d, &d2, 0.5 * eta, 1.5 * eta, 1e-12).map_err(|_| {
        Error::Domain(format!(
            "no fold of F_b near {eta}: |b| = {} too large",
            m.b.abs()
        ))
    })?;
    let xm = rootfind::solve_bracketed(&d, &d2, -1.5 * eta, -0.5 * eta, 1e-12).map_err(|_| {
        Error::Domain(format!(
            "no fold of F_b near {}: |b| = {} too large",
            -eta,
            m.b.abs()
        ))
    })?;
    Ok((xm, xp))
}

/// Height gap h(b) = F_b(x₊(b)) − F_b(x₋(b)) between the two fold values;
/// h(0) = 0 and h'(0) = 2η, so b breaks the fold balance transversally.
pub fn breaking_gap(m: &JumpModel) -> Result<f64> {
    let (xm, xp) = jump_points(m)?;
    Ok(m.fb(xp) - m.fb(xm))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SdiKind {
    Hopf,
    Jump,
}

/// Borrowed handle on either family, for the operations that treat the two
/// uniformly.
#[derive(Clone, Copy)]
pub enum ModelRef<'a> {
    Hopf(&'a HopfModel),
    Jump(&'a JumpModel),
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SdiSample {
    pub x: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SdiZero {
    pub x: f64,
    /// Centred-difference estimate of I' at the zero.
    pub slope: f64,
    pub simple: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SdiProfile {
    pub kind: SdiKind,
    pub domain: (f64, f64),
    pub samples: Vec<SdiSample>,
    pub zeros: Vec<SdiZero>,
    pub max_abs: f64,
}

impl SdiProfile {
    pub fn simple_zero_count(&self) -> usize {
        self.zeros.iter().filter(|z| z.simple).count()
    }

    pub fn zero_xs(&self) -> Vec<f64> {
        self.zeros.iter().map(|z| z.x).collect()
    }
}

/// Sample the divergence integral on a grid, bracket its sign changes, and
/// bisect each to a certified zero. Simplicity is certified by a centred
/// slope estimate against the profile's own scale. A profile that never
/// rises above the quadrature floor is reported with no zeros.
pub fn find_sdi_zeros(
    model: ModelRef,
    interval: Option<(f64, f64)>,
    n_grid: usize,
) -> Result<SdiProfile> {
    if n_grid < 200 {
        return Err(Error::InvalidParameter {
            name: "n_grid",
            message: format!("need at least 200 sample cells, got {n_grid}"),
        });
    }
    let (kind, domain): (SdiKind, (f64, f64)) = match model {
        ModelRef::Hopf(m) => (SdiKind::Hopf, interval.unwrap_or(m.sdi_domain())),
        ModelRef::Jump(m) => (SdiKind::Jump, interval.unwrap_or(m.d1())),
    };
    let (lo, hi) = domain;
    if !(lo < hi) {
        return Err(Error::InvalidParameter {
            name: "interval",
            message: format!("empty interval [{lo}, {hi}]"),
        });
    }
    let eval = |x: f64| -> Result<f64> {
        match model {
            ModelRef::Hopf(m) => sdi_hopf_exact(m, x),
            ModelRef::Jump(m) => sdi_jump_exact(m, x),
        }
    };
    // both endpoints must be inside the canard domain; interior points then
    // are too (the balance point moves monotonically with x)
    eval(lo)?;
    eval(hi)?;

    let mut samples = Vec::with_capacity(n_grid + 1);
    for j in 0..=n_grid {
        let x = lo + (hi - lo) * j as f64 / n_grid as f64;
        samples.push(SdiSample { x, value: eval(x)? });
    }
    let max_abs = samples.iter().map(|s| s.value.abs()).fold(0.0f64, f64::max);

    let mut zeros = Vec::new();
    if max_abs > NULL_FLOOR {
        let fe = |x: f64| eval(x).expect("inside validated domain");
        let h = 1e-4 * (hi - lo);
        let mut push_zero = |x: f64| {
            let (a, b) = ((x - h).max(lo), (x + h).min(hi));
            let slope = (fe(b) - fe(a)) / (b - a);
            zeros.push(SdiZero {
                x,
                slope,
                simple: slope.abs() > SIMPLE_SLOPE_FACTOR * max_abs,
            });
        };
        for w in samples.windows(2) {
            let (a, b) = (w[0], w[1]);
            if a.value == 0.0 {
                push_zero(a.x);
            } else if a.value * b.value < 0.0 {
                push_zero(rootfind::bisect(&fe, a.x, b.x, ZERO_XTOL)?);
            }
        }
        if let Some(last) = samples.last() {
            if last.value == 0.0 {
                push_zero(last.x);
            }
        }
    }

    Ok(SdiProfile {
        kind,
        domain,
        samples,
        zeros,
        max_abs,
    })
}

/// Geometric data of the balanced (canard) cycle through x: endpoints,
/// common height, the fold bridge for the jump family, and a polyline for
/// closeness tests against computed orbits.
#[derive(Debug, Clone, Serialize)]
pub struct CanardCycleSpec {
    pub kind: SdiKind,
    pub x: f64,
    pub l: f64,
    pub height: f64,
    /// Jump family: height of the bridge between the two folds.
    pub gamma_height: Option<f64>,
    /// Jump family: the fold abscissas (x₋, x₊).
    pub jump_points: Option<(f64, f64)>,
    pub polyline: Vec<[f64; 2]>,
}

const CYCLE_ARC_SAMPLES: usize = 256;

pub fn canard_cycle(model: ModelRef, x: f64) -> Result<CanardCycleSpec> {
    match model {
        ModelRef::Hopf(m) => {
            let l = fast_relation_hopf(m, x)?;
            let height = m.big_f(x);
            let n = CYCLE_ARC_SAMPLES;
            let mut polyline = Vec::with_capacity(n + 2);
            // slow arc through the turning point, then the fast return
            for j in 0..=n {
                let s = l + (x - l) * j as f64 / n as f64;
                polyline.push([s, m.big_f(s)]);
            }
            polyline.push([l, height]);
            Ok(CanardCycleSpec {
                kind: SdiKind::Hopf,
                x,
                l,
                height,
                gamma_height: None,
                jump_points: None,
                polyline,
            })
        }
        ModelRef::Jump(m) => {
            let l = fast_relation_jump(m, x)?;
            let (xm, xp) = jump_points(m)?;
            let height = m.f0(x);
            let bridge = m.f0(xp);
            let n = CYCLE_ARC_SAMPLES / 2;
            let mut polyline = Vec::with_capacity(2 * n + 4);
            // right slow branch down to the fold
            for j in 0..=n {
                let s = x + (xp - x) * j as f64 / n as f64;
                polyline.push([s, m.f0(s)]);
            }
            // bridge between the folds, then the left slow branch outward
            for j in 0..=n {
                let s = xm + (l - xm) * j as f64 / n as f64;
                polyline.push([s, m.f0(s)]);
            }
            // fast return at the common height
            polyline.push([x, height]);
            Ok(CanardCycleSpec {
                kind: SdiKind::Jump,
                x,
                l,
                height,
                gamma_height: Some(bridge),
                jump_points: Some((xm, xp)),
                polyline,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hopf_k1() -> HopfModel {
        HopfModel::new(0.01, &[0.3], DEFAULT_C_PLUS, DEFAULT_C_MINUS).unwrap()
    }

    fn jump_k2() -> JumpModel {
        JumpModel::new(
            0.5,
            0.0,
            0.01,
            &[0.75, 0.85],
            DEFAULT_C_PLUS,
            DEFAULT_C_MINUS,
        )
        .unwrap()
    }

    #[test]
    fn hopf_model_validation() {
        assert!(HopfModel::new(0.01, &[0.3], 3.0, 0.5).is_err()); // plateau bound
        assert!(HopfModel::new(0.01, &[0.4, 0.3], 3.0, 1.0).is_err()); // order
        assert!(HopfModel::new(0.01, &[-0.2], 3.0, 1.0).is_err()); // sign
        assert!(HopfModel::new(f64::NAN, &[0.3], 3.0, 1.0).is_err());
        // strong enough delta kills the slope condition
        assert!(matches!(
            HopfModel::new(100.0, &[0.3], 3.0, 1.0),
            Err(Error::PreconditionFailed { .. })
        ));

        let m = hopf_k1();
        assert_eq!(m.big_f(0.0), 0.0);
        assert_eq!(m.big_f012(0.0).1, 0.0);
        assert_eq!(m.c_big(), (2.0, 1.0));
        assert_eq!(m.core_poly().eval(0.0), -2.0);
    }

    #[test]
    fn hopf_fast_relation_balances() {
        let even = HopfModel::new(0.0, &[], 3.0, 1.0).unwrap();
        for &x in &[0.05, 0.2, 0.5, 0.9] {
            let l = fast_relation_hopf(&even, x).unwrap();
            assert!((l + x).abs() < 1e-13, "x = {x}: L = {l}");
        }
        let m = hopf_k1();
        for &x in &[0.1, 0.2, 0.35] {
            let l = fast_relation_hopf(&m, x).unwrap();
            assert!(l < 0.0);
            assert!((m.big_f(l) - m.big_f(x)).abs() < 1e-12);
            assert!((l + x).abs() < 1e-3, "shift should be O(delta)");
        }
        assert!(fast_relation_hopf(&m, 0.0).is_err());
        assert!(fast_relation_hopf(&m, 0.96).is_err());
    }

    #[test]
    fn hopf_fast_relation_first_order_shift() {
        // L(x) = -x + delta*L1(x) + O(delta^2), L1 = -2 F_o(x)/x
        let grid: Vec<f64> = (1..=20).map(|j| 0.02 * j as f64).collect();
        let mut ratios = Vec::new();
        for &delta in &[1e-2, 5e-3] {
            let m = HopfModel::new(delta, &[0.3], 3.0, 1.0).unwrap();
            let mut worst = 0.0f64;
            for &x in &grid {
                let l = fast_relation_hopf(&m, x).unwrap();
                let l1 = -2.0 * m.f_odd_poly().eval(x) / x;
                worst = worst.max((l + x - delta * l1).abs() / (delta * delta));
            }
            ratios.push(worst);
        }
        assert!(
            ratios[0] <= 3.0 * ratios[1] && ratios[1] <= 3.0 * ratios[0],
            "second-order residual unstable: {ratios:?}"
        );
    }

    #[test]
    fn hopf_sdi_null_when_even() {
        let even = HopfModel::new(0.0, &[], 3.0, 1.0).unwrap();
        for &x in &[0.1, 0.3, 0.6, 0.9] {
            assert!(sdi_hopf(&even, x).unwrap().abs() <= 1e-12);
            assert!(sdi_hopf_exact(&even, x).unwrap().abs() <= 1e-12);
        }
    }

    #[test]
    fn hopf_sdi_quadrature_matches_exact() {
        let m = hopf_k1();
        for j in 1..=20 {
            let x = 0.02 * j as f64;
            let a = sdi_hopf(&m, x).unwrap();
            let b = sdi_hopf_exact(&m, x).unwrap();
            assert!((a - b).abs() <= 5e-12, "x = {x}: {a} vs {b}");
        }
    }

    #[test]
    fn hopf_sdi_signs_and_leading_order() {
        let m = hopf_k1();
        // leading order -2*delta*F_o: positive below the seed, negative above
        let i_in = sdi_hopf(&m, 0.2).unwrap();
        let i_out = sdi_hopf(&m, 0.35).unwrap();
        assert!(i_in > 1e-7, "I(0.2) = {i_in}");
        assert!(i_out < -1e-7, "I(0.35) = {i_out}");

        let grid: Vec<f64> = (1..=25).map(|j| 0.016 * j as f64).collect();
        let scaled_residual = |delta: f64| -> f64 {
            let m = HopfModel::new(delta, &[0.3], 3.0, 1.0).unwrap();
            let mut worst = 0.0f64;
            for &x in &grid {
                let i = sdi_hopf_exact(&m, x).unwrap();
                worst = worst.max((i + 2.0 * delta * m.f_odd_poly().eval(x)).abs());
            }
            worst / (delta * delta)
        };
        let m1 = scaled_residual(1e-2);
        let m2 = scaled_residual(5e-3);
        let m3 = scaled_residual(2.5e-3);
        assert!(m1 / m2 < 3.0 && m2 / m1 < 3.0, "{m1} vs {m2}");
        assert!(m2 / m3 < 3.0 && m3 / m2 < 3.0, "{m2} vs {m3}");
    }

    #[test]
    fn odd_blend_identities() {
        let eta = 0.5;
        let po = build_po(eta, &[0.75, 0.85]).unwrap();
        // exact zero of value at the fold; derivative at rounding level
        assert_eq!(po.eval(eta), 0.0);
        assert!(po.eval012(eta).1.abs() <= 1e-14);

        // the defining relation holds coefficientwise:
        // 2sp - (s^2-eta^2)p' = ptilde'
        let shift = Poly::new(vec![-eta * eta, 0.0, 1.0]);
        let lhs = &(&Poly::new(vec![0.0, 2.0]) * &po.p) - &(&shift * &po.p1);
        let p_tilde = &(&(&shift * &shift) * &shift) * &Poly::from_roots(&[0.75, 0.85]);
        let rhs = p_tilde.deriv();
        let scale = rhs.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
        for (i, (a, b)) in lhs.coeffs().iter().zip(rhs.coeffs()).enumerate() {
            assert!((a - b).abs() <= 1e-13 * scale, "coeff {i}: {a} vs {b}");
        }

        // globally odd, to the bit, and equal to the branch polynomial
        // outside the blend region
        for j in 0..=60 {
            let x = -1.2 + 2.4 * j as f64 / 60.0;
            let (v, _, _) = po.eval012(x);
            let (vn, _, _) = po.eval012(-x);
            assert_eq!(v, -vn, "odd symmetry at {x}");
            if x >= eta {
                assert_eq!(v, po.right_branch().eval(x));
            }
        }

        assert!(build_po(eta, &[0.85, 0.75]).is_err());
        assert!(build_po(eta, &[0.6]).is_err()); // below the gate
    }

    #[test]
    fn i1_matches_seed_polynomial() {
        let m = jump_k2();
        let p_tilde = m.p_tilde_poly();
        let scale = (0..=100)
            .map(|j| p_tilde.eval(0.5 + 0.4 * j as f64 / 100.0).abs())
            .fold(0.0f64, f64::max);
        let mut worst = 0.0f64;
        for j in 0..=100 {
            let x = 0.5 + 0.4 * j as f64 / 100.0;
            worst = worst.max((i1(&m, x).unwrap() - p_tilde.eval(x)).abs());
        }
        assert!(worst <= 1e-10 * scale, "gap {worst} vs scale {scale}");
        assert_eq!(i1(&m, 0.5).unwrap(), 0.0);
        assert!(i1(&m, 0.4).is_err());
    }

    #[test]
    fn jump_points_and_breaking_gap() {
        let flat = JumpModel::new(0.5, 0.0, 0.0, &[], 3.0, 1.0).unwrap();
        let (xm, xp) = jump_points(&flat).unwrap();
        assert!((xp - 0.5).abs() <= 1e-13 && (xm + 0.5).abs() <= 1e-13);
        assert!(breaking_gap(&flat).unwrap().abs() <= 1e-15);

        // broken folds against the second-order expansion
        let broken = flat.with_b(0.01).unwrap();
        let (_, xp) = jump_points(&broken).unwrap();
        assert!((xp - 0.4788).abs() <= 1e-3, "x_plus = {xp}");
        assert!(xp < 0.5);

        // slope of the gap at b = 0 is 2*eta, for any delta
        for m in [&flat, &jump_k2()] {
            let hp = breaking_gap(&m.with_b(1e-4).unwrap()).unwrap();
            let hm = breaking_gap(&m.with_b(-1e-4).unwrap()).unwrap();
            assert_relative_eq!((hp - hm) / 2e-4, 1.0, max_relative = 1e-5);
            assert!(breaking_gap(m).unwrap().abs() <= 1e-15);
        }
        for &b in &[1e-3, -1e-3, 5e-4] {
            let h = breaking_gap(&flat.with_b(b).unwrap()).unwrap();
            assert!((h - 2.0 * 0.5 * b).abs() <= 10.0 * b * b, "h({b}) = {h}");
        }

        // folds vanish for large |b|
        assert!(jump_points(&flat.with_b(10.0).unwrap()).is_err());
    }

    #[test]
    fn jump_fast_relation_balances() {
        let even = JumpModel::new(0.5, 0.0, 0.0, &[], 3.0, 1.0).unwrap();
        let (lo, hi) = even.d1();
        for j in 0..=10 {
            let x = lo + (hi - lo) * j as f64 / 10.0;
            let l = fast_relation_jump(&even, x).unwrap();
            assert!((l + x).abs() <= 1e-12, "x = {x}: L = {l}");
        }
        let m = jump_k2();
        let gate = SQRT_2 * 0.5;
        for &x in &[0.72, 0.8, 0.9] {
            let l = fast_relation_jump(&m, x).unwrap();
            assert!(l > -1.0 && l < -gate, "L = {l}");
            assert!((m.f0(l) - m.f0(x)).abs() < 1e-12);
        }
        assert!(fast_relation_jump(&m, 0.5).is_err());
        assert!(fast_relation_jump(&m.with_b(0.1).unwrap(), 0.8).is_err());
    }

    #[test]
    fn jump_fast_relation_first_order_shift() {
        // L(x) = -x + delta*L1(x) + O(delta^2), L1 = -2 P_o(x)/(x(x^2-eta^2))
        let eta = 0.5f64;
        let mut ratios = Vec::new();
        for &delta in &[1e-2, 5e-3] {
            let m = JumpModel::new(eta, 0.0, delta, &[0.75, 0.85], 3.0, 1.0).unwrap();
            let (lo, hi) = m.d1();
            let mut worst = 0.0f64;
            for j in 0..=50 {
                let x = lo + (hi - lo) * j as f64 / 50.0;
                let l = fast_relation_jump(&m, x).unwrap();
                let l1 = -2.0 * m.po().eval(x) / (x * (x * x - eta * eta));
                worst = worst.max((l + x - delta * l1).abs() / (delta * delta));
            }
            ratios.push(worst);
        }
        assert!(
            ratios[0] <= 3.0 * ratios[1] && ratios[1] <= 3.0 * ratios[0],
            "second-order residual unstable: {ratios:?}"
        );
    }

    #[test]
    fn jump_sdi_null_quadrature_and_leading_order() {
        let even = JumpModel::new(0.5, 0.0, 0.0, &[], 3.0, 1.0).unwrap();
        let (lo, hi) = even.d1();
        for j in 0..=8 {
            let x = lo + (hi - lo) * j as f64 / 8.0;
            assert!(sdi_jump(&even, x).unwrap().abs() <= 1e-12);
            assert!(sdi_jump_exact(&even, x).unwrap().abs() <= 1e-12);
        }

        let m = jump_k2();
        for j in 0..=10 {
            let x = lo + (hi - lo) * j as f64 / 10.0;
            let a = sdi_jump(&m, x).unwrap();
            let b = sdi_jump_exact(&m, x).unwrap();
            assert!((a - b).abs() <= 5e-12, "x = {x}: {a} vs {b}");
        }

        // I_J = 2*delta*Ptilde + O(delta^2)
        let scaled_residual = |delta: f64| -> f64 {
            let m = JumpModel::new(0.5, 0.0, delta, &[0.75, 0.85], 3.0, 1.0).unwrap();
            let (lo, hi) = m.d1();
            let mut worst = 0.0f64;
            for j in 0..=25 {
                let x = lo + (hi - lo) * j as f64 / 25.0;
                let i = sdi_jump_exact(&m, x).unwrap();
                worst = worst.max((i - 2.0 * delta * m.p_tilde_poly().eval(x)).abs());
            }
            worst / (delta * delta)
        };
        let m1 = scaled_residual(1e-2);
        let m2 = scaled_residual(5e-3);
        assert!(m1 / m2 < 3.0 && m2 / m1 < 3.0, "{m1} vs {m2}");
    }

    #[test]
    fn sdi_zero_certification_hopf() {
        let m = hopf_k1();
        let profile = find_sdi_zeros(ModelRef::Hopf(&m), None, 400).unwrap();
        assert_eq!(profile.kind, SdiKind::Hopf);
        assert_eq!(profile.zeros.len(), 1);
        let z = &profile.zeros[0];
        assert!((z.x - 0.3).abs() <= 0.05, "zero at {}", z.x);
        assert!(z.simple);

        let m2 = HopfModel::new(5e-3, &[0.25, 0.4], 3.0, 1.0).unwrap();
        let profile = find_sdi_zeros(ModelRef::Hopf(&m2), None, 400).unwrap();
        assert_eq!(profile.zeros.len(), 2);
        assert!((profile.zeros[0].x - 0.25).abs() <= 0.03);
        assert!((profile.zeros[1].x - 0.4).abs() <= 0.03);
        assert_eq!(profile.simple_zero_count(), 2);

        // even family: profile is null, no spurious zeros
        let even = HopfModel::new(0.0, &[], 3.0, 1.0).unwrap();
        let profile = find_sdi_zeros(ModelRef::Hopf(&even), Some((0.05, 0.5)), 250).unwrap();
        assert!(profile.max_abs <= NULL_FLOOR);
        assert!(profile.zeros.is_empty());

        assert!(find_sdi_zeros(ModelRef::Hopf(&m), None, 150).is_err());
    }

    #[test]
    fn sdi_zero_certification_jump() {
        let m = jump_k2();
        let profile = find_sdi_zeros(ModelRef::Jump(&m), None, 400).unwrap();
        assert_eq!(profile.kind, SdiKind::Jump);
        assert_eq!(profile.zeros.len(), 2);
        assert!((profile.zeros[0].x - 0.75).abs() <= 0.03);
        assert!((profile.zeros[1].x - 0.85).abs() <= 0.03);
        assert_eq!(profile.simple_zero_count(), 2);
        // seed-aware window reaches below the nominal edge to keep 0.75 inside
        assert!(profile.domain.0 < 0.75 - 0.03);
    }

    #[test]
    fn canard_cycle_geometry() {
        let even = HopfModel::new(0.0, &[], 3.0, 1.0).unwrap();
        let spec = canard_cycle(ModelRef::Hopf(&even), 0.3).unwrap();
        assert!((spec.l + 0.3).abs() <= 1e-12);
        assert_relative_eq!(spec.height, 0.045, max_relative = 1e-12);
        assert_eq!(spec.polyline.first(), spec.polyline.last());
        assert!(spec.gamma_height.is_none());

        let m = jump_k2();
        let spec = canard_cycle(ModelRef::Jump(&m), 0.8).unwrap();
        let (xm, xp) = spec.jump_points.unwrap();
        assert!(spec.l < xm && xm < xp && xp < spec.x);
        // bridge height equals the fold height on both sides (odd part
        // vanishes at the folds)
        assert_eq!(spec.gamma_height.unwrap(), m.p_e_poly().eval(xp));
        for pt in &spec.polyline {
            assert!(pt[0].abs() < 1.0, "stripe violation at {pt:?}");
        }
        assert_eq!(spec.polyline.first(), spec.polyline.last());
    }

    #[test]
    fn fold_minima_are_morse() {
        for &(eta, seeds) in &[
            (0.1f64, &[][..]),
            (0.3, &[0.6][..]),
            (0.5, &[0.75, 0.85][..]),
            (0.65, &[][..]),
        ] {
            let m = JumpModel::new(eta, 0.0, 0.01, seeds, 3.0, 1.0).unwrap();
            for &x in &[eta, -eta] {
                let d2 = m.f0_012(x).2;
                assert!(d2 > 0.0, "eta = {eta}: F0''({x}) = {d2}");
                let h = 1e-5;
                let second_diff = (m.f0(x + h) - 2.0 * m.f0(x) + m.f0(x - h)) / (h * h);
                assert!(second_diff > 0.0);
            }
        }
    }

    #[test]
    fn model_transitions_assemble() {
        let m = hopf_k1();
        let spec = m.transition().unwrap();
        assert_eq!(spec.critical_points.len(), 1);
        assert!(spec.critical_points[0].abs() < 1e-6);

        let j = jump_k2();
        let spec = j.transition().unwrap();
        assert_eq!(spec.critical_points.len(), 3);
        assert!((spec.critical_points[0] + 0.5).abs() < 1e-6);
        assert!(spec.critical_points[1].abs() < 1e-6);
        assert!((spec.critical_points[2] - 0.5).abs() < 1e-6);

        // fold family with broken balance still assembles
        let jb = j.with_b(1e-3).unwrap();
        assert_eq!(jb.transition().unwrap().critical_points.len(), 3);
    }
}
