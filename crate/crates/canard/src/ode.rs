//! Adaptive planar integration with dense output and section-event
//! refinement.
//!
//! Two steppers share one driver: an explicit Dormand-Prince 5(4) pair
//! (first-same-as-last) for the default path, and a 2-stage L-stable SDIRK
//! method with step-doubling error control as the stiff fallback. Alongside
//! the state the driver accumulates the integral of the divergence, which
//! exponentiates to the multiplier of a closed orbit.

use serde::{Deserialize, Serialize};

use crate::dd::Dd;
use crate::error::{Error, Result};

pub trait PlanarSystem {
    fn rhs(&self, t: f64, u: [f64; 2]) -> [f64; 2];

    /// Trace of the Jacobian at (t, u); integrated along orbits.
    fn divergence(&self, t: f64, u: [f64; 2]) -> f64;

    /// Jacobian for the implicit stage solves. The default forward
    /// difference is adequate; systems with cheap analytic Jacobians
    /// override.
    fn jacobian(&self, t: f64, u: [f64; 2]) -> [[f64; 2]; 2] {
        let f0 = self.rhs(t, u);
        let mut j = [[0.0; 2]; 2];
        for c in 0..2 {
            let h = 1e-7 * (1.0 + u[c].abs());
            let mut up = u;
            up[c] += h;
            let fp = self.rhs(t, up);
            for r in 0..2 {
                j[r][c] = (fp[r] - f0[r]) / h;
            }
        }
        j
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Dormand-Prince 5(4), explicit.
    Explicit,
    /// 2-stage SDIRK, L-stable, step-doubling error estimate.
    Implicit,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub method: Method,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_step: f64,
    pub event_tol: f64,
    /// Compensated accumulation of the state across steps; pays off on
    /// the long flight times of near-degenerate return maps.
    pub extended_precision: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Explicit,
            abs_tol: 1e-10,
            rel_tol: 1e-10,
            max_step: 0.2,
            event_tol: 1e-10,
            extended_precision: false,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParameter {
                name: "abs_tol/rel_tol",
                message: "tolerances must be positive".into(),
            });
        }
        if !(self.event_tol > 0.0 && self.event_tol <= self.abs_tol) {
            return Err(Error::InvalidParameter {
                name: "event_tol",
                message: format!(
                    "must be positive and at most abs_tol = {}, got {}",
                    self.abs_tol, self.event_tol
                ),
            });
        }
        if !(self.max_step > 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "max_step",
                message: "must be positive and finite".into(),
            });
        }
        Ok(())
    }
}

/// One accepted step with endpoint derivatives for Hermite interpolation
/// and the accumulated divergence integral at both ends.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub u0: [f64; 2],
    pub u1: [f64; 2],
    pub f0: [f64; 2],
    pub f1: [f64; 2],
    pub z0: f64,
    pub z1: f64,
}

impl Step {
    /// Cubic Hermite interpolant through the step endpoints.
    pub fn hermite(&self, t: f64) -> [f64; 2] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        [0, 1].map(|i| {
            h00 * self.u0[i] + h10 * h * self.f0[i] + h01 * self.u1[i] + h11 * h * self.f1[i]
        })
    }
}

// Dormand-Prince 5(4) tableau.
const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
// B minus the embedded 4th-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

const SDIRK_GAMMA: f64 = 0.292893218813452475; // 1 - 1/sqrt(2)

const H_FLOOR_FACTOR: f64 = 1e-13;
const MAX_NEWTON: usize = 10;

fn add2(u: [f64; 2], s: f64, v: [f64; 2]) -> [f64; 2] {
    [u[0] + s * v[0], u[1] + s * v[1]]
}

struct Attempt {
    u1: [f64; 2],
    f1: [f64; 2],
    dz: f64,
    err: f64,
}

pub struct Integrator<'a, S: PlanarSystem> {
    sys: &'a S,
    cfg: IntegratorConfig,
    t: f64,
    u: [f64; 2],
    f: [f64; 2],
    z: f64,
    h: f64,
    carry_u: [f64; 2],
    carry_z: f64,
}

impl<'a, S: PlanarSystem> Integrator<'a, S> {
    pub fn new(sys: &'a S, t0: f64, u0: [f64; 2], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let f = sys.rhs(t0, u0);
        if !(f[0].is_finite() && f[1].is_finite()) {
            return Err(Error::InvalidParameter {
                name: "state0",
                message: format!("vector field not finite at {u0:?}"),
            });
        }
        let h = cfg.max_step.min(1e-3);
        Ok(Integrator {
            sys,
            cfg,
            t: t0,
            u: u0,
            f,
            z: 0.0,
            h,
            carry_u: [0.0; 2],
            carry_z: 0.0,
        })
    }

    pub fn state(&self) -> (f64, [f64; 2], f64) {
        (self.t, self.u, self.z)
    }

    fn error_norm(&self, u0: [f64; 2], u1: [f64; 2], e: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let sc = self.cfg.abs_tol + self.cfg.rel_tol * u0[i].abs().max(u1[i].abs());
            let q = e[i] / sc;
            acc += q * q;
        }
        (acc / 2.0).sqrt()
    }

    fn dopri5_attempt(&self, h: f64) -> Attempt {
        let (t, u) = (self.t, self.u);
        let k1 = self.f;
        let k2 = self.sys.rhs(t + C[1] * h, add2(u, h * A2[0], k1));
        let u3 = [
            u[0] + h * (A3[0] * k1[0] + A3[1] * k2[0]),
            u[1] + h * (A3[0] * k1[1] + A3[1] * k2[1]),
        ];
        let k3 = self.sys.rhs(t + C[2] * h, u3);
        let comb = |w: &[f64], ks: &[[f64; 2]]| {
            let mut v = u;
            for (wi, ki) in w.iter().zip(ks) {
                v[0] += h * wi * ki[0];
                v[1] += h * wi * ki[1];
            }
            v
        };
        let u4 = comb(&A4, &[k1, k2, k3]);
        let k4 = self.sys.rhs(t + C[3] * h, u4);
        let u5 = comb(&A5, &[k1, k2, k3, k4]);
        let k5 = self.sys.rhs(t + C[4] * h, u5);
        let u6 = comb(&A6, &[k1, k2, k3, k4, k5]);
        let k6 = self.sys.rhs(t + C[5] * h, u6);
        let ks = [k1, k2, k3, k4, k5, k6];
        let mut u1 = u;
        for (bi, ki) in B.iter().zip(&ks) {
            u1[0] += h * bi * ki[0];
            u1[1] += h * bi * ki[1];
        }
        let k7 = self.sys.rhs(t + h, u1);
        let all = [k1, k2, k3, k4, k5, k6, k7];
        let mut e = [0.0; 2];
        for (ei, ki) in E.iter().zip(&all) {
            e[0] += h * ei * ki[0];
            e[1] += h * ei * ki[1];
        }
        // divergence integrated with the same 5th-order weights at the
        // stage abscissas
        let stage_u = [u, add2(u, h * A2[0], k1), u3, u4, u5, u6, u1];
        let mut dz = 0.0;
        for i in 0..7 {
            if B[i] != 0.0 {
                dz += B[i] * self.sys.divergence(t + C[i] * h, stage_u[i]);
            }
        }
        Attempt {
            u1,
            f1: k7,
            dz: h * dz,
            err: self.error_norm(u, u1, e),
        }
    }

    /// One implicit stage: solve U = base + gamma*h*f(ts, U) by Newton.
    fn sdirk_stage(&self, ts: f64, base: [f64; 2], h: f64) -> Result<([f64; 2], [f64; 2])> {
        let gh = SDIRK_GAMMA * h;
        let mut u = base;
        let j = self.sys.jacobian(ts, u);
        let m = [
            [1.0 - gh * j[0][0], -gh * j[0][1]],
            [-gh * j[1][0], 1.0 - gh * j[1][1]],
        ];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() < 1e-300 {
            return Err(Error::Numeric {
                what: "singular implicit stage matrix",
                achieved: det.abs(),
                requested: 1e-300,
            });
        }
        for _ in 0..MAX_NEWTON {
            let f = self.sys.rhs(ts, u);
            let r = [u[0] - base[0] - gh * f[0], u[1] - base[1] - gh * f[1]];
            let du = [
                (-r[0] * m[1][1] + r[1] * m[0][1]) / det,
                (-r[1] * m[0][0] + r[0] * m[1][0]) / det,
            ];
            u[0] += du[0];
            u[1] += du[1];
            if du[0].abs() <= 1e-13 * (1.0 + u[0].abs())
                && du[1].abs() <= 1e-13 * (1.0 + u[1].abs())
            {
                let f = self.sys.rhs(ts, u);
                return Ok((u, f));
            }
        }
        Err(Error::Numeric {
            what: "implicit stage Newton stalled",
            achieved: f64::NAN,
            requested: 1e-13,
        })
    }

    /// One SDIRK step of size h from (t, u); stiffly accurate, so the
    /// solution is the second stage.
    fn sdirk_basic(&self, t: f64, u: [f64; 2], h: f64) -> Result<([f64; 2], [f64; 2], f64)> {
        let g = SDIRK_GAMMA;
        let (u1s, k1) = self.sdirk_stage(t + g * h, u, h)?;
        let base2 = add2(u, (1.0 - g) * h, k1);
        let (u2s, k2) = self.sdirk_stage(t + h, base2, h)?;
        let dz = h
            * ((1.0 - g) * self.sys.divergence(t + g * h, u1s)
                + g * self.sys.divergence(t + h, u2s));
        Ok((u2s, k2, dz))
    }

    fn sdirk_attempt(&self, h: f64) -> Result<Attempt> {
        let (t, u) = (self.t, self.u);
        let (full, _, _) = self.sdirk_basic(t, u, h)?;
        let (mid, _, dz_a) = self.sdirk_basic(t, u, 0.5 * h)?;
        let (fine, f1, dz_b) = self.sdirk_basic(t + 0.5 * h, mid, 0.5 * h)?;
        // step-doubling estimate for a 2nd-order method
        let e = [(fine[0] - full[0]) / 3.0, (fine[1] - full[1]) / 3.0];
        Ok(Attempt {
            u1: fine,
            f1,
            dz: dz_a + dz_b,
            err: self.error_norm(u, fine, e),
        })
    }

    /// Advance by one accepted step, never past t_limit.
    pub fn advance(&mut self, t_limit: f64) -> Result<Step> {
        let span = t_limit - self.t;
        if !(span > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_limit",
                message: format!("not ahead of current time {}", self.t),
            });
        }
        let order = match self.cfg.method {
            Method::Explicit => 5.0,
            Method::Implicit => 2.0,
        };
        loop {
            let h = self.h.min(self.cfg.max_step).min(span);
            if h < H_FLOOR_FACTOR * (1.0 + self.t.abs()) {
                return Err(Error::Stiffness { t: self.t, h });
            }
            let attempt = match self.cfg.method {
                Method::Explicit => Ok(self.dopri5_attempt(h)),
                Method::Implicit => self.sdirk_attempt(h),
            };
            let attempt = match attempt {
                Ok(a) if a.err.is_finite() => a,
                // failed stage solve or non-finite error: retry smaller
                _ => {
                    self.h = 0.25 * h;
                    continue;
                }
            };
            let fac = 0.9 * attempt.err.powf(-1.0 / order);
            if attempt.err <= 1.0 {
                let step = Step {
                    t0: self.t,
                    t1: self.t + h,
                    u0: self.u,
                    u1: attempt.u1,
                    f0: self.f,
                    f1: attempt.f1,
                    z0: self.z,
                    z1: self.z + attempt.dz,
                };
                if self.cfg.extended_precision {
                    // Kahan accumulation of the per-step increments
                    for i in 0..2 {
                        let inc = (attempt.u1[i] - self.u[i]) - self.carry_u[i];
                        let s = self.u[i] + inc;
                        self.carry_u[i] = (s - self.u[i]) - inc;
                        self.u[i] = s;
                    }
                    let inc = attempt.dz - self.carry_z;
                    let s = self.z + inc;
                    self.carry_z = (s - self.z) - inc;
                    self.z = s;
                } else {
                    self.u = attempt.u1;
                    self.z += attempt.dz;
                }
                self.t += h;
                self.f = attempt.f1;
                self.h = h * fac.clamp(0.2, 5.0);
                return Ok(step);
            }
            self.h = h * fac.clamp(0.2, 0.9);
        }
    }
}

/// Refine the upward zero crossing of state component `comp` inside an
/// accepted step: Hermite bisection for a first guess, then Newton with a
/// fixed-size relanding step from the step start, down to
/// |u[comp]| <= event_tol. Returns (t, state, divergence integral).
pub fn refine_crossing<S: PlanarSystem>(
    sys: &S,
    step: &Step,
    cfg: &IntegratorConfig,
    comp: usize,
) -> Result<(f64, [f64; 2], f64)> {
    let (mut a, mut b) = (step.t0, step.t1);
    if !(step.u0[comp] < 0.0 && step.u1[comp] >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            message: "no upward crossing inside this step".into(),
        });
    }
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if step.hermite(mid)[comp] < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut t = 0.5 * (a + b);
    let reland = |t: f64| -> Result<([f64; 2], f64)> {
        let h = t - step.t0;
        if h <= 0.0 {
            return Ok((step.u0, 0.0));
        }
        match cfg.method {
            Method::Explicit => {
                // a single fixed step of the same pair, at most the
                // accepted size, inherits the accepted accuracy
                let probe = Integrator {
                    sys,
                    cfg: *cfg,
                    t: step.t0,
                    u: step.u0,
                    f: step.f0,
                    z: step.z0,
                    h,
                    carry_u: [0.0; 2],
                    carry_z: 0.0,
                };
                let a = probe.dopri5_attempt(h);
                Ok((a.u1, a.dz))
            }
            Method::Implicit => {
                let probe = Integrator {
                    sys,
                    cfg: *cfg,
                    t: step.t0,
                    u: step.u0,
                    f: step.f0,
                    z: step.z0,
                    h,
                    carry_u: [0.0; 2],
                    carry_z: 0.0,
                };
                let (u1, _, dz) = probe.sdirk_basic(step.t0, step.u0, h)?;
                Ok((u1, dz))
            }
        }
    };
    let mut u = step.hermite(t);
    let mut dz = 0.0;
    for _ in 0..8 {
        let (uu, zz) = reland(t)?;
        u = uu;
        dz = zz;
        let x = u[comp];
        if x.abs() <= cfg.event_tol {
            break;
        }
        let d = sys.rhs(t, u)[comp];
        if d.abs() < 1e-300 {
            break;
        }
        t = (t - x / d).clamp(step.t0, step.t1);
    }
    if u[comp].abs() > cfg.event_tol {
        return Err(Error::Numeric {
            what: "section crossing refinement",
            achieved: u[comp].abs(),
            requested: cfg.event_tol,
        });
    }
    Ok((t, u, step.z0 + dz))
}

/// Autonomous planar field evaluated in double-double, for the return-map
/// refinement. Only the explicit pair runs in this mode.
pub trait PlanarSystemDd: PlanarSystem {
    fn rhs_dd(&self, u: [Dd; 2]) -> [Dd; 2];

    fn divergence_dd(&self, u: [Dd; 2]) -> Dd;
}

/// Accepted step of the double-double driver.
#[derive(Clone, Copy)]
pub struct DdStep {
    pub t0: f64,
    pub t1: f64,
    pub u0: [Dd; 2],
    pub u1: [Dd; 2],
    pub f0: [Dd; 2],
    pub f1: [Dd; 2],
    pub z0: Dd,
    pub z1: Dd,
}

impl DdStep {
    /// Cubic Hermite interpolant; the blending weights stay f64, which
    /// costs nothing because interpolation error dominates them anyway.
    pub fn hermite(&self, t: f64) -> [Dd; 2] {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        [0, 1].map(|i| {
            self.u0[i]
                .mul_f(h00)
                .add(self.f0[i].mul_f(h10 * h))
                .add(self.u1[i].mul_f(h01))
                .add(self.f1[i].mul_f(h11 * h))
        })
    }
}

struct DdAttempt {
    u1: [Dd; 2],
    f1: [Dd; 2],
    dz: Dd,
    err: f64,
}

fn dd_comb(u: [Dd; 2], h: f64, w: &[f64], ks: &[[Dd; 2]]) -> [Dd; 2] {
    let mut v = u;
    for (wi, ki) in w.iter().zip(ks) {
        v[0] = v[0].add(ki[0].mul_f(h * wi));
        v[1] = v[1].add(ki[1].mul_f(h * wi));
    }
    v
}

fn dopri5_attempt_dd<S: PlanarSystemDd>(
    sys: &S,
    u: [Dd; 2],
    f: [Dd; 2],
    h: f64,
    tol: (f64, f64),
) -> DdAttempt {
    let k1 = f;
    let k2 = sys.rhs_dd(dd_comb(u, h, &A2, &[k1]));
    let u3 = dd_comb(u, h, &A3, &[k1, k2]);
    let k3 = sys.rhs_dd(u3);
    let u4 = dd_comb(u, h, &A4, &[k1, k2, k3]);
    let k4 = sys.rhs_dd(u4);
    let u5 = dd_comb(u, h, &A5, &[k1, k2, k3, k4]);
    let k5 = sys.rhs_dd(u5);
    let u6 = dd_comb(u, h, &A6, &[k1, k2, k3, k4, k5]);
    let k6 = sys.rhs_dd(u6);
    let ks = [k1, k2, k3, k4, k5, k6];
    let u1 = dd_comb(u, h, &B[..6], &ks);
    let k7 = sys.rhs_dd(u1);
    let all = [k1, k2, k3, k4, k5, k6, k7];
    let mut e = [Dd::ZERO, Dd::ZERO];
    for (ei, ki) in E.iter().zip(&all) {
        e[0] = e[0].add(ki[0].mul_f(h * ei));
        e[1] = e[1].add(ki[1].mul_f(h * ei));
    }
    let stage_u = [u, dd_comb(u, h, &A2, &[k1]), u3, u4, u5, u6, u1];
    let mut dz = Dd::ZERO;
    for i in 0..7 {
        if B[i] != 0.0 {
            dz = dz.add(sys.divergence_dd(stage_u[i]).mul_f(B[i]));
        }
    }
    let mut acc = 0.0;
    for i in 0..2 {
        let sc = tol.0 + tol.1 * u[i].val().abs().max(u1[i].val().abs());
        let q = e[i].val() / sc;
        acc += q * q;
    }
    DdAttempt {
        u1,
        f1: k7,
        dz: dz.mul_f(h),
        err: (acc / 2.0).sqrt(),
    }
}

pub struct DdIntegrator<'a, S: PlanarSystemDd> {
    sys: &'a S,
    cfg: IntegratorConfig,
    pub t: f64,
    u: [Dd; 2],
    f: [Dd; 2],
    z: Dd,
    h: f64,
}

impl<'a, S: PlanarSystemDd> DdIntegrator<'a, S> {
    pub fn new(sys: &'a S, u0: [Dd; 2], cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        let f = sys.rhs_dd(u0);
        if !(f[0].val().is_finite() && f[1].val().is_finite()) {
            return Err(Error::InvalidParameter {
                name: "state0",
                message: "vector field not finite at the refinement start".into(),
            });
        }
        Ok(DdIntegrator {
            sys,
            cfg,
            t: 0.0,
            u: u0,
            f,
            z: Dd::ZERO,
            h: cfg.max_step.min(1e-3),
        })
    }

    pub fn advance(&mut self, t_limit: f64) -> Result<DdStep> {
        let span = t_limit - self.t;
        if !(span > 0.0) {
            return Err(Error::InvalidParameter {
                name: "t_limit",
                message: format!("not ahead of current time {}", self.t),
            });
        }
        loop {
            let h = self.h.min(self.cfg.max_step).min(span);
            if h < H_FLOOR_FACTOR * (1.0 + self.t.abs()) {
                return Err(Error::Stiffness { t: self.t, h });
            }
            let attempt = dopri5_attempt_dd(
                self.sys,
                self.u,
                self.f,
                h,
                (self.cfg.abs_tol, self.cfg.rel_tol),
            );
            if !attempt.err.is_finite() {
                self.h = 0.25 * h;
                continue;
            }
            let fac = 0.9 * attempt.err.powf(-0.2);
            if attempt.err <= 1.0 {
                let step = DdStep {
                    t0: self.t,
                    t1: self.t + h,
                    u0: self.u,
                    u1: attempt.u1,
                    f0: self.f,
                    f1: attempt.f1,
                    z0: self.z,
                    z1: self.z.add(attempt.dz),
                };
                self.u = attempt.u1;
                self.z = step.z1;
                self.t += h;
                self.f = attempt.f1;
                self.h = h * fac.clamp(0.2, 5.0);
                return Ok(step);
            }
            self.h = h * fac.clamp(0.2, 0.9);
        }
    }
}

/// Upward zero crossing of component `comp` inside a double-double step:
/// Hermite bisection, then Newton with full relanding from the step start.
pub fn refine_crossing_dd<S: PlanarSystemDd>(
    sys: &S,
    step: &DdStep,
    cfg: &IntegratorConfig,
    comp: usize,
) -> Result<(f64, [Dd; 2], Dd)> {
    if !(step.u0[comp].val() < 0.0 && step.u1[comp].val() >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            message: "no upward crossing inside this step".into(),
        });
    }
    let (mut a, mut b) = (step.t0, step.t1);
    for _ in 0..60 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if step.hermite(mid)[comp].val() < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let mut t = 0.5 * (a + b);
    let mut u = step.u0;
    let mut dz = Dd::ZERO;
    for _ in 0..8 {
        let h = t - step.t0;
        if h <= 0.0 {
            u = step.u0;
            dz = Dd::ZERO;
        } else {
            let att = dopri5_attempt_dd(sys, step.u0, step.f0, h, (cfg.abs_tol, cfg.rel_tol));
            u = att.u1;
            dz = att.dz;
        }
        let x = u[comp].val();
        if x.abs() <= cfg.event_tol {
            break;
        }
        let d = sys.rhs_dd(u)[comp].val();
        if d.abs() < 1e-300 {
            break;
        }
        t = (t - x / d).clamp(step.t0, step.t1);
    }
    if u[comp].val().abs() > cfg.event_tol {
        return Err(Error::Numeric {
            what: "section crossing refinement",
            achieved: u[comp].val().abs(),
            requested: cfg.event_tol,
        });
    }
    Ok((t, u, step.z0.add(dz)))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TrajPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    /// Accumulated divergence integral up to t.
    pub div_int: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajPoint>,
}

impl Trajectory {
    pub fn final_state(&self) -> (f64, [f64; 2]) {
        let p = self
            .points
            .last()
            .expect("trajectory has at least the start");
        (p.t, [p.x, p.y])
    }
}

const STEP_BUDGET: usize = 50_000_000;

/// Integrate from state0 over [0, t_max], recording every accepted step.
pub fn integrate<S: PlanarSystem>(
    sys: &S,
    state0: [f64; 2],
    t_max: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    if !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "t_max",
            message: format!("must be positive and finite, got {t_max}"),
        });
    }
    let mut it = Integrator::new(sys, 0.0, state0, *cfg)?;
    let mut points = vec![TrajPoint {
        t: 0.0,
        x: state0[0],
        y: state0[1],
        div_int: 0.0,
    }];
    let end = t_max * (1.0 - 1e-14);
    let mut steps = 0usize;
    while it.t < end {
        let s = it.advance(t_max)?;
        points.push(TrajPoint {
            t: s.t1,
            x: s.u1[0],
            y: s.u1[1],
            div_int: s.z1,
        });
        steps += 1;
        if steps > STEP_BUDGET {
            return Err(Error::Numeric {
                what: "step budget exhausted",
                achieved: steps as f64,
                requested: STEP_BUDGET as f64,
            });
        }
    }
    Ok(Trajectory { points })
}
