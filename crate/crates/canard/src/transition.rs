//! Transition functions: smooth maps equal to -1 on (-inf, -1], +1 on
//! [1, inf), with a prescribed (possibly non-monotonic) core on [-rho, rho]
//! capped by the cut-off pair on the collars.
//!
//! Piecewise layout, writing A/B for the cut-offs and psi for the core:
//!   x <= -1          : -1
//!   -1 < x < -rho    : -B + psi (1 - B)
//!   |x| <= rho       : psi
//!   rho < x < 1      : A + psi (1 - A)
//!   x >= 1           : 1
//! which is the expanded form of A(1-B) - B + psi (1-A)(1-B).

use std::sync::Arc;

use crate::cutoff::CutoffPair;
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::poly::Poly;
use crate::rootfind;

/// A twice-differentiable core curve psi.
pub trait CoreFn: Send + Sync {
    /// (psi, psi', psi'') at x.
    fn eval012(&self, x: f64) -> (f64, f64, f64);

    /// (psi, psi') carried in double-double. The default rounds through
    /// f64; polynomial cores override with a full-precision Horner pass,
    /// which is what the return-map refinement leans on.
    fn eval01_dd(&self, x: Dd) -> (Dd, Dd) {
        let (p, p1, _) = self.eval012(x.val());
        (Dd::new(p), Dd::new(p1))
    }
}

/// Polynomial core with exact derivatives.
pub struct PolyCore {
    p: Poly,
    d1: Poly,
    d2: Poly,
}

impl PolyCore {
    pub fn new(p: Poly) -> Self {
        let d1 = p.deriv();
        let d2 = d1.deriv();
        PolyCore { p, d1, d2 }
    }
}

impl CoreFn for PolyCore {
    fn eval012(&self, x: f64) -> (f64, f64, f64) {
        (self.p.eval(x), self.d1.eval(x), self.d2.eval(x))
    }

    fn eval01_dd(&self, x: Dd) -> (Dd, Dd) {
        (
            crate::dd::horner_dd(self.p.coeffs(), x),
            crate::dd::horner_dd(self.d1.coeffs(), x),
        )
    }
}

impl CoreFn for Arc<dyn CoreFn> {
    fn eval012(&self, x: f64) -> (f64, f64, f64) {
        (**self).eval012(x)
    }

    fn eval01_dd(&self, x: Dd) -> (Dd, Dd) {
        (**self).eval01_dd(x)
    }
}

/// A transition function assembled from a core and a cut-off pair.
#[derive(Clone)]
pub struct TransitionSpec {
    core: Arc<dyn CoreFn>,
    pub cutoffs: CutoffPair,
    /// Interior critical points (zeros of phi' in (-1, 1)), ascending.
    pub critical_points: Vec<f64>,
}

impl std::fmt::Debug for TransitionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TransitionSpec")
            .field("rho", &self.cutoffs.rho)
            .field("critical_points", &self.critical_points)
            .finish()
    }
}

const BRANCH_JOINT_STEP: f64 = 1e-5;
const JOINT_GAP_LIMIT: f64 = 1e-8;

impl TransitionSpec {
    /// Assemble without hypothesis checks (critical points still located).
    pub fn assemble(core: Arc<dyn CoreFn>, cutoffs: CutoffPair) -> Self {
        let mut spec = TransitionSpec {
            core,
            cutoffs,
            critical_points: Vec::new(),
        };
        spec.critical_points = spec.scan_critical_points(4000);
        spec
    }

    pub fn rho(&self) -> f64 {
        self.cutoffs.rho
    }

    pub fn core(&self) -> &dyn CoreFn {
        &*self.core
    }

    /// (phi, phi', phi'') at x, by exact piecewise evaluation.
    pub fn eval012(&self, x: f64) -> (f64, f64, f64) {
        let rho = self.cutoffs.rho;
        if x <= -1.0 {
            (-1.0, 0.0, 0.0)
        } else if x < -rho {
            self.branch_eval(1, x)
        } else if x <= rho {
            self.core.eval012(x)
        } else if x < 1.0 {
            self.branch_eval(3, x)
        } else {
            (1.0, 0.0, 0.0)
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval012(x).0
    }

    pub fn d1(&self, x: f64) -> f64 {
        self.eval012(x).1
    }

    /// (phi, phi') in double-double. Full precision inside the core region,
    /// where the canard dynamics lives; on the collars and tails the value
    /// falls back to the f64 branch formulas, which is harmless because the
    /// amplified sensitivity is confined to |x| <= rho.
    pub fn eval01_dd(&self, x: Dd) -> (Dd, Dd) {
        let rho = self.cutoffs.rho;
        let xv = x.val();
        if xv.abs() <= rho {
            self.core.eval01_dd(x)
        } else {
            let (p, p1, _) = self.eval012(xv);
            (Dd::new(p), Dd::new(p1))
        }
    }

    /// Branch formulas evaluated regardless of where x lies; used by the
    /// smoothness proxy that compares adjacent formulas across a joint.
    pub fn branch_eval(&self, branch: usize, x: f64) -> (f64, f64, f64) {
        match branch {
            0 => (-1.0, 0.0, 0.0),
            1 => {
                let (b, b1, b2) = self.cutoffs.b012(x);
                let (p, p1, p2) = self.core.eval012(x);
                (
                    -b + p * (1.0 - b),
                    -b1 + p1 * (1.0 - b) - p * b1,
                    -b2 + p2 * (1.0 - b) - 2.0 * p1 * b1 - p * b2,
                )
            }
            2 => self.core.eval012(x),
            3 => {
                let (a, a1, a2) = self.cutoffs.a012(x);
                let (p, p1, p2) = self.core.eval012(x);
                (
                    a + p * (1.0 - a),
                    a1 + p1 * (1.0 - a) - p * a1,
                    a2 + p2 * (1.0 - a) - 2.0 * p1 * a1 - p * a2,
                )
            }
            4 => (1.0, 0.0, 0.0),
            _ => unreachable!("branch index"),
        }
    }

    /// Joints with the branch indices on each side.
    fn joints(&self) -> [(f64, usize, usize); 4] {
        let rho = self.cutoffs.rho;
        [(-1.0, 0, 1), (-rho, 1, 2), (rho, 2, 3), (1.0, 3, 4)]
    }

    fn scan_critical_points(&self, n: usize) -> Vec<f64> {
        // stay clear of the flat tails where the cut-off derivative
        // underflows to exact zero
        let margin = (1.0 - self.cutoffs.rho) / 500.0;
        let lo = -1.0 + margin;
        let hi = 1.0 - margin;
        rootfind::find_roots(
            &|x| self.eval012(x).1,
            &|x| self.eval012(x).2,
            lo,
            hi,
            n,
            1e-12,
        )
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct CriticalPointInfo {
    pub x: f64,
    pub phi: f64,
    pub second_derivative: f64,
    pub morse: bool,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct ValidationReport {
    pub boundary_exact: bool,
    pub max_joint_gap_phi: f64,
    pub max_joint_gap_dphi: f64,
    pub interior_critical_count: usize,
    pub critical_points: Vec<CriticalPointInfo>,
    pub morse_ok: bool,
    /// Sign of phi' on the open collars: -1, +1, or 0 if mixed.
    pub left_collar_sign: i8,
    pub right_collar_sign: i8,
    pub collar_sign_ok: bool,
    pub monotonic: bool,
    pub pass: bool,
}

fn collar_sign(spec: &TransitionSpec, lo: f64, hi: f64, n: usize) -> i8 {
    // sample the open collar away from the flat tails
    let margin = (hi - lo) / 500.0;
    let (lo, hi) = (lo + margin, hi - margin);
    let mut pos = false;
    let mut neg = false;
    for k in 0..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let d = spec.eval012(x).1;
        if d > 0.0 {
            pos = true;
        }
        if d < 0.0 {
            neg = true;
        }
    }
    match (pos, neg) {
        (true, false) => 1,
        (false, true) => -1,
        _ => 0,
    }
}

/// Measured smoothness / shape report for a transition function.
pub fn validate_transition(spec: &TransitionSpec) -> ValidationReport {
    let boundary_exact = spec.eval(-1.0) == -1.0
        && spec.eval(-1.0 - 1e-3) == -1.0
        && spec.eval(1.0) == 1.0
        && spec.eval(1.0 + 1e-3) == 1.0;

    // Smoothness proxy: adjacent branch formulas must agree through each
    // joint. With exactly-flat cut-offs the mismatch is exactly zero; a core
    // or cut-off that is merely C^1 shows up here.
    let mut gap_phi = 0.0f64;
    let mut gap_dphi = 0.0f64;
    for (xj, left, right) in spec.joints() {
        for dx in [-BRANCH_JOINT_STEP, BRANCH_JOINT_STEP] {
            let x = xj + dx;
            let l = spec.branch_eval(left, x);
            let r = spec.branch_eval(right, x);
            gap_phi = gap_phi.max((l.0 - r.0).abs());
            gap_dphi = gap_dphi.max((l.1 - r.1).abs());
        }
    }

    let crits = spec.critical_points.clone();
    let mut d2_scale = 0.0f64;
    for k in 0..=2000 {
        let x = -1.0 + k as f64 / 1000.0;
        d2_scale = d2_scale.max(spec.eval012(x).2.abs());
    }
    let morse_tol = 1e-9 * (1.0 + d2_scale);
    let critical_points: Vec<CriticalPointInfo> = crits
        .iter()
        .map(|&x| {
            let (phi, _, d2) = spec.eval012(x);
            CriticalPointInfo {
                x,
                phi,
                second_derivative: d2,
                morse: d2.abs() > morse_tol,
            }
        })
        .collect();
    let morse_ok = critical_points.iter().all(|c| c.morse);

    let rho = spec.cutoffs.rho;
    let left_collar_sign = collar_sign(spec, -1.0, -rho, 400);
    let right_collar_sign = collar_sign(spec, rho, 1.0, 400);
    let collar_sign_ok = left_collar_sign != 0 && right_collar_sign != 0;

    let monotonic = critical_points.is_empty()
        && left_collar_sign > 0
        && right_collar_sign > 0
        && collar_sign(spec, -rho, rho, 400) > 0;

    let pass = boundary_exact
        && gap_phi < JOINT_GAP_LIMIT
        && gap_dphi < JOINT_GAP_LIMIT
        && morse_ok
        && collar_sign_ok;

    ValidationReport {
        boundary_exact,
        max_joint_gap_phi: gap_phi,
        max_joint_gap_dphi: gap_dphi,
        interior_critical_count: critical_points.len(),
        critical_points,
        morse_ok,
        left_collar_sign,
        right_collar_sign,
        collar_sign_ok,
        monotonic,
        pass,
    }
}

const HYPOTHESIS_GRID: usize = 10_000;

/// Zero tolerance relative to a local magnitude scale.
fn ztol(scale: f64) -> f64 {
    1e-9 * scale.max(1.0)
}

fn check_core_bounds(core: &dyn CoreFn, what: &str) -> Result<()> {
    let m1 = core.eval012(-1.0).0;
    if !(m1 < -1.0) {
        return Err(Error::PreconditionFailed {
            what: format!("{what}: core(-1) = {m1} must be < -1"),
            lo: -1.0,
            hi: -1.0,
        });
    }
    let p1 = core.eval012(1.0).0;
    if !(p1 < 1.0) {
        return Err(Error::PreconditionFailed {
            what: format!("{what}: core(1) = {p1} must be < 1"),
            lo: 1.0,
            hi: 1.0,
        });
    }
    Ok(())
}

fn check_sign_on_grid<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    n: usize,
    want_positive: bool,
    what: &str,
) -> Result<()> {
    let mut first_bad = None;
    let mut last_bad = None;
    for k in 0..=n {
        let x = lo + (hi - lo) * k as f64 / n as f64;
        let v = f(x);
        let ok = if want_positive { v > 0.0 } else { v < 0.0 };
        if !ok {
            if first_bad.is_none() {
                first_bad = Some(x);
            }
            last_bad = Some(x);
        }
    }
    if let (Some(a), Some(b)) = (first_bad, last_bad) {
        return Err(Error::PreconditionFailed {
            what: what.to_string(),
            lo: a,
            hi: b,
        });
    }
    Ok(())
}

/// Build the transition for a core with a single interior turning point at 0
/// (slow-fast Hopf geometry): core decreasing on [-1, 0), increasing on
/// (0, 1], with core(-1) < -1 and core(1) < 1.
pub fn build_hopf_transition(core: Arc<dyn CoreFn>, cutoffs: CutoffPair) -> Result<TransitionSpec> {
    check_core_bounds(&*core, "turning-point core")?;

    let mut d1_scale = 0.0f64;
    for k in 0..=HYPOTHESIS_GRID {
        let x = -1.0 + 2.0 * k as f64 / HYPOTHESIS_GRID as f64;
        d1_scale = d1_scale.max(core.eval012(x).1.abs());
    }
    let (_, c1, c2) = core.eval012(0.0);
    if c1.abs() > ztol(d1_scale) {
        return Err(Error::PreconditionFailed {
            what: format!("core'(0) = {c1:e} must vanish"),
            lo: 0.0,
            hi: 0.0,
        });
    }
    if c2.abs() <= ztol(d1_scale) {
        return Err(Error::PreconditionFailed {
            what: format!("core''(0) = {c2:e} must be nonzero"),
            lo: 0.0,
            hi: 0.0,
        });
    }
    check_sign_on_grid(
        |x| core.eval012(x).1,
        -1.0,
        -1e-6,
        HYPOTHESIS_GRID / 2,
        false,
        "core' < 0 on [-1, 0)",
    )?;
    check_sign_on_grid(
        |x| core.eval012(x).1,
        1e-6,
        1.0,
        HYPOTHESIS_GRID / 2,
        true,
        "core' > 0 on (0, 1]",
    )?;

    let spec = TransitionSpec::assemble(core, cutoffs);
    if spec.critical_points.len() != 1 {
        return Err(Error::PreconditionFailed {
            what: format!(
                "expected exactly 1 interior critical point, found {}",
                spec.critical_points.len()
            ),
            lo: -1.0,
            hi: 1.0,
        });
    }
    Ok(spec)
}

/// Build the transition for a two-well core (generic jump geometry): three
/// Morse critical points inside (-rho, rho), decreasing on [-1, -rho],
/// increasing on [rho, 1], with core(-1) < -1 and core(1) < 1.
pub fn build_jump_transition(core: Arc<dyn CoreFn>, cutoffs: CutoffPair) -> Result<TransitionSpec> {
    check_core_bounds(&*core, "two-well core")?;
    let rho = cutoffs.rho;
    check_sign_on_grid(
        |x| core.eval012(x).1,
        -1.0,
        -rho,
        HYPOTHESIS_GRID / 2,
        false,
        "core' < 0 on [-1, -rho]",
    )?;
    check_sign_on_grid(
        |x| core.eval012(x).1,
        rho,
        1.0,
        HYPOTHESIS_GRID / 2,
        true,
        "core' > 0 on [rho, 1]",
    )?;

    let spec = TransitionSpec::assemble(core, cutoffs);
    let inside: Vec<f64> = spec
        .critical_points
        .iter()
        .copied()
        .filter(|x| x.abs() < rho)
        .collect();
    if inside.len() != 3 || spec.critical_points.len() != 3 {
        return Err(Error::PreconditionFailed {
            what: format!(
                "expected exactly 3 interior critical points in (-rho, rho), found {} (of {} total)",
                inside.len(),
                spec.critical_points.len()
            ),
            lo: -rho,
            hi: rho,
        });
    }
    let report = validate_transition(&spec);
    if !report.morse_ok {
        return Err(Error::PreconditionFailed {
            what: "critical points must be Morse".to_string(),
            lo: -rho,
            hi: rho,
        });
    }
    Ok(spec)
}
