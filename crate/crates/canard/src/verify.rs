//! Named invariant checks with measured values.
//!
//! Each check builds its own models, measures one quantity, and compares it
//! against a pinned bound. The CLI prints these; the integration suite
//! asserts on them. Bounds live here so every caller sees the same
//! contract.

use serde::Serialize;

use crate::cycles::{
    find_fixed_points, sweep_breaking, LienardPhiSystem, SweepFamily, HYPERBOLICITY_MARGIN,
};
use crate::error::Result;
use crate::lienard::{
    breaking_gap, fast_relation_hopf, fast_relation_jump, find_sdi_zeros, i1, jump_points,
    sdi_hopf, sdi_hopf_exact, sdi_jump, sdi_jump_exact, HopfModel, JumpModel, ModelRef,
};
use crate::ode::IntegratorConfig;
use crate::transition::validate_transition;

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub measured: f64,
    pub bound: f64,
    pub detail: String,
}

impl CheckResult {
    fn leq(name: &'static str, measured: f64, bound: f64, detail: String) -> Self {
        CheckResult {
            name,
            passed: measured <= bound && measured.is_finite(),
            measured,
            bound,
            detail,
        }
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |j| lo + (hi - lo) * j as f64 / (n - 1) as f64)
}

/// The fold-family integral of the odd part reproduces the seed polynomial:
/// quadrature of 2sP_o − (s²−η²)P_o' from η to x against P̃(x) directly.
pub fn check_odd_integral_identity() -> Result<CheckResult> {
    let m = JumpModel::new(0.5, 0.0, 1e-2, &[0.75, 0.85], 3.0, 1.0)?;
    let pt = m.p_tilde_poly();
    let mut max_gap = 0.0f64;
    let mut max_ref = 0.0f64;
    for x in grid(0.5, 0.95, 100) {
        let lhs = i1(&m, x)?;
        let rhs = pt.eval(x);
        max_gap = max_gap.max((lhs - rhs).abs());
        max_ref = max_ref.max(rhs.abs());
    }
    Ok(CheckResult::leq(
        "odd_integral_polynomial_identity",
        max_gap / max_ref,
        1e-10,
        format!("max gap {max_gap:.3e} against scale {max_ref:.3e} over 100 points"),
    ))
}

fn turning_remainder(delta: f64) -> Result<f64> {
    let m = HopfModel::new(delta, &[0.3], 3.0, 1.0)?;
    let fo = m.f_odd_poly().clone();
    let (lo, hi) = m.sdi_domain();
    let mut worst = 0.0f64;
    for x in grid(lo + 1e-3, hi - 1e-3, 60) {
        let i = sdi_hopf(&m, x)?;
        worst = worst.max((i + 2.0 * delta * fo.eval(x)).abs());
    }
    Ok(worst / (delta * delta))
}

/// Leading order of the turning-family integral: the remainder after
/// removing −2δF_o scales like δ², so the δ²-normalized remainder is stable
/// under δ-halving.
pub fn check_turning_sdi_leading_order() -> Result<CheckResult> {
    let r1 = turning_remainder(1e-2)?;
    let r2 = turning_remainder(5e-3)?;
    let ratio = r1 / r2;
    let passed = (1.0 / 3.0..=3.0).contains(&ratio);
    Ok(CheckResult {
        name: "turning_sdi_leading_order",
        passed,
        measured: ratio,
        bound: 3.0,
        detail: format!("normalized remainders {r1:.3e} (1e-2) and {r2:.3e} (5e-3)"),
    })
}

fn persistence(kind: ModelRef, seeds: &[f64]) -> Result<CheckResult> {
    let profile = find_sdi_zeros(kind, None, 400)?;
    let zs = profile.zero_xs();
    let all_simple = profile.zeros.iter().all(|z| z.simple);
    let mut worst = 0.0f64;
    let count_ok = zs.len() == seeds.len();
    if count_ok {
        for (z, s) in zs.iter().zip(seeds) {
            worst = worst.max((z - s).abs());
        }
    } else {
        worst = f64::INFINITY;
    }
    let name = match kind {
        ModelRef::Hopf(_) => "zero_persistence_turning",
        ModelRef::Jump(_) => "zero_persistence_fold",
    };
    Ok(CheckResult {
        name,
        passed: count_ok && all_simple && worst <= 0.03,
        measured: worst,
        bound: 0.03,
        detail: format!("certified zeros at {zs:?} for seeds {seeds:?}"),
    })
}

/// Certified simple zeros stay within 0.03 of the seeds that placed them.
pub fn check_zero_persistence_turning() -> Result<CheckResult> {
    let m = HopfModel::new(5e-3, &[0.25, 0.4], 3.0, 1.0)?;
    persistence(ModelRef::Hopf(&m), &[0.25, 0.4])
}

pub fn check_zero_persistence_fold() -> Result<CheckResult> {
    let m = JumpModel::new(0.5, 0.0, 1e-2, &[0.75, 0.85], 3.0, 1.0)?;
    persistence(ModelRef::Jump(&m), &[0.75, 0.85])
}

/// The fold-value gap opens with slope 2η in the breaking parameter.
pub fn check_fold_breaking_slope() -> Result<CheckResult> {
    let m = JumpModel::new(0.5, 0.0, 0.0, &[0.75, 0.85], 3.0, 1.0)?;
    let h = 1e-4;
    let hp = breaking_gap(&m.with_b(h)?)?;
    let hm = breaking_gap(&m.with_b(-h)?)?;
    let slope = (hp - hm) / (2.0 * h);
    Ok(CheckResult::leq(
        "fold_breaking_slope",
        (slope - 1.0).abs(),
        1e-5,
        format!("central-difference slope {slope:.10} against 2η = 1"),
    ))
}

/// The perturbed right fold tracks its second-order expansion in b.
pub fn check_fold_point_expansion() -> Result<CheckResult> {
    let eta: f64 = 0.5;
    let b = 0.01;
    let m = JumpModel::new(eta, b, 0.0, &[0.75, 0.85], 3.0, 1.0)?;
    let (_, xp) = jump_points(&m)?;
    let predicted = eta - b / (2.0 * eta * eta) - 3.0 * b * b / (8.0 * eta.powi(5));
    Ok(CheckResult::leq(
        "fold_point_expansion",
        (xp - predicted).abs(),
        1e-3,
        format!("fold at {xp:.6} against expansion {predicted:.6}"),
    ))
}

fn fold_layer_remainder(delta: f64) -> Result<f64> {
    let m = JumpModel::new(0.5, 0.0, delta, &[0.75, 0.85], 3.0, 1.0)?;
    let eta = m.eta();
    let (lo, hi) = m.d1();
    let mut worst = 0.0f64;
    for x in grid(lo + 1e-4, hi - 1e-4, 50) {
        let l = fast_relation_jump(&m, x)?;
        let l1 = -2.0 * m.po().eval(x) / (x * x * x - eta * eta * x);
        worst = worst.max((l + x - delta * l1).abs());
    }
    Ok(worst / (delta * delta))
}

/// First-order expansion of the fold-family layer relation: the remainder
/// after −x + δL₁ is δ²-stable under halving.
pub fn check_fold_layer_asymptotics() -> Result<CheckResult> {
    let r1 = fold_layer_remainder(1e-2)?;
    let r2 = fold_layer_remainder(5e-3)?;
    let ratio = r1 / r2;
    let passed = (1.0 / 3.0..=3.0).contains(&ratio);
    Ok(CheckResult {
        name: "fold_layer_asymptotics",
        passed,
        measured: ratio,
        bound: 3.0,
        detail: format!("normalized remainders {r1:.3e} (1e-2) and {r2:.3e} (5e-3) over 50 points"),
    })
}

fn turning_layer_remainder(delta: f64) -> Result<f64> {
    let m = HopfModel::new(delta, &[0.3], 3.0, 1.0)?;
    let fo = m.f_odd_poly().clone();
    let mut worst = 0.0f64;
    for x in grid(0.05, 0.4, 50) {
        let l = fast_relation_hopf(&m, x)?;
        let l1 = -2.0 * fo.eval(x) / x;
        worst = worst.max((l + x - delta * l1).abs());
    }
    Ok(worst / (delta * delta))
}

pub fn check_turning_layer_asymptotics() -> Result<CheckResult> {
    let r1 = turning_layer_remainder(1e-2)?;
    let r2 = turning_layer_remainder(5e-3)?;
    let ratio = r1 / r2;
    let passed = (1.0 / 3.0..=3.0).contains(&ratio);
    Ok(CheckResult {
        name: "turning_layer_asymptotics",
        passed,
        measured: ratio,
        bound: 3.0,
        detail: format!("normalized remainders {r1:.3e} (1e-2) and {r2:.3e} (5e-3)"),
    })
}

fn transition_shape(
    name: &'static str,
    spec: &crate::transition::TransitionSpec,
    want_critical: usize,
) -> CheckResult {
    let report = validate_transition(spec);
    let gap = report.max_joint_gap_phi.max(report.max_joint_gap_dphi);
    let passed = report.interior_critical_count == want_critical
        && report.boundary_exact
        && report.morse_ok
        && gap < 1e-8;
    CheckResult {
        name,
        passed,
        measured: gap,
        bound: 1e-8,
        detail: format!(
            "{} interior critical points (want {want_critical}), boundary exact: {}",
            report.interior_critical_count, report.boundary_exact
        ),
    }
}

/// One interior critical point for the turning family, three for the fold
/// family, exact ±1 plateaus, and C¹ joints tighter than 1e−8.
pub fn check_transition_shape_turning() -> Result<CheckResult> {
    let m = HopfModel::new(1e-2, &[0.3], 3.0, 1.0)?;
    Ok(transition_shape(
        "transition_shape_turning",
        &m.transition()?,
        1,
    ))
}

pub fn check_transition_shape_fold() -> Result<CheckResult> {
    let m = JumpModel::new(0.5, 0.0, 1e-2, &[0.75, 0.85], 3.0, 1.0)?;
    Ok(transition_shape(
        "transition_shape_fold",
        &m.transition()?,
        3,
    ))
}

/// With the odd part switched off both integrals vanish on the whole grid.
pub fn check_symmetry_null_sdi() -> Result<CheckResult> {
    let mh = HopfModel::new(0.0, &[0.3], 3.0, 1.0)?;
    let mj = JumpModel::new(0.5, 0.0, 0.0, &[0.75, 0.85], 3.0, 1.0)?;
    let mut worst = 0.0f64;
    let (lo, hi) = mh.sdi_domain();
    for x in grid(lo + 1e-3, hi - 1e-3, 100) {
        worst = worst.max(sdi_hopf(&mh, x)?.abs());
    }
    let (lo, hi) = mj.d1();
    for x in grid(lo + 1e-4, hi - 1e-4, 100) {
        worst = worst.max(sdi_jump(&mj, x)?.abs());
    }
    Ok(CheckResult::leq(
        "symmetry_null_sdi",
        worst,
        1e-11,
        "largest |integral| over 100-point grids of both families at δ = 0".into(),
    ))
}

/// With the odd part switched off the layer relation is exactly x ↦ −x.
pub fn check_symmetry_null_layer() -> Result<CheckResult> {
    let mh = HopfModel::new(0.0, &[0.3], 3.0, 1.0)?;
    let mj = JumpModel::new(0.5, 0.0, 0.0, &[0.75, 0.85], 3.0, 1.0)?;
    let mut worst = 0.0f64;
    let (lo, hi) = mh.sdi_domain();
    for x in grid(lo + 1e-3, hi - 1e-3, 100) {
        worst = worst.max((fast_relation_hopf(&mh, x)? + x).abs());
    }
    let (lo, hi) = mj.d1();
    for x in grid(lo + 1e-4, hi - 1e-4, 100) {
        worst = worst.max((fast_relation_jump(&mj, x)? + x).abs());
    }
    Ok(CheckResult::leq(
        "symmetry_null_layer",
        worst,
        1e-12,
        "largest |L(x) + x| over 100-point grids of both families at δ = 0".into(),
    ))
}

/// Adaptive quadrature and exact coefficient integration of the divergence
/// integrals agree to near machine scale.
pub fn check_quadrature_cross() -> Result<CheckResult> {
    let mh = HopfModel::new(1e-2, &[0.3], 3.0, 1.0)?;
    let mj = JumpModel::new(0.5, 0.0, 1e-2, &[0.75, 0.85], 3.0, 1.0)?;
    let mut worst = 0.0f64;
    let (lo, hi) = mh.sdi_domain();
    for x in grid(lo + 1e-3, hi - 1e-3, 50) {
        worst = worst.max((sdi_hopf(&mh, x)? - sdi_hopf_exact(&mh, x)?).abs());
    }
    let (lo, hi) = mj.d1();
    for x in grid(lo + 1e-4, hi - 1e-4, 50) {
        worst = worst.max((sdi_jump(&mj, x)? - sdi_jump_exact(&mj, x)?).abs());
    }
    Ok(CheckResult::leq(
        "quadrature_cross_check",
        worst,
        5e-12,
        "largest quadrature-to-exact gap over 50-point grids of both families".into(),
    ))
}

/// The slow detection run: sweep the turning-family breaking parameter at
/// ε = 0.05 with one prescribed zero and demand a parameter value carrying
/// two hyperbolic cycles whose heights match the predictions within 10%.
pub fn check_cycle_pair_detection() -> Result<CheckResult> {
    let m = HopfModel::new(1e-2, &[0.3], 3.0, 1.0)?;
    let cfg = IntegratorConfig::default();
    let report = sweep_breaking(SweepFamily::Hopf(&m), 0.05, (-5e-3, 5e-3), 21, &cfg)?;
    let t_inner = m.big_f(0.3);
    let t_outer = m.big_f(m.x_window());

    // candidate parameters in the order worth examining: the reported best,
    // then remaining high-count sweep values closest to zero
    let mut order: Vec<(usize, f64)> = report
        .sweep
        .iter()
        .filter(|s| s.count >= 2)
        .map(|s| (s.count, s.param))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.abs().total_cmp(&b.1.abs())));
    let mut params = vec![report.breaking];
    params.extend(order.iter().map(|o| o.1).filter(|p| *p != report.breaking));
    params.truncate(12);

    // a point only counts when every measured quantity is self-consistent:
    // closure at the detection tolerance, the two independent multiplier
    // estimates in agreement, and both clearing the hyperbolicity margin.
    // Points inside the exponentially sensitive zone fail these on their own.
    let trusted = |f: &crate::cycles::FixedPoint| -> bool {
        f.hyperbolic
            && f.residual <= 10.0 * cfg.event_tol
            && (f.multiplier - f.div_multiplier).abs() <= 0.1 * (1.0 + f.div_multiplier.abs())
            && (f.div_multiplier.abs() - 1.0).abs() >= HYPERBOLICITY_MARGIN
    };

    let mut best_gap = f64::INFINITY;
    let mut best_detail = String::from("no parameter value produced two trusted hyperbolic cycles");
    for (i, p) in params.iter().enumerate() {
        let fps = if i == 0 {
            report.fixed_points.clone()
        } else {
            let sys = LienardPhiSystem::hopf(&m, *p, 0.05)?;
            find_fixed_points(&sys, report.y_window, crate::cycles::FIXED_POINT_GRID, &cfg)?
        };
        let good: Vec<_> = fps.iter().filter(|f| trusted(f)).collect();
        for a in &good {
            for b in &good {
                if a.y == b.y {
                    continue;
                }
                let g1 = (a.y - t_inner).abs() / t_inner;
                let g2 = (b.y - t_outer).abs() / t_outer;
                let gap = g1.max(g2);
                if gap < best_gap {
                    best_gap = gap;
                    best_detail = format!(
                        "at breaking value {p:.8e}: heights {:.6} (predicted {t_inner:.6}) and {:.6} (predicted {t_outer:.6}), multipliers {:.6} and {:.6}, residuals {:.2e} and {:.2e}",
                        a.y, b.y, a.multiplier, b.multiplier, a.residual, b.residual
                    );
                }
            }
        }
        if best_gap <= 0.10 {
            break;
        }
    }
    Ok(CheckResult {
        name: "cycle_pair_detection",
        passed: best_gap <= 0.10,
        measured: best_gap,
        bound: 0.10,
        detail: format!("margin {HYPERBOLICITY_MARGIN:.0e}; {best_detail}"),
    })
}

/// Every fast check.
pub fn run_quick() -> Result<Vec<CheckResult>> {
    Ok(vec![
        check_odd_integral_identity()?,
        check_turning_sdi_leading_order()?,
        check_zero_persistence_turning()?,
        check_zero_persistence_fold()?,
        check_fold_breaking_slope()?,
        check_fold_point_expansion()?,
        check_fold_layer_asymptotics()?,
        check_turning_layer_asymptotics()?,
        check_transition_shape_turning()?,
        check_transition_shape_fold()?,
        check_symmetry_null_sdi()?,
        check_symmetry_null_layer()?,
        check_quadrature_cross()?,
    ])
}

/// Every check including the slow sweep-based detection.
pub fn run_full() -> Result<Vec<CheckResult>> {
    let mut out = run_quick()?;
    out.push(check_cycle_pair_detection()?);
    Ok(out)
}
