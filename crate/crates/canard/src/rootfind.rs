//! Bracketed root finding: sign scans on grids, bisection, and a guarded
//! Newton polish that runs the residual down to rounding level.

use crate::error::{Error, Result};

/// Scan [lo, hi] with n+1 equally spaced samples and return the sign-change
/// cells. A sample that is exactly zero is returned as a degenerate cell.
pub fn brackets_on_grid<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1 && hi > lo);
    let mut out = Vec::new();
    let h = (hi - lo) / n as f64;
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    for k in 1..=n {
        let x = if k == n { hi } else { lo + k as f64 * h };
        let fx = f(x);
        if f_prev == 0.0 {
            out.push((x_prev, x_prev));
        } else if fx != 0.0 && f_prev.signum() != fx.signum() {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    if f_prev == 0.0 {
        out.push((x_prev, x_prev));
    }
    out
}

/// Bisection to absolute x-tolerance. Requires a sign change (or a zero
/// endpoint) on [a, b].
pub fn bisect<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    if fa == 0.0 {
        return Ok(a);
    }
    let fb = f(b);
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoBracket {
            what: "bisection",
            lo: a,
            hi: b,
        });
    }
    while (b - a).abs() > xtol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton refinement restricted to [lo, hi], starting from x0. Stops when the
/// step stalls at rounding level or the residual stops improving.
pub fn newton_polish<F, D>(f: &F, df: &D, x0: f64, lo: f64, hi: f64) -> f64
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut x = x0;
    let mut fx = f(x);
    for _ in 0..40 {
        if fx == 0.0 {
            return x;
        }
        let d = df(x);
        if d == 0.0 || !d.is_finite() {
            return x;
        }
        let step = fx / d;
        let mut xn = x - step;
        if xn < lo {
            xn = lo;
        }
        if xn > hi {
            xn = hi;
        }
        if xn == x {
            return x;
        }
        let fn_ = f(xn);
        if fn_.abs() >= fx.abs() {
            // no longer improving: rounding plateau
            return if fn_.abs() < fx.abs() { xn } else { x };
        }
        x = xn;
        fx = fn_;
    }
    x
}

/// Bracketed solve: bisection down to a tight bracket, then Newton polish.
/// The returned root has residual at rounding level for smooth f.
pub fn solve_bracketed<F, D>(f: &F, df: &D, a: f64, b: f64, xtol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let x = bisect(f, a, b, xtol.max(1e-13 * (1.0 + a.abs().max(b.abs()))))?;
    Ok(newton_polish(f, df, x, a.min(b), a.max(b)))
}

/// All roots of f on [lo, hi] located by an n-cell sign scan, each refined by
/// bisection + Newton.
pub fn find_roots<F, D>(f: &F, df: &D, lo: f64, hi: f64, n: usize, xtol: f64) -> Vec<f64>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut roots = Vec::new();
    for (a, b) in brackets_on_grid(f, lo, hi, n) {
        let r = if a == b {
            a
        } else {
            match solve_bracketed(f, df, a, b, xtol) {
                Ok(r) => r,
                Err(_) => continue,
            }
        };
        if roots
            .last()
            .map(|&p: &f64| (r - p).abs() > xtol.max(1e-12))
            .unwrap_or(true)
        {
            roots.push(r);
        }
    }
    roots
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_roots_to_machine_precision() {
        let f = |x: f64| (x - 0.25) * (x + 0.5) * (x - 0.875);
        let df = |x: f64| {
            3.0 * x * x - 2.0 * x * (0.25 - 0.5 + 0.875)
                + (0.25 * -0.5 + 0.25 * 0.875 + -0.5 * 0.875)
        };
        let roots = find_roots(&f, &df, -1.0, 1.0, 200, 1e-10);
        assert_eq!(roots.len(), 3);
        for (r, want) in roots.iter().zip([-0.5, 0.25, 0.875]) {
            assert!((r - want).abs() < 1e-14, "{r} vs {want}");
        }
    }

    #[test]
    fn missing_bracket_is_an_error() {
        assert!(bisect(&|x: f64| x * x + 1.0, -1.0, 1.0, 1e-10).is_err());
    }

    #[test]
    fn exact_grid_zero_is_reported() {
        let cells = brackets_on_grid(&|x: f64| x, -1.0, 1.0, 2);
        assert_eq!(cells, vec![(0.0, 0.0)]);
    }
}
