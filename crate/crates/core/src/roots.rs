//! Bracketed scalar root finding: bisection with a safeguarded secant step.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}] (f(a) = {fa}, f(b) = {fb})")]
    NotBracketed { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("function returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

/// Number of points in the bracketing scans.
pub const SCAN_POINTS: usize = 2048;

const MAX_ITER: usize = 200;

/// Finds a root of `f` in `[a, b]`, which must bracket a sign change (an
/// endpoint value of exactly zero counts). Iterates until the bracket is
/// narrower than `xtol` or an exact zero is hit.
///
/// Each step tries the secant point of the current bracket and falls back to
/// the midpoint when the secant point leaves the interior of the bracket or
/// when the previous step failed to halve it.
pub fn find_root<F>(f: F, a: f64, b: f64, xtol: f64) -> Result<f64, RootError>
where
    F: Fn(f64) -> f64,
{
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if !flo.is_finite() {
        return Err(RootError::NonFinite { x: lo });
    }
    if !fhi.is_finite() {
        return Err(RootError::NonFinite { x: hi });
    }
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(RootError::NotBracketed {
            a: lo,
            b: hi,
            fa: flo,
            fb: fhi,
        });
    }

    let mut last_width = hi - lo;
    let mut force_bisect = false;
    for _ in 0..MAX_ITER {
        let width = hi - lo;
        if width <= xtol {
            break;
        }
        let mid = lo + 0.5 * width;
        let mut x = mid;
        if !force_bisect {
            let secant = hi - fhi * (hi - lo) / (fhi - flo);
            let margin = 1e-3 * width;
            if secant.is_finite() && secant > lo + margin && secant < hi - margin {
                x = secant;
            }
        }
        if x <= lo || x >= hi {
            // bracket below floating-point resolution
            break;
        }
        let fx = f(x);
        if !fx.is_finite() {
            return Err(RootError::NonFinite { x });
        }
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        let new_width = hi - lo;
        force_bisect = new_width > 0.5 * last_width;
        last_width = new_width;
    }
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}

/// Sub-intervals of a uniform `n`-point scan of `[a, b]` on which `f`
/// changes sign, in increasing order. Exact zeros at interior grid points
/// produce a degenerate bracket `(x, x)`.
pub fn sign_changes<F>(f: F, a: f64, b: f64, n: usize) -> Vec<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let n = n.max(2);
    let step = (b - a) / (n - 1) as f64;
    let mut out = Vec::new();
    let mut x_prev = a;
    let mut f_prev = f(a);
    for i in 1..n {
        let x = if i == n - 1 { b } else { a + step * i as f64 };
        let fx = f(x);
        if fx == 0.0 && i < n - 1 {
            out.push((x, x));
        } else if f_prev != 0.0 && fx != 0.0 && f_prev.signum() != fx.signum() {
            out.push((x_prev, x));
        }
        x_prev = x;
        f_prev = fx;
    }
    out
}
