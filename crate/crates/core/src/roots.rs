//! Bracketed scalar root finders.

use crate::error::{Error, Result};

/// Bisection/secant hybrid (Illinois variant of regula falsi) on a
/// sign-changing bracket. Stops when the bracket is narrower than `xtol`.
pub fn find_root<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange(format!("f on [{a}, {b}]")));
    }
    let mut side = 0i8;
    for it in 0..max_iter {
        if (b - a).abs() <= xtol {
            return Ok(0.5 * (a + b));
        }
        // every fourth iteration is a plain bisection so the bracket shrinks
        // geometrically even when the secant stalls
        let mut c = if it % 4 == 3 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    if (b - a).abs() <= xtol * 1e3 {
        return Ok(0.5 * (a + b));
    }
    Err(Error::NoConvergence(format!("bracket [{a}, {b}] after {max_iter} iterations")))
}

/// Plain bisection, returns the final bracket midpoint after `iterations`
/// halvings or earlier once narrower than `xtol`.
pub fn bisect<F>(mut f: F, mut a: f64, mut b: f64, xtol: f64, iterations: usize) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::NoSignChange(format!("shooting functional on [{a}, {b}]")));
    }
    let sa = fa.signum();
    for _ in 0..iterations {
        if (b - a).abs() <= xtol {
            break;
        }
        let c = 0.5 * (a + b);
        let fc = f(c)?;
        if fc == 0.0 {
            return Ok(c);
        }
        if fc.signum() == sa {
            a = c;
        } else {
            b = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Newton iteration safeguarded by a bracket `[a, b]` with `f(a) ≤ 0 ≤ f(b)`
/// for increasing `f`. Falls back to bisection whenever the Newton step leaves
/// the bracket or the derivative vanishes.
pub fn newton_bracketed<F>(mut f: F, mut a: f64, mut b: f64, x0: f64, tol: f64, max_iter: usize) -> Result<f64>
where
    F: FnMut(f64) -> (f64, f64),
{
    let mut x = x0.clamp(a, b);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx < 0.0 {
            a = x;
        } else {
            b = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton > a && newton < b {
            newton
        } else {
            0.5 * (a + b)
        };
        if (next - x).abs() <= tol * x.abs().max(1.0) || (b - a) <= tol * x.abs().max(1.0) {
            return Ok(next);
        }
        x = next;
    }
    Err(Error::NoConvergence(format!("newton on [{a}, {b}]")))
}
