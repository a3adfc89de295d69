//! Scalar root finding on a certified sign change.

use crate::error::{Error, Result};

/// A bracketed root with its residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub residual: f64,
    pub lower: f64,
    pub upper: f64,
    pub iterations: usize,
}

/// Bisection on `[lo, hi]` down to `width`, followed by `polish` Newton steps
/// using `df`. A Newton step is only kept if it stays inside the final
/// bracket and does not increase `|f|`.
pub fn bisect_then_polish<F, D>(
    f: F,
    df: D,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    polish: usize,
) -> Result<Root>
where
    F: Fn(f64) -> f64,
    D: Fn(f64) -> f64,
{
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Ok(Root {
            x: lo,
            residual: 0.0,
            lower: lo,
            upper: lo,
            iterations: 0,
        });
    }
    if f_hi == 0.0 {
        return Ok(Root {
            x: hi,
            residual: 0.0,
            lower: hi,
            upper: hi,
            iterations: 0,
        });
    }
    if f_lo.signum() == f_hi.signum() || f_lo.is_nan() || f_hi.is_nan() {
        return Err(Error::solver(
            "bisection",
            format!("no sign change on [{lo}, {hi}] (f = {f_lo}, {f_hi})"),
        ));
    }
    let mut iterations = 0;
    while hi - lo > width && iterations < 400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid);
        iterations += 1;
        if f_mid == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    let mut fx = f(x);
    for _ in 0..polish {
        let slope = df(x);
        if slope == 0.0 || !slope.is_finite() {
            break;
        }
        let next = x - fx / slope;
        if !(next >= lo && next <= hi) {
            break;
        }
        let f_next = f(next);
        if f_next.abs() > fx.abs() {
            break;
        }
        x = next;
        fx = f_next;
        iterations += 1;
    }
    Ok(Root {
        x,
        residual: fx,
        lower: lo,
        upper: hi,
        iterations,
    })
}

/// Doubles `hi` until `f(hi)` has the opposite sign of `f(lo)`, at most
/// `max_doublings` times.
pub fn expand_upper<F>(f: F, lo: f64, mut hi: f64, max_doublings: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let s = f(lo).signum();
    for _ in 0..=max_doublings {
        let v = f(hi);
        if v == 0.0 || v.signum() != s {
            return Ok(hi);
        }
        hi *= 2.0;
    }
    Err(Error::solver(
        "bracket expansion",
        format!("no sign change found up to {hi}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_root_of_two() {
        let r =
            bisect_then_polish(|x| x * x * x - 2.0, |x| 3.0 * x * x, 0.0, 2.0, 1e-13, 3).unwrap();
        assert!((r.x - 2f64.cbrt()).abs() < 1e-15);
        assert!(r.residual.abs() < 1e-14);
    }

    #[test]
    fn rejects_missing_sign_change() {
        let r = bisect_then_polish(|x| x * x + 1.0, |x| 2.0 * x, -1.0, 1.0, 1e-12, 3);
        assert!(matches!(r, Err(Error::Solver { .. })));
    }

    #[test]
    fn expansion_doubles_until_sign_change() {
        let hi = expand_upper(|x| x - 37.0, 0.0, 1.0, 60).unwrap();
        assert_eq!(hi, 64.0);
        assert!(expand_upper(|x| -1.0 - x, 0.0, 1.0, 10).is_err());
    }
}
