//! One-dimensional bracketing solvers shared by the capacity and root code.
//!
//! Both solvers accept fallible closures so that an inner quadrature failure
//! propagates instead of being folded into a number.

use crate::{Error, Result};

/// Bisection for a nondecreasing function: returns `x` in `[lo, hi]` with
/// `f(x)` crossing zero, once the bracket width is at most `x_tol`.
///
/// `f(lo) <= 0 <= f(hi)` is assumed, not checked, since callers build the
/// bracket from a monotonicity argument.
pub fn bisect_increasing<F>(mut f: F, mut lo: f64, mut hi: f64, x_tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo <= hi) || !(x_tol > 0.0) {
        return Err(Error::InvalidInput(
            "bisection needs lo <= hi and a positive tolerance",
        ));
    }
    // 2^-200 of any finite bracket is below every useful tolerance
    for _ in 0..200 {
        if hi - lo <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns `(x, f(x))` with the final bracket no wider than `x_tol`.
pub fn golden_section_min<F>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(a <= b) || !(x_tol > 0.0) {
        return Err(Error::InvalidInput(
            "golden section needs a <= b and a positive tolerance",
        ));
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while b - a > x_tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc <= fd { (c, fc) } else { (d, fd) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt_two() {
        let r = bisect_increasing(|x| Ok(x * x - 2.0), 0.0, 2.0, 1e-14).unwrap();
        assert!((r - core::f64::consts::SQRT_2).abs() < 1e-13);
    }

    #[test]
    fn bisect_propagates_errors() {
        let e = bisect_increasing(|_| Err(Error::InvalidInput("boom")), 0.0, 1.0, 1e-3);
        assert_eq!(e, Err(Error::InvalidInput("boom")));
    }

    #[test]
    fn golden_section_parabola() {
        let (x, fx) =
            golden_section_min(|x| Ok((x - 0.3) * (x - 0.3) + 1.0), -1.0, 2.0, 1e-9).unwrap();
        // a flat minimum is only resolvable to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_section_monotone_goes_to_edge() {
        let (x, _) = golden_section_min(Ok, 1.0, 5.0, 1e-9).unwrap();
        assert!((x - 1.0).abs() < 1e-8);
    }
}
