//! Bisection on monotone functions and predicates.
//!
//! Every root-finding need in this crate involves a strictly monotone,
//! continuous map on the positive reals, so plain bisection with geometric
//! bracket growth is both sufficient and robust.

use crate::error::{Error, Result};

/// Relative interval width at which bisection stops.
pub const REL_TOL: f64 = 1e-9;
/// Hard cap on bisection steps; with [`REL_TOL`] this is never the binding
/// limit for sane brackets.
pub const MAX_ITERS: usize = 200;
/// Cap on geometric bracket growth steps (2^1024 overflows f64 anyway).
const MAX_GROWTH: usize = 1100;

fn done(lo: f64, hi: f64) -> bool {
    hi - lo <= REL_TOL * hi.abs().max(lo.abs())
}

/// Root of a continuous `f` on `[lo, hi]`, where `f(lo)` and `f(hi)` have
/// opposite (or zero) signs. Stops at relative width [`REL_TOL`].
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    if !(lo <= hi) {
        return Err(Error::InvalidArgument(format!(
            "bad bracket [{lo}, {hi}]"
        )));
    }
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidArgument(format!(
            "no sign change on [{lo}, {hi}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )));
    }
    for _ in 0..MAX_ITERS {
        if done(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fmid = f(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Largest `x` in `[lo, hi]` satisfying a predicate that is true on `[lo, x*]`
/// and false beyond. `pred(lo)` must hold; if `pred(hi)` holds, `hi` itself is
/// the answer.
pub fn bisect_sup<F: Fn(f64) -> bool>(pred: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    if !(lo <= hi) || !pred(lo) {
        return Err(Error::InvalidArgument(format!(
            "predicate bracket [{lo}, {hi}] does not start feasible"
        )));
    }
    if pred(hi) {
        return Ok(hi);
    }
    for _ in 0..MAX_ITERS {
        if done(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Smallest `x` in `[lo, hi]` satisfying a predicate that is false on
/// `[lo, x*)` and true from `x*` on. `pred(hi)` must hold; if `pred(lo)`
/// holds, `lo` itself is the answer. The returned value always satisfies the
/// predicate.
pub fn bisect_inf<F: Fn(f64) -> bool>(pred: F, mut lo: f64, mut hi: f64) -> Result<f64> {
    if !(lo <= hi) || !pred(hi) {
        return Err(Error::InvalidArgument(format!(
            "predicate bracket [{lo}, {hi}] does not end feasible"
        )));
    }
    if pred(lo) {
        return Ok(lo);
    }
    for _ in 0..MAX_ITERS {
        if done(lo, hi) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// First value `start * factor^k` (k = 0, 1, ...) satisfying the predicate.
/// `factor > 1` grows the trial upward, `factor < 1` shrinks it downward.
pub fn grow_until<F: Fn(f64) -> bool>(pred: F, start: f64, factor: f64) -> Result<f64> {
    let mut x = start;
    for _ in 0..MAX_GROWTH {
        if pred(x) {
            return Ok(x);
        }
        x *= factor;
    }
    Err(Error::InvalidArgument(format!(
        "no bracket endpoint found from {start} by factor {factor}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_sqrt_two() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - std::f64::consts::SQRT_2).abs() < 1e-8);
    }

    #[test]
    fn handles_decreasing_functions() {
        let r = bisect_root(|x| 1.0 / x - 3.0, 0.01, 10.0).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_brackets() {
        assert!(bisect_root(|x| x, 1.0, 2.0).is_err());
        assert!(bisect_root(|x| x, 2.0, 1.0).is_err());
    }

    #[test]
    fn sup_of_a_threshold_predicate() {
        let s = bisect_sup(|x| x <= std::f64::consts::PI, 0.0, 10.0).unwrap();
        assert!((s - std::f64::consts::PI).abs() < 1e-7);
        assert_eq!(bisect_sup(|x| x <= 20.0, 0.0, 10.0).unwrap(), 10.0);
        assert!(bisect_sup(|x| x < 0.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn inf_of_a_threshold_predicate() {
        let s = bisect_inf(|x| x >= std::f64::consts::E, 0.0, 10.0).unwrap();
        assert!(s >= std::f64::consts::E);
        assert!((s - std::f64::consts::E).abs() < 1e-7);
        assert_eq!(bisect_inf(|x| x >= -1.0, 0.0, 10.0).unwrap(), 0.0);
        assert!(bisect_inf(|x| x > 20.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn growth_finds_brackets_both_ways() {
        assert_eq!(grow_until(|x| x > 100.0, 1.0, 2.0).unwrap(), 128.0);
        assert_eq!(grow_until(|x| x < 0.01, 1.0, 0.5).unwrap(), 0.0078125);
        assert!(grow_until(|x| x < 0.0, 1.0, 0.5).is_err());
    }
}
