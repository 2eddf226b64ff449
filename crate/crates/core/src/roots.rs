//! Bisection for monotone non-decreasing functions.

use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bisection<T> {
    pub x: T,
    pub fx: T,
    pub iterations: usize,
    pub converged: bool,
}

/// Finds `x ∈ [lo, hi]` with `|f(x) − target| ≤ tol_y` or a bracket narrower than `tol_x`.
///
/// The caller guarantees `f(lo) ≤ target ≤ f(hi)`. The error type of `f` is propagated.
pub fn bisect_increasing<T, E, F>(
    mut f: F,
    mut lo: T,
    mut hi: T,
    target: T,
    tol_y: T,
    tol_x: T,
    max_iter: usize,
) -> Result<Bisection<T>, E>
where
    T: Real,
    F: FnMut(T) -> Result<T, E>,
{
    let mut best = Bisection {
        x: lo,
        fx: T::nan(),
        iterations: 0,
        converged: false,
    };
    let two = T::lit(2.0);
    for it in 1..=max_iter {
        let mid = (lo + hi) / two;
        let fm = f(mid)?;
        best = Bisection {
            x: mid,
            fx: fm,
            iterations: it,
            converged: false,
        };
        if (fm - target).abs() <= tol_y || (hi - lo).abs() <= tol_x {
            best.converged = (fm - target).abs() <= tol_y;
            return Ok(best);
        }
        if fm < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}
