//! Bracketing and bisection for monotone scalar functions.

use crate::error::{Error, Result};

pub const MAX_BISECTIONS: usize = 200;
pub const MAX_EXPANSIONS: usize = 64;
pub const GROWTH: f64 = 4.0;

/// A point where a monotone function has been evaluated.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Probe {
    pub x: f64,
    pub value: f64,
}

/// Finds `x` in `[a, b]` with `|g(x) − target| ≤ tol`, given that `g` is
/// decreasing with `g(a) ≥ target ≥ g(b)`. Values may be `+∞`.
///
/// Bisection continues past `tol` until the bracket stops shrinking or the
/// value matches `target` to a few ulps; the closest probe is returned if
/// it meets `tol`.
pub(crate) fn bisect_decreasing<G>(a: f64, b: f64, target: f64, tol: f64, what: &str, mut g: G) -> Result<Probe>
where
    G: FnMut(f64) -> Result<f64>,
{
    let exact = 4.0 * f64::EPSILON * target.abs().max(1.0);
    let (mut lo, mut hi) = (a, b);
    let mut best: Option<Probe> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        let value = g(mid)?;
        let probe = Probe { x: mid, value };
        if best.is_none_or(|b| (value - target).abs() < (b.value - target).abs()) {
            best = Some(probe);
        }
        if (value - target).abs() <= exact {
            break;
        }
        if value > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match best {
        Some(p) if (p.value - target).abs() <= tol => Ok(p),
        _ => {
            log::debug!("{what}: bisection stalled at [{lo}, {hi}], best {best:?}");
            Err(Error::NonConvergence {
                what: what.to_string(),
                iterations: MAX_BISECTIONS,
            })
        }
    }
}

/// Walks from `start` in direction `step_sign` with geometrically growing
/// steps until `stop(value)` holds; returns the first probe that does.
pub(crate) fn expand<G, S>(start: f64, step_sign: f64, width: f64, what: &str, mut g: G, stop: S) -> Result<Option<Probe>>
where
    G: FnMut(f64) -> Result<f64>,
    S: Fn(f64) -> bool,
{
    let mut step = width;
    for _ in 0..MAX_EXPANSIONS {
        let x = start + step_sign * step;
        if !x.is_finite() {
            break;
        }
        let value = g(x)?;
        if stop(value) {
            return Ok(Some(Probe { x, value }));
        }
        step *= GROWTH;
    }
    log::debug!("{what}: bracket expansion from {start} exhausted");
    Ok(None)
}
