//! Principal branch of the Lambert W function on the nonnegative reals.
//!
//! `W₀(x)` is the unique `w ≥ 0` with `w·eʷ = x`. Jeffrey's divergence
//! needs it to invert `ḟ(x) = log x + 1 − 1/x`, and there the argument is
//! itself an exponential that overflows long before the answer does, so
//! [`lambert_w0_exp`] works directly with `log x`.

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 64;

/// `W₀(x)` for `x ≥ 0` by Halley iteration.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(format!(
            "lambert_w0 is only defined here for x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    // Past ~1e300 the product w·eʷ is not representable near the root.
    if x > 1e300 {
        return Ok(lambert_w0_exp(x.ln()));
    }

    let mut w = initial_guess(x);
    for _ in 0..MAX_ITERATIONS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(x: f64) -> f64 {
    if x < std::f64::consts::E {
        x.ln_1p()
    } else {
        let l1 = x.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}

/// `W₀(eᵃ)` for any real `a`, without forming `eᵃ`.
///
/// Solves `w + ln w = a` by Newton's method in `u = ln w`, where the
/// residual `eᵘ + u − a` is convex and increasing, so the iteration
/// converges from any start.
pub fn lambert_w0_exp(a: f64) -> f64 {
    if a.is_nan() {
        return f64::NAN;
    }
    if a == f64::INFINITY {
        return f64::INFINITY;
    }
    if a == f64::NEG_INFINITY {
        return 0.0;
    }
    let mut u = if a > 1.0 {
        (a - a.ln()).ln()
    } else if a < 0.0 {
        a
    } else {
        a - 1.0
    };
    for _ in 0..4 * MAX_ITERATIONS {
        let eu = u.exp();
        let step = (eu + u - a) / (eu + 1.0);
        u -= step;
        if step.abs() <= 2.0 * f64::EPSILON * u.abs().max(1.0) {
            break;
        }
    }
    u.exp()
}
