//! Reshaping the risk so that a different regularizer yields the same
//! posterior.
//!
//! If `P*` solves the `f`-regularized problem at `λ` with multiplier `n_f`,
//! then with
//!
//! ```text
//! v(L) = −λ·ġ(ḟ⁻¹(−(n_f + L)/λ))
//! ```
//!
//! the `g`-regularized problem on the risk `v∘L` is solved by the same
//! `P*`, with multiplier `0`. Any constant added to `v` is absorbed by the
//! `g`-problem's own multiplier.

use serde::Serialize;

use crate::divergences::DivergenceSpec;
use crate::error::{Error, Result};
use crate::measures::{RiskBounds, Support};
use crate::solver::{default_tol, posterior, Posterior};

#[derive(Debug, Clone)]
pub struct RiskTransform {
    pub f_spec: DivergenceSpec,
    pub g_spec: DivergenceSpec,
    pub lambda: f64,
    /// Normalization constant of the `f`-problem at `lambda`.
    pub n_f: f64,
    /// `v` at every support point, in support order.
    pub values: Vec<f64>,
    /// Range of `v` over the support of the reference measure.
    pub bounds: RiskBounds,
}

impl RiskTransform {
    /// `v(L)` for a raw risk value `L`.
    pub fn v(&self, risk: f64) -> f64 {
        -self.lambda * self.g_spec.fdot(self.f_spec.fdot_inv(-(self.n_f + risk) / self.lambda))
    }

    /// Whether `v` is nondecreasing on `count` evenly spaced risks in
    /// `[lo, hi]`.
    pub fn is_monotone_on(&self, lo: f64, hi: f64, count: usize) -> bool {
        let step = (hi - lo) / (count.max(2) - 1) as f64;
        let vs: Vec<f64> = (0..count.max(2)).map(|i| self.v(lo + step * i as f64)).collect();
        vs.windows(2).all(|w| w[1] >= w[0])
    }

    /// The support carrying the transformed risk, shifted by `shift`.
    pub fn support(&self, support: &Support, shift: f64) -> Result<Support> {
        support.with_risks(
            self.values.iter().map(|v| v + shift).collect(),
            RiskBounds {
                min: self.bounds.min + shift,
                max: self.bounds.max + shift,
            },
        )
    }
}

/// Builds `v` from the solved `f`-problem.
pub fn risk_transform(f_post: &Posterior, g_spec: &DivergenceSpec) -> Result<RiskTransform> {
    let lambda = f_post.lambda;
    let values: Vec<f64> = f_post.rn.iter().map(|&r| -lambda * g_spec.fdot(r)).collect();
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "transformed risk is not finite at support point {i}; the {} problem is infeasible at lambda = {lambda}",
            g_spec.name()
        )));
    }
    let sampled = RiskBounds::of_values(&values);
    let mut transform = RiskTransform {
        f_spec: f_post.spec.clone(),
        g_spec: g_spec.clone(),
        lambda,
        n_f: f_post.beta,
        values,
        bounds: sampled,
    };
    // v increases with L, so its range follows from the risk range
    let raw = f_post.support.bounds();
    let at = |l: f64| {
        if l.is_infinite() {
            // ḟ⁻¹ → 0 as L → ∞, and ġ(0⁺) is the lower end of its range
            -lambda * g_spec.y_range().lo
        } else {
            transform.v(l)
        }
    };
    let (lo, hi) = (at(raw.min), at(raw.max));
    transform.bounds = RiskBounds {
        min: if lo.is_nan() { sampled.min } else { lo.min(sampled.min) },
        max: if hi.is_nan() { sampled.max } else { hi.max(sampled.max) },
    };
    Ok(transform)
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub f: String,
    pub g: String,
    pub lambda: f64,
    pub beta_f: f64,
    pub beta_g: f64,
    /// `sup |rn_f − rn_g|` over the support.
    pub gap: f64,
}

/// Solves the `f`-problem on `L` and the `g`-problem on `v∘L + shift`, and
/// compares the two posteriors.
pub fn verify_equivalence_shifted(
    f_spec: &DivergenceSpec,
    g_spec: &DivergenceSpec,
    lambda: f64,
    support: &Support,
    tol: f64,
    shift: f64,
) -> Result<(EquivalenceReport, Posterior, Posterior)> {
    let f_post = posterior(f_spec, support, lambda, tol)?;
    let transform = risk_transform(&f_post, g_spec)?;
    let g_support = transform.support(support, shift)?;
    let g_post = posterior(g_spec, &g_support, lambda, default_tol(&g_support).min(tol))?;
    let gap = f_post
        .rn
        .iter()
        .zip(&g_post.rn)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let report = EquivalenceReport {
        f: f_spec.name().to_string(),
        g: g_spec.name().to_string(),
        lambda,
        beta_f: f_post.beta,
        beta_g: g_post.beta,
        gap,
    };
    Ok((report, f_post, g_post))
}

pub fn verify_equivalence(
    f_spec: &DivergenceSpec,
    g_spec: &DivergenceSpec,
    lambda: f64,
    support: &Support,
    tol: f64,
) -> Result<EquivalenceReport> {
    Ok(verify_equivalence_shifted(f_spec, g_spec, lambda, support, tol, 0.0)?.0)
}
