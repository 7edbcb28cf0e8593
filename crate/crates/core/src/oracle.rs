//! Brute-force minimization over the probability simplex.
//!
//! Used to certify closed-form posteriors on discrete instances. Nothing
//! here inverts `ḟ` or solves for a multiplier.

use rand::Rng;
use rand_distr::{Exp1, Uniform};
use serde::Serialize;

use crate::divergences::Generator;
use crate::error::{Error, Result};
use crate::measures::Support;
use crate::solver::{classify_boundary, BoundaryKind};

pub const DEFAULT_MAX_ITERS: usize = 200_000;
pub const MASS_FLOOR: f64 = 1e-300;
/// Consecutive small decreases required to stop.
pub const PATIENCE: usize = 10;
/// Allowed increase of the objective between accepted iterates.
pub const MONOTONE_SLACK: f64 = 1e-12;
const MAX_HALVINGS: usize = 60;

#[derive(Debug, Clone, Serialize)]
pub struct OracleResult {
    pub masses: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_step: f64,
    /// Objective after every accepted iterate, starting at `p = q`.
    #[serde(skip)]
    pub trace: Vec<f64>,
}

fn objective(p: &[f64], q: &[f64], risks: &[f64], lambda: f64, spec: &dyn Generator) -> f64 {
    p.iter()
        .zip(q)
        .zip(risks)
        .map(|((&p, &q), &l)| p * l + lambda * q * spec.f(p / q))
        .sum()
}

/// Exponentiated-gradient descent on `Σ pᵢLᵢ + λ·Σ qᵢ f(pᵢ/qᵢ)` from `p = q`.
///
/// Steps follow `s·0.5/(1 + √k)`, where the scale `s` is halved whenever a
/// step would raise the objective, so accepted iterates never go uphill.
pub fn simplex_minimize(
    support: &Support,
    lambda: f64,
    spec: &dyn Generator,
    max_iters: usize,
    tol: f64,
) -> Result<OracleResult> {
    if !support.is_discrete() {
        return Err(Error::InvalidInput("the oracle needs a discrete reference measure".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let q = support.weights();
    let risks = support.risks();
    let n = q.len();
    let mut p = q.to_vec();
    let mut value = objective(&p, q, risks, lambda, spec);
    let mut trace = vec![value];
    let mut scale = 1.0;
    let mut quiet = 0;
    let mut step = 0.0;
    let mut grad = vec![0.0; n];
    let mut next = vec![0.0; n];

    for k in 0..max_iters {
        for i in 0..n {
            grad[i] = risks[i] + lambda * spec.fdot(p[i] / q[i]);
        }
        let gmin = grad.iter().copied().fold(f64::INFINITY, f64::min);
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            step = scale * 0.5 / (1.0 + (k as f64).sqrt());
            let mut total = 0.0;
            for i in 0..n {
                next[i] = p[i] * (-step * (grad[i] - gmin)).exp();
                total += next[i];
            }
            for x in next.iter_mut() {
                *x = (*x / total).max(MASS_FLOOR);
            }
            let candidate = objective(&next, q, risks, lambda, spec);
            if candidate <= value + MONOTONE_SLACK * value.abs().max(1.0) {
                accepted = Some(candidate);
                break;
            }
            scale *= 0.5;
        }
        let Some(candidate) = accepted else {
            // no step size makes progress: stationary to working precision
            return Ok(OracleResult {
                masses: p,
                objective: value,
                iterations: k,
                converged: true,
                final_step: step,
                trace,
            });
        };
        let decrease = value - candidate;
        std::mem::swap(&mut p, &mut next);
        value = candidate;
        trace.push(value);
        quiet = if decrease < tol { quiet + 1 } else { 0 };
        if quiet >= PATIENCE {
            return Ok(OracleResult {
                masses: p,
                objective: value,
                iterations: k + 1,
                converged: true,
                final_step: step,
                trace,
            });
        }
    }
    log::info!("oracle stopped after {max_iters} iterations without settling");
    Ok(OracleResult {
        masses: p,
        objective: value,
        iterations: max_iters,
        converged: false,
        final_step: step,
        trace,
    })
}

/// `max |Lᵢ + β̂ + λ·ḟ(pᵢ/qᵢ)|` with `β̂` the `q`-weighted mean of
/// `−(Lᵢ + λ·ḟ(pᵢ/qᵢ))`.
pub fn oracle_stationarity(result: &OracleResult, support: &Support, lambda: f64, spec: &dyn Generator) -> f64 {
    let q = support.weights();
    let g: Vec<f64> = result
        .masses
        .iter()
        .zip(q)
        .zip(support.risks())
        .map(|((p, q), l)| l + lambda * spec.fdot(p / q))
        .collect();
    let mean: f64 = g.iter().zip(q).map(|(g, q)| g * q).sum();
    g.iter().map(|g| (g - mean).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub closed_form_objective: f64,
    pub oracle_objective: f64,
    /// Closed-form objective minus oracle objective.
    pub objective_gap: f64,
    pub mass_gap: f64,
    pub oracle_converged: bool,
    pub tol: f64,
    pub pass: bool,
}

/// Compares closed-form masses with an oracle run on the same instance.
pub fn certify(
    support: &Support,
    lambda: f64,
    spec: &dyn Generator,
    masses: &[f64],
    oracle: &OracleResult,
    tol: f64,
) -> Result<Certificate> {
    let n = support.len();
    if masses.len() != n || oracle.masses.len() != n {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: support {n}, closed form {}, oracle {}",
            masses.len(),
            oracle.masses.len()
        )));
    }
    let closed = objective(masses, support.weights(), support.risks(), lambda, spec);
    let mass_gap = masses
        .iter()
        .zip(&oracle.masses)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let gap = closed - oracle.objective;
    let pass = oracle.converged && closed <= oracle.objective + tol && mass_gap <= 10.0 * tol.sqrt();
    Ok(Certificate {
        closed_form_objective: closed,
        oracle_objective: oracle.objective,
        objective_gap: gap,
        mass_gap,
        oracle_converged: oracle.converged,
        tol,
        pass,
    })
}

/// Discrete instance with `n` atoms: masses from normalized `Exp(1)` draws
/// and risks uniform on `[0, 1]`.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> Result<Support> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    let masses: Vec<f64> = draws.iter().map(|d| d / total).collect();
    let unit = Uniform::new(0.0, 1.0).map_err(|e| Error::InvalidInput(e.to_string()))?;
    let risks: Vec<f64> = (0..n).map(|_| rng.sample(unit)).collect();
    Support::discrete(&masses, &risks)
}

/// `max(1, 2λ*)` when the boundary is closed, and `max(1, 2·inf A)` when
/// the admissible set has an open infimum; `1` otherwise.
pub fn admissible_lambda(spec: &dyn Generator, support: &Support, tol: f64) -> Result<f64> {
    let report = classify_boundary(spec, support, tol)?;
    Ok(match report.boundary {
        BoundaryKind::ClosedLeft | BoundaryKind::BoundedRight => (2.0 * report.admissible.lo).max(1.0),
        BoundaryKind::Empty => {
            return Err(Error::NoFeasibleBeta {
                lambda: f64::NAN,
                reason: crate::error::Infeasibility::EmptyInterval,
            })
        }
        BoundaryKind::OpenLeft | BoundaryKind::AllReals => 1.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::Builtin;

    fn two_atom() -> Support {
        Support::discrete(&[0.5, 0.5], &[0.0, 1.0]).unwrap()
    }

    #[test]
    fn constant_risk_stays_at_the_reference() {
        let s = Support::discrete(&[0.1, 0.6, 0.3], &[0.5; 3]).unwrap();
        for b in Builtin::ALL {
            let r = simplex_minimize(&s, 1.0, &b, DEFAULT_MAX_ITERS, 1e-15).unwrap();
            assert!(r.converged);
            for (p, q) in r.masses.iter().zip(s.weights()) {
                assert!((p - q).abs() < 1e-8, "{b}");
            }
        }
    }

    #[test]
    fn two_atom_values() {
        let kl = simplex_minimize(&two_atom(), 1.0, &Builtin::Kl, DEFAULT_MAX_ITERS, 1e-15).unwrap();
        // softmax of (0, −1)
        let e = (-1f64).exp();
        assert!((kl.masses[0] - 1.0 / (1.0 + e)).abs() < 1e-5, "{:?}", kl.masses);
        let chi2 = simplex_minimize(&two_atom(), 1.0, &Builtin::Chi2, DEFAULT_MAX_ITERS, 1e-15).unwrap();
        assert!((chi2.masses[0] - 0.625).abs() < 1e-5, "{:?}", chi2.masses);
    }

    #[test]
    fn trace_is_monotone() {
        let s = Support::discrete(&[0.05, 0.15, 0.3, 0.5], &[0.9, 0.1, 0.5, 0.3]).unwrap();
        for b in Builtin::ALL {
            let r = simplex_minimize(&s, 1.0, &b, DEFAULT_MAX_ITERS, 1e-15).unwrap();
            assert!(r.trace.windows(2).all(|w| w[1] <= w[0] + MONOTONE_SLACK * w[0].abs().max(1.0)));
            assert!(oracle_stationarity(&r, &s, 1.0, &b) <= 1e-3, "{b}");
        }
    }

    #[test]
    fn certificates() {
        let s = two_atom();
        let e = (-1f64).exp();
        let exact = [1.0 / (1.0 + e), e / (1.0 + e)];
        let r = simplex_minimize(&s, 1.0, &Builtin::Kl, DEFAULT_MAX_ITERS, 1e-15).unwrap();
        assert!(certify(&s, 1.0, &Builtin::Kl, &exact, &r, 1e-6).unwrap().pass);

        let same = certify(&s, 1.0, &Builtin::Kl, &r.masses, &r, 1e-6).unwrap();
        assert!(same.pass && same.mass_gap == 0.0 && same.objective_gap == 0.0);

        let off = [exact[0] + 0.01, exact[1] - 0.01];
        assert!(!certify(&s, 1.0, &Builtin::Kl, &off, &r, 1e-6).unwrap().pass);

        assert!(certify(&s, 1.0, &Builtin::Kl, &[1.0], &r, 1e-6).is_err());
    }

    #[test]
    fn continuous_measures_are_rejected() {
        use crate::measures::{QuadratureMeasure, RiskSpec, Sample};
        let s = Support::new(
            &QuadratureMeasure::example1().into(),
            &RiskSpec::dataset(vec![Sample::new([1.0], 0.0)]),
        )
        .unwrap();
        assert!(simplex_minimize(&s, 1.0, &Builtin::Kl, 10, 1e-9).is_err());
    }
}
