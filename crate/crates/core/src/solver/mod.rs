//! Closed-form solution of f-divergence regularized risk minimization.
//!
//! For a generator `f`, reference measure `Q`, empirical risk `L` and
//! regularization factor `λ > 0`, the minimizer of
//!
//! ```text
//! ∫ L dP + λ·D_f(P‖Q)
//! ```
//!
//! has Radon–Nikodym derivative `dP/dQ(θ) = ḟ⁻¹(−(β + L(θ))/λ)`, where the
//! normalization constant `β` is the unique root of
//!
//! ```text
//! k(t) = ∫ ḟ⁻¹(−(t + L(θ))/λ) dQ(θ) = 1
//! ```
//!
//! on the set of `t` keeping `ḟ⁻¹` positive over the support. `k` is
//! strictly decreasing in `t`, so `β` is found by bracketing and bisection.
//! [`boundary`] characterizes when such a root exists at all.

pub mod boundary;
mod root;

pub use boundary::{classify_boundary, min_regularization, AdmissibleSet, BoundaryKind, BoundaryReport, Side};
pub use root::{GROWTH, MAX_BISECTIONS, MAX_EXPANSIONS};

use crate::divergences::{DivergenceSpec, Generator};
use crate::error::{Error, Infeasibility, Result};
use crate::interval::Interval;
use crate::measures::{Integral, RiskBounds, Support, SupportKind, Verdict};

use root::{bisect_decreasing, expand, Probe};

pub const DISCRETE_TOL: f64 = 1e-10;
pub const QUADRATURE_TOL: f64 = 1e-6;

/// Default tolerance on `|k(β) − 1|` for a support.
pub fn default_tol(support: &Support) -> f64 {
    match support.kind() {
        SupportKind::Discrete => DISCRETE_TOL,
        SupportKind::Quadrature => QUADRATURE_TOL,
    }
}

/// Open interval of multipliers `t` for which `−(t + L)/λ` stays inside the
/// positivity range of `ḟ⁻¹` for every risk value in `bounds`.
pub fn feasible_beta_interval(spec: &dyn Generator, bounds: RiskBounds, lambda: f64) -> Interval {
    let pos = spec.positive_range();
    // t > −L − λ·y_hi for all L, t < −L − λ·y_lo for all L
    let lo = if pos.hi == f64::INFINITY {
        f64::NEG_INFINITY
    } else {
        -bounds.min - lambda * pos.hi
    };
    let hi = if pos.lo == f64::NEG_INFINITY {
        f64::INFINITY
    } else {
        -bounds.max - lambda * pos.lo
    };
    if lo < hi {
        // adding zero turns −0 into +0
        Interval::new(lo + 0.0, hi + 0.0)
    } else {
        Interval::empty()
    }
}

/// Pointwise `ḟ⁻¹(−(t + L)/λ)` at a fixed `(t, λ)`.
///
/// Near the upper end `y⁺` of the positivity range the argument is formed
/// as a gap `y⁺ − y = ((L − Lmin) + (t − t_lo))/λ`, with `t_lo` the lower
/// end of the feasible interval, so the blow-up at the boundary is resolved
/// below the ulp of `y⁺`. The lower end `y⁻` is handled the same way with
/// `y − y⁻ = ((Lmax − L) + (t_hi − t))/λ`. The limits are zero at the lower
/// end of the range and `+∞` at the upper end.
struct Pointwise<'a> {
    spec: &'a dyn Generator,
    pos: Interval,
    lambda: f64,
    t: f64,
    lmin: f64,
    lmax: f64,
    t_lo: f64,
    t_hi: f64,
}

impl<'a> Pointwise<'a> {
    fn new(spec: &'a dyn Generator, bounds: RiskBounds, t: f64, lambda: f64) -> Self {
        let pos = spec.positive_range();
        Pointwise {
            spec,
            pos,
            lambda,
            t,
            lmin: bounds.min,
            lmax: bounds.max,
            t_lo: -bounds.min - lambda * pos.hi,
            t_hi: -bounds.max - lambda * pos.lo,
        }
    }

    fn argument(&self, l: f64) -> f64 {
        -(self.t + l) / self.lambda
    }

    fn eval(&self, l: f64) -> Option<f64> {
        let slack = |b: f64| 8.0 * f64::EPSILON * b.abs().max(1.0);
        let y = self.argument(l);
        if self.pos.lo.is_finite() && self.t_hi.is_finite() {
            let gap = ((self.lmax - l) + (self.t_hi - self.t)) / self.lambda;
            if gap <= 0.0 {
                return (-gap <= slack(self.pos.lo)).then_some(0.0);
            }
            if y <= self.pos.lo {
                let y = self.pos.lo + gap;
                return Some(if y > self.pos.lo { self.spec.fdot_inv(y) } else { 0.0 });
            }
        } else if y <= self.pos.lo {
            return (self.pos.lo - y <= slack(self.pos.lo)).then_some(0.0);
        }
        if self.pos.hi.is_finite() && self.t_lo.is_finite() {
            let gap = ((l - self.lmin) + (self.t - self.t_lo)) / self.lambda;
            return if gap > 0.0 {
                Some(self.spec.fdot_inv_below_top(gap))
            } else if -gap <= slack(self.pos.hi) {
                Some(f64::INFINITY)
            } else {
                None
            };
        }
        if self.pos.contains(y) {
            Some(self.spec.fdot_inv(y))
        } else if y >= self.pos.hi && y - self.pos.hi <= slack(self.pos.hi) {
            Some(f64::INFINITY)
        } else {
            None
        }
    }

    fn infeasible(&self, index: usize, l: f64) -> Error {
        Error::InfeasiblePoint {
            index,
            argument: self.argument(l),
            lo: self.pos.lo,
            hi: self.pos.hi,
        }
    }
}

/// `k(t) = ∫ ḟ⁻¹(−(t + L)/λ) dQ`.
///
/// At an end of the feasible interval the integrand takes its limiting
/// value, so probing the boundary returns `+∞` when the integral diverges.
pub fn constraint_integral(spec: &dyn Generator, support: &Support, t: f64, lambda: f64) -> Result<Integral> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let point = Pointwise::new(spec, support.bounds(), t, lambda);
    let risks = support.risks();
    if let Some(index) = risks.iter().position(|&l| point.eval(l).is_none()) {
        return Err(point.infeasible(index, risks[index]));
    }
    support.integrate(|i| point.eval(risks[i]).unwrap_or(f64::NAN))
}

fn k_value(spec: &dyn Generator, support: &Support, t: f64, lambda: f64) -> Result<f64> {
    Ok(constraint_integral(spec, support, t, lambda)?.value)
}

/// Outcome of a normalization solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaSolution {
    pub beta: f64,
    /// `k(β)`, within the requested tolerance of one.
    pub normalization: f64,
}

/// Normalization constant `β` with `|k(β) − 1| ≤ tol`.
pub fn solve_beta(spec: &dyn Generator, support: &Support, lambda: f64, tol: f64) -> Result<f64> {
    Ok(solve_normalization(spec, support, lambda, tol)?.beta)
}

/// The normalization function `λ ↦ N(λ)`; same root as [`solve_beta`].
pub fn normalization_function(spec: &dyn Generator, support: &Support, lambda: f64, tol: f64) -> Result<f64> {
    solve_beta(spec, support, lambda, tol)
}

pub fn solve_normalization(spec: &dyn Generator, support: &Support, lambda: f64, tol: f64) -> Result<BetaSolution> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidInput(format!("lambda must be positive and finite, got {lambda}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let interval = feasible_beta_interval(spec, support.bounds(), lambda);
    if interval.is_empty() {
        return Err(Error::NoFeasibleBeta {
            lambda,
            reason: Infeasibility::EmptyInterval,
        });
    }
    let k = |t: f64| k_value(spec, support, t, lambda);
    let found = |p: Probe| BetaSolution {
        beta: p.x,
        normalization: p.value,
    };
    let below_minimum = |side: Side| -> Error {
        let lambda_min = boundary::boundary_lambda(spec, support, side, tol).ok().flatten();
        Error::NoFeasibleBeta {
            lambda,
            reason: Infeasibility::BelowMinimum { lambda_min },
        }
    };

    // Ends of the feasible interval, where finite.
    let mut left: Option<Probe> = None;
    let mut right: Option<Probe> = None;
    if interval.is_bounded_below() {
        let at = constraint_integral(spec, support, interval.lo, lambda)?;
        if at.verdict == Verdict::Finite {
            if (at.value - 1.0).abs() <= tol {
                return Ok(BetaSolution {
                    beta: interval.lo,
                    normalization: at.value,
                });
            }
            if at.value < 1.0 {
                return Err(below_minimum(Side::Lower));
            }
        }
        if at.value >= 1.0 {
            left = Some(Probe {
                x: interval.lo,
                value: at.value,
            });
        }
    }
    if interval.is_bounded_above() {
        let value = k(interval.hi)?;
        if value > 1.0 {
            return Err(below_minimum(Side::Upper));
        }
        right = Some(Probe { x: interval.hi, value });
    }

    let guess = {
        let mean: f64 = support.weights().iter().zip(support.risks()).map(|(w, l)| w * l).sum();
        -mean - lambda * spec.fdot(1.0)
    };
    let seed = if interval.contains(guess) {
        guess
    } else {
        match (interval.lo.is_finite(), interval.hi.is_finite()) {
            (true, true) => interval.lo + 0.5 * (interval.hi - interval.lo),
            (true, false) => interval.lo + 1.0,
            (false, true) => interval.hi - 1.0,
            (false, false) => 0.0,
        }
    };
    let seed_value = k(seed)?;
    if (seed_value - 1.0).abs() <= tol {
        return Ok(BetaSolution {
            beta: seed,
            normalization: seed_value,
        });
    }
    let seed_probe = Probe { x: seed, value: seed_value };

    let (a, b) = if seed_value > 1.0 {
        let b = match right {
            Some(r) => r,
            None => expand(seed, 1.0, 1.0, "upper bracket for beta", k, |v| v <= 1.0)?.ok_or_else(|| {
                Error::NonConvergence {
                    what: "upper bracket for beta".into(),
                    iterations: MAX_EXPANSIONS,
                }
            })?,
        };
        (seed_probe, b)
    } else {
        let a = match left {
            Some(l) => l,
            None if interval.is_bounded_below() => {
                // boundary value unresolved or below one: approach it from inside
                let gap = seed - interval.lo;
                let mut hit = None;
                for j in 1..=MAX_EXPANSIONS as i32 {
                    let x = interval.lo + gap * GROWTH.powi(-j);
                    if x <= interval.lo {
                        break;
                    }
                    let v = k(x)?;
                    if v >= 1.0 {
                        hit = Some(Probe { x, value: v });
                        break;
                    }
                }
                match hit {
                    Some(p) => p,
                    None => {
                        return Err(Error::Inconclusive(format!(
                            "constraint integral stays below one approaching the boundary t = {} at lambda = {lambda}",
                            interval.lo
                        )))
                    }
                }
            }
            None => expand(seed, -1.0, 1.0, "lower bracket for beta", k, |v| v >= 1.0)?.ok_or_else(|| {
                Error::NonConvergence {
                    what: "lower bracket for beta".into(),
                    iterations: MAX_EXPANSIONS,
                }
            })?,
        };
        (a, seed_probe)
    };
    if a.value.is_infinite() && b.value.is_infinite() {
        return Err(Error::DivergentIntegral);
    }
    bisect_decreasing(a.x, b.x, 1.0, tol, "normalization constant", k).map(found)
}

/// Minimizer of the regularized risk, as its density with respect to `Q`
/// at every support point.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub spec: DivergenceSpec,
    pub lambda: f64,
    pub beta: f64,
    /// `dP/dQ` at each support point.
    pub rn: Vec<f64>,
    /// `∫ (dP/dQ) dQ` as computed on the support.
    pub normalization: f64,
    pub support: Support,
}

impl Posterior {
    /// Probability masses `wᵢ·rnᵢ` on the support points.
    pub fn masses(&self) -> Vec<f64> {
        self.support.weights().iter().zip(&self.rn).map(|(w, r)| w * r).collect()
    }

    pub fn min_rn(&self) -> f64 {
        self.rn.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rn(&self) -> f64 {
        self.rn.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn objective(&self) -> f64 {
        objective_rn(&self.rn, &self.support, self.lambda, &*self.spec)
    }

    pub fn stationarity_residual(&self) -> f64 {
        stationarity_residual_of(&self.rn, self.beta, self.lambda, &self.support, &*self.spec)
    }
}

/// Solves for `β` and evaluates `dP/dQ = ḟ⁻¹(−(β + L)/λ)` on the support.
pub fn posterior(spec: &DivergenceSpec, support: &Support, lambda: f64, tol: f64) -> Result<Posterior> {
    let sol = solve_normalization(&**spec, support, lambda, tol)?;
    let point = Pointwise::new(&**spec, support.bounds(), sol.beta, lambda);
    let rn: Vec<f64> = support.risks().iter().map(|&l| point.eval(l).unwrap_or(f64::NAN)).collect();
    if let Some(i) = rn.iter().position(|&r| !(r > 0.0 && r.is_finite())) {
        return Err(point.infeasible(i, support.risks()[i]));
    }
    Ok(Posterior {
        spec: spec.clone(),
        lambda,
        beta: sol.beta,
        rn,
        normalization: sol.normalization,
        support: support.clone(),
    })
}

/// `∫ L dP + λ·∫ f(dP/dQ) dQ` for `P` given by its density on the support.
pub fn objective_rn(rn: &[f64], support: &Support, lambda: f64, spec: &dyn Generator) -> f64 {
    support
        .weights()
        .iter()
        .zip(support.risks())
        .zip(rn)
        .map(|((w, l), &r)| w * (r * l + lambda * spec.f(r)))
        .sum()
}

/// `∫ L dP + λ·D_f(P‖Q)` for a probability vector `p` on a discrete support.
pub fn objective(p: &[f64], support: &Support, lambda: f64, spec: &dyn Generator) -> Result<f64> {
    let divergence = crate::divergences::f_divergence(p, support.weights(), spec)?;
    let risk: f64 = p.iter().zip(support.risks()).map(|(p, l)| p * l).sum();
    Ok(risk + lambda * divergence)
}

/// `max |L(θ) + β + λ·ḟ(rn(θ))|` over the support.
pub fn stationarity_residual_of(rn: &[f64], beta: f64, lambda: f64, support: &Support, spec: &dyn Generator) -> f64 {
    support
        .risks()
        .iter()
        .zip(rn)
        .map(|(&l, &r)| (l + beta + lambda * spec.fdot(r)).abs())
        .fold(0.0, f64::max)
}

pub fn stationarity_residual(post: &Posterior) -> f64 {
    post.stationarity_residual()
}
