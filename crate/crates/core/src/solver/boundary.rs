//! Shape of the feasible multiplier set and the admissible regularization
//! factors.
//!
//! With `λ = 1` the feasible multipliers form an interval whose finite end
//! `t*` sits where `−(t + L)/λ` first touches the edge of the positivity
//! range of `ḟ⁻¹`. Whether `k(t*)` is finite decides whether a solution
//! exists for every `λ` or only from some `λ*` on.

use serde::Serialize;

use super::{constraint_integral, feasible_beta_interval};
use super::root::{bisect_decreasing, expand, Probe};
use crate::divergences::Generator;
use crate::error::{Error, Result};
use crate::measures::{Integral, Support, Verdict};

/// Offsets at which `k(t* + ε)` is reported next to the boundary verdict.
pub const PROBE_OFFSETS: [f64; 7] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    /// `k(t*)` is finite: solutions exist for `λ ≥ λ*`.
    ClosedLeft,
    /// `k` blows up at `t*`: solutions exist for every `λ > 0`.
    OpenLeft,
    /// No finite boundary: every `λ > 0` is admissible.
    AllReals,
    /// No feasible multiplier for any `λ`.
    Empty,
    /// The feasible set is bounded above; solutions exist for `λ` strictly
    /// above an infimum.
    BoundedRight,
}

impl BoundaryKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryKind::ClosedLeft => "closed_left",
            BoundaryKind::OpenLeft => "open_left",
            BoundaryKind::AllReals => "all_reals",
            BoundaryKind::Empty => "empty",
            BoundaryKind::BoundedRight => "bounded_right",
        }
    }
}

/// End of the feasible interval under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

/// `{λ : λ > lo}` or `{λ : λ ≥ lo}`; empty when `lo` is `+∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdmissibleSet {
    pub lo: f64,
    pub lo_closed: bool,
}

impl AdmissibleSet {
    pub const ALL: AdmissibleSet = AdmissibleSet {
        lo: 0.0,
        lo_closed: false,
    };
    pub const NONE: AdmissibleSet = AdmissibleSet {
        lo: f64::INFINITY,
        lo_closed: false,
    };

    pub fn contains(&self, lambda: f64) -> bool {
        lambda.is_finite() && (lambda > self.lo || (self.lo_closed && lambda == self.lo))
    }

    pub fn is_empty(&self) -> bool {
        self.lo == f64::INFINITY
    }
}

impl std::fmt::Display for AdmissibleSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_empty() {
            return f.write_str("{}");
        }
        let open = if self.lo_closed { '[' } else { '(' };
        write!(f, "{open}{}, inf)", self.lo)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    /// Finite end of the feasible interval at `λ = 1`, or `-∞`.
    pub t_star: f64,
    pub boundary: BoundaryKind,
    pub lambda_star: Option<f64>,
    pub admissible: AdmissibleSet,
    /// `k(t*; 1)` as integrated on the graded rule.
    #[serde(skip)]
    pub boundary_integral: Option<Integral>,
    /// `(ε, k(t* ± ε; 1))` moving into the feasible interval.
    pub probes: Vec<(f64, f64)>,
}

/// Finite end of the feasible interval at `λ` on the given side.
fn boundary_t(spec: &dyn Generator, support: &Support, side: Side, lambda: f64) -> f64 {
    let interval = feasible_beta_interval(spec, support.bounds(), lambda);
    match side {
        Side::Lower => interval.lo,
        Side::Upper => interval.hi,
    }
}

fn finite_side(spec: &dyn Generator, support: &Support) -> Option<Side> {
    let interval = feasible_beta_interval(spec, support.bounds(), 1.0);
    if interval.is_bounded_below() {
        Some(Side::Lower)
    } else if interval.is_bounded_above() {
        Some(Side::Upper)
    } else {
        None
    }
}

fn probes(spec: &dyn Generator, support: &Support, t_star: f64, side: Side) -> Vec<(f64, f64)> {
    let dir = match side {
        Side::Lower => 1.0,
        Side::Upper => -1.0,
    };
    PROBE_OFFSETS
        .iter()
        .filter_map(|&eps| {
            let t = t_star + dir * eps * t_star.abs().max(1.0);
            constraint_integral(spec, support, t, 1.0).ok().map(|k| (eps, k.value))
        })
        .collect()
}

/// Classifies the boundary of the feasible multiplier set and, when finite,
/// locates the smallest admissible regularization factor.
pub fn classify_boundary(spec: &dyn Generator, support: &Support, tol: f64) -> Result<BoundaryReport> {
    if spec.fdot_inv_nonneg() {
        return Ok(BoundaryReport {
            t_star: f64::NEG_INFINITY,
            boundary: BoundaryKind::AllReals,
            lambda_star: None,
            admissible: AdmissibleSet::ALL,
            boundary_integral: None,
            probes: Vec::new(),
        });
    }
    let interval = feasible_beta_interval(spec, support.bounds(), 1.0);
    if interval.is_empty() {
        return Ok(BoundaryReport {
            t_star: f64::NAN,
            boundary: BoundaryKind::Empty,
            lambda_star: None,
            admissible: AdmissibleSet::NONE,
            boundary_integral: None,
            probes: Vec::new(),
        });
    }
    let side = match finite_side(spec, support) {
        None => {
            return Ok(BoundaryReport {
                t_star: f64::NEG_INFINITY,
                boundary: BoundaryKind::AllReals,
                lambda_star: None,
                admissible: AdmissibleSet::ALL,
                boundary_integral: None,
                probes: Vec::new(),
            })
        }
        Some(side) => side,
    };
    let t_star = boundary_t(spec, support, side, 1.0);
    let at = constraint_integral(spec, support, t_star, 1.0)?;
    let probes = probes(spec, support, t_star, side);
    log::debug!("boundary {side:?} t* = {t_star}: {:?}, probes {probes:?}", at.verdict);

    if side == Side::Upper {
        // k tends to zero as λ grows, so the infimum is never attained
        let lambda_inf = boundary_lambda(spec, support, side, tol)?;
        return Ok(BoundaryReport {
            t_star,
            boundary: BoundaryKind::BoundedRight,
            lambda_star: None,
            admissible: match lambda_inf {
                Some(lo) => AdmissibleSet { lo, lo_closed: false },
                None => AdmissibleSet::ALL,
            },
            boundary_integral: Some(at),
            probes,
        });
    }
    match at.verdict {
        Verdict::Divergent => Ok(BoundaryReport {
            t_star,
            boundary: BoundaryKind::OpenLeft,
            lambda_star: None,
            admissible: AdmissibleSet::ALL,
            boundary_integral: Some(at),
            probes,
        }),
        Verdict::Finite => {
            let lambda_star = boundary_lambda(spec, support, side, tol)?.ok_or_else(|| {
                Error::Inconclusive(format!("k(t*) finite at t* = {t_star} but no lambda reaches one"))
            })?;
            Ok(BoundaryReport {
                t_star,
                boundary: BoundaryKind::ClosedLeft,
                lambda_star: Some(lambda_star),
                admissible: AdmissibleSet {
                    lo: lambda_star,
                    lo_closed: true,
                },
                boundary_integral: Some(at),
                probes,
            })
        }
        Verdict::Unresolved => Err(Error::Inconclusive(format!(
            "constraint integral at t* = {t_star} neither settles nor exceeds the divergence threshold \
             (level sums {:?}, probes {probes:?})",
            at.level_sums
        ))),
    }
}

/// `λ*`, the smallest admissible regularization factor, when the boundary
/// is closed.
pub fn min_regularization(spec: &dyn Generator, support: &Support, tol: f64) -> Result<f64> {
    let report = classify_boundary(spec, support, tol)?;
    match (report.boundary, report.lambda_star) {
        (BoundaryKind::ClosedLeft, Some(l)) => Ok(l),
        (kind, _) => Err(Error::Precondition(format!(
            "the minimum regularization factor exists only for a closed_left boundary, found {}",
            kind.as_str()
        ))),
    }
}

/// The `λ` at which `k` evaluated on the finite end of the feasible
/// interval equals one. `None` when that boundary value is infinite.
///
/// On the lower side `λ ↦ k(lo(λ); λ)` increases, and on the upper side
/// `λ ↦ k(hi(λ); λ)` decreases, so both are solved by bisection in `ln λ`.
pub(crate) fn boundary_lambda(spec: &dyn Generator, support: &Support, side: Side, tol: f64) -> Result<Option<f64>> {
    let lambda_of = |u: f64| match side {
        Side::Lower => (-u).exp(),
        Side::Upper => u.exp(),
    };
    let mut divergent = false;
    let mut g = |u: f64| -> Result<f64> {
        let lambda = lambda_of(u);
        let t = boundary_t(spec, support, side, lambda);
        let k = constraint_integral(spec, support, t, lambda)?;
        if k.verdict == Verdict::Divergent {
            divergent = true;
            return Ok(f64::INFINITY);
        }
        Ok(k.value)
    };
    let start = g(0.0)?;
    if start.is_infinite() {
        return Ok(None);
    }
    let origin = Probe { x: 0.0, value: start };
    let (a, b) = if start >= 1.0 {
        match expand(0.0, 1.0, 1.0, "regularization bracket", &mut g, |v| v <= 1.0)? {
            Some(b) => (origin, b),
            None => return Ok(None),
        }
    } else {
        match expand(0.0, -1.0, 1.0, "regularization bracket", &mut g, |v| v >= 1.0)? {
            Some(a) if a.value.is_finite() => (a, origin),
            _ => return Ok(None),
        }
    };
    if (a.value - 1.0).abs() <= tol {
        return Ok(Some(lambda_of(a.x)));
    }
    if (b.value - 1.0).abs() <= tol {
        return Ok(Some(lambda_of(b.x)));
    }
    let root = bisect_decreasing(a.x, b.x, 1.0, tol, "minimum regularization factor", &mut g)?;
    if divergent {
        log::debug!("boundary integral diverged at some probed lambda");
    }
    Ok(Some(lambda_of(root.x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::Builtin;
    use crate::measures::{QuadratureMeasure, RiskSpec, Sample};

    fn example(y: f64) -> Support {
        Support::new(
            &QuadratureMeasure::example1().into(),
            &RiskSpec::dataset(vec![Sample::new([1.0], y)]),
        )
        .unwrap()
    }

    #[test]
    fn example1_is_closed() {
        let r = classify_boundary(&Builtin::ReverseKl, &example(0.0), 1e-6).unwrap();
        assert_eq!(r.boundary, BoundaryKind::ClosedLeft);
        assert_eq!(r.t_star, 0.0);
        let l = r.lambda_star.unwrap();
        assert!((l - 0.5).abs() < 1e-3, "{l}");
        assert!(r.admissible.contains(l) && !r.admissible.contains(0.49));
        let k = r.boundary_integral.unwrap().value;
        assert!((k - 2.0).abs() < 1e-3, "{k}");
    }

    #[test]
    fn example2_is_open() {
        let r = classify_boundary(&Builtin::ReverseKl, &example(1.0), 1e-6).unwrap();
        assert_eq!(r.boundary, BoundaryKind::OpenLeft);
        assert_eq!(r.t_star, 0.0);
        assert!(r.lambda_star.is_none());
        let sums = &r.boundary_integral.unwrap().level_sums;
        assert!(sums.iter().any(|s| *s > 1e9));
        assert!(sums.windows(2).rev().take(5).all(|w| w[1] > w[0]));
        assert!(min_regularization(&Builtin::ReverseKl, &example(1.0), 1e-6).is_err());
    }

    #[test]
    fn nonnegative_inverses_admit_everything() {
        for b in [Builtin::Kl, Builtin::Jeffrey, Builtin::Hellinger] {
            let r = classify_boundary(&b, &example(0.0), 1e-6).unwrap();
            assert_eq!(r.boundary, BoundaryKind::AllReals);
            assert_eq!(r.admissible, AdmissibleSet::ALL);
        }
    }

    #[test]
    fn atoms_at_the_minimum_open_the_boundary() {
        for risks in [[0.0, 1.0], [1.0, 2.0]] {
            let s = Support::discrete(&[0.5, 0.5], &risks).unwrap();
            let r = classify_boundary(&Builtin::ReverseKl, &s, 1e-10).unwrap();
            assert_eq!(r.boundary, BoundaryKind::OpenLeft);
            assert_eq!(r.t_star, -risks[0]);
        }
    }

    #[test]
    fn chi2_orientation() {
        let s = Support::discrete(&[0.5, 0.5], &[0.0, 1.0]).unwrap();
        let r = classify_boundary(&Builtin::Chi2, &s, 1e-10).unwrap();
        assert_eq!(r.boundary, BoundaryKind::BoundedRight);
        assert!((r.admissible.lo - 0.25).abs() < 1e-9);
        assert!(!r.admissible.lo_closed);

        let r = classify_boundary(&Builtin::Chi2, &example(0.0), 1e-6).unwrap();
        assert_eq!(r.boundary, BoundaryKind::Empty);
        assert!(r.admissible.is_empty());
    }

    #[test]
    fn jensen_shannon_example1_is_closed() {
        // ḟ⁻¹(ln2 − s) = 1/expm1(s), so k(t*; λ) ~ λ∫1/θ² dQ near zero
        let r = classify_boundary(&Builtin::JensenShannon, &example(0.0), 1e-6).unwrap();
        assert_eq!(r.boundary, BoundaryKind::ClosedLeft);
        let l = r.lambda_star.unwrap();
        let s = example(0.0);
        let t = feasible_beta_interval(&Builtin::JensenShannon, s.bounds(), l).lo;
        let k = constraint_integral(&Builtin::JensenShannon, &s, t, l).unwrap().value;
        assert!((k - 1.0).abs() < 1e-6);
    }
}
