//! Reference measures, empirical risk and integration against `Q`.
//!
//! A reference measure is either a finite list of weighted atoms or a 1-D
//! density integrated by a composite Gauss–Legendre rule. Both are turned
//! into a [`Support`]: a flat list of points, weights and risk values that
//! the solver sums over.

mod quadrature;
mod risk;
mod support;

pub use quadrature::{gauss_legendre, Rule, ORDER, REFINEMENT_LEVELS};
pub use risk::{empirical_risk, Loss, Predictor, RiskBounds, RiskSpec, Sample};
pub use support::{Support, SupportKind};

use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Partial sums beyond this are treated as a divergent integral.
pub const DIVERGENCE_THRESHOLD: f64 = 1e9;

/// Relative change across the last refinement levels below which a graded
/// integral counts as converged.
pub const CONVERGENCE_RTOL: f64 = 1e-4;

/// Levels inspected when judging convergence of a graded integral.
pub const TAIL_LEVELS: usize = 5;

pub const DEFAULT_PANELS: usize = 64;

/// Analytic tail mass allowed outside a default truncation window.
pub const TAIL_MASS: f64 = 1e-18;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if atoms.len() != masses.len() {
            return Err(Error::InvalidInput(format!(
                "{} atoms but {} masses",
                atoms.len(),
                masses.len()
            )));
        }
        if atoms.is_empty() {
            return Err(Error::InvalidInput("discrete measure has no atoms".into()));
        }
        let dim = atoms[0].len();
        if atoms.iter().any(|a| a.len() != dim) {
            return Err(Error::InvalidInput("atoms have inconsistent dimensions".into()));
        }
        if atoms.iter().flatten().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("atoms must have finite coordinates".into()));
        }
        if let Some((i, m)) = masses.iter().enumerate().find(|(_, &m)| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidInput(format!("mass[{i}] = {m} is not strictly positive")));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!("masses sum to {total}, expected 1")));
        }
        let mut sorted: Vec<&Vec<f64>> = atoms.iter().collect();
        sorted.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("atoms must be distinct".into()));
        }
        Ok(DiscreteMeasure { atoms, masses })
    }

    /// Atoms `0, 1, …, n−1` on the real line carrying the given masses.
    pub fn indexed(masses: Vec<f64>) -> Result<Self> {
        let atoms = (0..masses.len()).map(|i| vec![i as f64]).collect();
        DiscreteMeasure::new(atoms, masses)
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Named 1-D densities with respect to Lebesgue measure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// `θ^(k−1) rᵏ e^(−rθ) / Γ(k)` on `[0, ∞)`. Shape 3, rate 2 gives
    /// `4θ² e^(−2θ)`.
    Gamma { shape: f64, rate: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl Density {
    pub fn pdf(&self, theta: f64) -> f64 {
        match *self {
            Density::Gamma { shape, rate } => {
                if theta < 0.0 {
                    0.0
                } else if theta == 0.0 {
                    if shape == 1.0 {
                        rate
                    } else if shape > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    }
                } else {
                    ((shape - 1.0) * theta.ln() + shape * rate.ln() - rate * theta - ln_gamma(shape)).exp()
                }
            }
            Density::Uniform { lo, hi } => {
                if (lo..=hi).contains(&theta) {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
        }
    }

    /// Closure of the support on the extended real line.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Density::Gamma { .. } => (0.0, f64::INFINITY),
            Density::Uniform { lo, hi } => (lo, hi),
        }
    }

    /// Mass lying outside `[a, b]`.
    pub fn mass_outside(&self, a: f64, b: f64) -> f64 {
        match *self {
            Density::Gamma { shape, rate } => {
                let below = if a > 0.0 { 1.0 - gamma_ur(shape, rate * a) } else { 0.0 };
                below + gamma_ur(shape, rate * b)
            }
            Density::Uniform { lo, hi } => {
                let inside = (b.min(hi) - a.max(lo)).max(0.0);
                1.0 - inside / (hi - lo)
            }
        }
    }

    /// Truncation window whose outside mass is below [`TAIL_MASS`].
    pub fn default_domain(&self) -> (f64, f64) {
        match *self {
            Density::Gamma { rate, .. } => {
                let mut t = 1.0 / rate;
                while self.mass_outside(0.0, t) > TAIL_MASS {
                    t += 1.0 / rate;
                }
                (0.0, t.ceil())
            }
            Density::Uniform { lo, hi } => (lo, hi),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Density::Gamma { shape, rate } if shape >= 1.0 && rate > 0.0 && shape.is_finite() && rate.is_finite() => Ok(()),
            Density::Gamma { shape, rate } => Err(Error::InvalidInput(format!(
                "gamma density needs shape >= 1 and rate > 0, got shape {shape}, rate {rate}"
            ))),
            Density::Uniform { lo, hi } if lo < hi && lo.is_finite() && hi.is_finite() => Ok(()),
            Density::Uniform { lo, hi } => Err(Error::InvalidInput(format!("uniform density needs lo < hi, got [{lo}, {hi}]"))),
        }
    }
}

/// 1-D density truncated to `[a, b]` and integrated by a composite rule.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureMeasure {
    density: Density,
    domain: (f64, f64),
    panels: usize,
}

impl QuadratureMeasure {
    pub fn new(density: Density, domain: Option<(f64, f64)>, panels: Option<usize>) -> Result<Self> {
        density.validate()?;
        let domain = domain.unwrap_or_else(|| density.default_domain());
        let (a, b) = domain;
        let (lo, hi) = density.support();
        if !(a < b && a.is_finite() && b.is_finite()) || a < lo || b > hi {
            return Err(Error::InvalidInput(format!(
                "domain [{a}, {b}] must be a finite interval inside the density support [{lo}, {hi}]"
            )));
        }
        let panels = panels.unwrap_or(DEFAULT_PANELS);
        if panels == 0 {
            return Err(Error::InvalidInput("panel count must be positive".into()));
        }
        Ok(QuadratureMeasure {
            density,
            domain,
            panels,
        })
    }

    pub fn example1() -> Self {
        QuadratureMeasure::new(Density::Gamma { shape: 3.0, rate: 2.0 }, None, None)
            .expect("valid builtin density")
    }

    pub fn density(&self) -> Density {
        self.density
    }

    pub fn domain(&self) -> (f64, f64) {
        self.domain
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn with_panels(&self, panels: usize) -> Self {
        QuadratureMeasure {
            panels: panels.max(1),
            ..self.clone()
        }
    }

    /// `Σ wᵢ·density(nodeᵢ)` on the plain composite rule, before any
    /// truncation correction.
    pub fn raw_mass(&self) -> f64 {
        let (a, b) = self.domain;
        let rule = Rule::composite(a, b, self.panels, &[]);
        rule.nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&x, &w)| w * self.density.pdf(x))
            .sum()
    }

    /// Rule with density folded into the weights and renormalized so the
    /// weights sum to one.
    pub fn rule(&self, panels: usize, singular: &[f64]) -> Rule {
        let (a, b) = self.domain;
        let mut rule = Rule::composite(a, b, panels, singular);
        for (w, &x) in rule.weights.iter_mut().zip(&rule.nodes) {
            *w *= self.density.pdf(x);
        }
        let total: f64 = rule.weights.iter().sum();
        for w in &mut rule.weights {
            *w /= total;
        }
        rule
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceMeasure {
    Discrete(DiscreteMeasure),
    Density(QuadratureMeasure),
}

impl From<DiscreteMeasure> for ReferenceMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        ReferenceMeasure::Discrete(m)
    }
}

impl From<QuadratureMeasure> for ReferenceMeasure {
    fn from(m: QuadratureMeasure) -> Self {
        ReferenceMeasure::Density(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Finite,
    Divergent,
    /// Graded partial sums neither settled nor crossed the threshold.
    Unresolved,
}

/// Result of integrating against a reference measure.
#[derive(Debug, Clone, PartialEq)]
pub struct Integral {
    /// `+∞` when divergent.
    pub value: f64,
    pub error: f64,
    pub verdict: Verdict,
    /// Cumulative sums after each refinement level toward the singular
    /// points; empty when nothing was graded.
    pub level_sums: Vec<f64>,
}

impl Integral {
    pub fn is_finite(&self) -> bool {
        self.verdict == Verdict::Finite
    }
}

/// Weighted sum with divergence detection over graded levels.
pub(crate) fn accumulate(
    weights: &[f64],
    levels: &[Option<u8>],
    values: impl Iterator<Item = f64>,
) -> Result<Integral> {
    let mut base = 0.0;
    let mut per_level = [0.0f64; REFINEMENT_LEVELS];
    let mut graded = false;
    let mut infinite = false;
    for (i, v) in values.enumerate() {
        if v.is_nan() {
            return Err(Error::NanIntegrand { index: i });
        }
        let w = weights[i];
        if v.is_infinite() && w > 0.0 {
            infinite = true;
            continue;
        }
        match levels[i] {
            None => base += w * v,
            Some(k) => {
                graded = true;
                per_level[k as usize] += w * v;
            }
        }
    }
    let level_sums: Vec<f64> = if graded {
        per_level
            .iter()
            .scan(base, |acc, &x| {
                *acc += x;
                Some(*acc)
            })
            .collect()
    } else {
        Vec::new()
    };
    if infinite {
        return Ok(Integral {
            value: f64::INFINITY,
            error: 0.0,
            verdict: Verdict::Divergent,
            level_sums,
        });
    }
    let total = level_sums.last().copied().unwrap_or(base);
    let verdict = match level_sums.len() {
        0 => Verdict::Finite,
        n => {
            let tail_growth = (level_sums[n - 1] - level_sums[n - 1 - TAIL_LEVELS]).abs();
            let settled = tail_growth <= CONVERGENCE_RTOL * total.abs().max(f64::MIN_POSITIVE);
            if settled {
                Verdict::Finite
            } else if level_sums.iter().any(|s| s.abs() > DIVERGENCE_THRESHOLD) {
                Verdict::Divergent
            } else {
                Verdict::Unresolved
            }
        }
    };
    Ok(Integral {
        value: if verdict == Verdict::Divergent { f64::INFINITY } else { total },
        error: 0.0,
        verdict,
        level_sums,
    })
}

impl ReferenceMeasure {
    /// `∫ integrand dQ`.
    ///
    /// For densities, panels adjacent to each point in `singular` are
    /// graded dyadically and the rule is evaluated at `panels` and
    /// `2·panels`; the finer value is returned with their difference as the
    /// error estimate.
    pub fn integrate<F>(&self, integrand: F, singular: &[f64]) -> Result<Integral>
    where
        F: Fn(&[f64]) -> f64,
    {
        match self {
            ReferenceMeasure::Discrete(m) => {
                let levels = vec![None; m.len()];
                accumulate(m.masses(), &levels, m.atoms().iter().map(|a| integrand(a)))
            }
            ReferenceMeasure::Density(m) => {
                let eval = |rule: &Rule| {
                    accumulate(
                        &rule.weights,
                        &rule.levels,
                        rule.nodes.iter().map(|&x| integrand(std::slice::from_ref(&x))),
                    )
                };
                let coarse = eval(&m.rule(m.panels(), singular))?;
                let mut fine = eval(&m.rule(2 * m.panels(), singular))?;
                if fine.verdict == Verdict::Finite && coarse.verdict == Verdict::Finite {
                    fine.error = (fine.value - coarse.value).abs() + 4.0 * f64::EPSILON * fine.value.abs();
                } else if coarse.verdict == Verdict::Divergent && fine.verdict != Verdict::Divergent {
                    fine.verdict = Verdict::Unresolved;
                }
                Ok(fine)
            }
        }
    }
}
