//! f-divergence generators.
//!
//! A generator is a strictly convex, differentiable `f: (0, ∞) → ℝ` with
//! `f(1) = 0`. Everything the solver needs from it is collected in the
//! [`Generator`] trait: `f` itself, its derivative `ḟ`, the inverse `ḟ⁻¹`
//! and the interval on which that inverse is defined and positive.
//!
//! | name             | f(x)                                  | ḟ⁻¹(y)            | positive on   |
//! |------------------|---------------------------------------|-------------------|---------------|
//! | `kl`             | x log x                               | e^(y−1)           | ℝ             |
//! | `reverse_kl`     | −log x                                | −1/y              | (−∞, 0)       |
//! | `jeffrey`        | x log x − log x                       | 1/W₀(e^(1−y))     | ℝ             |
//! | `hellinger`      | (1 − √x)²                             | (1 − y)⁻²         | (−∞, 1)       |
//! | `jensen_shannon` | x log(2x/(x+1)) + log(2/(x+1))        | eʸ/(2 − eʸ)       | (−∞, log 2)   |
//! | `chi2`           | (x − 1)²                              | y/2 + 1           | (−2, ∞)       |

use std::f64::consts::LN_2;
use std::fmt;
use std::ops::Deref;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::interval::Interval;
use crate::lambert::lambert_w0_exp;

/// Tolerance on `Σp = 1` and `Σq = 1` for mass vectors.
pub const MASS_TOLERANCE: f64 = 1e-9;

pub trait Generator: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    fn f(&self, x: f64) -> f64;

    fn fdot(&self, x: f64) -> f64;

    /// Inverse of [`Generator::fdot`], defined on [`Generator::y_range`].
    fn fdot_inv(&self, y: f64) -> f64;

    /// Open range of `ḟ`, `(lim_{x→0⁺} ḟ(x), lim_{x→∞} ḟ(x))`.
    fn y_range(&self) -> Interval;

    /// Sub-interval of [`Generator::y_range`] on which `ḟ⁻¹ > 0`.
    ///
    /// `ḟ⁻¹` tends to zero at the lower end and to `+∞` at the upper end
    /// whenever that end is finite.
    fn positive_range(&self) -> Interval {
        self.y_range()
    }

    /// `lim_{x→0⁺} f(x)`, possibly `+∞`.
    /// `ḟ⁻¹(y⁺ − gap)` for the finite upper end `y⁺` of the positivity
    /// range. Keeps precision when `gap` is far below the ulp of `y⁺`.
    fn fdot_inv_below_top(&self, gap: f64) -> f64 {
        self.fdot_inv(self.positive_range().hi - gap)
    }

    fn f_at_zero(&self) -> f64;

    /// Whether `ḟ⁻¹`, extended by zero below its range, is nonnegative on
    /// all of ℝ. When true every regularization factor is admissible.
    fn fdot_inv_nonneg(&self) -> bool;
}

/// The six generators shipped with the library.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Kl,
    ReverseKl,
    Jeffrey,
    Hellinger,
    JensenShannon,
    Chi2,
}

impl Builtin {
    pub const ALL: [Builtin; 6] = [
        Builtin::Kl,
        Builtin::ReverseKl,
        Builtin::Jeffrey,
        Builtin::Hellinger,
        Builtin::JensenShannon,
        Builtin::Chi2,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Builtin::Kl => "kl",
            Builtin::ReverseKl => "reverse_kl",
            Builtin::Jeffrey => "jeffrey",
            Builtin::Hellinger => "hellinger",
            Builtin::JensenShannon => "jensen_shannon",
            Builtin::Chi2 => "chi2",
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown divergence '{s}'; expected one of kl, reverse_kl, jeffrey, hellinger, jensen_shannon, chi2"
                ))
            })
    }
}

impl Generator for Builtin {
    fn name(&self) -> &str {
        self.as_str()
    }

    fn f(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.f_at_zero();
        }
        match self {
            Builtin::Kl => x * x.ln(),
            Builtin::ReverseKl => -x.ln(),
            Builtin::Jeffrey => (x - 1.0) * x.ln(),
            Builtin::Hellinger => {
                let s = 1.0 - x.sqrt();
                s * s
            }
            Builtin::JensenShannon => {
                let l = (x + 1.0).ln();
                x * (LN_2 + x.ln() - l) + LN_2 - l
            }
            Builtin::Chi2 => (x - 1.0) * (x - 1.0),
        }
    }

    fn fdot(&self, x: f64) -> f64 {
        match self {
            Builtin::Kl => 1.0 + x.ln(),
            Builtin::ReverseKl => -1.0 / x,
            Builtin::Jeffrey => x.ln() + 1.0 - 1.0 / x,
            Builtin::Hellinger => 1.0 - 1.0 / x.sqrt(),
            // log(2x) − log(x+1) = log 2 − log(1 + 1/x)
            Builtin::JensenShannon => LN_2 - (1.0 / x).ln_1p(),
            Builtin::Chi2 => 2.0 * (x - 1.0),
        }
    }

    fn fdot_inv(&self, y: f64) -> f64 {
        match self {
            Builtin::Kl => (y - 1.0).exp(),
            Builtin::ReverseKl => -1.0 / y,
            Builtin::Jeffrey => 1.0 / lambert_w0_exp(1.0 - y),
            Builtin::Hellinger => {
                let d = 1.0 - y;
                1.0 / (d * d)
            }
            // eʸ/(2 − eʸ) = 1/(e^(log 2 − y) − 1)
            Builtin::JensenShannon => 1.0 / (LN_2 - y).exp_m1(),
            Builtin::Chi2 => 0.5 * y + 1.0,
        }
    }

    fn fdot_inv_below_top(&self, gap: f64) -> f64 {
        match self {
            Builtin::ReverseKl => 1.0 / gap,
            Builtin::Hellinger => 1.0 / (gap * gap),
            Builtin::JensenShannon => 1.0 / gap.exp_m1(),
            _ => self.fdot_inv(self.positive_range().hi - gap),
        }
    }

    fn y_range(&self) -> Interval {
        match self {
            Builtin::Kl | Builtin::Jeffrey | Builtin::Chi2 => Interval::REALS,
            Builtin::ReverseKl => Interval::new(f64::NEG_INFINITY, 0.0),
            Builtin::Hellinger => Interval::new(f64::NEG_INFINITY, 1.0),
            Builtin::JensenShannon => Interval::new(f64::NEG_INFINITY, LN_2),
        }
    }

    fn positive_range(&self) -> Interval {
        match self {
            Builtin::Chi2 => Interval::new(-2.0, f64::INFINITY),
            _ => self.y_range(),
        }
    }

    fn f_at_zero(&self) -> f64 {
        match self {
            Builtin::Kl => 0.0,
            Builtin::ReverseKl | Builtin::Jeffrey => f64::INFINITY,
            Builtin::Hellinger | Builtin::Chi2 => 1.0,
            Builtin::JensenShannon => LN_2,
        }
    }

    fn fdot_inv_nonneg(&self) -> bool {
        matches!(self, Builtin::Kl | Builtin::Jeffrey | Builtin::Hellinger)
    }
}

/// `x ↦ scale·f_base(x) + slope·(x − 1)` for `scale > 0`.
///
/// The linear term leaves the divergence itself unchanged (it integrates
/// to zero against any pair of probability measures) but shifts `ḟ`, so
/// this is the simplest way to build a user generator whose inverse
/// derivative is still available in closed form.
#[derive(Debug, Clone)]
pub struct Affine {
    name: String,
    base: DivergenceSpec,
    scale: f64,
    slope: f64,
}

impl Affine {
    pub fn new(name: impl Into<String>, base: DivergenceSpec, scale: f64, slope: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Config(format!("generator scale must be positive and finite, got {scale}")));
        }
        if !slope.is_finite() {
            return Err(Error::Config(format!("generator slope must be finite, got {slope}")));
        }
        Ok(Affine {
            name: name.into(),
            base,
            scale,
            slope,
        })
    }

    fn map(&self, r: Interval) -> Interval {
        Interval::new(self.scale * r.lo + self.slope, self.scale * r.hi + self.slope)
    }
}

impl Generator for Affine {
    fn name(&self) -> &str {
        &self.name
    }

    fn f(&self, x: f64) -> f64 {
        if x == 0.0 {
            return self.f_at_zero();
        }
        self.scale * self.base.f(x) + self.slope * (x - 1.0)
    }

    fn fdot(&self, x: f64) -> f64 {
        self.scale * self.base.fdot(x) + self.slope
    }

    fn fdot_inv(&self, y: f64) -> f64 {
        self.base.fdot_inv((y - self.slope) / self.scale)
    }

    fn fdot_inv_below_top(&self, gap: f64) -> f64 {
        self.base.fdot_inv_below_top(gap / self.scale)
    }

    fn y_range(&self) -> Interval {
        self.map(self.base.y_range())
    }

    fn positive_range(&self) -> Interval {
        self.map(self.base.positive_range())
    }

    fn f_at_zero(&self) -> f64 {
        self.scale * self.base.f_at_zero() - self.slope
    }

    fn fdot_inv_nonneg(&self) -> bool {
        self.base.fdot_inv_nonneg()
    }
}

/// Shared, immutable handle to a generator.
#[derive(Clone)]
pub struct DivergenceSpec(Arc<dyn Generator>);

impl DivergenceSpec {
    pub fn builtin(name: &str) -> Result<Self> {
        Ok(Builtin::from_str(name)?.into())
    }

    /// Wraps a user generator after checking it against [`check_generator`].
    pub fn custom<G: Generator + 'static>(generator: G) -> Result<Self> {
        let spec = DivergenceSpec(Arc::new(generator));
        check_generator(&*spec)?;
        Ok(spec)
    }
}

impl From<Builtin> for DivergenceSpec {
    fn from(b: Builtin) -> Self {
        DivergenceSpec(Arc::new(b))
    }
}

impl Deref for DivergenceSpec {
    type Target = dyn Generator;

    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl fmt::Debug for DivergenceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DivergenceSpec({})", self.name())
    }
}

/// Log-spaced grid of `count` points over `[lo, hi]`.
pub(crate) fn log_grid(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(move |i| (a + (b - a) * i as f64 / (count - 1) as f64).exp())
}

/// Checks the structural invariants every generator must satisfy:
/// `f(1) = 0`, strictly increasing `ḟ`, midpoint convexity, the
/// `ḟ⁻¹∘ḟ` round trip and positivity of `ḟ⁻¹` on its range.
pub fn check_generator(spec: &dyn Generator) -> Result<()> {
    let bad = |what: String| Err(Error::Config(format!("generator '{}': {what}", spec.name())));

    let f1 = spec.f(1.0);
    if !(f1.abs() <= 1e-12) {
        return bad(format!("f(1) = {f1}, expected 0"));
    }
    let y_range = spec.y_range();
    let pos = spec.positive_range();
    if y_range.is_empty() || pos.is_empty() || pos.lo < y_range.lo || pos.hi > y_range.hi {
        return bad(format!("inconsistent ranges y_range = {y_range}, positive_range = {pos}"));
    }

    let xs: Vec<f64> = log_grid(1e-6, 1e6, 241).collect();
    let mut prev = f64::NEG_INFINITY;
    for &x in &xs {
        let y = spec.fdot(x);
        if !(y > prev) {
            return bad(format!("fdot is not strictly increasing at x = {x}"));
        }
        prev = y;
        if !y.is_finite() {
            continue;
        }
        let back = spec.fdot_inv(y);
        if !((back - x).abs() <= 1e-10 * x) {
            return bad(format!("fdot_inv(fdot({x})) = {back}"));
        }
    }
    for (i, &a) in xs.iter().enumerate().step_by(7) {
        for &b in xs.iter().skip(i + 1).step_by(11) {
            let mid = spec.f(0.5 * (a + b));
            let chord = 0.5 * (spec.f(a) + spec.f(b));
            if mid > chord + 1e-12 * chord.abs().max(1.0) {
                return bad(format!("not midpoint convex on ({a}, {b})"));
            }
        }
    }
    for x in log_grid(1e-3, 1e3, 61) {
        let y = spec.fdot(x);
        if pos.contains(y) && !(spec.fdot_inv(y) > 0.0) {
            return bad(format!("fdot_inv({y}) is not positive"));
        }
        if pos.hi.is_finite() {
            let back = spec.fdot_inv_below_top(pos.hi - y);
            if !((back - x).abs() <= 1e-8 * x) {
                return bad(format!("fdot_inv_below_top disagrees with fdot_inv at y = {y}"));
            }
        }
    }
    Ok(())
}

/// `D_f(P‖Q) = Σ qᵢ f(pᵢ/qᵢ)` for mass vectors on a common finite support.
pub fn f_divergence(p: &[f64], q: &[f64], spec: &dyn Generator) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidInput(format!(
            "mass vectors differ in length: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    if let Some((i, &qi)) = q.iter().enumerate().find(|(_, &qi)| !(qi > 0.0)) {
        return Err(Error::InvalidInput(format!("reference mass q[{i}] = {qi} is not positive")));
    }
    if let Some((i, &pi)) = p.iter().enumerate().find(|(_, &pi)| !(pi >= 0.0)) {
        return Err(Error::InvalidInput(format!("mass p[{i}] = {pi} is negative")));
    }
    for (label, v) in [("p", p), ("q", q)] {
        let total: f64 = v.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidInput(format!("{label} sums to {total}, expected 1")));
        }
    }
    Ok(p.iter()
        .zip(q)
        .map(|(&pi, &qi)| {
            if pi == 0.0 {
                qi * spec.f_at_zero()
            } else {
                qi * spec.f(pi / qi)
            }
        })
        .sum())
}
