use crate::error::{Error, Result};

use super::{accumulate, Integral, ReferenceMeasure, RiskBounds, RiskSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportKind {
    Discrete,
    Quadrature,
}

/// A reference measure paired with the empirical risk on its support,
/// flattened into weighted points.
///
/// For discrete measures the points are the atoms and the weights their
/// masses. For densities they are the nodes of the composite rule (graded
/// toward the risk minimizers, where constraint integrands blow up first)
/// with the normalized density folded into the weights.
#[derive(Debug, Clone)]
pub struct Support {
    kind: SupportKind,
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    levels: Vec<Option<u8>>,
    risks: Vec<f64>,
    bounds: RiskBounds,
    singular: Vec<f64>,
}

impl Support {
    pub fn new(measure: &ReferenceMeasure, risk: &RiskSpec) -> Result<Self> {
        let support = match measure {
            ReferenceMeasure::Discrete(m) => {
                let risks = match risk {
                    RiskSpec::Values(v) => {
                        if v.len() != m.len() {
                            return Err(Error::InvalidInput(format!(
                                "{} risk values for {} atoms",
                                v.len(),
                                m.len()
                            )));
                        }
                        v.clone()
                    }
                    RiskSpec::Dataset { .. } => m.atoms().iter().map(|a| risk.eval(a)).collect::<Result<_>>()?,
                };
                Support {
                    kind: SupportKind::Discrete,
                    points: m.atoms().to_vec(),
                    weights: m.masses().to_vec(),
                    levels: vec![None; m.len()],
                    bounds: RiskBounds::of_values(&risks),
                    risks,
                    singular: Vec::new(),
                }
            }
            ReferenceMeasure::Density(m) => {
                let (lo, hi) = m.density().support();
                let (bounds, _) = risk.analytic_1d(lo, hi)?;
                let (a, b) = m.domain();
                let (_, singular) = risk.analytic_1d(a, b)?;
                let rule = m.rule(m.panels(), &singular);
                let risks: Vec<f64> = rule
                    .nodes
                    .iter()
                    .map(|&x| risk.eval(std::slice::from_ref(&x)))
                    .collect::<Result<_>>()?;
                // guard the closed form against rounding at the minimizer
                let sampled = RiskBounds::of_values(&risks);
                let bounds = RiskBounds {
                    min: bounds.min.min(sampled.min),
                    max: bounds.max.max(sampled.max),
                };
                Support {
                    kind: SupportKind::Quadrature,
                    points: rule.nodes.iter().map(|&x| vec![x]).collect(),
                    weights: rule.weights,
                    levels: rule.levels,
                    risks,
                    bounds,
                    singular,
                }
            }
        };
        support.check_risks()?;
        Ok(support)
    }

    /// Discrete support on indexed atoms with tabulated risks.
    pub fn discrete(masses: &[f64], risks: &[f64]) -> Result<Self> {
        let m = super::DiscreteMeasure::indexed(masses.to_vec())?;
        Support::new(&m.into(), &RiskSpec::Values(risks.to_vec()))
    }

    fn check_risks(&self) -> Result<()> {
        match self.risks.iter().enumerate().find(|(_, &r)| !(r >= 0.0 && r.is_finite())) {
            Some((i, r)) => Err(Error::InvalidInput(format!(
                "risk at support point {i} is {r}; empirical risks must be finite and nonnegative"
            ))),
            None => Ok(()),
        }
    }

    /// Same points and weights with different risk values. Transformed
    /// risks may be negative.
    pub fn with_risks(&self, risks: Vec<f64>, bounds: RiskBounds) -> Result<Self> {
        if risks.len() != self.len() {
            return Err(Error::InvalidInput(format!(
                "{} risk values for a support of size {}",
                risks.len(),
                self.len()
            )));
        }
        if let Some(i) = risks.iter().position(|r| !r.is_finite()) {
            return Err(Error::InvalidInput(format!("transformed risk at support point {i} is not finite")));
        }
        Ok(Support {
            risks,
            bounds,
            ..self.clone()
        })
    }

    pub fn kind(&self) -> SupportKind {
        self.kind
    }

    pub fn is_discrete(&self) -> bool {
        self.kind == SupportKind::Discrete
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn risks(&self) -> &[f64] {
        &self.risks
    }

    pub fn bounds(&self) -> RiskBounds {
        self.bounds
    }

    /// Points around which the quadrature rule is graded.
    pub fn singular_points(&self) -> &[f64] {
        &self.singular
    }

    /// `Σ wᵢ·value(i)` with divergence detection over graded levels.
    pub fn integrate(&self, value: impl Fn(usize) -> f64) -> Result<Integral> {
        accumulate(&self.weights, &self.levels, (0..self.len()).map(value))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteMeasure, QuadratureMeasure, Sample};

    #[test]
    fn bounds_bracket_every_risk() {
        let q = QuadratureMeasure::example1().into();
        let risk = RiskSpec::dataset(vec![Sample::new([1.0], 1.0), Sample::new([2.0], 0.5)]);
        let s = Support::new(&q, &risk).unwrap();
        let b = s.bounds();
        assert!(s.risks().iter().all(|&r| b.min <= r && r <= b.max));
        assert!(b.max.is_infinite());

        let m = DiscreteMeasure::new(vec![vec![0.0], vec![1.0], vec![3.0]], vec![0.2, 0.3, 0.5]).unwrap();
        let s = Support::new(&m.into(), &risk).unwrap();
        let b = s.bounds();
        assert!(s.risks().iter().all(|&r| b.min <= r && r <= b.max));
        assert!(s.risks().contains(&b.min) && s.risks().contains(&b.max));
    }

    #[test]
    fn weights_are_normalized() {
        let s = Support::new(
            &QuadratureMeasure::example1().into(),
            &RiskSpec::dataset(vec![Sample::new([1.0], 0.0)]),
        )
        .unwrap();
        assert!((s.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
        assert_eq!(s.singular_points(), &[0.0]);
    }

    #[test]
    fn risk_shape_errors() {
        assert!(Support::discrete(&[0.5, 0.5], &[1.0]).is_err());
        assert!(Support::discrete(&[0.5, 0.5], &[1.0, -1.0]).is_err());
        assert!(Support::new(&QuadratureMeasure::example1().into(), &RiskSpec::Values(vec![1.0])).is_err());
    }
}
