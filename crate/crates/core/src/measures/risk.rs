use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Loss {
    /// `ℓ(ŷ, y) = (ŷ − y)²`
    Squared,
}

impl Loss {
    pub fn eval(self, predicted: f64, label: f64) -> f64 {
        match self {
            Loss::Squared => (predicted - label) * (predicted - label),
        }
    }
}

impl FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "squared" => Ok(Loss::Squared),
            other => Err(Error::Config(format!("unknown loss '{other}'; expected 'squared'"))),
        }
    }
}

impl fmt::Display for Loss {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("squared")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Predictor {
    /// `h(θ, x) = x·θ`
    Linear,
}

impl Predictor {
    pub fn eval(self, theta: &[f64], x: &[f64]) -> f64 {
        match self {
            Predictor::Linear => theta.iter().zip(x).map(|(t, x)| t * x).sum(),
        }
    }
}

impl FromStr for Predictor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Predictor::Linear),
            other => Err(Error::Config(format!("unknown predictor '{other}'; expected 'linear'"))),
        }
    }
}

impl fmt::Display for Predictor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("linear")
    }
}

/// One labeled pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub x: Vec<f64>,
    pub y: f64,
}

impl Sample {
    pub fn new(x: impl Into<Vec<f64>>, y: f64) -> Self {
        Sample { x: x.into(), y }
    }
}

/// Average loss of the model `theta` over `data`.
pub fn empirical_risk(theta: &[f64], data: &[Sample], loss: Loss, predictor: Predictor) -> Result<f64> {
    if data.is_empty() {
        return Err(Error::InvalidInput("dataset is empty".into()));
    }
    if let Some(s) = data.iter().find(|s| s.x.len() != theta.len()) {
        return Err(Error::InvalidInput(format!(
            "pattern has dimension {} but the model has dimension {}",
            s.x.len(),
            theta.len()
        )));
    }
    let total: f64 = data
        .iter()
        .map(|s| loss.eval(predictor.eval(theta, &s.x), s.y))
        .sum();
    Ok(total / data.len() as f64)
}

/// Extended-real bounds `(inf L, sup L)` over the support.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBounds {
    pub min: f64,
    pub max: f64,
}

impl RiskBounds {
    pub fn of_values(values: &[f64]) -> Self {
        values.iter().fold(
            RiskBounds {
                min: f64::INFINITY,
                max: f64::NEG_INFINITY,
            },
            |b, &v| RiskBounds {
                min: b.min.min(v),
                max: b.max.max(v),
            },
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RiskSpec {
    /// `L_z(θᵢ)` tabulated in atom order.
    Values(Vec<f64>),
    Dataset {
        data: Vec<Sample>,
        loss: Loss,
        predictor: Predictor,
    },
}

impl RiskSpec {
    pub fn dataset(data: Vec<Sample>) -> Self {
        RiskSpec::Dataset {
            data,
            loss: Loss::Squared,
            predictor: Predictor::Linear,
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Result<f64> {
        match self {
            RiskSpec::Values(_) => Err(Error::Config(
                "tabulated risks are only defined at the atoms of a discrete measure".into(),
            )),
            RiskSpec::Dataset { data, loss, predictor } => empirical_risk(theta, data, *loss, *predictor),
        }
    }

    /// Coefficients `(A, B, C)` of `L(θ) = Aθ² − 2Bθ + C` for the squared
    /// loss with a scalar linear predictor.
    pub(crate) fn quadratic_1d(&self) -> Option<(f64, f64, f64)> {
        match self {
            RiskSpec::Dataset {
                data,
                loss: Loss::Squared,
                predictor: Predictor::Linear,
            } if data.iter().all(|s| s.x.len() == 1) && !data.is_empty() => {
                let n = data.len() as f64;
                let a = data.iter().map(|s| s.x[0] * s.x[0]).sum::<f64>() / n;
                let b = data.iter().map(|s| s.x[0] * s.y).sum::<f64>() / n;
                let c = data.iter().map(|s| s.y * s.y).sum::<f64>() / n;
                Some((a, b, c))
            }
            _ => None,
        }
    }

    /// Analytic bounds and minimizers of a 1-D risk on `[lo, hi]`.
    pub(crate) fn analytic_1d(&self, lo: f64, hi: f64) -> Result<(RiskBounds, Vec<f64>)> {
        let (a, b, c) = self
            .quadratic_1d()
            .ok_or_else(|| Error::Config("continuous reference measures need a 1-D dataset risk".into()))?;
        let eval = |t: f64| {
            if t.is_infinite() {
                if a > 0.0 {
                    f64::INFINITY
                } else {
                    c
                }
            } else {
                (a * t * t - 2.0 * b * t + c).max(0.0)
            }
        };
        if a == 0.0 {
            return Ok((RiskBounds { min: c, max: c }, Vec::new()));
        }
        let argmin = (b / a).clamp(lo, hi);
        let bounds = RiskBounds {
            min: eval(argmin),
            max: eval(lo).max(eval(hi)),
        };
        Ok((bounds, vec![argmin]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_values() {
        let sq = Loss::Squared;
        let lin = Predictor::Linear;
        assert_eq!(empirical_risk(&[2.0], &[Sample::new([1.0], 0.0)], sq, lin).unwrap(), 4.0);
        assert_eq!(empirical_risk(&[1.0], &[Sample::new([1.0], 1.0)], sq, lin).unwrap(), 0.0);
        let two = [Sample::new([1.0], 0.0), Sample::new([2.0], 0.0)];
        assert_eq!(empirical_risk(&[1.0], &two, sq, lin).unwrap(), 2.5);
    }

    #[test]
    fn errors() {
        let sq = Loss::Squared;
        let lin = Predictor::Linear;
        assert!(empirical_risk(&[1.0], &[], sq, lin).is_err());
        assert!(empirical_risk(&[1.0, 2.0], &[Sample::new([1.0], 0.0)], sq, lin).is_err());
        assert!("hinge".parse::<Loss>().is_err());
        assert!("quadratic".parse::<Predictor>().is_err());
    }

    #[test]
    fn multi_dimensional_models() {
        let data = [Sample::new([1.0, 2.0], 3.0)];
        let r = empirical_risk(&[1.0, 1.0], &data, Loss::Squared, Predictor::Linear).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn analytic_bounds_of_example_risks() {
        let ex1 = RiskSpec::dataset(vec![Sample::new([1.0], 0.0)]);
        let (b, s) = ex1.analytic_1d(0.0, f64::INFINITY).unwrap();
        assert_eq!((b.min, b.max, s), (0.0, f64::INFINITY, vec![0.0]));
        let ex2 = RiskSpec::dataset(vec![Sample::new([1.0], 1.0)]);
        let (b, s) = ex2.analytic_1d(0.0, f64::INFINITY).unwrap();
        assert_eq!((b.min, b.max, s), (0.0, f64::INFINITY, vec![1.0]));
        let (b, _) = ex2.analytic_1d(2.0, 3.0).unwrap();
        assert_eq!((b.min, b.max), (1.0, 4.0));
    }
}
