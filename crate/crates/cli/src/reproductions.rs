//! Known worked examples, rerun as checks.

use fdr::equivalence::{risk_transform, verify_equivalence};
use fdr::measures::{QuadratureMeasure, RiskSpec, Sample, Support, DIVERGENCE_THRESHOLD, TAIL_LEVELS};
use fdr::solver::{classify_boundary, constraint_integral, posterior, solve_beta, BoundaryKind, DISCRETE_TOL};
use fdr::{Builtin, Result};

pub const DEFAULT_TOL: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Check {
    pub example: &'static str,
    pub name: &'static str,
    pub value: f64,
    pub expected: String,
    pub pass: bool,
}

fn within(example: &'static str, name: &'static str, value: f64, target: f64, tol: f64) -> Check {
    Check {
        example,
        name,
        value,
        expected: format!("{target} ± {tol:e}"),
        pass: (value - target).abs() <= tol,
    }
}

fn flag(example: &'static str, name: &'static str, value: f64, expected: &str, pass: bool) -> Check {
    Check {
        example,
        name,
        value,
        expected: expected.to_string(),
        pass,
    }
}

/// `Q = 4θ²e^(−2θ)` with the squared loss of `θ` on the single pattern
/// `(1, y)`, so `L(θ) = (θ − y)²`.
pub fn gamma_instance(y: f64, panels: Option<usize>) -> Result<Support> {
    let q = match panels {
        Some(n) => QuadratureMeasure::example1().with_panels(n),
        None => QuadratureMeasure::example1(),
    };
    Support::new(&q.into(), &RiskSpec::dataset(vec![Sample::new([1.0], y)]))
}

pub fn two_atom() -> Result<Support> {
    Support::discrete(&[0.5, 0.5], &[0.0, 1.0])
}

fn failed(example: &'static str, name: &'static str, e: fdr::Error) -> Check {
    Check {
        example,
        name,
        value: f64::NAN,
        expected: format!("error: {e}"),
        pass: false,
    }
}

pub fn example1(tol: f64, panels: Option<usize>) -> Vec<Check> {
    const EX: &str = "1";
    let s = match gamma_instance(0.0, panels) {
        Ok(s) => s,
        Err(e) => return vec![failed(EX, "setup", e)],
    };
    let solver_tol = tol.min(1e-6);
    let mut out = Vec::new();
    // at t = 0, λ = 1 the reverse-KL integrand is exactly 1/θ²
    match constraint_integral(&Builtin::ReverseKl, &s, 0.0, 1.0) {
        Ok(k) => out.push(within(EX, "integral of 1/theta^2 dQ", k.value, 2.0, tol)),
        Err(e) => out.push(failed(EX, "integral of 1/theta^2 dQ", e)),
    }
    match solve_beta(&Builtin::ReverseKl, &s, 0.5, solver_tol) {
        Ok(b) => out.push(within(EX, "N(1/2)", b, 0.0, tol)),
        Err(e) => out.push(failed(EX, "N(1/2)", e)),
    }
    match classify_boundary(&Builtin::ReverseKl, &s, solver_tol) {
        Ok(r) => {
            out.push(flag(
                EX,
                "boundary is closed_left",
                r.t_star,
                "closed_left",
                r.boundary == BoundaryKind::ClosedLeft,
            ));
            out.push(within(EX, "lambda*", r.lambda_star.unwrap_or(f64::NAN), 0.5, tol));
        }
        Err(e) => out.push(failed(EX, "classify", e)),
    }
    out
}

pub fn example2(tol: f64, panels: Option<usize>) -> Vec<Check> {
    const EX: &str = "2";
    let s = match gamma_instance(1.0, panels) {
        Ok(s) => s,
        Err(e) => return vec![failed(EX, "setup", e)],
    };
    let r = match classify_boundary(&Builtin::ReverseKl, &s, tol.min(1e-6)) {
        Ok(r) => r,
        Err(e) => return vec![failed(EX, "classify", e)],
    };
    let sums = r.boundary_integral.as_ref().map(|i| i.level_sums.clone()).unwrap_or_default();
    let peak = sums.iter().copied().fold(0.0, f64::max);
    let tail = &sums[sums.len().saturating_sub(TAIL_LEVELS + 1)..];
    let growing = tail.len() == TAIL_LEVELS + 1 && tail.windows(2).all(|w| w[1] > w[0]);
    vec![
        flag(
            EX,
            "boundary is open_left",
            r.t_star,
            "open_left",
            r.boundary == BoundaryKind::OpenLeft,
        ),
        flag(EX, "k(t*) under refinement", peak, "> 1e9", peak > DIVERGENCE_THRESHOLD),
        flag(
            EX,
            "last refinement levels grow",
            tail.last().copied().unwrap_or(f64::NAN),
            "increasing",
            growing,
        ),
    ]
}

pub fn example4() -> Vec<Check> {
    const EX: &str = "4";
    let run = || -> Result<Vec<Check>> {
        let s = two_atom()?;
        let lambda = 1.0;
        let report = verify_equivalence(&Builtin::Kl.into(), &Builtin::ReverseKl.into(), lambda, &s, DISCRETE_TOL)?;
        let post = posterior(&Builtin::Kl.into(), &s, lambda, DISCRETE_TOL)?;
        let v = risk_transform(&post, &Builtin::ReverseKl.into())?;
        let z: f64 = s.weights().iter().zip(s.risks()).map(|(q, l)| q * (-l / lambda).exp()).sum();
        let worst = v
            .values
            .iter()
            .zip(s.risks())
            .map(|(v, l)| {
                let closed = lambda * (l / lambda).exp() * z;
                (v - closed).abs() / closed
            })
            .fold(0.0, f64::max);
        Ok(vec![
            flag(EX, "posterior gap kl -> reverse_kl", report.gap, "<= 1e-8", report.gap <= 1e-8),
            flag(EX, "v against lambda*exp(L/lambda)*Z", worst, "<= 1e-6 relative", worst <= 1e-6),
        ])
    };
    run().unwrap_or_else(|e| vec![failed(EX, "equivalence", e)])
}

pub fn all(tol: f64, panels: Option<usize>) -> Vec<Check> {
    let mut checks = example1(tol, panels);
    checks.extend(example2(tol, panels));
    checks.extend(example4());
    checks
}

pub fn table(checks: &[Check]) -> String {
    let mut out = format!("{:<8} {:<36} {:>24}  {:<20} {}\n", "example", "check", "value", "expected", "result");
    for c in checks {
        out.push_str(&format!(
            "{:<8} {:<36} {:>24.16e}  {:<20} {}\n",
            c.example,
            c.name,
            c.value,
            c.expected,
            if c.pass { "pass" } else { "FAIL" }
        ));
    }
    let examples = ["1", "2", "4"];
    let passed = examples
        .iter()
        .filter(|e| checks.iter().filter(|c| c.example == **e).all(|c| c.pass))
        .count();
    out.push_str(&format!("{passed}/{} examples pass\n", examples.len()));
    out
}
