use std::time::Instant;

use fdr::equivalence::{risk_transform, verify_equivalence_shifted};
use fdr::measures::{Support, SupportKind, Verdict};
use fdr::oracle::{
    admissible_lambda, certify, oracle_stationarity, random_instance, simplex_minimize, Certificate, DEFAULT_MAX_ITERS,
};
use fdr::solver::{classify_boundary, default_tol, posterior, BoundaryReport, Posterior};
use fdr::{Builtin, DivergenceSpec, Error};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::Value;

use crate::error::CliError;
use crate::json::{num, nums, opt, Obj};
use crate::problem::{self, LambdaSpec, Problem};

/// Stop tolerance on the per-iteration objective decrease of the oracle.
pub const ORACLE_STOP: f64 = 1e-15;
pub const CERTIFY_TOL: f64 = 1e-6;
pub const RANDOM_SIZES: [usize; 3] = [3, 8, 16];
pub const RANDOM_INSTANCES: usize = 20;

#[derive(Debug, Clone, Default)]
pub struct Settings {
    pub tol: Option<f64>,
    pub lambda: Option<f64>,
    pub panels: Option<usize>,
    pub seed: u64,
    pub timings: bool,
    pub with: Option<String>,
}

pub enum Body {
    Json(Value),
    Text(String),
}

/// What a command produced, and whether its checks passed.
pub struct Report {
    pub body: Body,
    pub failure: Option<String>,
}

impl Report {
    fn json(v: Value) -> Self {
        Report {
            body: Body::Json(v),
            failure: None,
        }
    }
}

pub fn load(source: &str, settings: &Settings) -> Result<Problem, CliError> {
    problem::parse(source, settings.panels)
}

fn support(p: &Problem) -> Result<Support, CliError> {
    Ok(Support::new(&p.reference, &p.risk)?)
}

fn tol(p: &Problem, s: &Settings, support: &Support) -> f64 {
    s.tol.or(p.tol).unwrap_or_else(|| default_tol(support))
}

fn single_lambda(p: &Problem, s: &Settings) -> Result<f64, CliError> {
    if let Some(l) = s.lambda {
        return Ok(l);
    }
    match p.lambda {
        Some(LambdaSpec::Value(l)) => Ok(l),
        Some(LambdaSpec::Grid { .. }) => Err(CliError::Schema(
            "lambda: this command needs a single value; pass --lambda or use sweep".into(),
        )),
        None => Err(CliError::Schema("lambda: missing (set it in the file or pass --lambda)".into())),
    }
}

fn kind(s: &Support) -> &'static str {
    match s.kind() {
        SupportKind::Discrete => "discrete",
        SupportKind::Quadrature => "quadrature",
    }
}

fn points(s: &Support) -> Value {
    match s.kind() {
        SupportKind::Discrete => Value::Array(s.points().iter().map(|p| nums(p)).collect()),
        SupportKind::Quadrature => Value::Array(s.points().iter().map(|p| num(p[0])).collect()),
    }
}

fn timed<T>(on: bool, f: impl FnOnce() -> T) -> (T, Option<f64>) {
    let start = Instant::now();
    let out = f();
    (out, on.then(|| start.elapsed().as_secs_f64()))
}

fn with_timing(obj: Obj, seconds: Option<f64>) -> Obj {
    match seconds {
        Some(t) => obj.set("timings", Obj::new().f("seconds", t).build()),
        None => obj,
    }
}

fn posterior_record(post: &Posterior, tol: f64) -> Obj {
    Obj::new()
        .set("divergence", post.spec.name())
        .f("lambda", post.lambda)
        .f("beta", post.beta)
        .f("normalization", post.normalization)
        .f("tol", tol)
        .f("objective", post.objective())
        .f("stationarity_residual", post.stationarity_residual())
        .f("min_rn", post.min_rn())
        .f("max_rn", post.max_rn())
        .set("support", kind(&post.support))
        .set("points", points(&post.support))
        .set("rn", nums(&post.rn))
        .set("masses", nums(&post.masses()))
}

pub fn solve(p: &Problem, s: &Settings) -> Result<Report, CliError> {
    let support = support(p)?;
    let lambda = single_lambda(p, s)?;
    let tol = tol(p, s, &support);
    let (post, secs) = timed(s.timings, || posterior(&p.divergence, &support, lambda, tol));
    let record = Obj::new()
        .set("command", "solve")
        .set("result", posterior_record(&post?, tol).build());
    Ok(Report::json(with_timing(record, secs).build()))
}

pub fn sweep(p: &Problem, s: &Settings) -> Result<Report, CliError> {
    let support = support(p)?;
    let grid = match (s.lambda, p.lambda) {
        (Some(l), _) => vec![l],
        (None, Some(spec)) => spec.values(),
        (None, None) => return Err(CliError::Schema("lambda: sweep needs a grid".into())),
    };
    let tol = tol(p, s, &support);
    let rows: Vec<Result<String, CliError>> = grid
        .par_iter()
        .map(|&lambda| match posterior(&p.divergence, &support, lambda, tol) {
            Ok(post) => Ok(format!(
                "{lambda:.16e},{:.16e},{:.16e},{:.16e},{:.16e},true",
                post.beta,
                post.beta,
                post.min_rn(),
                post.max_rn()
            )),
            Err(Error::NoFeasibleBeta { .. }) | Err(Error::InfeasiblePoint { .. }) => {
                Ok(format!("{lambda:.16e},,,,,false"))
            }
            Err(e) => Err(e.into()),
        })
        .collect();
    let mut out = String::from("lambda,N_lambda,beta,min_rn,max_rn,feasible\n");
    for row in rows {
        out.push_str(&row?);
        out.push('\n');
    }
    Ok(Report {
        body: Body::Text(out),
        failure: None,
    })
}

pub fn boundary_record(spec: &DivergenceSpec, r: &BoundaryReport) -> Obj {
    let integral = match &r.boundary_integral {
        None => Value::Null,
        Some(i) => {
            let tail = i.level_sums.len().saturating_sub(6);
            Obj::new()
                .f("value", i.value)
                .set(
                    "verdict",
                    match i.verdict {
                        Verdict::Finite => "finite",
                        Verdict::Divergent => "divergent",
                        Verdict::Unresolved => "unresolved",
                    },
                )
                .set("level_sums_tail", nums(&i.level_sums[tail..]))
                .build()
        }
    };
    Obj::new()
        .set("divergence", spec.name())
        .f("t_star", r.t_star)
        .set("boundary", r.boundary.as_str())
        .set("lambda_star", opt(r.lambda_star))
        .set(
            "admissible_lambda",
            Obj::new()
                .f("lo", r.admissible.lo)
                .set("lo_closed", r.admissible.lo_closed)
                .set("interval", r.admissible.to_string())
                .build(),
        )
        .set("boundary_integral", integral)
        .set(
            "probes",
            Value::Array(r.probes.iter().map(|&(e, k)| nums(&[e, k])).collect()),
        )
}

pub fn classify(p: &Problem, s: &Settings) -> Result<Report, CliError> {
    let support = support(p)?;
    let tol = tol(p, s, &support);
    let (report, secs) = timed(s.timings, || classify_boundary(&*p.divergence, &support, tol));
    let record = Obj::new()
        .set("command", "classify")
        .set("result", boundary_record(&p.divergence, &report?).build());
    Ok(Report::json(with_timing(record, secs).build()))
}

pub fn equiv(p: &Problem, s: &Settings) -> Result<Report, CliError> {
    let g = match (&s.with, &p.second_divergence) {
        (Some(name), _) => problem::divergence(&Value::String(name.clone()), "--with")?,
        (None, Some(g)) => g.clone(),
        (None, None) => {
            return Err(CliError::Schema(
                "second_divergence: missing (set it in the file or pass --with)".into(),
            ))
        }
    };
    let support = support(p)?;
    let lambda = single_lambda(p, s)?;
    let tol = tol(p, s, &support);
    let (res, secs) = timed(s.timings, || {
        verify_equivalence_shifted(&p.divergence, &g, lambda, &support, tol, 0.0)
    });
    let (report, f_post, g_post) = res?;
    let transform = risk_transform(&f_post, &g)?;
    let record = Obj::new().set("command", "equiv").set(
        "result",
        Obj::new()
            .set("f", report.f.clone())
            .set("g", report.g.clone())
            .f("lambda", report.lambda)
            .f("beta_f", report.beta_f)
            .f("beta_g", report.beta_g)
            .f("gap", report.gap)
            .set("transformed_risk", nums(&transform.values))
            .set("rn_f", nums(&f_post.rn))
            .set("rn_g", nums(&g_post.rn))
            .build(),
    );
    Ok(Report::json(with_timing(record, secs).build()))
}

fn certificate_record(c: &Certificate) -> Obj {
    Obj::new()
        .f("closed_form_objective", c.closed_form_objective)
        .f("oracle_objective", c.oracle_objective)
        .f("objective_gap", c.objective_gap)
        .f("mass_gap", c.mass_gap)
        .set("oracle_converged", c.oracle_converged)
        .f("tol", c.tol)
        .set("pass", c.pass)
}

/// Quadrature supports are certified as discrete instances on their nodes.
fn as_discrete(support: &Support) -> Result<Support, CliError> {
    if support.is_discrete() {
        return Ok(support.clone());
    }
    log::info!("certifying the quadrature rule as a {}-atom discrete instance", support.len());
    let keep: Vec<usize> = (0..support.len()).filter(|&i| support.weights()[i] > 0.0).collect();
    let w: Vec<f64> = keep.iter().map(|&i| support.weights()[i]).collect();
    let total: f64 = w.iter().sum();
    let w: Vec<f64> = w.iter().map(|x| x / total).collect();
    let l: Vec<f64> = keep.iter().map(|&i| support.risks()[i]).collect();
    Ok(Support::discrete(&w, &l)?)
}

pub fn certify_one(
    spec: &DivergenceSpec,
    support: &Support,
    lambda: f64,
    tol: f64,
) -> Result<(Certificate, f64, usize), CliError> {
    let post = posterior(spec, support, lambda, tol)?;
    let oracle = simplex_minimize(support, lambda, &**spec, DEFAULT_MAX_ITERS, ORACLE_STOP)?;
    let cert = certify(support, lambda, &**spec, &post.masses(), &oracle, CERTIFY_TOL)?;
    Ok((cert, oracle_stationarity(&oracle, support, lambda, &**spec), oracle.iterations))
}

pub fn oracle_check(p: Option<&Problem>, s: &Settings) -> Result<Report, CliError> {
    let start = Instant::now();
    let mut record = Obj::new().set("command", "oracle-check");
    let failure;
    match p {
        Some(p) => {
            let support = as_discrete(&support(p)?)?;
            let lambda = single_lambda(p, s)?;
            let tol = tol(p, s, &support);
            let (cert, stationarity, iterations) = certify_one(&p.divergence, &support, lambda, tol)?;
            failure = (!cert.pass).then(|| format!("{}: {cert:?}", p.divergence.name()));
            record = record.set(
                "result",
                certificate_record(&cert)
                    .set("divergence", p.divergence.name())
                    .f("lambda", lambda)
                    .f("oracle_stationarity", stationarity)
                    .set("oracle_iterations", iterations)
                    .build(),
            );
        }
        None => {
            let rows = random_batch(s.seed)?;
            let failed: Vec<String> = rows
                .iter()
                .filter(|r| !r.pass)
                .map(|r| format!("{} #{}", r.divergence, r.index))
                .collect();
            failure = (!failed.is_empty()).then(|| format!("certificates failed for {}", failed.join(", ")));
            let worst = rows.iter().map(|r| r.mass_gap).fold(0.0, f64::max);
            record = record.set(
                "result",
                Obj::new()
                    .set("seed", s.seed)
                    .set("instances", rows.len())
                    .set("passed", rows.iter().filter(|r| r.pass).count())
                    .f("worst_mass_gap", worst)
                    .set(
                        "rows",
                        Value::Array(
                            rows.iter()
                                .map(|r| {
                                    Obj::new()
                                        .set("divergence", r.divergence.clone())
                                        .set("index", r.index)
                                        .set("atoms", r.atoms)
                                        .f("lambda", r.lambda)
                                        .f("objective_gap", r.objective_gap)
                                        .f("mass_gap", r.mass_gap)
                                        .set("pass", r.pass)
                                        .build()
                                })
                                .collect(),
                        ),
                    )
                    .build(),
            );
        }
    }
    let secs = s.timings.then(|| start.elapsed().as_secs_f64());
    Ok(Report {
        body: Body::Json(with_timing(record, secs).build()),
        failure,
    })
}

pub struct BatchRow {
    pub divergence: String,
    pub index: usize,
    pub atoms: usize,
    pub lambda: f64,
    pub objective_gap: f64,
    pub mass_gap: f64,
    pub pass: bool,
}

/// Six builtins times [`RANDOM_INSTANCES`] seeded instances.
pub fn random_batch(seed: u64) -> Result<Vec<BatchRow>, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = Vec::new();
    for b in Builtin::ALL {
        for i in 0..RANDOM_INSTANCES {
            jobs.push((b, i, random_instance(&mut rng, RANDOM_SIZES[i % RANDOM_SIZES.len()])?));
        }
    }
    jobs.par_iter()
        .map(|(b, i, support)| {
            let lambda = admissible_lambda(b, support, fdr::solver::DISCRETE_TOL)?;
            let (cert, _, _) = certify_one(&(*b).into(), support, lambda, fdr::solver::DISCRETE_TOL)?;
            Ok(BatchRow {
                divergence: b.to_string(),
                index: *i,
                atoms: support.len(),
                lambda,
                objective_gap: cert.objective_gap,
                mass_gap: cert.mass_gap,
                pass: cert.pass && cert.mass_gap <= 1e-4,
            })
        })
        .collect()
}
