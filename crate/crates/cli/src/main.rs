use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fdr_cli::commands::{self, Body, Report, Settings};
use fdr_cli::{reproductions, CliError};

/// Empirical risk minimization with f-divergence regularization.
#[derive(Parser, Debug)]
#[command(name = "fdr", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Problem file (JSON).
    #[arg(long, global = true)]
    problem: Option<PathBuf>,

    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Solver tolerance on the normalization constraint; for `examples`,
    /// the tolerance of every numeric check.
    #[arg(long, global = true)]
    tol: Option<f64>,

    /// Seed for random oracle instances.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Quadrature panels for continuous reference measures.
    #[arg(long, global = true)]
    panels: Option<usize>,

    /// Regularization factor, overriding the problem file.
    #[arg(long, global = true)]
    lambda: Option<f64>,

    /// Second divergence for `equiv`.
    #[arg(long = "with", global = true)]
    with: Option<String>,

    /// Include wall-clock timings (makes output nondeterministic).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Solve for the posterior at one regularization factor.
    Solve,
    /// Normalization function over a grid of regularization factors (CSV).
    Sweep,
    /// Classify the boundary of the feasible multiplier set.
    Classify,
    /// Check that a second divergence reproduces the posterior.
    Equiv,
    /// Certify the closed form against brute-force minimization.
    OracleCheck,
    /// Rerun the reference worked examples (1, 2 and 4).
    Examples,
}

fn run(cli: &Cli) -> Result<Report, CliError> {
    let settings = Settings {
        tol: cli.tol,
        lambda: cli.lambda,
        panels: cli.panels,
        seed: cli.seed,
        timings: cli.timings,
        with: cli.with.clone(),
    };
    if let Some(t) = cli.tol {
        if !(t > 0.0) {
            return Err(CliError::Schema(format!("--tol must be positive, got {t}")));
        }
    }
    if let Some(l) = cli.lambda {
        if !(l > 0.0 && l.is_finite()) {
            return Err(CliError::Schema(format!("--lambda must be positive and finite, got {l}")));
        }
    }
    let problem = match &cli.problem {
        Some(path) => {
            let source = fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
            Some(commands::load(&source, &settings)?)
        }
        None => None,
    };
    let need = |p: &Option<fdr_cli::problem::Problem>| {
        p.clone()
            .ok_or_else(|| CliError::Schema("this command needs --problem".into()))
    };
    match cli.command {
        Command::Solve => commands::solve(&need(&problem)?, &settings),
        Command::Sweep => commands::sweep(&need(&problem)?, &settings),
        Command::Classify => commands::classify(&need(&problem)?, &settings),
        Command::Equiv => commands::equiv(&need(&problem)?, &settings),
        Command::OracleCheck => commands::oracle_check(problem.as_ref(), &settings),
        Command::Examples => {
            let checks = reproductions::all(cli.tol.unwrap_or(reproductions::DEFAULT_TOL), cli.panels);
            let failed = checks.iter().filter(|c| !c.pass).count();
            Ok(Report {
                body: Body::Text(reproductions::table(&checks)),
                failure: (failed > 0).then(|| format!("{failed} example checks failed")),
            })
        }
    }
}

fn emit(body: &Body, out: Option<&PathBuf>) -> Result<(), CliError> {
    let text = match body {
        Body::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Io(e.to_string()))?;
            s.push('\n');
            s
        }
        Body::Text(t) => t.clone(),
    };
    match out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("writing {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(e.to_string())),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FDR_LOG", "error")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = run(&cli).and_then(|report| {
        emit(&report.body, cli.out.as_ref())?;
        match report.failure {
            Some(f) => Err(CliError::Failed(f)),
            None => Ok(()),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fdr: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
