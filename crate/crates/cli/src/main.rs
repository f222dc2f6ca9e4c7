use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde::Serialize;

use monotone_newton::linalg::Vector;
use monotone_newton::majorant::{MajorantFunction, RadiusReport, SamplingGrid};
use monotone_newton::newton::{
    self, comparison_slack, NewtonError, SolveReport, SolveStatus, TheoremReport,
    UniquenessReport,
};

mod config;

use config::{ResolvedProblem, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mnewton", version, about = "Newton's method for F(x) + T(x) ∋ 0")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the config
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Run Newton from x0 and write report.json and trace.csv
    Solve,
    /// Convergence and uniqueness radii of a majorant
    Radius,
    /// Check the convergence theorem's conclusions on a problem with known solution
    Verify,
    /// Empirical convergence radius along sampled directions
    Basin,
}

enum Failure {
    /// Bad config, bad input or unmet precondition.
    Config(anyhow::Error),
    /// The solver stopped without converging.
    Solve(String),
    /// A checked inequality failed.
    Assertion(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solve(_) => 3,
            Failure::Assertion(_) => 4,
        }
    }
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Config(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Config(e) => eprintln!("error: {e:#}"),
                Failure::Solve(msg) => eprintln!("solve failed: {msg}"),
                Failure::Assertion(msg) => eprintln!("assertion failed: {msg}"),
            }
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Outcome {
    let path = cli.config.as_ref().context("--config is required")?;
    let mut cfg = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    fs::create_dir_all(&cli.out)
        .with_context(|| format!("cannot create {}", cli.out.display()))?;
    match cli.command {
        Command::Solve => cmd_solve(&cfg, &cli.out),
        Command::Radius => cmd_radius(&cfg, &cli.out),
        Command::Verify => cmd_verify(&cfg, &cli.out),
        Command::Basin => cmd_basin(&cfg, &cli.out),
    }
}

fn write_json(dir: &Path, name: &str, value: &impl Serialize) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn write_text(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// 17 significant digits, round-trip exact.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn cell(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// One row per iterate. The ratio columns of row k describe the step
/// k → k+1; ratio_emp is left blank once ‖xₖ − x*‖ is at noise level.
fn trace_csv(report: &SolveReport) -> String {
    let mut out = String::from("k,residual,dist_to_xstar,t_k,ratio_emp,ratio_majorant,bound\n");
    let d = report.distances.as_deref();
    let t = report.majorant_sequence.as_deref();
    for (k, residual) in report.residuals.iter().enumerate() {
        let dk = d.map(|d| d[k]);
        let tk = t.map(|t| t[k]);
        let emp = report
            .ratio_empirical
            .as_ref()
            .and_then(|r| r.get(k).copied().flatten())
            .filter(|_| dk.unwrap_or(0.0) > comparison_slack(tk.or(dk).unwrap_or(0.0)));
        let maj = report.ratio_majorant.as_ref().and_then(|r| r.get(k).copied().flatten());
        let bound = report.ratio_bound.filter(|_| maj.is_some());
        let _ = writeln!(
            out,
            "{k},{},{},{},{},{},{}",
            num(*residual),
            cell(dk),
            cell(tk),
            cell(emp),
            cell(maj),
            cell(bound)
        );
    }
    out
}

fn status_failure(status: &SolveStatus) -> Option<String> {
    match status {
        SolveStatus::Converged => None,
        SolveStatus::MaxIter => Some("iteration limit reached".into()),
        SolveStatus::StepFailed(reason) => Some(format!("step failed: {reason}")),
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    command: &'static str,
    problem: &'a str,
    x0: &'a Vector,
    config: newton::SolveConfig,
    report: &'a SolveReport,
}

fn cmd_solve(cfg: &RunConfig, out: &Path) -> Outcome {
    let problem = cfg.require_problem()?;
    let x0 = cfg.x0(&problem)?;
    let f = cfg.majorant(Some(&problem))?;
    let solve_cfg = cfg.solve_config();
    let report = newton::solve_with_majorant(&problem.instance, &x0, &solve_cfg, f.as_ref())?;
    write_json(
        out,
        "report.json",
        &SolveOutput {
            command: "solve",
            problem: &problem.name,
            x0: &x0,
            config: solve_cfg,
            report: &report,
        },
    )?;
    write_text(out, "trace.csv", &trace_csv(&report))?;
    println!(
        "{}: {:?} after {} steps, residual {}",
        problem.name,
        report.status,
        report.steps(),
        num(report.final_residual())
    );
    match status_failure(&report.status) {
        Some(msg) => Err(Failure::Solve(msg)),
        None => Ok(()),
    }
}

fn cmd_radius(cfg: &RunConfig, out: &Path) -> Outcome {
    let problem = cfg.problem()?;
    let f = cfg.require_majorant(problem.as_ref())?;
    let radii = f.radii(cfg.kappa(problem.as_ref())?)?;
    write_json(out, "report.json", &radii)?;
    println!("{}", serde_json::to_string_pretty(&radii).context("serialize radii")?);
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput<'a> {
    command: &'static str,
    problem: &'a str,
    x0: &'a Vector,
    theorem: &'a TheoremReport,
    uniqueness: &'a UniquenessReport,
    passed: bool,
}

fn cmd_verify(cfg: &RunConfig, out: &Path) -> Outcome {
    let problem = cfg.require_problem()?;
    let x0 = cfg.x0(&problem)?;
    let f = cfg.require_majorant(Some(&problem))?;
    let grid = SamplingGrid {
        seed: cfg.seed,
        ..SamplingGrid::default()
    };
    let theorem = match newton::verify_theorem_with_grid(
        &problem.instance,
        &f,
        &x0,
        &cfg.solve_config(),
        grid,
    ) {
        Ok(report) => report,
        Err(e @ NewtonError::PreconditionViolated(_)) => return Err(Failure::Config(e.into())),
        Err(e) => return Err(e.into()),
    };
    let uniqueness =
        newton::check_uniqueness(&problem.instance, &f, cfg.uniqueness_samples, cfg.seed)?;
    let passed = theorem.passed && uniqueness.unique();
    write_json(
        out,
        "report.json",
        &VerifyOutput {
            command: "verify",
            problem: &problem.name,
            x0: &x0,
            theorem: &theorem,
            uniqueness: &uniqueness,
            passed,
        },
    )?;
    write_text(out, "trace.csv", &trace_csv(&theorem.solve))?;

    println!(
        "{}: t0 = {}, r = {}, {:?} after {} steps",
        problem.name,
        num(theorem.t0),
        num(theorem.radii.r),
        theorem.solve.status,
        theorem.solve.steps()
    );
    println!(
        "majorant condition: max violation {}",
        num(theorem.condition.max_violation)
    );
    for check in &theorem.checks {
        println!(
            "{}: {} (worst margin {}, {} checked)",
            check.name,
            if check.passed { "pass" } else { "FAIL" },
            if check.checked > 0 { num(check.worst_margin) } else { "n/a".into() },
            check.checked
        );
    }
    println!(
        "uniqueness: {} ({} samples in radius {}, {} spurious)",
        if uniqueness.unique() { "pass" } else { "FAIL" },
        uniqueness.samples,
        num(uniqueness.radius),
        uniqueness.spurious
    );
    if passed {
        return Ok(());
    }
    let mut failed: Vec<String> = theorem
        .checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.to_string())
        .collect();
    if let Some(msg) = status_failure(&theorem.solve.status) {
        failed.push(msg);
    }
    if !uniqueness.unique() {
        failed.push("uniqueness".into());
    }
    Err(Failure::Assertion(failed.join(", ")))
}

#[derive(Serialize)]
struct BasinOutput<'a> {
    command: &'static str,
    problem: &'a str,
    radii: RadiusReport,
    r_max: f64,
    bisect_tol: f64,
    empirical: &'a [f64],
    directions: &'a [Vector],
    passed: bool,
}

/// The configured majorant, else the problem's Lipschitz one, else its
/// Smale one.
fn majorant_or_declared(cfg: &RunConfig, problem: &ResolvedProblem) -> anyhow::Result<MajorantFunction> {
    if let Some(f) = cfg.majorant(Some(problem))? {
        return Ok(f);
    }
    if let Some(k) = problem.lipschitz_k {
        return Ok(MajorantFunction::lipschitz(k)?);
    }
    if let Some(gamma) = problem.smale_gamma {
        return Ok(MajorantFunction::smale(gamma)?);
    }
    anyhow::bail!("no majorant configured and the problem declares none")
}

fn cmd_basin(cfg: &RunConfig, out: &Path) -> Outcome {
    let problem = cfg.require_problem()?;
    let basin = cfg.basin.context("basin needs a \"basin\" section")?;
    if basin.directions == 0 {
        return Err(Failure::Config(anyhow::anyhow!("basin.directions must be at least 1")));
    }
    let f = majorant_or_declared(cfg, &problem)?;
    let radii = f.radii(problem.instance.kappa)?;
    let r_max = basin.r_max.unwrap_or(problem.instance.kappa);
    let result = newton::empirical_radius(
        &problem.instance,
        basin.directions,
        r_max,
        basin.bisect_tol,
        cfg.seed,
        &cfg.solve_config(),
    )?;
    let floor = radii.r.min(r_max) - basin.bisect_tol;
    let short: Vec<usize> = (0..result.radii.len()).filter(|&i| result.radii[i] < floor).collect();

    let mut csv = String::from("direction_index,empirical_radius\n");
    for (i, s) in result.radii.iter().enumerate() {
        let _ = writeln!(csv, "{i},{}", num(*s));
    }
    write_text(out, "basin.csv", &csv)?;
    write_json(
        out,
        "report.json",
        &BasinOutput {
            command: "basin",
            problem: &problem.name,
            radii,
            r_max,
            bisect_tol: basin.bisect_tol,
            empirical: &result.radii,
            directions: &result.directions,
            passed: short.is_empty(),
        },
    )?;
    println!(
        "{}: theoretical r = {}, min empirical radius = {} over {} directions",
        problem.name,
        num(radii.r),
        num(result.min()),
        result.radii.len()
    );
    if short.is_empty() {
        Ok(())
    } else {
        Err(Failure::Assertion(format!(
            "empirical radius below r − tol along directions {short:?}"
        )))
    }
}
