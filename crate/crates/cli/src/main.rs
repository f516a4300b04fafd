//! Command-line front end: load JSON problem files, run validation,
//! solves, interval analysis, lambda sweeps and the radial transform, and
//! emit human-readable summaries plus machine-readable JSON/CSV artifacts.
//!
//! Exit codes: 0 success, 1 informational failure (hypothesis violation,
//! non-convergence, empty analysis), 2 defective input (parse errors,
//! invalid radii, evaluation failures).
//!
//! Determinism: quadrature panels are fixed, all randomness flows from one
//! seed (`--seed` beats `CONE_BVP_SEED` beats 42), and CSV numbers are
//! rendered with 17 significant digits, so identical inputs and flags
//! reproduce identical artifacts byte for byte.

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use cone_bvp::analysis::{
    eigenvalue_intervals, lambda_sweep, AnalysisOptions, IntervalReport, LimitEstimate,
    LimitOverrides, SweepReport,
};
use cone_bvp::problem::{radial_to_bvp, validate, ProblemFile, ProblemSpec};
use cone_bvp::solver::{
    multi_start, newton_solve, picard_solve, solve_auto, verify_solution, GuessMode,
    SolutionBundle, SolverConfig, VerificationReport,
};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::time::Instant;

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(
    name = "cone-bvp",
    version,
    about = "Positive solutions of one-dimensional p-Laplacian systems by cone fixed-point iteration"
)]
struct Cli {
    /// Seed for all sampled checks; beats CONE_BVP_SEED, default 42.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Auto,
    Picard,
    Newton,
}

#[derive(Subcommand)]
enum Command {
    /// Check hypotheses H1-H4 on sampled grids.
    Validate {
        problem: PathBuf,
        /// Time-grid sample count (>= 64).
        #[arg(long, default_value_t = 256)]
        samples: usize,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve for a positive solution and write solution.csv + report.json.
    Solve {
        problem: PathBuf,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
        method: MethodArg,
        /// Picard damping factor in (0, 1].
        #[arg(long, default_value_t = 0.5)]
        theta: f64,
        #[arg(long, default_value_t = 200)]
        max_iter: usize,
        #[arg(long, default_value_t = 40)]
        newton_max_iter: usize,
        /// Initial guess amplitude (calibrated automatically if omitted).
        #[arg(long)]
        level: Option<f64>,
        /// Norm window end for the sandwich check and multi-start.
        #[arg(long)]
        alpha: Option<f64>,
        /// The other norm window end.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Eigenvalue interval analysis: writes intervals.json.
    Intervals {
        problem: PathBuf,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        /// Declared limits g0 per component ("0.5" or "0.5,inf");
        /// overrides the sampled estimate.
        #[arg(long)]
        g0: Option<String>,
        /// Declared limits ginf per component.
        #[arg(long)]
        ginf: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve across a lambda interval: writes sweep.csv.
    Sweep {
        problem: PathBuf,
        #[arg(long)]
        lambda_min: f64,
        #[arg(long)]
        lambda_max: f64,
        #[arg(long)]
        points: usize,
        #[arg(long, default_value_t = 512)]
        grid: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Transform a radial annulus problem to the unit interval; the
    /// emitted problem.json feeds straight into `solve`.
    Radial {
        problem: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    let seed = resolve_seed(cli.seed);
    let code = match run(cli.command, seed) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            2
        }
    };
    std::process::exit(code);
}

fn resolve_seed(flag: Option<u64>) -> u64 {
    flag.or_else(|| {
        std::env::var("CONE_BVP_SEED")
            .ok()
            .and_then(|s| s.parse().ok())
    })
    .unwrap_or(42)
}

fn run(command: Command, seed: u64) -> anyhow::Result<i32> {
    match command {
        Command::Validate {
            problem,
            samples,
            out,
        } => cmd_validate(&problem, samples, out, seed),
        Command::Solve {
            problem,
            grid,
            tol,
            method,
            theta,
            max_iter,
            newton_max_iter,
            level,
            alpha,
            beta,
            out,
        } => cmd_solve(
            &problem,
            SolveArgs {
                grid,
                tol,
                method,
                theta,
                max_iter,
                newton_max_iter,
                level,
                alpha,
                beta,
            },
            &out,
            seed,
        ),
        Command::Intervals {
            problem,
            grid,
            g0,
            ginf,
            out,
        } => cmd_intervals(&problem, grid, g0, ginf, &out, seed),
        Command::Sweep {
            problem,
            lambda_min,
            lambda_max,
            points,
            grid,
            tol,
            out,
        } => cmd_sweep(
            &problem,
            (lambda_min, lambda_max),
            points,
            grid,
            tol,
            &out,
            seed,
        ),
        Command::Radial { problem, out } => cmd_radial(&problem, &out, seed),
    }
}

// ---------------------------------------------------------------------------
// shared plumbing
// ---------------------------------------------------------------------------

struct ArtifactSink {
    dir: PathBuf,
    outputs: Vec<String>,
}

impl ArtifactSink {
    fn new(dir: &Path) -> anyhow::Result<Self> {
        std::fs::create_dir_all(dir)
            .with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(ArtifactSink {
            dir: dir.to_path_buf(),
            outputs: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, content: &str) -> anyhow::Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
        self.outputs.push(name.to_string());
        Ok(path)
    }

    fn write_json(&mut self, name: &str, value: &Value) -> anyhow::Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(name, &text)
    }
}

#[derive(Serialize)]
struct RunManifest {
    schema_version: u32,
    command: String,
    input: String,
    config: Value,
    outputs: Vec<String>,
    seed: u64,
    duration_ms: u128,
    version: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    notes: Vec<String>,
}

fn finish_manifest(
    sink: &mut ArtifactSink,
    command: &str,
    input: &Path,
    config: Value,
    seed: u64,
    started: Instant,
    notes: Vec<String>,
) -> anyhow::Result<()> {
    let manifest = RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        input: input.display().to_string(),
        config,
        outputs: {
            let mut all = sink.outputs.clone();
            all.push("manifest.json".to_string());
            all
        },
        seed,
        duration_ms: started.elapsed().as_millis(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        notes,
    };
    let value = serde_json::to_value(&manifest)?;
    sink.write_json("manifest.json", &value)?;
    Ok(())
}

fn load_file(path: &Path) -> anyhow::Result<ProblemFile> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file: ProblemFile =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(file)
}

fn load_spec(path: &Path) -> anyhow::Result<ProblemSpec> {
    let file = load_file(path)?;
    let spec = file
        .to_spec()
        .with_context(|| format!("interpreting {}", path.display()))?;
    Ok(spec)
}

/// 17 significant digits: enough to reproduce the f64 bit pattern, so CSV
/// determinism is checkable byte for byte.
fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

fn num_or_inf(v: f64) -> Value {
    if v.is_infinite() {
        json!("inf")
    } else {
        json!(v)
    }
}

fn interval_json(interval: &Option<(f64, f64)>) -> Value {
    match interval {
        Some((lo, hi)) => json!({ "lower": num_or_inf(*lo), "upper": num_or_inf(*hi) }),
        None => Value::Null,
    }
}

fn limit_json(limit: &LimitEstimate) -> Value {
    json!({
        "value": num_or_inf(limit.value),
        "lo": num_or_inf(limit.lo),
        "hi": num_or_inf(limit.hi),
        "class": format!("{:?}", limit.class).to_lowercase(),
        "source": format!("{:?}", limit.source).to_lowercase(),
        "trail": limit.trail.iter()
            .map(|(s, lo, hi)| json!([s, num_or_inf(*lo), num_or_inf(*hi)]))
            .collect::<Vec<_>>(),
    })
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

fn cmd_validate(
    problem: &Path,
    samples: usize,
    out: Option<PathBuf>,
    _seed: u64,
) -> anyhow::Result<i32> {
    let spec = load_spec(problem)?;
    let report = validate(&spec, samples)?;
    let value = json!({
        "schema_version": SCHEMA_VERSION,
        "command": "validate",
        "samples": report.samples,
        "all_pass": report.all_pass(),
        "checks": serde_json::to_value(&report.checks)?,
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&value)?);
    match out {
        Some(path) => {
            std::fs::write(&path, &text).with_context(|| format!("writing {}", path.display()))?;
            println!(
                "validate: {} ({} checks) -> {}",
                if report.all_pass() {
                    "all hypotheses pass"
                } else {
                    "FAILED"
                },
                report.checks.len(),
                path.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(if report.all_pass() { 0 } else { 1 })
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveArgs {
    grid: usize,
    tol: f64,
    method: MethodArg,
    theta: f64,
    max_iter: usize,
    newton_max_iter: usize,
    level: Option<f64>,
    alpha: Option<f64>,
    beta: Option<f64>,
}

fn cmd_solve(problem: &Path, args: SolveArgs, out: &Path, seed: u64) -> anyhow::Result<i32> {
    let started = Instant::now();
    let spec = load_spec(problem)?;
    let config = SolverConfig {
        grid_n: args.grid,
        damping: args.theta,
        max_iterations: args.max_iter,
        newton_max_iterations: args.newton_max_iter,
        tol_residual: args.tol,
        guess: GuessMode::FlatBump,
        level: args.level,
        ..SolverConfig::default()
    };

    let mut distinct = 1usize;
    let bundle = match (args.alpha, args.beta, args.method) {
        (Some(alpha), Some(beta), MethodArg::Auto) => {
            let found = multi_start(&spec, &config, alpha, beta)?;
            distinct = found.len().max(1);
            match found.into_iter().next() {
                Some(b) => b,
                None => solve_auto(&spec, &config)?,
            }
        }
        (_, _, MethodArg::Auto) => solve_auto(&spec, &config)?,
        (_, _, MethodArg::Picard) => picard_solve(&spec, &config)?,
        (_, _, MethodArg::Newton) => newton_solve(&spec, &config, None)?,
    };

    let verification: Option<VerificationReport> = if bundle.converged {
        Some(verify_solution(&spec, &bundle, args.alpha, args.beta)?)
    } else {
        None
    };

    let mut sink = ArtifactSink::new(out)?;
    sink.write("solution.csv", &solution_csv(&bundle))?;
    sink.write_json(
        "report.json",
        &solve_report_json(&spec, &bundle, &verification, distinct),
    )?;
    finish_manifest(
        &mut sink,
        "solve",
        problem,
        json!({
            "grid": args.grid,
            "tol": args.tol,
            "method": format!("{:?}", args.method).to_lowercase(),
            "theta": args.theta,
            "max_iter": args.max_iter,
            "newton_max_iter": args.newton_max_iter,
            "level": args.level,
            "alpha": args.alpha,
            "beta": args.beta,
        }),
        seed,
        started,
        Vec::new(),
    )?;

    let ok = bundle.is_positive_solution();
    println!(
        "solve: {} (method {:?}, {} iterations, ||u|| = {:.6e}, r_fp = {:.3e}, r_ode = {:.3e}) -> {}",
        if ok { "converged" } else { "did NOT converge to a positive solution" },
        bundle.method,
        bundle.iterations,
        bundle.norm,
        bundle.r_fp,
        bundle.r_ode,
        out.display()
    );
    Ok(if ok { 0 } else { 1 })
}

fn solution_csv(bundle: &SolutionBundle) -> String {
    let n = bundle.u.len();
    let mut csv = String::from("t");
    for i in 1..=n {
        csv.push_str(&format!(",u{i}"));
    }
    csv.push('\n');
    for j in 0..=bundle.grid_n {
        csv.push_str(&g17(bundle.u[0].node(j)));
        for ui in &bundle.u {
            csv.push(',');
            csv.push_str(&g17(ui.value(j)));
        }
        csv.push('\n');
    }
    csv
}

fn solve_report_json(
    spec: &ProblemSpec,
    bundle: &SolutionBundle,
    verification: &Option<VerificationReport>,
    distinct: usize,
) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "solve",
        "n": spec.component_count(),
        "phi_exponent": spec.phi_exponent(),
        "lambda": if spec.is_separable() { json!(spec.lambda()) } else { Value::Null },
        "grid_n": bundle.grid_n,
        "converged": bundle.converged,
        "positive_solution": bundle.is_positive_solution(),
        "trivial": bundle.trivial,
        "degenerate_forcing": bundle.degenerate,
        "method": serde_json::to_value(bundle.method).unwrap(),
        "iterations": bundle.iterations,
        "norm": bundle.norm,
        "r_fp": bundle.r_fp,
        "r_ode": bundle.r_ode,
        "sigma": bundle.sigma,
        "cone": serde_json::to_value(&bundle.cone).unwrap(),
        "distinct_solutions_found": distinct,
        "verification": verification
            .as_ref()
            .map(|v| serde_json::to_value(v).unwrap())
            .unwrap_or(Value::Null),
    })
}

// ---------------------------------------------------------------------------
// intervals
// ---------------------------------------------------------------------------

fn parse_limit_list(text: &str, n: usize, what: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let mut values = Vec::with_capacity(parts.len());
    for part in &parts {
        let v = match *part {
            "inf" | "Inf" | "INF" | "infinity" => f64::INFINITY,
            other => other
                .parse::<f64>()
                .with_context(|| format!("parsing {what} entry {other:?}"))?,
        };
        values.push(v);
    }
    if values.len() == 1 && n > 1 {
        return Ok(vec![values[0]; n]);
    }
    if values.len() != n {
        bail!(
            "{what} needs 1 or {n} comma-separated values, got {}",
            values.len()
        );
    }
    Ok(values)
}

fn cmd_intervals(
    problem: &Path,
    grid: usize,
    g0: Option<String>,
    ginf: Option<String>,
    out: &Path,
    seed: u64,
) -> anyhow::Result<i32> {
    let started = Instant::now();
    let spec = load_spec(problem)?;
    let n = spec.component_count();
    let overrides = LimitOverrides {
        g0: g0
            .as_deref()
            .map(|s| parse_limit_list(s, n, "--g0"))
            .transpose()?,
        ginf: ginf
            .as_deref()
            .map(|s| parse_limit_list(s, n, "--ginf"))
            .transpose()?,
    };
    let options = AnalysisOptions {
        grid_n: grid,
        seed,
        ..AnalysisOptions::default()
    };
    let report = eigenvalue_intervals(&spec, &overrides, &options)?;

    let mut sink = ArtifactSink::new(out)?;
    sink.write_json("intervals.json", &intervals_json(&spec, &report))?;
    finish_manifest(
        &mut sink,
        "intervals",
        problem,
        json!({ "grid": grid, "g0": g0, "ginf": ginf }),
        seed,
        started,
        Vec::new(),
    )?;

    let conclusive = report.any_conclusion();
    println!(
        "intervals: rho = {:.6}, A = {:.6e}, B = {:.6e}, interval_s = {}, interval_t = {}{} -> {}",
        report.rho,
        report.a_max,
        report.b_min,
        describe_interval(&report.interval_s),
        describe_interval(&report.interval_t),
        if report.lambda_unrestricted {
            ", lambda unrestricted (0, inf)"
        } else {
            ""
        },
        out.display()
    );
    Ok(if conclusive { 0 } else { 1 })
}

fn describe_interval(interval: &Option<(f64, f64)>) -> String {
    match interval {
        Some((lo, hi)) => format!("({lo}, {hi})"),
        None => "empty".to_string(),
    }
}

fn intervals_json(spec: &ProblemSpec, report: &IntervalReport) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "command": "intervals",
        "n": spec.component_count(),
        "phi_exponent": spec.phi_exponent(),
        "rho": report.rho,
        "a_max": report.a_max,
        "b_min": report.b_min,
        "components": report.components.iter().map(|c| json!({
            "component": c.component,
            "a": c.a,
            "b": c.b,
            "b_argmin": c.b_argmin,
            "g0": limit_json(&c.g0),
            "ginf": limit_json(&c.ginf),
            "h1": c.h1,
            "h2": c.h2,
        })).collect::<Vec<_>>(),
        "interval_s": interval_json(&report.interval_s),
        "interval_t": interval_json(&report.interval_t),
        "h1_all": report.h1_all,
        "h2_all": report.h2_all,
        "corollary_i": report.corollary_i,
        "corollary_ii": report.corollary_ii,
        "lambda_unrestricted": report.lambda_unrestricted,
    })
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(
    problem: &Path,
    interval: (f64, f64),
    points: usize,
    grid: usize,
    tol: f64,
    out: &Path,
    seed: u64,
) -> anyhow::Result<i32> {
    let started = Instant::now();
    let spec = load_spec(problem)?;
    let config = SolverConfig {
        grid_n: grid,
        tol_residual: tol,
        ..SolverConfig::default()
    };
    let options = AnalysisOptions {
        grid_n: grid,
        seed,
        ..AnalysisOptions::default()
    };
    let report = lambda_sweep(&spec, interval, points, &config, &options)?;

    let mut notes = Vec::new();
    if report.truncated_low {
        notes.push(format!(
            "lambda lower end truncated to {}",
            report.lambda_floor
        ));
    }
    if report.truncated_high {
        notes.push(format!(
            "lambda upper end truncated to {}",
            report.lambda_cap
        ));
    }

    let mut sink = ArtifactSink::new(out)?;
    sink.write("sweep.csv", &sweep_csv(&spec, &report))?;
    finish_manifest(
        &mut sink,
        "sweep",
        problem,
        json!({
            "lambda_min": interval.0,
            "lambda_max": interval.1,
            "points": points,
            "grid": grid,
            "tol": tol,
        }),
        seed,
        started,
        notes,
    )?;

    let converged = report.rows.iter().filter(|r| r.converged).count();
    println!(
        "sweep: {}/{} points converged -> {}",
        converged,
        report.rows.len(),
        out.display()
    );
    Ok(0)
}

fn sweep_csv(spec: &ProblemSpec, report: &SweepReport) -> String {
    let n = spec.component_count();
    let mut csv = String::from("lambda,converged,norm,r_fp,r_ode");
    for i in 1..=n {
        csv.push_str(&format!(",sigma_{i}"));
    }
    csv.push('\n');
    for row in &report.rows {
        csv.push_str(&g17(row.lambda));
        csv.push(',');
        csv.push_str(if row.converged { "true" } else { "false" });
        for v in [row.norm, row.r_fp, row.r_ode] {
            csv.push(',');
            csv.push_str(&g17(v));
        }
        for s in &row.sigma {
            csv.push(',');
            csv.push_str(&g17(*s));
        }
        csv.push('\n');
    }
    csv
}

// ---------------------------------------------------------------------------
// radial
// ---------------------------------------------------------------------------

fn cmd_radial(problem: &Path, out: &Path, seed: u64) -> anyhow::Result<i32> {
    let started = Instant::now();
    let file = load_file(problem)?;
    if !file.is_radial() {
        bail!("{} has no radial object", problem.display());
    }
    let rspec = file.to_radial()?;
    let spec = radial_to_bvp(&rspec)?;
    let emitted = ProblemFile::from_spec(&spec);

    let mut sink = ArtifactSink::new(out)?;
    let value = serde_json::to_value(&emitted)?;
    sink.write_json("problem.json", &value)?;
    finish_manifest(
        &mut sink,
        "radial",
        problem,
        json!({
            "dim": rspec.dim,
            "r1": rspec.r1,
            "r2": rspec.r2,
        }),
        seed,
        started,
        Vec::new(),
    )?;

    println!(
        "radial: dim {} annulus [{}, {}] -> unit-interval problem {}",
        rspec.dim,
        rspec.r1,
        rspec.r2,
        out.join("problem.json").display()
    );
    Ok(0)
}
