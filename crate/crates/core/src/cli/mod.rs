//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 verification failure, 3 resource guard.

pub mod config;
pub mod output;
pub mod verify;

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bounds::{
    general_eps_limit, hybrid_bound, lower_bound_general, lower_bound_p1, oracle_distance_bound, oracle_distance_sup,
    uniform_points, LowerBoundReport,
};
use crate::error::{invalid, Error, Result};
use crate::functions::{catalog_entry, ObjectiveFunction, TestFunctionInstance};
use crate::grid::GridSpec;
use crate::numerics::CentralDifferenceScheme;
use crate::oracle::{CostModel, LedgerTotals};
use crate::qge::{
    estimate_success_probability, exact_success_1d, Aggregation, AlgorithmParams, DerivedConstants, NormOrder, QgePlan,
    RunOptions,
};
use config::{Config, Resolver};
use output::{finite, fmt_f64, or_na, Csv, OutputDir, RunManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VERIFY: i32 = 2;
pub const EXIT_GUARD: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "qgrad", version, about = "Phase-oracle gradient estimation simulator")]
struct Cli {
    /// Flat key = value file supplying defaults for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact central-difference coefficients as CSV.
    Coeffs(CoeffsArgs),
    /// Sampled smoothings f_(2m) of a one-dimensional function.
    SmoothPlot(SmoothArgs),
    /// One full run of the estimator.
    Run(RunArgs),
    /// Repeated runs: observed success frequency with a Wilson interval.
    SuccessProb(SuccessArgs),
    /// Query counts, naive baseline and lower bounds over a grid of (d, eps).
    Sweep(SweepArgs),
    /// Lower-bound formulas and the oracle-distance check, as JSON.
    Bounds(BoundsArgs),
    /// Runs the invariant suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct OutArgs {
    /// Output directory; also receives manifest.json. Without it, results go to stdout.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CoeffsArgs {
    #[arg(long)]
    m: Option<usize>,
    /// Append moment sums Σ a_ℓ ℓ^k for k = 0..=K as a separate table.
    #[arg(long)]
    moments: Option<u32>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct SmoothArgs {
    /// `sin` or a catalog name.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    /// Comma-separated list of m values.
    #[arg(long)]
    m: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args, Clone)]
struct ProblemArgs {
    /// `test` (sine/cosine family), `zero`, or a catalog name.
    #[arg(long)]
    function: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    /// Target accuracy of the estimate.
    #[arg(long)]
    eps: Option<f64>,
    /// Norm order: a number ≥ 1 or `inf`.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    sigma: Option<f64>,
    /// Scale ε of the test family (separate from the accuracy target).
    #[arg(long)]
    fn_eps: Option<f64>,
    /// Sign vector of the test family, e.g. `+-+`.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// `exact-sim` or `paper-model`.
    #[arg(long)]
    cost_model: Option<String>,
    /// Aggregate with the coordinate-wise mean instead of the median.
    #[arg(long)]
    mean: bool,
    /// Model imperfect fractional oracles as bounded phase noise.
    #[arg(long)]
    perturb: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct SuccessArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    trials: Option<u64>,
    /// Also integrate the exact outcome distribution (d = 1 only).
    #[arg(long)]
    exact: bool,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct SweepArgs {
    /// Comma-separated dimensions.
    #[arg(long)]
    dims: Option<String>,
    /// Comma-separated accuracy targets.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    p: Option<String>,
    /// Success probability used by the general lower bound.
    #[arg(long = "success-p")]
    success_p: Option<f64>,
    #[arg(long)]
    cost_model: Option<String>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct BoundsArgs {
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long = "success-p")]
    success_p: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Points sampled for the oracle-distance check.
    #[arg(long)]
    samples: Option<usize>,
    #[command(flatten)]
    out: OutArgs,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// `fast` or `full`.
    #[arg(long)]
    level: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Test hook: perturb one coefficient so the suite must fail.
    #[arg(long, hide = true)]
    corrupt_coefficients: bool,
    #[command(flatten)]
    out: OutArgs,
}

/// Outcome of a command: exit code plus text for stdout.
struct Outcome {
    code: i32,
    stdout: String,
}

fn ok(stdout: String) -> Result<Outcome> {
    Ok(Outcome { code: EXIT_OK, stdout })
}

struct Ctx<'a> {
    argv: Vec<String>,
    config: Option<&'a Config>,
    started: Instant,
}

impl Ctx<'_> {
    fn manifest(&self, r: &Resolver<'_>, seed: Option<u64>, ledger: Option<LedgerTotals>) -> RunManifest {
        RunManifest {
            command_line: self.argv.clone(),
            config: r.snapshot().clone(),
            master_seed: seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_seconds: self.started.elapsed().as_secs_f64(),
            ledger,
            outputs: Vec::new(),
        }
    }
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match execute(cli, argv) {
        Ok(out) => {
            print!("{}", out.stdout);
            out.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::ResourceGuard { .. } => EXIT_GUARD,
        _ => EXIT_USAGE,
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<Outcome> {
    let config = cli.config.as_deref().map(Config::load).transpose()?;
    let ctx = Ctx { argv, config: config.as_ref(), started: Instant::now() };
    match cli.command {
        Command::Coeffs(a) => cmd_coeffs(&ctx, a),
        Command::SmoothPlot(a) => cmd_smooth_plot(&ctx, a),
        Command::Run(a) => cmd_run(&ctx, a),
        Command::SuccessProb(a) => cmd_success_prob(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Bounds(a) => cmd_bounds(&ctx, a),
        Command::Verify(a) => cmd_verify(&ctx, a),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',').map(|t| t.trim().parse().map_err(|_| invalid(format!("cannot parse '{t}' in {what} list")))).collect()
}

fn out_dir(r: &mut Resolver<'_>, flag: Option<PathBuf>) -> Result<Option<PathBuf>> {
    Ok(r.opt("out-dir", flag.map(|p| p.display().to_string()))?.map(PathBuf::from))
}

/// Writes `files` into the output directory with a manifest, or concatenates them to stdout.
fn emit(
    ctx: &Ctx<'_>,
    r: &Resolver<'_>,
    dir: Option<&Path>,
    files: &[(&str, String)],
    seed: Option<u64>,
    ledger: Option<LedgerTotals>,
) -> Result<String> {
    match dir {
        Some(d) => {
            let mut od = OutputDir::new(d)?;
            for (name, body) in files {
                od.write(name, body)?;
            }
            od.finish(ctx.manifest(r, seed, ledger))?;
            Ok(format!("wrote {} file(s) and manifest.json to {}\n", files.len(), d.display()))
        }
        None => Ok(files.iter().map(|(_, b)| b.as_str()).collect::<Vec<_>>().join("\n")),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| invalid(e.to_string()))
}

fn cmd_coeffs(ctx: &Ctx<'_>, a: CoeffsArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let m: usize = r.require("m", a.m, "order of the central-difference scheme")?;
    let moments: Option<u32> = r.opt("moments", a.moments)?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let scheme = CentralDifferenceScheme::new(m)?;
    let mut csv = Csv::new(["l", "numerator", "denominator", "value"]);
    for (l, (q, x)) in scheme.offsets().zip(scheme.coefficients().iter().zip(scheme.floats())) {
        csv.push(vec![l.to_string(), q.numer().to_string(), q.denom().to_string(), finite(*x, "value")?]);
    }
    let mut files = vec![("coeffs.csv", csv.render())];
    if let Some(kmax) = moments {
        let mut mc = Csv::new(["k", "numerator", "denominator"]);
        for k in 0..=kmax {
            let s = scheme.moment_sum(k);
            mc.push(vec![k.to_string(), s.numer().to_string(), s.denom().to_string()]);
        }
        files.push(("moments.csv", mc.render()));
    }
    ok(emit(ctx, &r, dir.as_deref(), &files, None, None)?)
}

/// `sin(cx)` (unscaled, as used for smoothing plots) or a catalog entry.
fn plot_function(name: &str, c: f64) -> Result<ObjectiveFunction> {
    if name == "sin" {
        return Ok(ObjectiveFunction::new(1, c, 0.0, move |x| (c * x[0]).sin())?.with_name("sin").with_partial(
            move |a, x| {
                let y = c * x[0];
                let v = match a.len() % 4 {
                    0 => y.sin(),
                    1 => y.cos(),
                    2 => -y.sin(),
                    _ => -y.cos(),
                };
                c.powi(a.len() as i32) * v
            },
        ));
    }
    catalog_entry(name, c)
}

fn cmd_smooth_plot(ctx: &Ctx<'_>, a: SmoothArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let name = r.or("function", a.function, "sin".to_string())?;
    let c = r.or("c", a.c, 1.0)?;
    let ms: Vec<usize> = parse_list(&r.or("m", a.m, "1,2,3".to_string())?, "m")?;
    let x_min = r.or("x-min", a.x_min, -std::f64::consts::PI)?;
    let x_max = r.or("x-max", a.x_max, std::f64::consts::PI)?;
    let samples = r.or("samples", a.samples, 201usize)?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    if samples == 0 || !(x_max >= x_min) {
        return Err(invalid("need samples ≥ 1 and x-max ≥ x-min"));
    }
    let f = plot_function(&name, c)?;
    let f0 = f.evaluate(&[0.0])?;
    let df0 = f.partial(&[0], &[0.0]).expect("plot functions carry closed-form partials");
    let schemes: Vec<CentralDifferenceScheme> =
        ms.iter().map(|&m| CentralDifferenceScheme::new(m)).collect::<Result<_>>()?;
    let mut header = vec!["x".to_string(), "f".to_string()];
    for m in &ms {
        header.push(format!("f_{}", 2 * m));
        header.push(format!("defect_{}", 2 * m));
    }
    let mut csv = Csv::new(header);
    for i in 0..samples {
        let x = if samples == 1 { x_min } else { x_min + (x_max - x_min) * i as f64 / (samples - 1) as f64 };
        let mut row = vec![finite(x, "x")?, finite(f.evaluate(&[x])?, "f")?];
        for s in &schemes {
            let v = s.smoothing_eval(&f, &[x])?;
            row.push(finite(v, "smooth")?);
            row.push(finite((v - x * df0 - f0).abs(), "defect")?);
        }
        csv.push(row);
    }
    ok(emit(ctx, &r, dir.as_deref(), &[("smoothing.csv", csv.render())], None, None)?)
}

struct Problem {
    f: ObjectiveFunction,
    params: AlgorithmParams,
    options: RunOptions,
    seed: u64,
}

fn resolve_problem(r: &mut Resolver<'_>, a: ProblemArgs) -> Result<Problem> {
    let name = r.or("function", a.function, "test".to_string())?;
    let c = r.or("c", a.c, 1.0)?;
    let sigma = r.or("sigma", a.sigma, 0.5)?;
    let p: NormOrder = r.or("p", a.p, "inf".to_string())?.parse()?;
    let eps: f64 = r.require("eps", a.eps, "accuracy target of the estimate")?;
    let seed: u64 = r.require("seed", a.seed, "stochastic commands need an explicit master seed")?;
    let cost_model: CostModel = r.or("cost-model", a.cost_model, "exact-sim".to_string())?.parse()?;
    let mean = r.or("mean", if a.mean { Some(true) } else { None }, false)?;
    let perturb = r.or("perturb", if a.perturb { Some(true) } else { None }, false)?;
    let f = match name.as_str() {
        "test" => {
            let d = r.or("d", a.d, 1usize)?;
            let fn_eps = r.or("fn-eps", a.fn_eps, 0.005)?;
            let b_str = r.or("b", a.b, "+".repeat(d))?;
            let b: Vec<i8> = b_str
                .chars()
                .map(|ch| match ch {
                    '+' => Ok(1),
                    '-' => Ok(-1),
                    _ => Err(invalid(format!("sign vector '{b_str}' may only contain + and -"))),
                })
                .collect::<Result<_>>()?;
            TestFunctionInstance::new(d, c, fn_eps, b)?.to_objective()
        }
        "zero" => ObjectiveFunction::zero(r.or("d", a.d, 1usize)?)?,
        other => {
            let f = catalog_entry(other, c)?;
            let g = f.partial(&[0], &[0.0]).expect("catalog entries carry partials");
            if a.d.is_some_and(|d| d != 1) {
                return Err(invalid("catalog functions are one-dimensional"));
            }
            f.with_reference_gradient(vec![g])?
        }
    };
    let params = AlgorithmParams::new(sigma, c, p, f.dim(), eps);
    let options = RunOptions {
        cost_model,
        aggregation: if mean { Aggregation::Mean } else { Aggregation::Median },
        perturb,
        ..Default::default()
    };
    Ok(Problem { f, params, options, seed })
}

fn vector_csv(v: &[f64]) -> Result<String> {
    let mut csv = Csv::new(["j", "value"]);
    for (j, x) in v.iter().enumerate() {
        csv.push(vec![j.to_string(), finite(*x, "value")?]);
    }
    Ok(csv.render())
}

fn cmd_run(ctx: &Ctx<'_>, a: RunArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let pr = resolve_problem(&mut r, a.problem)?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let plan = QgePlan::new(&pr.f, &pr.params, pr.options)?;
    for n in plan.notices() {
        eprintln!("{n}");
    }
    let run = plan.run(pr.seed)?;
    let d = pr.f.dim();
    let mut per = Csv::new(std::iter::once("loop".to_string()).chain((0..d).map(|j| format!("g{j}"))));
    for (i, g) in run.per_loop_estimates.iter().enumerate() {
        let mut row = vec![i.to_string()];
        for x in g {
            row.push(finite(*x, "g")?);
        }
        per.push(row);
    }
    let totals = run.ledger.totals();
    let mut ledger = Csv::new(["cost_model", "base_calls", "smoothing_calls", "expected_base_calls"]);
    ledger.push(vec![
        totals.cost_model.to_string(),
        totals.base_calls.to_string(),
        totals.smoothing_calls.to_string(),
        run.constants.total_queries(pr.options.cost_model).to_string(),
    ]);
    let constants = to_json(&run.constants)?;
    let files = [
        ("estimate.csv", vector_csv(&run.estimate)?),
        ("per_loop.csv", per.render()),
        ("ledger.csv", ledger.render()),
        ("constants.json", constants),
    ];
    ok(emit(ctx, &r, dir.as_deref(), &files, Some(pr.seed), Some(totals))?)
}

#[derive(Serialize)]
struct SuccessReport {
    function: String,
    params: AlgorithmParams,
    constants: DerivedConstants,
    estimate: crate::qge::SuccessEstimate,
    exact: Option<crate::qge::ExactSuccess>,
}

fn cmd_success_prob(ctx: &Ctx<'_>, a: SuccessArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let pr = resolve_problem(&mut r, a.problem)?;
    let trials = r.or("trials", a.trials, 200u64)?;
    let exact = r.or("exact", if a.exact { Some(true) } else { None }, false)?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let (params, notice) = pr.params.clamped();
    if let Some(n) = notice {
        eprintln!("{n}");
    }
    let est = estimate_success_probability(&pr.f, &params, trials, pr.seed, pr.options)?;
    let exact = if exact { Some(exact_success_1d(&pr.f, &params)?) } else { None };
    let report = SuccessReport {
        function: pr.f.name().to_string(),
        params,
        constants: crate::qge::derive_constants(&params)?,
        estimate: est,
        exact,
    };
    let ledger = LedgerTotals {
        cost_model: pr.options.cost_model,
        base_calls: report.estimate.base_calls_per_run * trials,
        smoothing_calls: report.constants.big_n as u64 * report.constants.s * trials,
    };
    ok(emit(ctx, &r, dir.as_deref(), &[("success.json", to_json(&report)?)], Some(pr.seed), Some(ledger))?)
}

fn cmd_sweep(ctx: &Ctx<'_>, a: SweepArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let dims: Vec<usize> = parse_list(&r.or("dims", a.dims, "1,2,3".to_string())?, "dims")?;
    let epss: Vec<f64> = parse_list(&r.or("eps", a.eps, "0.2,0.1,0.05".to_string())?, "eps")?;
    let c = r.or("c", a.c, 1.0)?;
    let sigma = r.or("sigma", a.sigma, 0.5)?;
    let p: NormOrder = r.or("p", a.p, "inf".to_string())?.parse()?;
    let big_p = r.or("success-p", a.success_p, 2.0 / 3.0)?;
    let model: CostModel = r.or("cost-model", a.cost_model, "paper-model".to_string())?.parse()?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let mut csv = Csv::new([
        "d",
        "eps",
        "m",
        "S",
        "n",
        "N",
        "total_queries",
        "naive_evaluations",
        "ratio",
        "scaling_ratio",
        "lower_bound_general",
        "lower_bound_p1",
    ]);
    for &d in &dims {
        for &eps in &epss {
            let params = AlgorithmParams::new(sigma, c, p, d, eps);
            let dc = DerivedConstants::compute(&params)?;
            let q = dc.total_queries(model);
            let naive = d as u64 + 1;
            let scale = c * (d as f64).powf(0.5 + p.reciprocal()) / eps;
            let lbg = lower_bound_general(d, c, eps, p, big_p).ok().map(|x| x.bound_value);
            let lbp = lower_bound_p1(d, c, eps).ok();
            csv.push(vec![
                d.to_string(),
                fmt_f64(eps),
                dc.m.to_string(),
                dc.s.to_string(),
                dc.n.to_string(),
                dc.big_n.to_string(),
                q.to_string(),
                naive.to_string(),
                finite(q as f64 / naive as f64, "ratio")?,
                finite(q as f64 / scale, "scaling_ratio")?,
                or_na(lbg),
                or_na(lbp),
            ]);
        }
    }
    ok(emit(ctx, &r, dir.as_deref(), &[("sweep.csv", csv.render())], None, None)?)
}

#[derive(Serialize)]
struct DistanceSummary {
    samples: usize,
    supremum: f64,
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct BoundsReport {
    d: usize,
    c: f64,
    eps: f64,
    p: NormOrder,
    lower_bound_p1: Option<f64>,
    lower_bound_p1_note: Option<String>,
    lower_bound_general: Option<LowerBoundReport>,
    lower_bound_general_note: Option<String>,
    general_eps_limit: f64,
    oracle_distance: Option<DistanceSummary>,
    hybrid_bound: Option<f64>,
    hybrid_floor: Option<f64>,
}

fn cmd_bounds(ctx: &Ctx<'_>, a: BoundsArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let d = r.or("d", a.d, 2usize)?;
    let c = r.or("c", a.c, 1.0)?;
    let eps: f64 = r.require("eps", a.eps, "scale of the test family")?;
    let p: NormOrder = r.or("p", a.p, "1".to_string())?.parse()?;
    let big_p = r.or("success-p", a.success_p, 17.0 / 18.0)?;
    let seed: u64 = r.require("seed", a.seed, "the oracle-distance check samples random points")?;
    let samples = r.or("samples", a.samples, 100_000usize)?;
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let (lb1, lb1_note) = match lower_bound_p1(d, c, eps) {
        Ok(v) => (Some(v), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let (lbg, lbg_note) = match lower_bound_general(d, c, eps, p, big_p) {
        Ok(v) => {
            let note = v.p_equals_one_guard.then(|| "P = 1 gives N = 0; raised to 1".to_string());
            (Some(v), note)
        }
        Err(e) => (None, Some(e.to_string())),
    };
    let in_range = eps < c / 146.0;
    let bstar: Vec<i8> = vec![1; d];
    let oracle_distance = if in_range {
        let pts = uniform_points(d, samples, 4.0 * std::f64::consts::PI / c, seed);
        let sup = oracle_distance_sup(&bstar, c, eps, &pts)?;
        let bound = oracle_distance_bound(d, c, eps);
        Some(DistanceSummary { samples, supremum: sup, bound, pass: sup <= bound + 1e-12 })
    } else {
        None
    };
    // Hybrid bound on a small grid around the origin, when it fits.
    let (hybrid, floor) = if in_range && d <= 6 {
        let n = (12 / d as u32).clamp(1, 6);
        let grid = GridSpec::new(d, n, 2.0 * std::f64::consts::PI / c)?;
        let centre = TestFunctionInstance::new(d, c, eps, bstar.clone())?;
        let peripherals: Vec<ObjectiveFunction> = (0..d).map(|j| centre.flipped(j).to_objective()).collect();
        let h = hybrid_bound(&centre.to_objective(), &peripherals, &grid)?;
        let fl = (d as f64 / 9.0).sqrt() * c * d as f64 / (146.0 * eps);
        (Some(h).filter(|v| v.is_finite()), Some(fl))
    } else {
        (None, None)
    };
    let report = BoundsReport {
        d,
        c,
        eps,
        p,
        lower_bound_p1: lb1,
        lower_bound_p1_note: lb1_note,
        lower_bound_general: lbg,
        lower_bound_general_note: lbg_note,
        general_eps_limit: general_eps_limit(d, c, p),
        oracle_distance,
        hybrid_bound: hybrid,
        hybrid_floor: floor,
    };
    ok(emit(ctx, &r, dir.as_deref(), &[("bounds.json", to_json(&report)?)], Some(seed), None)?)
}

fn cmd_verify(ctx: &Ctx<'_>, a: VerifyArgs) -> Result<Outcome> {
    let mut r = Resolver::new(ctx.config);
    let level: verify::Level = r.or("level", a.level, "fast".to_string())?.parse()?;
    let seed: Option<u64> = if level == verify::Level::Full {
        Some(r.require("seed", a.seed, "verify --level full runs Monte Carlo checks")?)
    } else {
        r.opt("seed", a.seed)?
    };
    let dir = out_dir(&mut r, a.out.out_dir)?;
    let checks = verify::run_suite(level, seed, a.corrupt_coefficients)?;
    let mut text = String::new();
    for c in &checks {
        text.push_str(&format!("{} {} ({})\n", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail));
    }
    let all = checks.iter().all(|c| c.pass);
    if let Some(d) = dir.as_deref() {
        emit(ctx, &r, Some(d), &[("verify.json", to_json(&checks)?)], seed, None)?;
    }
    Ok(Outcome { code: if all { EXIT_OK } else { EXIT_VERIFY }, stdout: text })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::CATALOG_NAMES;

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["qgrad", "coeffs", "--m", "0"]), EXIT_USAGE);
        assert_eq!(run(["qgrad", "nonsense"]), EXIT_USAGE);
        assert_eq!(run(["qgrad", "run", "--eps", "0.2"]), EXIT_USAGE);
    }

    #[test]
    fn catalog_names_known_to_plotter() {
        for n in CATALOG_NAMES {
            assert!(plot_function(n, 1.0).is_ok());
        }
        assert!(plot_function("tan", 1.0).is_err());
    }
}
