//! `burngrid` command-line driver.

mod config;
mod plot;

use anyhow::{bail, Context, Result};
use burngrid::analysis::{
    burn_cap_check, cubic_upper_bound_check, default_window, tail_density, tail_in_band, tail_vs_endpoint,
    theoretical_endpoints, DensityVerdict, EndpointTable, VerdictReport,
};
use burngrid::battery::{run_equivalence_battery, MIN_BATTERY_HORIZON};
use burngrid::engine::{compare_backends, DensityTrace, Run};
use burngrid::growth::{probe_controlled_growth, GrowthFunction, ProbeConfig, HEURISTIC_BANNER};
use burngrid::rational::Rational;
use clap::{Args, Parser, Subcommand, ValueEnum};
use config::{load_config, parse_strategy, BackendChoice, CheckpointSpec, CountChoice, Outputs, ResolvedRun, RunConfig};
use rayon::prelude::*;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "burngrid", version, about = "Burning process on growing square grids")]
struct Cli {
    /// Worker threads for parallel runs.
    #[arg(long, global = true, env = "BURNGRID_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one or more simulations and write traces, reports and plots.
    Simulate(SimulateArgs),
    /// Check a CSV trace against analysis criteria.
    Verify(VerifyArgs),
    /// Probe a growth function for the controlled growth conditions.
    ProbeGrowth(ProbeArgs),
    /// Print the theoretical density endpoints for f(n) = ceil(c n^alpha).
    Endpoints(EndpointArgs),
    /// Run the backend equivalence battery.
    Selftest(SelftestArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON file with one run or a list of runs; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// e.g. `n`, `ceil(3/2*n)`, `ceil(n^1.5)`, `pathological`, `repaired(...)`, `tabulated:PATH`.
    #[arg(long)]
    growth: Option<String>,
    /// `constant-origin`, `single-origin`, `full-burn`, `phase[:C]`, inline JSON or `@FILE`.
    #[arg(long)]
    strategy: Option<String>,
    #[arg(long)]
    horizon: Option<u64>,
    /// `geometric[:RATIO]` (default, from t = 8), `explicit:T1,T2,..`, `phase-ends` or `every`.
    #[arg(long)]
    checkpoints: Option<CheckpointSpec>,
    #[arg(long, value_enum)]
    backend: Option<BackendChoice>,
    /// Estimate large counts from this many sampled rows.
    #[arg(long)]
    sampled_rows: Option<u64>,
    #[arg(long, default_value_t = 0, requires = "sampled_rows")]
    seed: u64,
    #[arg(long)]
    exact_through: Option<u64>,
    /// Clamp out-of-box activations instead of rejecting them.
    #[arg(long)]
    lenient: bool,
    #[arg(long)]
    cell_budget: Option<u64>,
    /// CSV trace output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report output.
    #[arg(long)]
    report: Option<PathBuf>,
    /// SVG plot output.
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum CheckName {
    BurnCap,
    CubicBound,
    TailVsEndpoint,
    TailInBand,
    TailDensity,
}

#[derive(Args)]
struct VerifyArgs {
    trace: PathBuf,
    #[arg(long = "check", value_enum, required = true)]
    checks: Vec<CheckName>,
    /// Growth constant for the cubic bound.
    #[arg(long, default_value = "1")]
    c: Rational,
    #[arg(long, default_value_t = 0.25)]
    slack_coeff: f64,
    #[arg(long)]
    target: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    slack: f64,
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
    /// Tail window as a fraction of the checkpoints.
    #[arg(long)]
    window: Option<Rational>,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ProbeArgs {
    #[arg(long)]
    growth: String,
    #[arg(long, default_value_t = 100_000)]
    horizon: u64,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct EndpointArgs {
    #[arg(long, requires = "alpha")]
    c: Option<Rational>,
    #[arg(long, requires = "c")]
    alpha: Option<Rational>,
}

#[derive(Args)]
struct SelftestArgs {
    #[arg(long, default_value_t = 60)]
    horizon: u64,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool: {e}");
        }
    }
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Verify(a) => verify(a),
        Command::ProbeGrowth(a) => probe(a),
        Command::Endpoints(a) => endpoints(a),
        Command::Selftest(a) => selftest(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(bytes)?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn flag_config(a: &SimulateArgs) -> Result<RunConfig> {
    Ok(RunConfig {
        growth: a.growth.clone(),
        strategy: a.strategy.as_deref().map(parse_strategy).transpose()?,
        horizon: a.horizon,
        checkpoints: a.checkpoints.clone(),
        backend: a.backend,
        count_mode: a.sampled_rows.map(|rows| CountChoice::Sampled { rows, seed: a.seed }),
        exact_through: a.exact_through,
        placement: a.lenient.then_some(burngrid::engine::Placement::Lenient),
        cell_budget: a.cell_budget,
        outputs: Outputs { csv: a.out.clone(), report: a.report.clone(), svg: a.svg.clone() },
    })
}

#[derive(Serialize)]
struct SimulateReport {
    growth: String,
    strategy: String,
    backend: String,
    horizon: u64,
    checkpoints: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    endpoints: Option<EndpointTable>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mismatches: Option<Vec<u64>>,
    verdicts: Vec<DensityVerdict>,
}

fn simulate(a: SimulateArgs) -> Result<bool> {
    let flags = flag_config(&a)?;
    let runs = match &a.config {
        Some(p) => load_config(p)?.into_iter().map(|c| c.overlay(&flags)).collect(),
        None => vec![flags],
    };
    if runs.len() > 1 {
        for kind in ["csv", "report", "svg"] {
            let mut paths: Vec<_> = runs
                .iter()
                .filter_map(|r| match kind {
                    "csv" => r.outputs.csv.clone(),
                    "report" => r.outputs.report.clone(),
                    _ => r.outputs.svg.clone(),
                })
                .collect();
            let n = paths.len();
            paths.sort();
            paths.dedup();
            if paths.len() != n {
                bail!("outputs: several runs write the same {kind} file");
            }
        }
    }
    let resolved: Vec<ResolvedRun> = runs
        .iter()
        .enumerate()
        .map(|(i, r)| r.resolve().with_context(|| format!("run {}", i + 1)))
        .collect::<Result<_>>()?;
    let results: Vec<Result<bool>> = resolved.par_iter().map(simulate_one).collect();
    let mut ok = true;
    for r in results {
        ok &= r?;
    }
    Ok(ok)
}

fn simulate_one(r: &ResolvedRun) -> Result<bool> {
    let mut run = Run::new(&r.growth, &r.schedule, r.horizon)
        .checkpoints(r.checkpoints.clone())
        .count_mode(r.count_mode)
        .exact_through(r.exact_through)
        .placement(r.placement);
    if let Some(b) = r.cell_budget {
        run = run.cell_budget(b);
    }
    let (trace, mismatches) = match r.backend.single() {
        Some(b) => (run.backend(b).execute()?, None),
        None => {
            let (oracle, _, mismatches) = compare_backends(&run)?;
            (oracle, Some(mismatches))
        }
    };
    let mut trace = trace;
    if mismatches.is_some() {
        trace.metadata_mut().backend = "oracle+geometric".into();
    }
    let agree = mismatches.as_ref().is_none_or(|m| m.is_empty());
    if let Some(m) = mismatches.as_ref().filter(|m| !m.is_empty()) {
        eprintln!("backends disagree at {} checkpoints, first t = {}", m.len(), m[0]);
    }
    let endpoints = r.growth.power_params().and_then(|(c, alpha)| theoretical_endpoints(c, alpha).ok());

    let last = trace.entries().last().context("no checkpoints recorded")?;
    println!(
        "{} / {}: t = {}, burned = {}, density = {:.6}",
        trace.metadata().growth,
        trace.metadata().strategy,
        last.t,
        last.burned.value(),
        last.density()
    );
    if let Some(path) = &r.outputs.csv {
        let mut buf = Vec::new();
        trace.write_csv(&mut buf)?;
        write_atomic(path, &buf)?;
    }
    if let Some(path) = &r.outputs.svg {
        write_atomic(path, plot::density_svg(&trace, endpoints.as_ref()).as_bytes())?;
    }
    if let Some(path) = &r.outputs.report {
        let mut verdicts = vec![tail_density(&trace, default_window())?];
        if trace.entries().iter().all(|e| e.burned.exact().is_some()) {
            verdicts.push(burn_cap_check(&trace)?);
        }
        let report = SimulateReport {
            growth: trace.metadata().growth.clone(),
            strategy: trace.metadata().strategy.clone(),
            backend: trace.metadata().backend.clone(),
            horizon: r.horizon,
            checkpoints: trace.len(),
            endpoints,
            mismatches,
            verdicts,
        };
        write_atomic(path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    Ok(agree)
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let file = std::fs::File::open(&a.trace).with_context(|| format!("opening {}", a.trace.display()))?;
    let trace = DensityTrace::read_csv(file).with_context(|| format!("reading trace {}", a.trace.display()))?;
    let window = a.window.unwrap_or_else(default_window);
    let mut verdicts = Vec::new();
    for check in &a.checks {
        let v = match check {
            CheckName::BurnCap => burn_cap_check(&trace)?,
            CheckName::CubicBound => cubic_upper_bound_check(&trace, a.c, a.slack_coeff)?,
            CheckName::TailVsEndpoint => {
                let target = a.target.context("--target is required for tail-vs-endpoint")?;
                tail_vs_endpoint(&trace, target, a.slack, window)?
            }
            CheckName::TailInBand => {
                let (lo, hi) = a.lo.zip(a.hi).context("--lo and --hi are required for tail-in-band")?;
                tail_in_band(&trace, lo, hi, window)?
            }
            CheckName::TailDensity => tail_density(&trace, window)?,
        };
        println!(
            "{} {}: tail [{:.6}, {:.6}] over t in [{}, {}]{}",
            if v.pass { "PASS" } else { "FAIL" },
            v.check,
            v.tail_min,
            v.tail_max,
            v.tail_window.0,
            v.tail_window.1,
            v.detail.as_deref().map(|d| format!("; {d}")).unwrap_or_default()
        );
        verdicts.push(v);
    }
    let report = VerdictReport::new(verdicts);
    if let Some(path) = &a.report {
        write_atomic(path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    Ok(report.pass)
}

fn probe(a: ProbeArgs) -> Result<bool> {
    let f: GrowthFunction = a.growth.parse().with_context(|| format!("growth: cannot parse {:?}", a.growth))?;
    let report = probe_controlled_growth(&f, a.horizon, &ProbeConfig::default())?;
    println!("{HEURISTIC_BANNER}");
    println!("function: {} up to n = {}", report.function, report.horizon);
    let flag = |b: bool| if b { "FLAG" } else { "ok" };
    println!("(i)   eventually strictly increasing: {}", flag(report.flag_increasing));
    println!(
        "(ii)  sublinear shifts: {} (tail max f(n + eps(n)) / f(n) = {:.4})",
        flag(report.flag_shift),
        report.tail_max_shift_ratio
    );
    println!(
        "(iii) linear shifts: {} (tail min f(n + cn) / f(n) = {:.4})",
        flag(report.flag_expansion),
        report.tail_min_linear_ratio
    );
    if let Some(path) = &a.report {
        write_atomic(path, serde_json::to_string_pretty(&report)?.as_bytes())?;
    }
    Ok(true)
}

fn endpoints(a: EndpointArgs) -> Result<bool> {
    let cases: Vec<(Rational, Rational)> = match (a.c, a.alpha) {
        (Some(c), Some(alpha)) => vec![(c, alpha)],
        _ => vec![
            (Rational::integer(2), Rational::ONE),
            (Rational::ONE, Rational::new(5, 4)),
            (Rational::ONE, Rational::new(3, 2)),
            (Rational::ONE, Rational::integer(2)),
        ],
    };
    for (c, alpha) in cases {
        match theoretical_endpoints(c, alpha) {
            Ok(t) => println!("c = {c}, alpha = {alpha}: {t}"),
            Err(e) => println!("{e}"),
        }
    }
    Ok(true)
}

fn selftest(a: SelftestArgs) -> Result<bool> {
    if a.horizon < MIN_BATTERY_HORIZON {
        bail!("horizon: the battery needs at least {MIN_BATTERY_HORIZON} turns");
    }
    let cases = run_equivalence_battery(a.horizon);
    for c in &cases {
        let status = if c.pass() { "ok  " } else { "FAIL" };
        let why = match (&c.error, c.mismatches.first()) {
            (Some(e), _) => format!(" ({e})"),
            (None, Some(t)) => format!(" (first mismatch at t = {t})"),
            _ if !c.burn_cap_ok => " (burn cap exceeded)".into(),
            _ => String::new(),
        };
        println!("{status} {} / {}{why}", c.growth, c.strategy);
    }
    let failed = cases.iter().filter(|c| !c.pass()).count();
    println!("{} cases, {failed} failed, every turn up to {}", cases.len(), a.horizon);
    Ok(failed == 0)
}
