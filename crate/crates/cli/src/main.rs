mod config;
mod output;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use mprk_core::diagnostics::{l2_error, ConservationHistory};
use mprk_core::domain::ConservedField;
use mprk_core::integrator::{integrate, step_plan, IntegrationSummary};
use mprk_core::scenarios::{initialize, ScenarioConfig};
use mprk_core::studies::{study_convergence, study_speedup, SpeedupStudyConfig, StudyError};
use mprk_core::CoupledState;
use serde_json::json;

/// Output directory used when `--output` is not given.
const OUTPUT_ENV: &str = "MPRK_OUTPUT_DIR";

#[derive(Parser)]
#[command(name = "mprk", version, about = "Multirate coupled compressible flow simulator")]
struct Cli {
    /// Worker threads for the right-hand side (1 keeps runs bitwise reproducible).
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory [default: $MPRK_OUTPUT_DIR or ./mprk-output].
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML scenario file.
    Run(RunArgs),
    /// Temporal self-convergence of the multirate scheme.
    StudyConvergence(ConvergenceArgs),
    /// Ideal vs counted (vs timed) speedup on a wind-driven column.
    StudySpeedup(SpeedupArgs),
    /// Quick invariant suite.
    Verify,
}

#[derive(Args)]
struct RunArgs {
    /// Preset name or path to a TOML file.
    scenario: String,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    t_end: Option<f64>,
    /// History cadence in steps (0 = every step).
    #[arg(long)]
    cadence: Option<usize>,
    /// Snapshot cadence in steps (0 = first and last only).
    #[arg(long)]
    snapshot_every: Option<usize>,
    #[arg(long)]
    buffer: Option<usize>,
    /// Check stage repetition at the buffer/slow seam every step.
    #[arg(long)]
    check_buffer: bool,
    /// Override any field, e.g. `--set fluid.mu1=1e-4`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct ConvergenceArgs {
    #[arg(default_value = "convection2d")]
    scenario: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.025, 0.0125, 0.00625, 0.003125])]
    dts: Vec<f64>,
    #[arg(long, default_value_t = 4)]
    m: usize,
    #[arg(long, default_value_t = 2.5)]
    t_end: f64,
    /// Step size of the RK4 reference [default: smallest dt / 10].
    #[arg(long)]
    reference_dt: Option<f64>,
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args)]
struct SpeedupArgs {
    #[arg(long, default_value_t = 20)]
    n: usize,
    #[arg(long, default_value_t = 50)]
    nz_total: usize,
    #[arg(long, default_value_t = 6)]
    buffer: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [0.24, 0.54, 0.84])]
    splits: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [2, 4, 8])]
    ms: Vec<usize>,
    #[arg(long, default_value_t = 2)]
    steps: usize,
    #[arg(long, default_value_t = 0.05)]
    dt: f64,
    /// Also time both runs and report the wall-clock ratio.
    #[arg(long)]
    timed: bool,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn config(e: impl Into<anyhow::Error>) -> Self {
        Failure::Config(e.into())
    }

    fn runtime(e: impl Into<anyhow::Error>) -> Self {
        Failure::Runtime(e.into())
    }
}

fn study_failure(e: StudyError) -> Failure {
    match e {
        StudyError::Config(_) | StudyError::Scenario(_) => Failure::config(e),
        other => Failure::runtime(other),
    }
}

type Outcome<T> = Result<T, Failure>;

fn output_dir(cli: &Option<PathBuf>) -> PathBuf {
    cli.clone()
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("mprk-output"))
}

fn create_dir(dir: &Path) -> Outcome<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display())).map_err(Failure::runtime)
}

fn write_json(path: &Path, value: &serde_json::Value) -> Outcome<()> {
    let text = serde_json::to_string_pretty(value).map_err(Failure::runtime)?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display())).map_err(Failure::runtime)
}

fn resolve(source: &str, mut overrides: Vec<(String, String)>, set: &[String]) -> Outcome<ScenarioConfig> {
    let base = config::load(source).map_err(Failure::config)?;
    for s in set {
        overrides.push(config::split_assignment(s).map_err(Failure::config)?);
    }
    let cfg = config::apply_overrides(&base, &overrides).map_err(Failure::config)?;
    cfg.validate().map_err(Failure::config)?;
    Ok(cfg)
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 { a } else { gcd(b, a % b) }
}

fn l2_norm(field: &ConservedField, grid: &mprk_core::StructuredGrid) -> Vec<f64> {
    let zero = ConservedField::zeros(field.len());
    l2_error(field, &zero, grid).map(|v| v.to_vec()).unwrap_or_default()
}

fn run(args: RunArgs, out: &Path, threads: usize) -> Outcome<()> {
    let started = Instant::now();
    let mut overrides = Vec::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            overrides.push((k.to_string(), v));
        }
    };
    put("run.scheme", args.scheme.clone());
    put("run.m", args.m.map(|v| v.to_string()));
    put("run.dt", args.dt.map(|v| format!("{v:?}")));
    put("run.t_end", args.t_end.map(|v| format!("{v:?}")));
    put("run.cadence", args.cadence.map(|v| v.to_string()));
    put("run.snapshot_every", args.snapshot_every.map(|v| v.to_string()));
    put("buffer_layers", args.buffer.map(|v| v.to_string()));
    put("run.check_buffer", args.check_buffer.then(|| "true".to_string()));
    let cfg = resolve(&args.scenario, overrides, &args.set)?;
    let system = cfg.build_system().map_err(Failure::config)?;
    let mut state = initialize(&cfg).map_err(Failure::config)?;
    create_dir(out)?;

    let scheme = cfg.run.scheme();
    let options = cfg.run.options();
    let (full, partial) = step_plan(state.t, options.t_end, options.dt);
    let last = full + partial.is_some() as usize;
    let d = &system.domain;
    let mut history = ConservationHistory::default();
    let mut files: Vec<PathBuf> = Vec::new();
    let mut io_error: Option<anyhow::Error> = None;
    let history_every = cfg.run.cadence.max(1);
    let snap_every = cfg.run.snapshot_every;
    let mut hook = |k: usize, s: &CoupledState| {
        if k % history_every == 0 || k == last {
            history.record(s, d);
        }
        let snap = k == 0 || k == last || (snap_every > 0 && k % snap_every == 0);
        if snap && io_error.is_none() {
            for (id, grid, field) in [(1u8, &d.grid1, &s.field1), (2u8, &d.grid2, &s.field2)] {
                match output::write_snapshot(out, id, k, s.t, grid, field) {
                    Ok(p) => files.push(p),
                    Err(e) => io_error = Some(e),
                }
            }
        }
    };
    let hook_options = mprk_core::IntegrateOptions { cadence: 1, ..options };
    let t0 = Instant::now();
    let result = integrate(&system, &mut state, scheme, &hook_options, &mut hook);
    let integrate_seconds = t0.elapsed().as_secs_f64();
    if let Some(e) = io_error {
        return Err(Failure::runtime(e));
    }
    let mut csv = Vec::new();
    history.write_csv(&mut csv).map_err(Failure::runtime)?;
    let history_path = out.join("history.csv");
    fs::write(&history_path, csv).map_err(Failure::runtime)?;
    files.push(history_path);
    let summary: IntegrationSummary = result.map_err(Failure::runtime)?;

    let l = &summary.ledger;
    let g = gcd(l.slow_evals, l.fast_evals).max(1);
    let ratio = format!("{}:{}", l.slow_evals / g, l.fast_evals / g);
    let report = json!({
        "scenario": args.scenario,
        "config": cfg,
        "scheme": scheme.name(),
        "threads": threads,
        "steps": summary.steps,
        "t_final": state.t,
        "dt_sequence": summary.dt_sequence,
        "ledger": summary.ledger,
        "slow_fast_eval_ratio": ratio,
        "final": {
            "mass": state.total_mass(d),
            "energy": state.total_energy(d),
            "max_relative_mass_drift": history.max_relative_mass_drift(),
            "max_relative_energy_drift": history.max_relative_energy_drift(),
            "l2_norm": { "omega1": l2_norm(&state.field1, &d.grid1), "omega2": l2_norm(&state.field2, &d.grid2) },
        },
        "interface": { "balance": summary.interface, "max_step_residual": summary.max_interface_residual },
        "max_buffer_defect": summary.max_buffer_defect,
        "timings": { "integrate_seconds": integrate_seconds, "total_seconds": started.elapsed().as_secs_f64() },
        "outputs": files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect::<Vec<_>>(),
    });
    write_json(&out.join("run.json"), &report)?;
    println!(
        "{}: {} steps to t = {} with {}, slow:fast evals {}, mass drift {:.2e}",
        args.scenario,
        summary.steps,
        state.t,
        scheme.name(),
        ratio,
        history.max_relative_mass_drift()
    );
    Ok(())
}

fn convergence(args: ConvergenceArgs, out: &Path) -> Outcome<()> {
    let cfg = resolve(&args.scenario, Vec::new(), &args.set)?;
    mprk_core::studies::check_halving(&args.dts).map_err(study_failure)?;
    let study = study_convergence(&cfg, &args.dts, args.m, args.t_end, args.reference_dt).map_err(study_failure)?;
    create_dir(out)?;
    println!("{:>12} {:>12} {:>12} {:>12}  orders (rho, rho u, rho E)", "dt", "rho", "rho u", "rho E");
    for r in &study.rows {
        let e = r.error;
        let o = r.orders.map_or(String::new(), |o| format!("{:.2} {:.2} {:.2}", o[0], o[1], o[2]));
        println!("{:>12.6} {:>12.3e} {:>12.3e} {:>12.3e}  {o}", r.dt, e.density, e.momentum, e.energy);
    }
    write_json(&out.join("convergence.json"), &json!({ "scenario": args.scenario, "config": cfg, "study": study }))
}

fn speedup(args: SpeedupArgs, out: &Path) -> Outcome<()> {
    let c = SpeedupStudyConfig {
        n: args.n,
        nz_total: args.nz_total,
        buffer_layers: args.buffer,
        splits: args.splits,
        ms: args.ms,
        slow_steps: args.steps,
        dt_slow: args.dt,
        timed: args.timed,
    };
    let rows = study_speedup(&c).map_err(study_failure)?;
    create_dir(out)?;
    let mut csv = String::from("m,slow,buffer,fast,total,split,ideal,eval_ratio,identity,wall_clock_ratio\n");
    println!("{:>3} {:>8} {:>8} {:>10} {:>9} {:>6}", "m", "split", "ideal", "eval", "identity", "wcr");
    for r in &rows {
        let wcr = r.wall_clock_ratio.map_or("-".to_string(), |w| format!("{w:.3}"));
        println!(
            "{:>3} {:>8.3} {:>8.4} {:>10.4} {:>9} {:>6}",
            r.m, r.split, r.ideal, r.eval_ratio, r.identity_holds, wcr
        );
        csv.push_str(&format!(
            "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{},{}\n",
            r.m, r.counts.slow, r.counts.buffer, r.counts.fast, r.counts.total, r.split, r.ideal, r.eval_ratio,
            r.identity_holds, wcr
        ));
    }
    fs::write(out.join("speedup.csv"), csv).map_err(Failure::runtime)?;
    write_json(&out.join("speedup.json"), &json!({ "config": c, "cases": rows }))?;
    if rows.iter().all(|r| r.identity_holds) {
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!("eval-count identity failed")))
    }
}

fn verify_all(out: &Path) -> Outcome<()> {
    let checks = verify::run_all().map_err(Failure::runtime)?;
    for c in &checks {
        println!("[{}] {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    create_dir(out)?;
    write_json(&out.join("verify.json"), &json!(checks))?;
    let failed = checks.iter().filter(|c| !c.pass).count();
    if failed == 0 {
        Ok(())
    } else {
        Err(Failure::runtime(anyhow!("{failed} check(s) failed")))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.threads == 0 {
        eprintln!("error: --threads must be at least 1");
        return ExitCode::from(1);
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let out = output_dir(&cli.output);
    let result = match cli.command {
        Command::Run(a) => run(a, &out, cli.threads),
        Command::StudyConvergence(a) => convergence(a, &out),
        Command::StudySpeedup(a) => speedup(a, &out),
        Command::Verify => verify_all(&out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
