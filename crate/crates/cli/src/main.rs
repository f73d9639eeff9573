//! Command-line front end: generate network instances, solve and evaluate
//! routing schedules, run sweeps, and sample the surface-code simulator.

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use surfacenet_core::baselines::{solve_nosplit, solve_purify, solve_raw};
use surfacenet_core::experiments::{
    run_sweep, save_csv, summarize, threshold_sweep, Model, Regime, SweepSpec,
};
use surfacenet_core::fidelity::{evaluate_schedule, save_metrics};
use surfacenet_core::netmodel::{
    generate_requests, generate_topology, load_requests, load_topology, save_requests,
    save_topology, ScenarioConfig,
};
use surfacenet_core::routing::{
    build_formulation, round_schedule, save_schedule, solve_lp_with, CorrectionMode,
    FormulationConfig, LpStatus, Transform,
};
use surfacenet_core::surface_code::{calibrate_omega, logical_error_rate};

#[derive(Parser)]
#[command(
    name = "surfacenet",
    version,
    about = "Routing and evaluation toolkit for surface-code quantum networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random network topology and request set.
    Gen(GenArgs),
    /// Solve the routing program and write an integral schedule.
    Solve(SolveArgs),
    /// Evaluate a schedule's delivered throughput and fidelity.
    Eval(EvalArgs),
    /// Run every model over random scenarios and write results.csv.
    Sweep(SweepArgs),
    /// Evaluate fixed scenarios across an ascending threshold grid.
    ThresholdSweep(ThresholdSweepArgs),
    /// Monte-Carlo logical error rate of the planar surface code.
    SfcSim(SfcSimArgs),
    /// Calibrate the error-correction fidelity bonus for a code distance.
    CalibrateOmega(CalibrateArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, default_value_t = 20)]
    nodes: usize,
    #[arg(long, default_value_t = 4)]
    servers: usize,
    #[arg(long, default_value_t = 10)]
    users: usize,
    /// Edges each new node attaches during preferential attachment.
    #[arg(long, default_value_t = 2)]
    attachment: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "fid-lo", default_value_t = 0.75)]
    fid_lo: f64,
    #[arg(long = "fid-hi", default_value_t = 1.0)]
    fid_hi: f64,
    #[arg(long = "request-count", default_value_t = 5)]
    request_count: usize,
    #[arg(long = "code-size", default_value_t = 9)]
    code_size: u32,
    #[arg(long, default_value = "topology.json")]
    out: PathBuf,
    #[arg(long = "requests-out", default_value = "requests.json")]
    requests_out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    NegLog,
    OneMinus,
    Literal,
}

impl From<TransformArg> for Transform {
    fn from(t: TransformArg) -> Transform {
        match t {
            TransformArg::NegLog => Transform::NegLog,
            TransformArg::OneMinus => Transform::OneMinus,
            TransformArg::Literal => Transform::Literal,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Surfacenet,
    Raw,
    Nosplit,
    Purify,
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "topology.json")]
    topology: PathBuf,
    #[arg(long, default_value = "requests.json")]
    requests: PathBuf,
    #[arg(long = "gamma-threshold", default_value_t = 0.7)]
    gamma_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    omega: f64,
    #[arg(long, value_enum, default_value_t = TransformArg::NegLog)]
    transform: TransformArg,
    #[arg(long, value_enum, default_value_t = ModelArg::Surfacenet)]
    model: ModelArg,
    /// Channels pumped per link for the purify model.
    #[arg(long, default_value_t = 2)]
    pairs: u32,
    #[arg(long, default_value = "schedule.json")]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, default_value = "topology.json")]
    topology: PathBuf,
    #[arg(long, default_value = "requests.json")]
    requests: PathBuf,
    #[arg(long, default_value = "schedule.json")]
    schedule: PathBuf,
    #[arg(long = "gamma-threshold", default_value_t = 0.7)]
    gamma_threshold: f64,
    #[arg(long, default_value_t = 0.05)]
    omega: f64,
    #[arg(long, default_value = "metrics.json")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    High,
    Low,
    Both,
}

impl RegimeArg {
    fn regimes(self) -> Vec<Regime> {
        let high = Regime::new("high", 0.75, 1.0);
        let low = Regime::new("low", 0.5, 1.0);
        match self {
            RegimeArg::High => vec![high],
            RegimeArg::Low => vec![low],
            RegimeArg::Both => vec![high, low],
        }
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value_t = 1080)]
    scenarios: usize,
    #[arg(long, value_enum, default_value_t = RegimeArg::Both)]
    regime: RegimeArg,
    /// Comma-separated: surfacenet, raw, nosplit, purifyN.
    #[arg(long, default_value = "surfacenet,raw,nosplit,purify2")]
    models: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "gamma-threshold", default_value_t = 0.7)]
    gamma_threshold: f64,
    /// Record wall-clock per run; off by default so reruns are byte-stable.
    #[arg(long = "record-timing", default_value_t = false)]
    record_timing: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct ThresholdSweepArgs {
    /// Grid as lo:hi:step over the acceptance threshold.
    #[arg(long, default_value = "0.5:0.95:0.05")]
    grid: String,
    #[arg(long, default_value_t = 50)]
    scenarios: usize,
    #[arg(long, value_enum, default_value_t = RegimeArg::Both)]
    regime: RegimeArg,
    #[arg(long, default_value = "surfacenet,raw,nosplit,purify2")]
    models: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long = "record-timing", default_value_t = false)]
    record_timing: bool,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SfcSimArgs {
    #[arg(long, default_value_t = 3)]
    distance: u32,
    #[arg(long, default_value_t = 0.01)]
    p: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 3)]
    distance: u32,
    #[arg(long, default_value_t = 0.95)]
    fin: f64,
    #[arg(long, default_value_t = 10_000)]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_models(list: &str) -> Result<Vec<Model>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Model>().map_err(anyhow::Error::msg))
        .collect()
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be lo:hi:step, got '{spec}'");
    }
    let lo: f64 = parts[0].parse().context("grid lower bound")?;
    let hi: f64 = parts[1].parse().context("grid upper bound")?;
    let step: f64 = parts[2].parse().context("grid step")?;
    if !(step > 0.0 && lo <= hi) {
        bail!("grid needs lo <= hi and step > 0, got '{spec}'");
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|k| lo + k as f64 * step).collect())
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let config = ScenarioConfig {
        node_count: args.nodes,
        attachment: args.attachment,
        server_count: args.servers,
        user_count: args.users,
        fidelity_range: (args.fid_lo, args.fid_hi),
        request_count: args.request_count,
        code_size: args.code_size,
        seed: args.seed,
        ..ScenarioConfig::default()
    };
    let graph = generate_topology(&config)?;
    let requests = generate_requests(&graph, &config)?;
    save_topology(&graph, &args.out)?;
    save_requests(&requests, &args.requests_out)?;
    println!(
        "wrote {} ({} nodes, {} edges) and {} ({} requests)",
        args.out.display(),
        graph.node_count(),
        graph.edges().len(),
        args.requests_out.display(),
        requests.len()
    );
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<()> {
    let graph = load_topology(&args.topology)?;
    let requests = load_requests(&args.requests, &graph)?;
    let config = FormulationConfig {
        gamma_threshold: args.gamma_threshold,
        omega: args.omega,
        transform: args.transform.into(),
        ..FormulationConfig::default()
    };
    let schedule = match args.model {
        ModelArg::Surfacenet => {
            let problem = build_formulation(&graph, &requests, &config);
            let solution = solve_lp_with(&problem, config.solver_tolerance, config.max_iterations);
            match solution.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => bail!("relaxation reported infeasible"),
                LpStatus::IterationLimit => bail!("solver hit its iteration limit"),
            }
            round_schedule(&solution, &graph, &requests, &config, CorrectionMode::Enabled)
        }
        ModelArg::Raw => solve_raw(&graph, &requests, &config),
        ModelArg::Nosplit => solve_nosplit(&graph, &requests, &config),
        ModelArg::Purify => {
            if args.pairs == 0 {
                bail!("--pairs must be at least 1");
            }
            solve_purify(&graph, &requests, &config, args.pairs)
        }
    };
    save_schedule(&schedule, &graph, &args.out)?;
    println!(
        "wrote {}: {} codes delivered (relaxation bound {:.4})",
        args.out.display(),
        schedule.objective(),
        schedule.lp_objective
    );
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let graph = load_topology(&args.topology)?;
    let requests = load_requests(&args.requests, &graph)?;
    let schedule = surfacenet_core::routing::load_schedule(&args.schedule, &graph)?;
    let metrics = evaluate_schedule(
        &schedule,
        &graph,
        &requests,
        args.gamma_threshold,
        args.omega,
    )?;
    save_metrics(&metrics, &args.out)?;
    println!(
        "wrote {}: throughput {:.4}, average fidelity {:.4}",
        args.out.display(),
        metrics.throughput,
        metrics.average_fidelity
    );
    Ok(())
}

fn print_summary(rows: &[surfacenet_core::experiments::SweepRow]) {
    for s in summarize(rows) {
        println!(
            "{} {}: {} runs, mean throughput {:.4}, pooled fidelity {:.4}",
            s.regime, s.model, s.rows, s.mean_throughput, s.pooled_fidelity
        );
    }
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut base_config = ScenarioConfig::default();
    base_config.gamma_threshold = args.gamma_threshold;
    let spec = SweepSpec {
        scenario_count: args.scenarios,
        regimes: args.regime.regimes(),
        models: parse_models(&args.models)?,
        base_seed: args.seed,
        record_timing: args.record_timing,
        base_config,
        ..SweepSpec::default()
    };
    let rows = run_sweep(&spec)?;
    save_csv(&rows, &args.out)?;
    println!("wrote {} ({} rows)", args.out.display(), rows.len());
    print_summary(&rows);
    Ok(())
}

fn cmd_threshold_sweep(args: ThresholdSweepArgs) -> Result<()> {
    let grid = parse_grid(&args.grid)?;
    let spec = SweepSpec {
        scenario_count: args.scenarios,
        regimes: args.regime.regimes(),
        models: parse_models(&args.models)?,
        base_seed: args.seed,
        record_timing: args.record_timing,
        gamma_grid: grid.clone(),
        ..SweepSpec::default()
    };
    let rows = threshold_sweep(&spec, &grid)?;
    save_csv(&rows, &args.out)?;
    println!(
        "wrote {} ({} rows over {} thresholds)",
        args.out.display(),
        rows.len(),
        grid.len()
    );
    print_summary(&rows);
    Ok(())
}

fn cmd_sfc_sim(args: SfcSimArgs) -> Result<()> {
    let est = logical_error_rate(args.distance, args.p, args.trials, args.seed)?;
    println!(
        "logical error rate {:.6} +/- {:.6} (95% CI), {} failures / {} completed trials, {} skipped",
        est.rate,
        est.ci95,
        est.failures,
        est.completed(),
        est.skipped
    );
    Ok(())
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<()> {
    let omega = calibrate_omega(args.distance, args.fin, args.trials, args.seed)?;
    println!("omega {omega:.6}");
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ThresholdSweep(args) => cmd_threshold_sweep(args),
        Command::SfcSim(args) => cmd_sfc_sim(args),
        Command::CalibrateOmega(args) => cmd_calibrate(args),
    }
}
