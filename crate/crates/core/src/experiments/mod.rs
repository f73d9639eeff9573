//! Scenario sweeps: generate random network instances, run every routing
//! model on them, and serialize per-run metrics to a deterministic CSV.
//!
//! Instance defaults (capacities, request mix) are synthetic benchmark
//! choices, not measurements of any deployed hardware; they are centralized
//! in `ScenarioConfig::default` so sweeps can be re-based easily.

use crate::baselines::{purified_graph, solve_nosplit, solve_raw, BaselineKind};
use crate::fidelity::evaluate_schedule;
use crate::netmodel::{generate_requests, generate_topology, NetworkGraph, Request, ScenarioConfig};
use crate::routing::{
    build_formulation, round_schedule, solve_lp_with, CorrectionMode, FormulationConfig, LpStatus,
};
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid sweep spec: {0}")]
    InvalidSpec(String),
    #[error("csv io: {0}")]
    Io(#[from] std::io::Error),
}

/// Routing models a sweep can exercise: the full split-and-correct
/// formulation plus the restricted baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    SurfaceNet,
    Baseline(BaselineKind),
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Model::SurfaceNet => f.write_str("surfacenet"),
            Model::Baseline(BaselineKind::Raw) => f.write_str("raw"),
            Model::Baseline(BaselineKind::NoSplit) => f.write_str("nosplit"),
            Model::Baseline(BaselineKind::Purify(n)) => write!(f, "purify{n}"),
        }
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "surfacenet" => Ok(Model::SurfaceNet),
            "raw" => Ok(Model::Baseline(BaselineKind::Raw)),
            "nosplit" => Ok(Model::Baseline(BaselineKind::NoSplit)),
            _ => {
                if let Some(digits) = s.strip_prefix("purify") {
                    let n: u32 = digits
                        .parse()
                        .map_err(|_| format!("unknown model '{s}'"))?;
                    if n == 0 {
                        return Err("purify needs at least one pair per channel".into());
                    }
                    Ok(Model::Baseline(BaselineKind::Purify(n)))
                } else {
                    Err(format!(
                        "unknown model '{s}' (expected surfacenet, raw, nosplit, or purifyN)"
                    ))
                }
            }
        }
    }
}

/// A named fidelity regime: edge fidelities are drawn from this range.
#[derive(Debug, Clone, PartialEq)]
pub struct Regime {
    pub name: String,
    pub fidelity_range: (f64, f64),
}

impl Regime {
    pub fn new(name: &str, lo: f64, hi: f64) -> Self {
        Regime {
            name: name.to_string(),
            fidelity_range: (lo, hi),
        }
    }
}

/// Full description of a sweep. Scenario `i` uses seed `base_seed + i`, so
/// a spec pins the entire instance set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub scenario_count: usize,
    pub regimes: Vec<Regime>,
    pub models: Vec<Model>,
    /// Ascending acceptance-threshold grid for threshold sweeps.
    pub gamma_grid: Vec<f64>,
    pub base_seed: u64,
    /// When false (default), wall_ms is reported as 0 so reruns of the same
    /// spec produce byte-identical CSV.
    pub record_timing: bool,
    /// Template for everything except fidelity range, seed, and threshold.
    pub base_config: ScenarioConfig,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            scenario_count: 1080,
            regimes: vec![Regime::new("high", 0.75, 1.0), Regime::new("low", 0.5, 1.0)],
            models: vec![
                Model::SurfaceNet,
                Model::Baseline(BaselineKind::Raw),
                Model::Baseline(BaselineKind::NoSplit),
                Model::Baseline(BaselineKind::Purify(2)),
            ],
            gamma_grid: (10..=19).map(|k| k as f64 * 0.05).collect(),
            base_seed: 0,
            record_timing: false,
            base_config: ScenarioConfig::default(),
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), ExperimentError> {
        let fail = |msg: String| Err(ExperimentError::InvalidSpec(msg));
        if self.scenario_count < 1 {
            return fail("scenario_count must be at least 1".into());
        }
        if self.regimes.is_empty() {
            return fail("at least one fidelity regime is required".into());
        }
        for regime in &self.regimes {
            let (lo, hi) = regime.fidelity_range;
            if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
                return fail(format!(
                    "regime '{}' range ({lo}, {hi}) must lie within (0, 1]",
                    regime.name
                ));
            }
        }
        if self.models.is_empty() {
            return fail("at least one model is required".into());
        }
        Ok(())
    }

    fn scenario_config(&self, regime: &Regime, index: usize) -> ScenarioConfig {
        let mut config = self.base_config.clone();
        config.fidelity_range = regime.fidelity_range;
        config.seed = self.base_seed.wrapping_add(index as u64);
        config
    }
}

/// One model run on one generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: usize,
    pub regime: String,
    pub model: Model,
    pub gamma_threshold: f64,
    pub omega: f64,
    pub throughput: f64,
    pub avg_fidelity: f64,
    pub lp_objective: f64,
    pub integral_objective: f64,
    /// "ok", or a short failure token; failed rows carry zero metrics.
    pub status: String,
    pub wall_ms: u64,
}

struct ModelOutcome {
    lp_objective: f64,
    integral_objective: f64,
    throughput: f64,
    avg_fidelity: f64,
    status: String,
}

fn failed(status: &str) -> ModelOutcome {
    ModelOutcome {
        lp_objective: 0.0,
        integral_objective: 0.0,
        throughput: 0.0,
        avg_fidelity: 0.0,
        status: status.to_string(),
    }
}

fn finish(
    schedule: crate::routing::IntegralSchedule,
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> ModelOutcome {
    let integral_objective = schedule.objective() as f64;
    match evaluate_schedule(
        &schedule,
        graph,
        requests,
        config.gamma_threshold,
        config.omega,
    ) {
        Ok(metrics) => ModelOutcome {
            lp_objective: schedule.lp_objective,
            integral_objective,
            throughput: metrics.throughput,
            avg_fidelity: metrics.average_fidelity,
            status: "ok".to_string(),
        },
        Err(_) => ModelOutcome {
            lp_objective: schedule.lp_objective,
            integral_objective,
            throughput: 0.0,
            avg_fidelity: 0.0,
            status: "eval-error".to_string(),
        },
    }
}

/// Run one model on one instance and report its metrics.
fn run_model(
    model: Model,
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> ModelOutcome {
    match model {
        Model::SurfaceNet => {
            let problem = build_formulation(graph, requests, config);
            let solution = solve_lp_with(&problem, config.solver_tolerance, config.max_iterations);
            match solution.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return failed("lp-infeasible"),
                LpStatus::IterationLimit => return failed("lp-iteration-limit"),
            }
            let schedule =
                round_schedule(&solution, graph, requests, config, CorrectionMode::Enabled);
            finish(schedule, graph, requests, config)
        }
        Model::Baseline(BaselineKind::Raw) => {
            finish(solve_raw(graph, requests, config), graph, requests, config)
        }
        Model::Baseline(BaselineKind::NoSplit) => finish(
            solve_nosplit(graph, requests, config),
            graph,
            requests,
            config,
        ),
        Model::Baseline(BaselineKind::Purify(pairs)) => {
            // Pumped channels change the arc fidelities, so both routing and
            // evaluation must run against the derived graph.
            let pumped = purified_graph(graph, pairs);
            finish(solve_raw(&pumped, requests, config), &pumped, requests, config)
        }
    }
}

fn formulation_config(config: &ScenarioConfig) -> FormulationConfig {
    FormulationConfig {
        gamma_threshold: config.gamma_threshold,
        omega: config.omega,
        ..FormulationConfig::default()
    }
}

fn push_rows(
    rows: &mut Vec<SweepRow>,
    spec: &SweepSpec,
    regime: &Regime,
    scenario: usize,
    thresholds: &[f64],
) {
    let config = spec.scenario_config(regime, scenario);
    let instance = generate_topology(&config).and_then(|graph| {
        generate_requests(&graph, &config).map(|requests| (graph, requests))
    });
    for &model in &spec.models {
        for &gamma in thresholds {
            let mut fconfig = formulation_config(&config);
            fconfig.gamma_threshold = gamma;
            let started = std::time::Instant::now();
            let outcome = match &instance {
                Ok((graph, requests)) => run_model(model, graph, requests, &fconfig),
                Err(_) => failed("gen-error"),
            };
            let wall_ms = if spec.record_timing {
                started.elapsed().as_millis() as u64
            } else {
                0
            };
            rows.push(SweepRow {
                scenario,
                regime: regime.name.clone(),
                model,
                gamma_threshold: gamma,
                omega: fconfig.omega,
                throughput: outcome.throughput,
                avg_fidelity: outcome.avg_fidelity,
                lp_objective: outcome.lp_objective,
                integral_objective: outcome.integral_objective,
                status: outcome.status,
                wall_ms,
            });
        }
    }
}

/// Run every model on every generated scenario at the template threshold.
/// Rows are ordered regime, then scenario, then model; failures are recorded
/// in the status field and the sweep continues.
pub fn run_sweep(spec: &SweepSpec) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    let thresholds = [spec.base_config.gamma_threshold];
    let mut rows = Vec::new();
    for regime in &spec.regimes {
        for scenario in 0..spec.scenario_count {
            push_rows(&mut rows, spec, regime, scenario, &thresholds);
        }
    }
    Ok(rows)
}

/// Evaluate a fixed scenario set under each threshold of an ascending grid.
/// Rows are ordered regime, scenario, model, then threshold.
pub fn threshold_sweep(spec: &SweepSpec, grid: &[f64]) -> Result<Vec<SweepRow>, ExperimentError> {
    spec.validate()?;
    if grid.is_empty() {
        return Err(ExperimentError::InvalidSpec(
            "threshold grid must be nonempty".into(),
        ));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(ExperimentError::InvalidSpec(
            "threshold grid must be strictly ascending".into(),
        ));
    }
    let mut rows = Vec::new();
    for regime in &spec.regimes {
        for scenario in 0..spec.scenario_count {
            push_rows(&mut rows, spec, regime, scenario, grid);
        }
    }
    Ok(rows)
}

/// Per-regime, per-model aggregate over successful rows.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub regime: String,
    pub model: Model,
    pub rows: usize,
    pub mean_throughput: f64,
    /// Fidelity pooled over delivered codes: sum of avg_fidelity weighted by
    /// each row's delivered-code count, over the total delivered.
    pub pooled_fidelity: f64,
}

pub fn summarize(rows: &[SweepRow]) -> Vec<SummaryRow> {
    let mut order: Vec<(String, Model)> = Vec::new();
    for row in rows {
        let key = (row.regime.clone(), row.model);
        if !order.contains(&key) {
            order.push(key);
        }
    }
    order
        .into_iter()
        .map(|(regime, model)| {
            let group: Vec<&SweepRow> = rows
                .iter()
                .filter(|r| r.regime == regime && r.model == model && r.status == "ok")
                .collect();
            let mean_throughput = if group.is_empty() {
                0.0
            } else {
                group.iter().map(|r| r.throughput).sum::<f64>() / group.len() as f64
            };
            let delivered: f64 = group.iter().map(|r| r.integral_objective).sum();
            let pooled_fidelity = if delivered > 0.0 {
                group
                    .iter()
                    .map(|r| r.avg_fidelity * r.integral_objective)
                    .sum::<f64>()
                    / delivered
            } else {
                0.0
            };
            SummaryRow {
                regime,
                model,
                rows: group.len(),
                mean_throughput,
                pooled_fidelity,
            }
        })
        .collect()
}

pub const CSV_HEADER: &str =
    "scenario,regime,model,gamma_threshold,omega,throughput,avg_fidelity,lp_obj,int_obj,status,wall_ms";

/// Render rows as CSV. Floats use shortest round-trip formatting, so equal
/// runs serialize to equal bytes.
pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.scenario,
            r.regime,
            r.model,
            r.gamma_threshold,
            r.omega,
            r.throughput,
            r.avg_fidelity,
            r.lp_objective,
            r.integral_objective,
            r.status,
            r.wall_ms
        ));
    }
    out
}

pub fn save_csv(rows: &[SweepRow], path: &Path) -> Result<(), ExperimentError> {
    std::fs::write(path, rows_to_csv(rows))?;
    Ok(())
}
