//! Routing engine: LP formulation of code admission and qubit flow, a
//! bounded-variable primal simplex, deterministic rounding to integral
//! schedules, and mechanical schedule validation.

mod formulation;
mod rounding;
mod schedule;
mod simplex;
mod validate;

pub use formulation::{build_formulation, build_formulation_with, VariableLayout};
pub use rounding::round_schedule;
pub use schedule::{load_schedule, save_schedule, ScheduleIoError};
pub use simplex::{solve_lp, solve_lp_with, DEFAULT_MAX_ITERATIONS, DEFAULT_TOLERANCE};
pub use validate::{validate_schedule, validate_schedule_with, Violation};

use serde::{Deserialize, Serialize};

/// Rewrites of the per-request fidelity budget row. The printed constraint
/// compares a sum of per-arc fidelities against a threshold; the default
/// rewrite makes both sides additive path costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    /// c_e = -ln(gamma_e) / n, budget = -ln(threshold). Additive log-costs;
    /// a correction relaxes the budget by omega.
    #[default]
    NegLog,
    /// c_e = (1 - gamma_e) / n, budget = 1 - threshold. First-order expansion
    /// of neg-log, exact at gamma = 1.
    OneMinus,
    /// c_e = gamma_e, budget = threshold, exactly as printed. Dimensionally
    /// odd (any nonzero flow overshoots the budget); kept for reference.
    Literal,
}

/// Budget stand-in for a vacuous threshold (threshold 0 under neg-log).
/// Comfortably above any attainable path cost yet small enough to keep the
/// simplex well conditioned.
pub const VACUOUS_BUDGET: f64 = 1e6;

impl Transform {
    /// Per-qubit arc cost for an edge of fidelity `gamma` in a request of
    /// code size `n`.
    pub fn arc_cost(self, gamma: f64, n: u32) -> f64 {
        match self {
            Transform::NegLog => -gamma.ln() / n as f64,
            Transform::OneMinus => (1.0 - gamma) / n as f64,
            Transform::Literal => gamma,
        }
    }

    /// Per-code budget derived from the fidelity threshold.
    pub fn budget(self, threshold: f64) -> f64 {
        match self {
            Transform::NegLog => {
                if threshold <= 0.0 {
                    VACUOUS_BUDGET
                } else {
                    (-threshold.ln()).min(VACUOUS_BUDGET)
                }
            }
            Transform::OneMinus => 1.0 - threshold,
            Transform::Literal => threshold,
        }
    }
}

impl std::fmt::Display for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Transform::NegLog => "neg-log",
            Transform::OneMinus => "one-minus",
            Transform::Literal => "literal",
        };
        f.write_str(s)
    }
}

/// Whether server nodes host error-correction merges. `Disabled` pins every
/// correction variable to zero and drops the server-coupling rows, leaving
/// servers as plain switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrectionMode {
    Enabled,
    Disabled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FormulationConfig {
    pub gamma_threshold: f64,
    pub omega: f64,
    pub transform: Transform,
    pub solver_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FormulationConfig {
    fn default() -> Self {
        FormulationConfig {
            gamma_threshold: 0.7,
            omega: 0.05,
            transform: Transform::NegLog,
            solver_tolerance: 1e-7,
            max_iterations: 50_000,
        }
    }
}

/// Constraint families of the routing program, one per printed row.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintFamily {
    /// Per request: summed arc costs minus correction relaxations within the
    /// admission-scaled budget.
    FidelityBudget,
    /// Per request: source emits n qubits per admitted code.
    SourceEmission,
    /// Per request: no flow re-enters the source.
    SourceNoReturn,
    /// Per request: no flow leaves the destination.
    SinkNoEmission,
    /// Per request: destination absorbs n qubits per admitted code.
    SinkDelivery,
    /// Per request and relay node: inflow equals outflow.
    FlowConservation,
    /// Per relay node: total inflow across requests within switching capacity.
    SwitchCapacity,
    /// Per request and server: inflow is n qubits per corrected code.
    CorrectionCoupling,
    /// Per arc: total flow across requests within arc capacity.
    ArcCapacity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpVariable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintRow {
    /// Sparse (variable index, coefficient) pairs, ascending by index.
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub family: ConstraintFamily,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    pub variables: Vec<LpVariable>,
    /// Maximization objective, one coefficient per variable.
    pub objective: Vec<f64>,
    pub rows: Vec<ConstraintRow>,
}

impl LpProblem {
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .sum()
    }

    /// Largest bound or row violation of `values`; feasible points score ~0.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, var) in self.variables.iter().enumerate() {
            worst = worst.max(var.lower - values[j]).max(values[j] - var.upper);
        }
        for row in &self.rows {
            let lhs: f64 = row.terms.iter().map(|&(j, c)| c * values[j]).sum();
            let gap = lhs - row.rhs;
            worst = match row.sense {
                Sense::Le => worst.max(gap),
                Sense::Eq => worst.max(gap.abs()),
            };
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    IterationLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
}

/// Integral per-request delivery plan. Flows and corrections are aggregates;
/// per-code structure is recovered by flow decomposition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestSchedule {
    /// Codes delivered for this request.
    pub delivered: u32,
    /// Qubits per arc, indexed by arc id (dense, length = arc count).
    pub flows: Vec<u32>,
    /// Corrected codes per server, indexed like `VariableLayout::servers`.
    pub corrections: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralSchedule {
    pub requests: Vec<RequestSchedule>,
    /// Objective of the LP relaxation this schedule was rounded from.
    pub lp_objective: f64,
}

impl IntegralSchedule {
    /// Total codes delivered.
    pub fn objective(&self) -> u32 {
        self.requests.iter().map(|r| r.delivered).sum()
    }
}
