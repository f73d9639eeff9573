//! Comparison models: Raw routing without error correction, single-path
//! routing, and entanglement-purification networks.
//!
//! Raw reuses the full LP pipeline with correction variables pinned to zero,
//! so servers degrade to plain switches. NoSplit routes each code whole over
//! one greedy minimum-cost path, correcting at every server the path crosses.
//! Purify(N) trades capacity for edge fidelity — N raw pairs pump into one
//! purified pair — and then routes like Raw on the derived graph.

use serde::{Deserialize, Serialize};

use crate::fidelity::purified_fidelity;
use crate::netmodel::{ArcTable, EdgeSpec, NetworkGraph, NodeId, NodeRole, Request};
use crate::routing::{
    build_formulation, build_formulation_with, round_schedule, solve_lp_with, CorrectionMode,
    FormulationConfig, IntegralSchedule, RequestSchedule,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BaselineKind {
    Raw,
    NoSplit,
    Purify(u32),
}

/// Full pipeline with all correction variables fixed to zero: servers pass
/// traffic like switches and no merge reward ever applies.
pub fn solve_raw(
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> IntegralSchedule {
    let lp = build_formulation_with(graph, requests, config, CorrectionMode::Disabled);
    let sol = solve_lp_with(&lp, config.solver_tolerance, config.max_iterations);
    round_schedule(&sol, graph, requests, config, CorrectionMode::Disabled)
}

/// Greedy single-path router: each code carries all n qubits over one
/// minimum-cost path in the residual graph, with corrections at every server
/// the path crosses. Undeliverable codes are dropped.
///
/// The reported relaxation bound is the full program's LP objective — every
/// schedule produced here is feasible for the full program, so that bound is
/// valid.
pub fn solve_nosplit(
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> IntegralSchedule {
    let lp = build_formulation(graph, requests, config);
    let bound = solve_lp_with(&lp, config.solver_tolerance, config.max_iterations);

    let arcs = ArcTable::new(graph);
    let servers = graph.servers();
    let budget = config.transform.budget(config.gamma_threshold);
    let mut arc_left: Vec<i64> = (0..arcs.len()).map(|a| arcs.capacity(a) as i64).collect();
    let mut node_left: Vec<i64> = graph
        .nodes()
        .map(|r| {
            if graph.role(r).is_relay() {
                graph.switch_capacity(r) as i64
            } else {
                i64::MAX / 2
            }
        })
        .collect();

    let mut schedules = Vec::with_capacity(requests.len());
    for req in requests {
        let mut slot = RequestSchedule {
            delivered: 0,
            flows: vec![0; arcs.len()],
            corrections: vec![0; servers.len()],
        };
        let n = req.n as i64;
        for _ in 0..req.m {
            let Some(path) = min_cost_wide_path(req, graph, &arcs, &arc_left, &node_left, config)
            else {
                break;
            };
            let mut cost = 0.0;
            let mut ec = 0u32;
            for &a in &path {
                cost += config.transform.arc_cost(arcs.fidelity(a), req.n) * req.n as f64;
                if graph.role(arcs.arc(a).to) == NodeRole::Server {
                    ec += 1;
                }
            }
            if cost > budget + config.omega * ec as f64 + 1e-12 {
                break;
            }
            slot.delivered += 1;
            for &a in &path {
                arc_left[a] -= n;
                slot.flows[a] += req.n;
                let to = arcs.arc(a).to;
                node_left[to.index()] -= n;
                if graph.role(to) == NodeRole::Server {
                    let pos = servers.binary_search(&to).expect("server list is sorted");
                    slot.corrections[pos] += 1;
                }
            }
        }
        schedules.push(slot);
    }

    IntegralSchedule {
        requests: schedules,
        lp_objective: bound.objective,
    }
}

/// Cheapest s->d path every arc of which can carry all n qubits at once.
/// Ties prefer the smaller arc id; nodes scan in id order.
fn min_cost_wide_path(
    req: &Request,
    graph: &NetworkGraph,
    arcs: &ArcTable,
    arc_left: &[i64],
    node_left: &[i64],
    config: &FormulationConfig,
) -> Option<Vec<usize>> {
    let n = req.n as i64;
    let count = graph.node_count();
    let mut dist = vec![f64::INFINITY; count];
    let mut pred: Vec<Option<usize>> = vec![None; count];
    let mut done = vec![false; count];
    dist[req.s.index()] = 0.0;
    for _ in 0..count {
        let mut u = None;
        for v in 0..count {
            if !done[v] && dist[v].is_finite() && u.map_or(true, |best| dist[v] < dist[best]) {
                u = Some(v);
            }
        }
        let u = u?;
        if u == req.d.index() {
            break;
        }
        done[u] = true;
        for &a in arcs.out(NodeId(u as u32)) {
            let arc = arcs.arc(a);
            if arc.to == req.s || arc.from == req.d {
                continue;
            }
            if arc_left[a] < n || node_left[arc.to.index()] < n {
                continue;
            }
            let cand = dist[u] + config.transform.arc_cost(arcs.fidelity(a), req.n).max(0.0);
            let v = arc.to.index();
            if cand < dist[v] || (cand == dist[v] && pred[v].map_or(false, |p| a < p)) {
                dist[v] = cand;
                pred[v] = Some(a);
            }
        }
    }
    if !dist[req.d.index()].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = req.d;
    while cur != req.s {
        let a = pred[cur.index()]?;
        path.push(a);
        cur = arcs.arc(a).from;
    }
    path.reverse();
    Some(path)
}

/// Derived graph for an N-pair purification network: every edge's fidelity is
/// pumped through N-1 purification rounds and its capacity divided by N (the
/// N raw pairs consumed per purified pair). Roles and switch capacities are
/// unchanged.
pub fn purified_graph(graph: &NetworkGraph, pairs: u32) -> NetworkGraph {
    assert!(pairs >= 1, "purification needs at least one pair");
    let edges = graph
        .edges()
        .iter()
        .map(|e| EdgeSpec {
            u: e.u,
            v: e.v,
            fidelity: purified_fidelity(e.fidelity, pairs)
                .expect("stored fidelities are already validated"),
            capacity: e.capacity / pairs,
        })
        .collect();
    let caps = graph.nodes().map(|r| graph.switch_capacity(r)).collect();
    NetworkGraph::new(graph.roles().to_vec(), caps, edges)
        .expect("derived graph keeps the validated shape")
}

/// Purification baseline: Raw routing over the derived graph. Evaluate the
/// result against [`purified_graph`] of the same strength, not the original.
pub fn solve_purify(
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
    pairs: u32,
) -> IntegralSchedule {
    solve_raw(&purified_graph(graph, pairs), requests, config)
}
