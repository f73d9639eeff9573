//! Deterministic rounding of an LP solution to an integral schedule.
//!
//! Admissions are floored, then each admitted code is routed whole: a spine
//! path from source to destination fixes the ordered servers the code merges
//! at, and every inter-merge leg carries the full n qubits over paths that
//! avoid other servers. A code that cannot be routed in the residual network,
//! or that busts its own fidelity budget, is dropped and the admission count
//! decremented. The result always validates against the constraint set it was
//! built for.

use crate::netmodel::{ArcTable, NetworkGraph, NodeId, NodeRole, Request};

use super::formulation::VariableLayout;
use super::{
    CorrectionMode, FormulationConfig, IntegralSchedule, LpSolution, RequestSchedule,
};

/// Floor guard: LP values a hair under an integer count as that integer.
const ADMISSION_EPS: f64 = 1e-9;

struct Residual {
    arc: Vec<i64>,
    node: Vec<i64>,
    /// Remaining per-request flow allowance on each arc (n*m bound on y),
    /// reset per request.
    allowance: Vec<i64>,
}

/// Snapshot of consumption by one code, for rollback when routing fails.
#[derive(Default)]
struct Consumption {
    arcs: Vec<(usize, i64)>,
    nodes: Vec<(usize, i64)>,
}

impl Residual {
    fn consume(&mut self, log: &mut Consumption, path: &[usize], arcs: &ArcTable, q: i64) {
        for &a in path {
            self.arc[a] -= q;
            self.allowance[a] -= q;
            log.arcs.push((a, q));
            let to = arcs.arc(a).to;
            self.node[to.index()] -= q;
            log.nodes.push((to.index(), q));
        }
    }

    fn undo(&mut self, log: Consumption) {
        for (a, q) in log.arcs {
            self.arc[a] += q;
            self.allowance[a] += q;
        }
        for (n, q) in log.nodes {
            self.node[n] += q;
        }
    }

    /// Units routable over `a` right now for the active request.
    fn available(&self, a: usize, head: NodeId) -> i64 {
        self.arc[a].min(self.allowance[a]).min(self.node[head.index()])
    }
}

pub fn round_schedule(
    solution: &LpSolution,
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
    mode: CorrectionMode,
) -> IntegralSchedule {
    let arcs = ArcTable::new(graph);
    let layout = VariableLayout::new(graph, requests);
    let budget = config.transform.budget(config.gamma_threshold);

    let mut residual = Residual {
        arc: (0..arcs.len()).map(|a| arcs.capacity(a) as i64).collect(),
        node: graph
            .nodes()
            .map(|n| {
                if graph.role(n).is_relay() {
                    graph.switch_capacity(n) as i64
                } else {
                    // Users have no switching stage; only endpoint rows and
                    // arc capacities constrain them.
                    i64::MAX / 2
                }
            })
            .collect(),
        allowance: vec![0; arcs.len()],
    };

    // Requests ordered by descending fractional admission, ties by index.
    let admissions: Vec<f64> = (0..requests.len())
        .map(|k| {
            let y = solution.values[layout.admission(k)];
            y.clamp(0.0, requests[k].m as f64)
        })
        .collect();
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by(|&a, &b| {
        admissions[b]
            .partial_cmp(&admissions[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut schedules: Vec<RequestSchedule> = requests
        .iter()
        .map(|_| RequestSchedule {
            delivered: 0,
            flows: vec![0; arcs.len()],
            corrections: vec![0; layout.servers.len()],
        })
        .collect();

    for &k in &order {
        let target = (admissions[k] + ADMISSION_EPS).floor() as u32;
        let req = &requests[k];
        let bound = req.n as i64 * req.m as i64;
        residual.allowance.iter_mut().for_each(|a| *a = bound);
        let frac: Vec<f64> = (0..arcs.len())
            .map(|a| solution.values[layout.flow(k, a)])
            .collect();
        for _ in 0..target {
            if let Some(routed) = route_code(req, graph, &arcs, &mut residual, &frac, config, mode, budget)
            {
                let slot = &mut schedules[k];
                slot.delivered += 1;
                for (a, q) in routed.flows {
                    slot.flows[a] += q;
                }
                for server in routed.merges {
                    let pos = layout.server_pos(server).expect("merge at non-server");
                    slot.corrections[pos] += 1;
                }
            } else {
                break;
            }
        }
    }

    IntegralSchedule {
        requests: schedules,
        lp_objective: solution.objective,
    }
}

struct RoutedCode {
    flows: Vec<(usize, u32)>,
    merges: Vec<NodeId>,
}

/// Routes one whole code or returns None leaving the residuals untouched.
#[allow(clippy::too_many_arguments)]
fn route_code(
    req: &Request,
    graph: &NetworkGraph,
    arcs: &ArcTable,
    residual: &mut Residual,
    frac: &[f64],
    config: &FormulationConfig,
    mode: CorrectionMode,
    budget: f64,
) -> Option<RoutedCode> {
    let n = req.n as i64;
    // Spine: one guided shortest path fixing the merge sequence. Corrections
    // disabled means no merges ever, so server interiors must be avoided from
    // the start (a server transit without a merge is not allowed there
    // either: with corrections disabled servers pass traffic freely, so they
    // are ordinary interiors).
    let spine = guided_path(
        req.s,
        req.d,
        graph,
        arcs,
        residual,
        frac,
        config,
        req.n,
        &|_| false,
        req,
    )?;
    let merges: Vec<NodeId> = match mode {
        CorrectionMode::Enabled => spine_servers(&spine, graph, arcs),
        CorrectionMode::Disabled => Vec::new(),
    };

    let mut waypoints = Vec::with_capacity(merges.len() + 2);
    waypoints.push(req.s);
    waypoints.extend(merges.iter().copied());
    waypoints.push(req.d);

    let mut log = Consumption::default();
    let mut flows: Vec<(usize, u32)> = Vec::new();
    let mut cost = 0.0;
    for leg in waypoints.windows(2) {
        let (a, b) = (leg[0], leg[1]);
        let mut remaining = n;
        while remaining > 0 {
            // Legs may not cross servers mid-path: with corrections enabled
            // every server transit is a merge point, and those are already
            // fixed by the spine. Disabled mode treats servers as ordinary
            // switches, so nothing is excluded.
            let forbid = |node: NodeId| {
                mode == CorrectionMode::Enabled
                    && graph.role(node) == NodeRole::Server
                    && node != b
            };
            let Some(path) = guided_path(
                a,
                b,
                graph,
                arcs,
                residual,
                frac,
                config,
                req.n,
                &forbid,
                req,
            ) else {
                residual.undo(log);
                return None;
            };
            let mut cap = remaining;
            for &arc in &path {
                cap = cap.min(residual.available(arc, arcs.arc(arc).to));
            }
            if cap <= 0 {
                residual.undo(log);
                return None;
            }
            residual.consume(&mut log, &path, arcs, cap);
            for &arc in &path {
                cost += config.transform.arc_cost(arcs.fidelity(arc), req.n) * cap as f64;
                flows.push((arc, cap as u32));
            }
            remaining -= cap;
        }
    }

    // Per-code fidelity budget, with this code's own merge relaxations. The
    // slack only absorbs float noise; per-code headroom must stay well under
    // the validator's aggregate tolerance so sums over codes still pass.
    let relaxed = budget + config.omega * merges.len() as f64;
    if cost > relaxed + 1e-12 {
        residual.undo(log);
        return None;
    }
    Some(RoutedCode { flows, merges })
}

/// Servers visited by the spine, in traversal order (excluding endpoints,
/// which are users for well-formed requests).
fn spine_servers(spine: &[usize], graph: &NetworkGraph, arcs: &ArcTable) -> Vec<NodeId> {
    let mut out = Vec::new();
    for &a in spine {
        let to = arcs.arc(a).to;
        if graph.role(to) == NodeRole::Server {
            out.push(to);
        }
    }
    out
}

/// Guided deterministic shortest path over arcs with positive residual.
///
/// Primary key is summed arc cost; among predecessors reaching a node at the
/// same distance the incoming arc with larger LP flow wins, then the cheaper
/// arc, then the smaller arc id. Arcs entering the request source or leaving
/// the request destination are never taken (the endpoint rows pin them to
/// zero flow).
#[allow(clippy::too_many_arguments)]
fn guided_path(
    from: NodeId,
    to: NodeId,
    graph: &NetworkGraph,
    arcs: &ArcTable,
    residual: &Residual,
    frac: &[f64],
    config: &FormulationConfig,
    n: u32,
    forbid_interior: &dyn Fn(NodeId) -> bool,
    req: &Request,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(Vec::new());
    }
    let count = graph.node_count();
    let mut dist = vec![f64::INFINITY; count];
    let mut pred: Vec<Option<usize>> = vec![None; count];
    let mut done = vec![false; count];
    dist[from.index()] = 0.0;

    for _ in 0..count {
        // Smallest tentative distance, ties to the smaller node id.
        let mut u = None;
        for v in 0..count {
            if !done[v] && dist[v].is_finite() {
                match u {
                    None => u = Some(v),
                    Some(best) if dist[v] < dist[best] => u = Some(v),
                    _ => {}
                }
            }
        }
        let Some(u) = u else { break };
        if u == to.index() {
            break;
        }
        done[u] = true;
        let node = NodeId(u as u32);
        if node != from && forbid_interior(node) {
            continue;
        }
        for &a in arcs.out(node) {
            let arc = arcs.arc(a);
            if arc.to == req.s || arc.from == req.d {
                continue;
            }
            if residual.available(a, arc.to) <= 0 {
                continue;
            }
            let w = config.transform.arc_cost(arcs.fidelity(a), n).max(0.0);
            let cand = dist[u] + w;
            let v = arc.to.index();
            if cand < dist[v] {
                dist[v] = cand;
                pred[v] = Some(a);
            } else if cand == dist[v] {
                if let Some(p) = pred[v] {
                    if prefer_arc(a, p, frac, arcs, config, n) {
                        pred[v] = Some(a);
                    }
                }
            }
        }
    }

    if !dist[to.index()].is_finite() {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let a = pred[cur.index()]?;
        path.push(a);
        cur = arcs.arc(a).from;
    }
    path.reverse();
    Some(path)
}

/// True when arc `a` beats incumbent `p` at equal path distance: larger LP
/// flow, then smaller cost, then smaller id.
fn prefer_arc(
    a: usize,
    p: usize,
    frac: &[f64],
    arcs: &ArcTable,
    config: &FormulationConfig,
    n: u32,
) -> bool {
    let fa = frac[a];
    let fp = frac[p];
    if fa != fp {
        return fa > fp;
    }
    let ca = config.transform.arc_cost(arcs.fidelity(a), n);
    let cp = config.transform.arc_cost(arcs.fidelity(p), n);
    if ca != cp {
        return ca < cp;
    }
    a < p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::EdgeSpec;
    use crate::routing::{build_formulation_with, solve_lp, validate_schedule_with};

    fn line_graph(roles: Vec<NodeRole>, gammas: &[f64], cap: u32) -> NetworkGraph {
        let caps = roles
            .iter()
            .map(|r| if r.is_relay() { 1000 } else { 0 })
            .collect();
        let edges = gammas
            .iter()
            .enumerate()
            .map(|(i, &g)| EdgeSpec {
                u: NodeId(i as u32),
                v: NodeId(i as u32 + 1),
                fidelity: g,
                capacity: cap,
            })
            .collect();
        NetworkGraph::new(roles, caps, edges).unwrap()
    }

    #[test]
    fn admits_single_code_through_server_within_budget() {
        use NodeRole::*;
        let graph = line_graph(vec![User, Server, User], &[0.9, 0.9], 10);
        let requests = vec![Request {
            s: NodeId(0),
            d: NodeId(2),
            n: 1,
            m: 1,
        }];
        let config = FormulationConfig {
            gamma_threshold: 0.8,
            omega: 0.0,
            ..FormulationConfig::default()
        };
        let lp = build_formulation_with(&graph, &requests, &config, CorrectionMode::Enabled);
        let sol = solve_lp(&lp);
        assert!((sol.objective - 1.0).abs() < 1e-6, "lp {}", sol.objective);
        let schedule = round_schedule(&sol, &graph, &requests, &config, CorrectionMode::Enabled);
        assert_eq!(schedule.objective(), 1);
        assert_eq!(schedule.requests[0].corrections, vec![1]);
        let violations =
            validate_schedule_with(&schedule, &graph, &requests, &config, CorrectionMode::Enabled);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn rejects_code_over_budget() {
        use NodeRole::*;
        let graph = line_graph(vec![User, Server, User], &[0.9, 0.9], 10);
        let requests = vec![Request {
            s: NodeId(0),
            d: NodeId(2),
            n: 1,
            m: 1,
        }];
        let config = FormulationConfig {
            gamma_threshold: 0.9,
            omega: 0.0,
            ..FormulationConfig::default()
        };
        let lp = build_formulation_with(&graph, &requests, &config, CorrectionMode::Enabled);
        let sol = solve_lp(&lp);
        assert!(sol.objective.abs() < 1e-6, "lp {}", sol.objective);
        let schedule = round_schedule(&sol, &graph, &requests, &config, CorrectionMode::Enabled);
        assert_eq!(schedule.objective(), 0);
    }

    #[test]
    fn splits_code_across_parallel_branches() {
        // Split topology: s fans out to two switches, re-merges at a server,
        // then a single tail to d. Arc capacities 5 and 4 force a 9-qubit code
        // to split.
        use NodeRole::*;
        let roles = vec![User, Switch, Switch, Server, Switch, User];
        let caps = vec![0, 100, 100, 100, 100, 0];
        let e = |u: u32, v: u32, f: f64, c: u32| EdgeSpec {
            u: NodeId(u),
            v: NodeId(v),
            fidelity: f,
            capacity: c,
        };
        let edges = vec![
            e(0, 1, 0.9, 5),
            e(0, 2, 0.9, 4),
            e(1, 3, 0.9, 5),
            e(2, 3, 0.9, 4),
            e(3, 4, 0.95, 9),
            e(4, 5, 0.95, 9),
        ];
        let graph = NetworkGraph::new(roles, caps, edges).unwrap();
        let requests = vec![Request {
            s: NodeId(0),
            d: NodeId(5),
            n: 9,
            m: 1,
        }];
        let config = FormulationConfig {
            gamma_threshold: 0.5,
            omega: 0.05,
            ..FormulationConfig::default()
        };
        let lp = build_formulation_with(&graph, &requests, &config, CorrectionMode::Enabled);
        let sol = solve_lp(&lp);
        assert!((sol.objective - 1.0).abs() < 1e-6, "lp {}", sol.objective);
        let schedule = round_schedule(&sol, &graph, &requests, &config, CorrectionMode::Enabled);
        assert_eq!(schedule.objective(), 1);
        let arcs = ArcTable::new(&graph);
        let r = &schedule.requests[0];
        let via_1 = arcs.find(NodeId(0), NodeId(1)).unwrap();
        let via_2 = arcs.find(NodeId(0), NodeId(2)).unwrap();
        assert_eq!(r.flows[via_1], 5);
        assert_eq!(r.flows[via_2], 4);
        assert_eq!(r.corrections.iter().sum::<u32>(), 1);
        let violations =
            validate_schedule_with(&schedule, &graph, &requests, &config, CorrectionMode::Enabled);
        assert!(violations.is_empty(), "{violations:?}");
    }

    #[test]
    fn disabled_mode_never_merges() {
        use NodeRole::*;
        let graph = line_graph(vec![User, Server, User], &[0.95, 0.95], 20);
        let requests = vec![Request {
            s: NodeId(0),
            d: NodeId(2),
            n: 2,
            m: 2,
        }];
        let config = FormulationConfig {
            gamma_threshold: 0.85,
            omega: 0.3,
            ..FormulationConfig::default()
        };
        let lp = build_formulation_with(&graph, &requests, &config, CorrectionMode::Disabled);
        let sol = solve_lp(&lp);
        let schedule = round_schedule(&sol, &graph, &requests, &config, CorrectionMode::Disabled);
        assert_eq!(schedule.objective(), 2);
        assert_eq!(schedule.requests[0].corrections, vec![0]);
        let violations = validate_schedule_with(
            &schedule,
            &graph,
            &requests,
            &config,
            CorrectionMode::Disabled,
        );
        assert!(violations.is_empty(), "{violations:?}");
    }
}
