//! Recovers per-code structure from a schedule's aggregate flows.
//!
//! Per request, the flow vector is peeled one code at a time. A code is
//! built segment by segment: a probe path runs from the current node until it
//! is absorbed by the nearest correction checkpoint (a server with remaining
//! correction events) or the destination; the rest of the code's n qubits
//! are then pulled along further shortest paths to the same stop, never
//! crossing other checkpoints. If the siblings cannot follow — the probe
//! strayed into another code's corridor — its final arc is banned and the
//! probe rerun, so extraction is deterministic and self-correcting. Exact
//! coverage is enforced: leftover flow or correction events after peeling
//! every code is an error.

use crate::netmodel::{ArcTable, NetworkGraph, NodeId, Request};
use crate::routing::IntegralSchedule;

use super::{CodeRoute, FidelityError, PathBundle};

pub fn decompose_flows(
    schedule: &IntegralSchedule,
    graph: &NetworkGraph,
    requests: &[Request],
) -> Result<Vec<CodeRoute>, FidelityError> {
    let arcs = ArcTable::new(graph);
    let servers = graph.servers();
    if schedule.requests.len() != requests.len() {
        return Err(FidelityError::Decomposition {
            request: 0,
            reason: format!(
                "schedule covers {} requests, instance has {}",
                schedule.requests.len(),
                requests.len()
            ),
        });
    }

    let mut routes = Vec::new();
    for (k, req) in requests.iter().enumerate() {
        let slot = &schedule.requests[k];
        let fail = |reason: String| FidelityError::Decomposition { request: k, reason };
        if slot.flows.len() != arcs.len() || slot.corrections.len() != servers.len() {
            return Err(fail("flow/correction vectors sized for a different graph".into()));
        }
        let mut state = RequestState {
            f: slot.flows.iter().map(|&q| q as i64).collect(),
            e: slot.corrections.clone(),
            arcs: &arcs,
            servers: &servers,
            graph,
            req,
        };
        for _ in 0..slot.delivered {
            routes.push(extract_code(k, &mut state)?);
        }
        if let Some(a) = state.f.iter().position(|&q| q != 0) {
            let arc = arcs.arc(a);
            return Err(fail(format!(
                "{} unrouted qubits left on arc {}->{}",
                state.f[a], arc.from, arc.to
            )));
        }
        if let Some(pos) = state.e.iter().position(|&x| x != 0) {
            return Err(fail(format!(
                "{} unmatched correction events left at server {}",
                state.e[pos], servers[pos]
            )));
        }
    }
    Ok(routes)
}

struct RequestState<'a> {
    f: Vec<i64>,
    e: Vec<u32>,
    arcs: &'a ArcTable,
    servers: &'a [NodeId],
    graph: &'a NetworkGraph,
    req: &'a Request,
}

impl RequestState<'_> {
    fn checkpoint(&self, node: NodeId) -> bool {
        self.servers
            .binary_search(&node)
            .map(|pos| self.e[pos] > 0)
            .unwrap_or(false)
    }
}

fn extract_code(k: usize, state: &mut RequestState) -> Result<CodeRoute, FidelityError> {
    let mut segments = Vec::new();
    let mut merges = Vec::new();
    let mut at = state.req.s;
    loop {
        let (bundles, stop) = extract_segment(k, at, state)?;
        segments.push(bundles);
        if stop == state.req.d {
            break;
        }
        merges.push(stop);
        let pos = state
            .servers
            .binary_search(&stop)
            .expect("stop is a checkpointed server");
        state.e[pos] -= 1;
        at = stop;
        if merges.len() > state.graph.node_count() {
            return Err(FidelityError::Decomposition {
                request: k,
                reason: "correction sequence longer than the node count".into(),
            });
        }
    }
    Ok(CodeRoute {
        request: k,
        segments,
        merges,
    })
}

/// Pulls n qubits from `start` to one common stop, retrying with banned probe
/// arcs until the whole bundle fits through a single corridor.
fn extract_segment(
    k: usize,
    start: NodeId,
    state: &mut RequestState,
) -> Result<(Vec<PathBundle>, NodeId), FidelityError> {
    let n = state.req.n as i64;
    let mut banned = vec![false; state.arcs.len()];
    loop {
        let Some((probe, stop)) = probe_path(start, state, &banned) else {
            return Err(FidelityError::Decomposition {
                request: k,
                reason: format!("no corridor leaves {start} for the remaining flow"),
            });
        };
        let mut log: Vec<(usize, i64)> = Vec::new();
        let mut bundles = Vec::new();
        let mut shipped = 0;
        let mut consume = |state: &mut RequestState, path: Vec<usize>, cap: i64| {
            for &a in &path {
                state.f[a] -= cap;
                log.push((a, cap));
            }
            bundles.push(PathBundle {
                qubits: cap as u32,
                arcs: path,
            });
        };
        let width = probe
            .iter()
            .map(|&a| state.f[a])
            .min()
            .unwrap_or(n)
            .min(n);
        let last_probe_arc = probe.last().copied();
        consume(state, probe, width);
        shipped += width;
        let mut complete = true;
        while shipped < n {
            let Some(path) = sibling_path(start, stop, state) else {
                complete = false;
                break;
            };
            let width = path
                .iter()
                .map(|&a| state.f[a])
                .min()
                .unwrap_or(n - shipped)
                .min(n - shipped);
            consume(state, path, width);
            shipped += width;
        }
        if complete {
            return Ok((bundles, stop));
        }
        for (a, cap) in log {
            state.f[a] += cap;
        }
        match last_probe_arc {
            Some(a) if !banned[a] => banned[a] = true,
            _ => {
                return Err(FidelityError::Decomposition {
                    request: k,
                    reason: format!(
                        "cannot route {n} qubits {start}->{stop} through the remaining flow"
                    ),
                })
            }
        }
    }
}

/// Shortest flow-positive path from `start` until absorbed by the nearest
/// checkpoint or the destination. Checkpoints cannot be crossed, only ended
/// at; ties between stops break toward the smaller node id.
fn probe_path(
    start: NodeId,
    state: &RequestState,
    banned: &[bool],
) -> Option<(Vec<usize>, NodeId)> {
    let absorbing = |node: NodeId| node == state.req.d || (node != start && state.checkpoint(node));
    let allowed = |a: usize| {
        let arc = state.arcs.arc(a);
        state.f[a] > 0 && !banned[a] && arc.to != start
    };
    let (dist, pred) = dijkstra(state, start, &allowed, &absorbing);
    let stop = state
        .graph
        .nodes()
        .filter(|&v| absorbing(v) && dist[v.index()].is_finite())
        .min_by(|&a, &b| {
            dist[a.index()]
                .partial_cmp(&dist[b.index()])
                .unwrap()
                .then(a.cmp(&b))
        })?;
    Some((walk_back(state, &pred, start, stop), stop))
}

/// Shortest flow-positive path start -> stop that crosses no checkpoint.
fn sibling_path(start: NodeId, stop: NodeId, state: &RequestState) -> Option<Vec<usize>> {
    let absorbing = |node: NodeId| node == state.req.d || (node != start && state.checkpoint(node));
    let allowed = |a: usize| {
        let arc = state.arcs.arc(a);
        state.f[a] > 0 && arc.to != start && (!absorbing(arc.to) || arc.to == stop)
    };
    let (dist, pred) = dijkstra(state, start, &allowed, &absorbing);
    if !dist[stop.index()].is_finite() {
        return None;
    }
    Some(walk_back(state, &pred, start, stop))
}

/// Dense Dijkstra over flow-positive arcs; absorbing nodes never relax
/// outward. Arc cost is the negative log fidelity; predecessor ties at equal
/// distance keep the smaller arc id.
fn dijkstra(
    state: &RequestState,
    start: NodeId,
    allowed: &dyn Fn(usize) -> bool,
    absorbing: &dyn Fn(NodeId) -> bool,
) -> (Vec<f64>, Vec<Option<usize>>) {
    let count = state.graph.node_count();
    let mut dist = vec![f64::INFINITY; count];
    let mut pred: Vec<Option<usize>> = vec![None; count];
    let mut done = vec![false; count];
    dist[start.index()] = 0.0;
    for _ in 0..count {
        let mut u = None;
        for v in 0..count {
            if !done[v] && dist[v].is_finite() && u.map_or(true, |best| dist[v] < dist[best]) {
                u = Some(v);
            }
        }
        let Some(u) = u else { break };
        done[u] = true;
        let node = NodeId(u as u32);
        if node != start && absorbing(node) {
            continue;
        }
        for &a in state.arcs.out(node) {
            if !allowed(a) {
                continue;
            }
            let arc = state.arcs.arc(a);
            let cand = dist[u] - state.arcs.fidelity(a).ln();
            let v = arc.to.index();
            if cand < dist[v] || (cand == dist[v] && pred[v].is_some_and(|p| a < p)) {
                dist[v] = cand;
                pred[v] = Some(a);
            }
        }
    }
    (dist, pred)
}

fn walk_back(
    state: &RequestState,
    pred: &[Option<usize>],
    start: NodeId,
    stop: NodeId,
) -> Vec<usize> {
    let mut path = Vec::new();
    let mut cur = stop;
    while cur != start {
        let a = pred[cur.index()].expect("predecessor chain reaches start");
        path.push(a);
        cur = state.arcs.arc(a).from;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{EdgeSpec, NodeRole};
    use crate::routing::RequestSchedule;

    /// Source fans out over two switches, reunites at a server, single tail
    /// to the destination: the split-and-merge layout.
    fn split_instance() -> (NetworkGraph, Vec<Request>) {
        use NodeRole::*;
        let roles = vec![User, Switch, Switch, Server, Switch, User];
        let caps = vec![0, 50, 50, 50, 50, 0];
        let e = |u: u32, v: u32, f: f64, c: u32| EdgeSpec {
            u: NodeId(u),
            v: NodeId(v),
            fidelity: f,
            capacity: c,
        };
        let edges = vec![
            e(0, 1, 0.9, 5),
            e(1, 3, 0.9, 5),
            e(0, 2, 0.8, 4),
            e(2, 3, 0.8, 4),
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
        (graph, requests)
    }

    fn split_schedule(graph: &NetworkGraph) -> IntegralSchedule {
        let arcs = ArcTable::new(graph);
        let mut flows = vec![0u32; arcs.len()];
        let mut put = |u: u32, v: u32, q: u32| {
            flows[arcs.find(NodeId(u), NodeId(v)).unwrap()] = q;
        };
        put(0, 1, 5);
        put(1, 3, 5);
        put(0, 2, 4);
        put(2, 3, 4);
        put(3, 4, 9);
        put(4, 5, 9);
        IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 1,
                flows,
                corrections: vec![1],
            }],
            lp_objective: 1.0,
        }
    }

    #[test]
    fn split_code_decomposes_into_two_branches_and_a_tail() {
        let (graph, requests) = split_instance();
        let schedule = split_schedule(&graph);
        let routes = decompose_flows(&schedule, &graph, &requests).unwrap();
        assert_eq!(routes.len(), 1);
        let route = &routes[0];
        assert_eq!(route.merges, vec![NodeId(3)]);
        assert_eq!(route.segments.len(), 2);
        let mut first: Vec<u32> = route.segments[0].iter().map(|b| b.qubits).collect();
        first.sort();
        assert_eq!(first, vec![4, 5]);
        assert_eq!(route.segments[1].len(), 1);
        assert_eq!(route.segments[1][0].qubits, 9);
    }

    #[test]
    fn usage_conservation_over_routes() {
        let (graph, requests) = split_instance();
        let schedule = split_schedule(&graph);
        let routes = decompose_flows(&schedule, &graph, &requests).unwrap();
        let arcs = ArcTable::new(&graph);
        let mut used = vec![0u32; arcs.len()];
        for route in &routes {
            for segment in &route.segments {
                for bundle in segment {
                    for &a in &bundle.arcs {
                        used[a] += bundle.qubits;
                    }
                }
            }
        }
        assert_eq!(used, schedule.requests[0].flows);
    }

    #[test]
    fn leftover_flow_is_an_error() {
        let (graph, requests) = split_instance();
        let mut schedule = split_schedule(&graph);
        schedule.requests[0].delivered = 0;
        schedule.requests[0].corrections = vec![0];
        let err = decompose_flows(&schedule, &graph, &requests).unwrap_err();
        assert!(matches!(err, FidelityError::Decomposition { request: 0, .. }), "{err}");
    }

    #[test]
    fn empty_schedule_decomposes_to_nothing() {
        let (graph, requests) = split_instance();
        let arcs = ArcTable::new(&graph);
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 0,
                flows: vec![0; arcs.len()],
                corrections: vec![0],
            }],
            lp_objective: 0.0,
        };
        assert!(decompose_flows(&schedule, &graph, &requests)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn serverless_flow_becomes_single_segment_codes() {
        use NodeRole::*;
        let roles = vec![User, Switch, User];
        let caps = vec![0, 40, 0];
        let e = |u: u32, v: u32| EdgeSpec {
            u: NodeId(u),
            v: NodeId(v),
            fidelity: 0.9,
            capacity: 20,
        };
        let graph = NetworkGraph::new(roles, caps, vec![e(0, 1), e(1, 2)]).unwrap();
        let requests = vec![Request {
            s: NodeId(0),
            d: NodeId(2),
            n: 3,
            m: 2,
        }];
        let arcs = ArcTable::new(&graph);
        let mut flows = vec![0u32; arcs.len()];
        flows[arcs.find(NodeId(0), NodeId(1)).unwrap()] = 6;
        flows[arcs.find(NodeId(1), NodeId(2)).unwrap()] = 6;
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 2,
                flows,
                corrections: vec![],
            }],
            lp_objective: 2.0,
        };
        let routes = decompose_flows(&schedule, &graph, &requests).unwrap();
        assert_eq!(routes.len(), 2);
        for route in &routes {
            assert!(route.merges.is_empty());
            assert_eq!(route.segments.len(), 1);
            let total: u32 = route.segments[0].iter().map(|b| b.qubits).sum();
            assert_eq!(total, 3);
        }
    }
}
