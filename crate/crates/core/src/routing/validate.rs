//! Mechanical re-check of an integral schedule against every row family and
//! variable bound of the routing program. Flow families are verified in
//! integer arithmetic; the fidelity budget row, the one float row, within a
//! fixed tolerance.

use crate::netmodel::{ArcTable, NetworkGraph, Request};

use super::formulation::VariableLayout;
use super::{ConstraintFamily, CorrectionMode, FormulationConfig, IntegralSchedule};

const BUDGET_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Broken row family; `None` for variable-bound or shape violations.
    pub family: Option<ConstraintFamily>,
    /// Request index, for per-request rows and bounds.
    pub request: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            Some(fam) => write!(f, "{fam:?}: {}", self.message),
            None => write!(f, "bounds: {}", self.message),
        }
    }
}

/// Validates against the full program, corrections enabled.
pub fn validate_schedule(
    schedule: &IntegralSchedule,
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> Vec<Violation> {
    validate_schedule_with(schedule, graph, requests, config, CorrectionMode::Enabled)
}

pub fn validate_schedule_with(
    schedule: &IntegralSchedule,
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
    mode: CorrectionMode,
) -> Vec<Violation> {
    let arcs = ArcTable::new(graph);
    let layout = VariableLayout::new(graph, requests);
    let budget = config.transform.budget(config.gamma_threshold);
    let mut out = Vec::new();

    if schedule.requests.len() != requests.len() {
        out.push(Violation {
            family: None,
            request: None,
            message: format!(
                "schedule covers {} requests, instance has {}",
                schedule.requests.len(),
                requests.len()
            ),
        });
        return out;
    }
    for (k, slot) in schedule.requests.iter().enumerate() {
        if slot.flows.len() != arcs.len() || slot.corrections.len() != layout.servers.len() {
            out.push(Violation {
                family: None,
                request: Some(k),
                message: format!(
                    "request {k}: flow/correction vectors sized {}/{}, expected {}/{}",
                    slot.flows.len(),
                    slot.corrections.len(),
                    arcs.len(),
                    layout.servers.len()
                ),
            });
            return out;
        }
    }

    let inflow = |k: usize, node| -> i64 {
        arcs.into_node(node)
            .iter()
            .map(|&a| schedule.requests[k].flows[a] as i64)
            .sum()
    };
    let outflow = |k: usize, node| -> i64 {
        arcs.out(node)
            .iter()
            .map(|&a| schedule.requests[k].flows[a] as i64)
            .sum()
    };

    for (k, req) in requests.iter().enumerate() {
        let slot = &schedule.requests[k];
        let n = req.n as i64;
        let delivered = slot.delivered as i64;

        if slot.delivered > req.m {
            out.push(Violation {
                family: None,
                request: Some(k),
                message: format!(
                    "request {k}: delivered {} exceeds requested codes {}",
                    slot.delivered, req.m
                ),
            });
        }
        let flow_cap = req.n as i64 * req.m as i64;
        for (a, &q) in slot.flows.iter().enumerate() {
            if q as i64 > flow_cap {
                let arc = arcs.arc(a);
                out.push(Violation {
                    family: None,
                    request: Some(k),
                    message: format!(
                        "request {k}: flow {q} on arc {}->{} exceeds n*m = {flow_cap}",
                        arc.from, arc.to
                    ),
                });
            }
        }
        for (pos, &x) in slot.corrections.iter().enumerate() {
            let limit = match mode {
                CorrectionMode::Enabled => req.m,
                CorrectionMode::Disabled => 0,
            };
            if x > limit {
                out.push(Violation {
                    family: None,
                    request: Some(k),
                    message: format!(
                        "request {k}: corrections {x} at server {} exceed bound {limit}",
                        layout.servers[pos]
                    ),
                });
            }
        }

        let mut lhs = 0.0;
        for (a, &q) in slot.flows.iter().enumerate() {
            lhs += config.transform.arc_cost(arcs.fidelity(a), req.n) * q as f64;
        }
        let ec: i64 = slot.corrections.iter().map(|&x| x as i64).sum();
        lhs -= config.omega * ec as f64;
        if lhs > budget * delivered as f64 + BUDGET_TOLERANCE {
            out.push(Violation {
                family: Some(ConstraintFamily::FidelityBudget),
                request: Some(k),
                message: format!(
                    "request {k}: path cost {lhs:.9} exceeds budget {:.9}",
                    budget * delivered as f64
                ),
            });
        }

        let checks = [
            (
                ConstraintFamily::SourceEmission,
                outflow(k, req.s),
                n * delivered,
                req.s,
            ),
            (ConstraintFamily::SourceNoReturn, inflow(k, req.s), 0, req.s),
            (ConstraintFamily::SinkNoEmission, outflow(k, req.d), 0, req.d),
            (
                ConstraintFamily::SinkDelivery,
                inflow(k, req.d),
                n * delivered,
                req.d,
            ),
        ];
        for (family, got, want, node) in checks {
            if got != want {
                out.push(Violation {
                    family: Some(family),
                    request: Some(k),
                    message: format!("request {k}: node {node} carries {got}, expected {want}"),
                });
            }
        }

        for r in graph.nodes().filter(|&r| graph.role(r).is_relay()) {
            let (i, o) = (inflow(k, r), outflow(k, r));
            if i != o {
                out.push(Violation {
                    family: Some(ConstraintFamily::FlowConservation),
                    request: Some(k),
                    message: format!("request {k}: relay {r} receives {i} but emits {o}"),
                });
            }
        }

        if mode == CorrectionMode::Enabled {
            for (pos, &server) in layout.servers.iter().enumerate() {
                let i = inflow(k, server);
                let want = n * slot.corrections[pos] as i64;
                if i != want {
                    out.push(Violation {
                        family: Some(ConstraintFamily::CorrectionCoupling),
                        request: Some(k),
                        message: format!(
                            "request {k}: server {server} receives {i} qubits for {} corrected codes (expected {want})",
                            slot.corrections[pos]
                        ),
                    });
                }
            }
        }
    }

    for r in graph.nodes().filter(|&r| graph.role(r).is_relay()) {
        let total: i64 = (0..requests.len()).map(|k| inflow(k, r)).sum();
        let cap = graph.switch_capacity(r) as i64;
        if total > cap {
            out.push(Violation {
                family: Some(ConstraintFamily::SwitchCapacity),
                request: None,
                message: format!("relay {r} switches {total} qubits, capacity {cap}"),
            });
        }
    }
    for a in 0..arcs.len() {
        let total: i64 = schedule.requests.iter().map(|s| s.flows[a] as i64).sum();
        let cap = arcs.capacity(a) as i64;
        if total > cap {
            let arc = arcs.arc(a);
            out.push(Violation {
                family: Some(ConstraintFamily::ArcCapacity),
                request: None,
                message: format!(
                    "arc {}->{} carries {total} qubits, capacity {cap}",
                    arc.from, arc.to
                ),
            });
        }
    }

    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{EdgeSpec, NodeId, NodeRole};
    use crate::routing::RequestSchedule;

    fn path_instance() -> (NetworkGraph, Vec<Request>) {
        use NodeRole::*;
        let roles = vec![User, Server, User];
        let caps = vec![0, 50, 0];
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
            m: 1,
        }];
        (graph, requests)
    }

    fn config() -> FormulationConfig {
        FormulationConfig {
            gamma_threshold: 0.5,
            omega: 0.05,
            ..FormulationConfig::default()
        }
    }

    #[test]
    fn accepts_consistent_schedule() {
        let (graph, requests) = path_instance();
        let arcs = ArcTable::new(&graph);
        let a01 = arcs.find(NodeId(0), NodeId(1)).unwrap();
        let a12 = arcs.find(NodeId(1), NodeId(2)).unwrap();
        let mut flows = vec![0; arcs.len()];
        flows[a01] = 3;
        flows[a12] = 3;
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 1,
                flows,
                corrections: vec![1],
            }],
            lp_objective: 1.0,
        };
        let v = validate_schedule(&schedule, &graph, &requests, &config());
        assert!(v.is_empty(), "{v:?}");
    }

    #[test]
    fn flags_conservation_break_at_named_relay() {
        let (graph, requests) = path_instance();
        let arcs = ArcTable::new(&graph);
        let a01 = arcs.find(NodeId(0), NodeId(1)).unwrap();
        let a12 = arcs.find(NodeId(1), NodeId(2)).unwrap();
        let mut flows = vec![0; arcs.len()];
        flows[a01] = 4; // one extra qubit vanishes at the server
        flows[a12] = 3;
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 1,
                flows,
                corrections: vec![1],
            }],
            lp_objective: 1.0,
        };
        let v = validate_schedule(&schedule, &graph, &requests, &config());
        assert!(v
            .iter()
            .any(|v| v.family == Some(ConstraintFamily::FlowConservation)
                && v.message.contains("relay 1")));
    }

    #[test]
    fn flags_partial_code_entering_server() {
        // 1 qubit of a 3-qubit code into the server: n*x mismatch both for
        // x=0 and x=1.
        let (graph, requests) = path_instance();
        let arcs = ArcTable::new(&graph);
        let a01 = arcs.find(NodeId(0), NodeId(1)).unwrap();
        let mut flows = vec![0; arcs.len()];
        flows[a01] = 1;
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 0,
                flows,
                corrections: vec![0],
            }],
            lp_objective: 0.0,
        };
        let v = validate_schedule(&schedule, &graph, &requests, &config());
        assert!(v
            .iter()
            .any(|v| v.family == Some(ConstraintFamily::CorrectionCoupling)));
    }

    #[test]
    fn flags_over_admission_and_capacity() {
        let (graph, requests) = path_instance();
        let arcs = ArcTable::new(&graph);
        let a01 = arcs.find(NodeId(0), NodeId(1)).unwrap();
        let a12 = arcs.find(NodeId(1), NodeId(2)).unwrap();
        let mut flows = vec![0; arcs.len()];
        flows[a01] = 21; // arc capacity is 20, n*m bound is 3
        flows[a12] = 21;
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 7,
                flows,
                corrections: vec![1],
            }],
            lp_objective: 0.0,
        };
        let v = validate_schedule(&schedule, &graph, &requests, &config());
        assert!(v.iter().any(|v| v.family.is_none())); // delivered > m, y > n*m
        assert!(v
            .iter()
            .any(|v| v.family == Some(ConstraintFamily::ArcCapacity)));
    }

    #[test]
    fn disabled_mode_rejects_corrections() {
        let (graph, requests) = path_instance();
        let arcs = ArcTable::new(&graph);
        let schedule = IntegralSchedule {
            requests: vec![RequestSchedule {
                delivered: 0,
                flows: vec![0; arcs.len()],
                corrections: vec![1],
            }],
            lp_objective: 0.0,
        };
        let v = validate_schedule_with(
            &schedule,
            &graph,
            &requests,
            &config(),
            CorrectionMode::Disabled,
        );
        assert!(v.iter().any(|v| v.family.is_none() && v.message.contains("corrections")));
    }
}
