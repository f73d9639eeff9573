//! Builds the LP relaxation of the routing program.
//!
//! Per request k the program owns one admission variable Y[k] (codes
//! delivered), one flow variable y[k,a] per directed arc (qubits), and one
//! correction variable x[k,r] per server (codes corrected). The objective
//! maximizes total admissions.

use crate::netmodel::{ArcTable, NetworkGraph, NodeId, Request};

use super::{
    ConstraintFamily, ConstraintRow, CorrectionMode, FormulationConfig, LpProblem, LpVariable,
    Sense,
};

/// Deterministic variable indexing: request blocks of `1 + arcs + servers`
/// laid out as admission, flows by arc id, corrections by ascending server id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableLayout {
    pub arc_count: usize,
    pub servers: Vec<NodeId>,
    pub request_count: usize,
}

impl VariableLayout {
    pub fn new(graph: &NetworkGraph, requests: &[Request]) -> Self {
        VariableLayout {
            arc_count: graph.edges().len() * 2,
            servers: graph.servers(),
            request_count: requests.len(),
        }
    }

    pub fn stride(&self) -> usize {
        1 + self.arc_count + self.servers.len()
    }

    pub fn total(&self) -> usize {
        self.stride() * self.request_count
    }

    pub fn admission(&self, k: usize) -> usize {
        k * self.stride()
    }

    pub fn flow(&self, k: usize, arc: usize) -> usize {
        debug_assert!(arc < self.arc_count);
        k * self.stride() + 1 + arc
    }

    pub fn correction(&self, k: usize, server_pos: usize) -> usize {
        debug_assert!(server_pos < self.servers.len());
        k * self.stride() + 1 + self.arc_count + server_pos
    }

    pub fn server_pos(&self, server: NodeId) -> Option<usize> {
        self.servers.binary_search(&server).ok()
    }
}

pub fn build_formulation(
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
) -> LpProblem {
    build_formulation_with(graph, requests, config, CorrectionMode::Enabled)
}

pub fn build_formulation_with(
    graph: &NetworkGraph,
    requests: &[Request],
    config: &FormulationConfig,
    mode: CorrectionMode,
) -> LpProblem {
    let arcs = ArcTable::new(graph);
    let layout = VariableLayout::new(graph, requests);
    let relays: Vec<NodeId> = graph.nodes().filter(|&n| graph.role(n).is_relay()).collect();
    let budget = config.transform.budget(config.gamma_threshold);

    let mut variables = Vec::with_capacity(layout.total());
    let mut objective = vec![0.0; layout.total()];
    for (k, req) in requests.iter().enumerate() {
        let m = req.m as f64;
        variables.push(LpVariable {
            name: format!("Y[{k}]"),
            lower: 0.0,
            upper: m,
        });
        objective[layout.admission(k)] = 1.0;
        for arc in arcs.arcs() {
            variables.push(LpVariable {
                name: format!("y[{k},{}->{}]", arc.from, arc.to),
                lower: 0.0,
                upper: (req.n * req.m) as f64,
            });
        }
        for &server in &layout.servers {
            let upper = match mode {
                CorrectionMode::Enabled => m,
                CorrectionMode::Disabled => 0.0,
            };
            variables.push(LpVariable {
                name: format!("x[{k},{server}]"),
                lower: 0.0,
                upper,
            });
        }
    }

    let mut rows = Vec::new();
    for (k, req) in requests.iter().enumerate() {
        // Fidelity budget: sum of arc costs minus correction relaxations stays
        // within the admission-scaled budget.
        let mut terms: Vec<(usize, f64)> = vec![(layout.admission(k), -budget)];
        for arc in arcs.arcs() {
            let cost = config.transform.arc_cost(arcs.fidelity(arc.id), req.n);
            terms.push((layout.flow(k, arc.id), cost));
        }
        for pos in 0..layout.servers.len() {
            terms.push((layout.correction(k, pos), -config.omega));
        }
        terms.sort_by_key(|&(j, _)| j);
        rows.push(ConstraintRow {
            terms,
            sense: Sense::Le,
            rhs: 0.0,
            family: ConstraintFamily::FidelityBudget,
        });

        let n = req.n as f64;
        let endpoint_row = |node: NodeId, outgoing: bool, admission: Option<f64>| {
            let ids = if outgoing {
                arcs.out(node)
            } else {
                arcs.into_node(node)
            };
            let mut terms: Vec<(usize, f64)> =
                ids.iter().map(|&a| (layout.flow(k, a), 1.0)).collect();
            if let Some(coeff) = admission {
                terms.push((layout.admission(k), coeff));
            }
            terms.sort_by_key(|&(j, _)| j);
            terms
        };
        rows.push(ConstraintRow {
            terms: endpoint_row(req.s, true, Some(-n)),
            sense: Sense::Eq,
            rhs: 0.0,
            family: ConstraintFamily::SourceEmission,
        });
        rows.push(ConstraintRow {
            terms: endpoint_row(req.s, false, None),
            sense: Sense::Eq,
            rhs: 0.0,
            family: ConstraintFamily::SourceNoReturn,
        });
        rows.push(ConstraintRow {
            terms: endpoint_row(req.d, true, None),
            sense: Sense::Eq,
            rhs: 0.0,
            family: ConstraintFamily::SinkNoEmission,
        });
        rows.push(ConstraintRow {
            terms: endpoint_row(req.d, false, Some(-n)),
            sense: Sense::Eq,
            rhs: 0.0,
            family: ConstraintFamily::SinkDelivery,
        });

        for &r in &relays {
            let mut terms: Vec<(usize, f64)> = arcs
                .into_node(r)
                .iter()
                .map(|&a| (layout.flow(k, a), 1.0))
                .chain(arcs.out(r).iter().map(|&a| (layout.flow(k, a), -1.0)))
                .collect();
            terms.sort_by_key(|&(j, _)| j);
            rows.push(ConstraintRow {
                terms,
                sense: Sense::Eq,
                rhs: 0.0,
                family: ConstraintFamily::FlowConservation,
            });
        }

        if mode == CorrectionMode::Enabled {
            for (pos, &server) in layout.servers.iter().enumerate() {
                let mut terms: Vec<(usize, f64)> = arcs
                    .into_node(server)
                    .iter()
                    .map(|&a| (layout.flow(k, a), 1.0))
                    .collect();
                terms.push((layout.correction(k, pos), -n));
                terms.sort_by_key(|&(j, _)| j);
                rows.push(ConstraintRow {
                    terms,
                    sense: Sense::Eq,
                    rhs: 0.0,
                    family: ConstraintFamily::CorrectionCoupling,
                });
            }
        }
    }

    for &r in &relays {
        let mut terms = Vec::new();
        for k in 0..requests.len() {
            for &a in arcs.into_node(r) {
                terms.push((layout.flow(k, a), 1.0));
            }
        }
        terms.sort_by_key(|&(j, _)| j);
        rows.push(ConstraintRow {
            terms,
            sense: Sense::Le,
            rhs: graph.switch_capacity(r) as f64,
            family: ConstraintFamily::SwitchCapacity,
        });
    }
    for arc in arcs.arcs() {
        let terms: Vec<(usize, f64)> = (0..requests.len())
            .map(|k| (layout.flow(k, arc.id), 1.0))
            .collect();
        rows.push(ConstraintRow {
            terms,
            sense: Sense::Le,
            rhs: arcs.capacity(arc.id) as f64,
            family: ConstraintFamily::ArcCapacity,
        });
    }

    LpProblem {
        variables,
        objective,
        rows,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{EdgeSpec, NodeRole};

    fn triangle_with_servers() -> (NetworkGraph, Vec<Request>) {
        // 0 (user) - 1 (server) - 2 (user), plus direct 0-2 and a server 3 off 1.
        // 3 undirected edges -> 6 arcs, 2 servers.
        let roles = vec![
            NodeRole::User,
            NodeRole::Server,
            NodeRole::User,
            NodeRole::Server,
        ];
        let caps = vec![0, 50, 0, 50];
        let edges = vec![
            EdgeSpec {
                u: NodeId(0),
                v: NodeId(1),
                fidelity: 0.9,
                capacity: 20,
            },
            EdgeSpec {
                u: NodeId(1),
                v: NodeId(2),
                fidelity: 0.9,
                capacity: 20,
            },
            EdgeSpec {
                u: NodeId(1),
                v: NodeId(3),
                fidelity: 0.8,
                capacity: 20,
            },
        ];
        let graph = NetworkGraph::new(roles, caps, edges).unwrap();
        let requests = vec![
            Request {
                s: NodeId(0),
                d: NodeId(2),
                n: 3,
                m: 2,
            },
            Request {
                s: NodeId(2),
                d: NodeId(0),
                n: 3,
                m: 1,
            },
        ];
        (graph, requests)
    }

    #[test]
    fn variable_count_matches_block_formula() {
        let (graph, requests) = triangle_with_servers();
        let lp = build_formulation(&graph, &requests, &FormulationConfig::default());
        // 2 requests * (1 + 6 arcs + 2 servers) = 18.
        assert_eq!(lp.variables.len(), 18);
        assert_eq!(lp.objective.len(), 18);
        let ones = lp.objective.iter().filter(|&&c| c == 1.0).count();
        assert_eq!(ones, 2);
    }

    #[test]
    fn all_nine_families_present() {
        let (graph, requests) = triangle_with_servers();
        let lp = build_formulation(&graph, &requests, &FormulationConfig::default());
        let mut seen = std::collections::HashSet::new();
        for row in &lp.rows {
            seen.insert(row.family);
        }
        assert_eq!(seen.len(), 9, "families: {seen:?}");
    }

    #[test]
    fn disabled_corrections_pin_x_and_drop_coupling() {
        let (graph, requests) = triangle_with_servers();
        let lp = build_formulation_with(
            &graph,
            &requests,
            &FormulationConfig::default(),
            CorrectionMode::Disabled,
        );
        assert_eq!(lp.variables.len(), 18);
        assert!(!lp
            .rows
            .iter()
            .any(|r| r.family == ConstraintFamily::CorrectionCoupling));
        let layout = VariableLayout::new(&graph, &requests);
        for k in 0..2 {
            for pos in 0..layout.servers.len() {
                let var = &lp.variables[layout.correction(k, pos)];
                assert_eq!(var.upper, 0.0);
            }
        }
    }

    #[test]
    fn fidelity_cost_zero_for_perfect_edges() {
        use super::super::Transform;
        assert_eq!(Transform::NegLog.arc_cost(1.0, 9), 0.0);
        assert_eq!(Transform::OneMinus.arc_cost(1.0, 9), 0.0);
        assert!((Transform::NegLog.arc_cost(0.9, 1) - 0.105360515657826).abs() < 1e-12);
    }

    #[test]
    fn budget_caps_vacuous_threshold() {
        use super::super::{Transform, VACUOUS_BUDGET};
        assert_eq!(Transform::NegLog.budget(0.0), VACUOUS_BUDGET);
        assert!((Transform::NegLog.budget(0.8) - 0.22314355131421).abs() < 1e-12);
        assert_eq!(Transform::OneMinus.budget(0.0), 1.0);
        assert_eq!(Transform::Literal.budget(0.35), 0.35);
    }

    #[test]
    fn names_tag_variables() {
        let (graph, requests) = triangle_with_servers();
        let lp = build_formulation(&graph, &requests, &FormulationConfig::default());
        let layout = VariableLayout::new(&graph, &requests);
        assert_eq!(lp.variables[layout.admission(0)].name, "Y[0]");
        assert_eq!(lp.variables[layout.flow(1, 0)].name, "y[1,0->1]");
        assert_eq!(lp.variables[layout.correction(0, 1)].name, "x[0,3]");
        assert_eq!(lp.variables[layout.admission(0)].upper, 2.0);
        assert_eq!(lp.variables[layout.flow(0, 0)].upper, 6.0);
    }
}
