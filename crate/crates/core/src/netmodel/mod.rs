//! Network model: nodes with roles, fidelity/capacity-annotated edges,
//! communication requests, and scenario configuration.

mod generate;
mod io;

pub use generate::{assign_roles, generate_requests, generate_topology};
pub use io::{load_requests, load_topology, save_requests, save_topology};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Dense node identifier in `0..node_count`.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeRole {
    User,
    Switch,
    Server,
}

impl NodeRole {
    /// Switches and servers relay traffic and carry a switching capacity.
    /// Servers additionally host error-correction merges.
    pub fn is_relay(self) -> bool {
        matches!(self, NodeRole::Switch | NodeRole::Server)
    }
}

impl std::fmt::Display for NodeRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            NodeRole::User => "user",
            NodeRole::Switch => "switch",
            NodeRole::Server => "server",
        };
        f.write_str(s)
    }
}

/// Undirected physical link. `fidelity` is the per-qubit transmission fidelity
/// gamma_e in (0, 1]; `capacity` is the qubit capacity eta_e of each direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub u: NodeId,
    pub v: NodeId,
    pub fidelity: f64,
    pub capacity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkGraph {
    roles: Vec<NodeRole>,
    /// Per-node switching capacity eta_r. Meaningful for relay nodes; users
    /// carry 0 and are never capacity-checked.
    switch_capacity: Vec<u32>,
    edges: Vec<EdgeSpec>,
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("node {node} out of range for {count} nodes")]
    NodeOutOfRange { node: u32, count: usize },
    #[error("edge {index} ({u}-{v}): self-loop")]
    SelfLoop { index: usize, u: NodeId, v: NodeId },
    #[error("edge {index} ({u}-{v}): duplicate of edge {first}")]
    DuplicateEdge {
        index: usize,
        first: usize,
        u: NodeId,
        v: NodeId,
    },
    #[error("edge {index} ({u}-{v}): fidelity {fidelity} outside (0, 1]")]
    FidelityRange {
        index: usize,
        u: NodeId,
        v: NodeId,
        fidelity: f64,
    },
    #[error("graph is not connected: node {node} unreachable from node 0")]
    Disconnected { node: NodeId },
    #[error("request {index}: {reason}")]
    BadRequest { index: usize, reason: String },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(#[from] serde_json::Error),
}

impl NetworkGraph {
    pub fn new(
        roles: Vec<NodeRole>,
        switch_capacity: Vec<u32>,
        edges: Vec<EdgeSpec>,
    ) -> Result<Self, GraphError> {
        let g = NetworkGraph {
            roles,
            switch_capacity,
            edges,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.roles.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.roles.len() as u32).map(NodeId)
    }

    pub fn role(&self, n: NodeId) -> NodeRole {
        self.roles[n.index()]
    }

    pub fn roles(&self) -> &[NodeRole] {
        &self.roles
    }

    pub fn switch_capacity(&self, n: NodeId) -> u32 {
        self.switch_capacity[n.index()]
    }

    pub fn edges(&self) -> &[EdgeSpec] {
        &self.edges
    }

    /// Server node ids in ascending order.
    pub fn servers(&self) -> Vec<NodeId> {
        self.nodes()
            .filter(|&n| self.role(n) == NodeRole::Server)
            .collect()
    }

    /// User node ids in ascending order.
    pub fn users(&self) -> Vec<NodeId> {
        self.nodes()
            .filter(|&n| self.role(n) == NodeRole::User)
            .collect()
    }

    pub fn degree(&self, n: NodeId) -> usize {
        self.edges
            .iter()
            .filter(|e| e.u == n || e.v == n)
            .count()
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let count = self.node_count();
        if count < 2 {
            return Err(GraphError::InvalidConfig(format!(
                "graph needs at least 2 nodes, got {count}"
            )));
        }
        if self.switch_capacity.len() != count {
            return Err(GraphError::InvalidConfig(format!(
                "switch_capacity has {} entries for {count} nodes",
                self.switch_capacity.len()
            )));
        }
        let mut seen: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
        for (index, e) in self.edges.iter().enumerate() {
            for n in [e.u, e.v] {
                if n.index() >= count {
                    return Err(GraphError::NodeOutOfRange {
                        node: n.0,
                        count,
                    });
                }
            }
            if e.u == e.v {
                return Err(GraphError::SelfLoop {
                    index,
                    u: e.u,
                    v: e.v,
                });
            }
            let key = (e.u.0.min(e.v.0), e.u.0.max(e.v.0));
            if let Some(&first) = seen.get(&key) {
                return Err(GraphError::DuplicateEdge {
                    index,
                    first,
                    u: e.u,
                    v: e.v,
                });
            }
            seen.insert(key, index);
            if !(e.fidelity > 0.0 && e.fidelity <= 1.0) {
                return Err(GraphError::FidelityRange {
                    index,
                    u: e.u,
                    v: e.v,
                    fidelity: e.fidelity,
                });
            }
        }
        // Connectivity over the undirected edge set.
        let mut adj = vec![Vec::new(); count];
        for e in &self.edges {
            adj[e.u.index()].push(e.v.index());
            adj[e.v.index()].push(e.u.index());
        }
        let mut seen = vec![false; count];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(n) = stack.pop() {
            for &m in &adj[n] {
                if !seen[m] {
                    seen[m] = true;
                    stack.push(m);
                }
            }
        }
        if let Some(n) = seen.iter().position(|&s| !s) {
            return Err(GraphError::Disconnected {
                node: NodeId(n as u32),
            });
        }
        Ok(())
    }
}

/// Directed view of the edge list: edge `i` yields arc `2i` (u -> v) and arc
/// `2i + 1` (v -> u), each with the edge's fidelity and full capacity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Arc {
    pub id: usize,
    pub from: NodeId,
    pub to: NodeId,
    pub edge: usize,
}

#[derive(Debug, Clone)]
pub struct ArcTable {
    arcs: Vec<Arc>,
    fidelity: Vec<f64>,
    capacity: Vec<u32>,
    out: Vec<Vec<usize>>,
    inc: Vec<Vec<usize>>,
    by_pair: std::collections::HashMap<(u32, u32), usize>,
}

impl ArcTable {
    pub fn new(graph: &NetworkGraph) -> Self {
        let n = graph.node_count();
        let mut arcs = Vec::with_capacity(graph.edges().len() * 2);
        let mut fidelity = Vec::with_capacity(arcs.capacity());
        let mut capacity = Vec::with_capacity(arcs.capacity());
        let mut out = vec![Vec::new(); n];
        let mut inc = vec![Vec::new(); n];
        let mut by_pair = std::collections::HashMap::new();
        for (edge, e) in graph.edges().iter().enumerate() {
            for (from, to) in [(e.u, e.v), (e.v, e.u)] {
                let id = arcs.len();
                arcs.push(Arc {
                    id,
                    from,
                    to,
                    edge,
                });
                fidelity.push(e.fidelity);
                capacity.push(e.capacity);
                out[from.index()].push(id);
                inc[to.index()].push(id);
                by_pair.insert((from.0, to.0), id);
            }
        }
        ArcTable {
            arcs,
            fidelity,
            capacity,
            out,
            inc,
            by_pair,
        }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> Arc {
        self.arcs[id]
    }

    pub fn fidelity(&self, id: usize) -> f64 {
        self.fidelity[id]
    }

    pub fn capacity(&self, id: usize) -> u32 {
        self.capacity[id]
    }

    /// Arc ids leaving `n`, ascending.
    pub fn out(&self, n: NodeId) -> &[usize] {
        &self.out[n.index()]
    }

    /// Arc ids entering `n`, ascending.
    pub fn into_node(&self, n: NodeId) -> &[usize] {
        &self.inc[n.index()]
    }

    pub fn find(&self, from: NodeId, to: NodeId) -> Option<usize> {
        self.by_pair.get(&(from.0, to.0)).copied()
    }
}

/// One communication request: transfer `m` logical codes of `n` data qubits
/// each from user `s` to user `d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Request {
    pub s: NodeId,
    pub d: NodeId,
    pub n: u32,
    pub m: u32,
}

/// Everything needed to generate one scenario: a topology and a request set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub node_count: usize,
    /// Edges each new node brings during preferential attachment.
    pub attachment: usize,
    pub server_count: usize,
    pub user_count: usize,
    pub fidelity_range: (f64, f64),
    pub edge_capacity_range: (u32, u32),
    pub switch_capacity_range: (u32, u32),
    pub request_count: usize,
    pub code_size: u32,
    pub code_multiplicity_range: (u32, u32),
    pub gamma_threshold: f64,
    pub omega: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let n = 9;
        ScenarioConfig {
            node_count: 20,
            attachment: 2,
            server_count: 4,
            user_count: 10,
            fidelity_range: (0.75, 1.0),
            edge_capacity_range: (n, 3 * n),
            switch_capacity_range: (2 * n, 6 * n),
            request_count: 5,
            code_size: n,
            code_multiplicity_range: (1, 3),
            gamma_threshold: 0.7,
            omega: 0.05,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), GraphError> {
        let fail = |msg: String| Err(GraphError::InvalidConfig(msg));
        if self.node_count < 2 {
            return fail(format!("node_count {} < 2", self.node_count));
        }
        if self.attachment == 0 || self.attachment >= self.node_count {
            return fail(format!(
                "attachment {} must be in 1..node_count ({})",
                self.attachment, self.node_count
            ));
        }
        if self.server_count + self.user_count > self.node_count {
            return fail(format!(
                "server_count {} + user_count {} exceeds node_count {}",
                self.server_count, self.user_count, self.node_count
            ));
        }
        let (flo, fhi) = self.fidelity_range;
        if !(flo > 0.0 && flo <= fhi && fhi <= 1.0) {
            return fail(format!("fidelity_range ({flo}, {fhi}) outside (0, 1]"));
        }
        if self.edge_capacity_range.0 > self.edge_capacity_range.1 {
            return fail(format!(
                "edge_capacity_range ({}, {}) empty",
                self.edge_capacity_range.0, self.edge_capacity_range.1
            ));
        }
        if self.switch_capacity_range.0 > self.switch_capacity_range.1 {
            return fail(format!(
                "switch_capacity_range ({}, {}) empty",
                self.switch_capacity_range.0, self.switch_capacity_range.1
            ));
        }
        if self.code_size == 0 {
            return fail("code_size must be at least 1".into());
        }
        let (mlo, mhi) = self.code_multiplicity_range;
        if mlo == 0 || mlo > mhi {
            return fail(format!("code_multiplicity_range ({mlo}, {mhi}) invalid"));
        }
        if self.request_count > 0 {
            if self.user_count < 2 {
                return fail(format!(
                    "user_count {} < 2 cannot host requests",
                    self.user_count
                ));
            }
            let pairs = self.user_count * (self.user_count - 1);
            if self.request_count > pairs {
                return fail(format!(
                    "request_count {} exceeds {} distinct ordered user pairs",
                    self.request_count, pairs
                ));
            }
        }
        if !(0.0..=1.0).contains(&self.gamma_threshold) {
            return fail(format!(
                "gamma_threshold {} outside [0, 1]",
                self.gamma_threshold
            ));
        }
        if !(self.omega >= 0.0 && self.omega.is_finite()) {
            return fail(format!("omega {} must be finite and >= 0", self.omega));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_graph(gammas: &[f64]) -> NetworkGraph {
        let n = gammas.len() + 1;
        let roles = vec![NodeRole::Switch; n];
        let caps = vec![100; n];
        let edges = gammas
            .iter()
            .enumerate()
            .map(|(i, &g)| EdgeSpec {
                u: NodeId(i as u32),
                v: NodeId(i as u32 + 1),
                fidelity: g,
                capacity: 10,
            })
            .collect();
        NetworkGraph::new(roles, caps, edges).unwrap()
    }

    #[test]
    fn arc_table_doubles_edges() {
        let g = path_graph(&[0.9, 0.8, 0.95]);
        let arcs = ArcTable::new(&g);
        assert_eq!(arcs.len(), 6);
        assert_eq!(arcs.arc(0).from, NodeId(0));
        assert_eq!(arcs.arc(0).to, NodeId(1));
        assert_eq!(arcs.arc(1).from, NodeId(1));
        assert_eq!(arcs.arc(1).to, NodeId(0));
        assert_eq!(arcs.fidelity(2), 0.8);
        assert_eq!(arcs.find(NodeId(2), NodeId(1)), Some(3));
        assert_eq!(arcs.find(NodeId(0), NodeId(2)), None);
        assert_eq!(arcs.out(NodeId(1)), &[1, 2]);
        assert_eq!(arcs.into_node(NodeId(1)), &[0, 3]);
    }

    #[test]
    fn rejects_self_loop() {
        let roles = vec![NodeRole::Switch; 2];
        let edges = vec![EdgeSpec {
            u: NodeId(0),
            v: NodeId(0),
            fidelity: 0.9,
            capacity: 1,
        }];
        let err = NetworkGraph::new(roles, vec![1, 1], edges).unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop { index: 0, .. }));
    }

    #[test]
    fn rejects_duplicate_edge_either_orientation() {
        let roles = vec![NodeRole::Switch; 3];
        let edges = vec![
            EdgeSpec {
                u: NodeId(0),
                v: NodeId(1),
                fidelity: 0.9,
                capacity: 1,
            },
            EdgeSpec {
                u: NodeId(1),
                v: NodeId(2),
                fidelity: 0.9,
                capacity: 1,
            },
            EdgeSpec {
                u: NodeId(1),
                v: NodeId(0),
                fidelity: 0.8,
                capacity: 2,
            },
        ];
        let err = NetworkGraph::new(roles, vec![1; 3], edges).unwrap_err();
        assert!(matches!(
            err,
            GraphError::DuplicateEdge {
                index: 2,
                first: 0,
                ..
            }
        ));
    }

    #[test]
    fn rejects_fidelity_out_of_range() {
        for bad in [0.0, -0.1, 1.2, f64::NAN] {
            let roles = vec![NodeRole::Switch; 2];
            let edges = vec![EdgeSpec {
                u: NodeId(0),
                v: NodeId(1),
                fidelity: bad,
                capacity: 1,
            }];
            let err = NetworkGraph::new(roles, vec![1, 1], edges).unwrap_err();
            assert!(matches!(err, GraphError::FidelityRange { .. }), "{bad}");
        }
    }

    #[test]
    fn rejects_disconnected() {
        let roles = vec![NodeRole::Switch; 4];
        let edges = vec![
            EdgeSpec {
                u: NodeId(0),
                v: NodeId(1),
                fidelity: 0.9,
                capacity: 1,
            },
            EdgeSpec {
                u: NodeId(2),
                v: NodeId(3),
                fidelity: 0.9,
                capacity: 1,
            },
        ];
        let err = NetworkGraph::new(roles, vec![1; 4], edges).unwrap_err();
        assert!(matches!(err, GraphError::Disconnected { .. }));
    }

    #[test]
    fn config_validation_names_violations() {
        let mut c = ScenarioConfig::default();
        c.request_count = 91;
        let err = c.validate().unwrap_err();
        assert!(err.to_string().contains("distinct ordered user pairs"));

        let mut c = ScenarioConfig::default();
        c.attachment = 25;
        assert!(c.validate().unwrap_err().to_string().contains("attachment"));

        let mut c = ScenarioConfig::default();
        c.fidelity_range = (0.0, 0.9);
        assert!(c
            .validate()
            .unwrap_err()
            .to_string()
            .contains("fidelity_range"));
    }
}
