//! On-disk formats. Topologies and request sets round-trip exactly: fidelities
//! are written with shortest-roundtrip float formatting, so `load(save(g))`
//! reproduces bit-identical values.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{EdgeSpec, GraphError, NetworkGraph, NodeRole, Request};

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: u32,
    role: NodeRole,
    capacity: u32,
}

#[derive(Serialize, Deserialize)]
struct TopologyFile {
    nodes: Vec<NodeRecord>,
    edges: Vec<EdgeSpec>,
}

pub fn save_topology(graph: &NetworkGraph, path: impl AsRef<Path>) -> Result<(), GraphError> {
    let file = TopologyFile {
        nodes: graph
            .nodes()
            .map(|n| NodeRecord {
                id: n.0,
                role: graph.role(n),
                capacity: graph.switch_capacity(n),
            })
            .collect(),
        edges: graph.edges().to_vec(),
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_topology(path: impl AsRef<Path>) -> Result<NetworkGraph, GraphError> {
    let text = std::fs::read_to_string(path)?;
    let file: TopologyFile = serde_json::from_str(&text)?;
    let count = file.nodes.len();
    let mut roles = vec![NodeRole::Switch; count];
    let mut caps = vec![0u32; count];
    for (pos, rec) in file.nodes.iter().enumerate() {
        if rec.id as usize != pos {
            return Err(GraphError::InvalidConfig(format!(
                "node ids must be dense and ascending: position {pos} holds id {}",
                rec.id
            )));
        }
        roles[pos] = rec.role;
        caps[pos] = rec.capacity;
    }
    NetworkGraph::new(roles, caps, file.edges)
}

pub fn save_requests(requests: &[Request], path: impl AsRef<Path>) -> Result<(), GraphError> {
    let mut text = serde_json::to_string_pretty(requests)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Loads a request list and checks it against `graph`: endpoints must be
/// distinct users, code size and multiplicity at least 1.
pub fn load_requests(
    path: impl AsRef<Path>,
    graph: &NetworkGraph,
) -> Result<Vec<Request>, GraphError> {
    let text = std::fs::read_to_string(path)?;
    let requests: Vec<Request> = serde_json::from_str(&text)?;
    for (index, r) in requests.iter().enumerate() {
        let bad = |reason: String| GraphError::BadRequest { index, reason };
        for end in [r.s, r.d] {
            if end.index() >= graph.node_count() {
                return Err(bad(format!("node {end} out of range")));
            }
            if graph.role(end) != NodeRole::User {
                return Err(bad(format!("endpoint {end} is not a user")));
            }
        }
        if r.s == r.d {
            return Err(bad(format!("source and destination both {}", r.s)));
        }
        if r.n == 0 {
            return Err(bad("code size n must be at least 1".into()));
        }
        if r.m == 0 {
            return Err(bad("multiplicity m must be at least 1".into()));
        }
    }
    Ok(requests)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{generate_requests, generate_topology, ScenarioConfig};

    #[test]
    fn topology_roundtrip_is_exact() {
        let c = ScenarioConfig {
            seed: 42,
            ..ScenarioConfig::default()
        };
        let g = generate_topology(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topology.json");
        save_topology(&g, &path).unwrap();
        let back = load_topology(&path).unwrap();
        assert_eq!(g, back);
        for (a, b) in g.edges().iter().zip(back.edges()) {
            assert_eq!(a.fidelity.to_bits(), b.fidelity.to_bits());
        }
    }

    #[test]
    fn requests_roundtrip() {
        let c = ScenarioConfig {
            seed: 9,
            ..ScenarioConfig::default()
        };
        let g = generate_topology(&c).unwrap();
        let reqs = generate_requests(&g, &c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("requests.json");
        save_requests(&reqs, &path).unwrap();
        let back = load_requests(&path, &g).unwrap();
        assert_eq!(reqs, back);
    }

    #[test]
    fn topology_schema_shape() {
        let c = ScenarioConfig::default();
        let g = generate_topology(&c).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("topology.json");
        save_topology(&g, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let node0 = &v["nodes"][0];
        assert!(node0["id"].is_u64());
        assert!(node0["role"].is_string());
        assert!(node0["capacity"].is_u64());
        let edge0 = &v["edges"][0];
        for key in ["u", "v", "fidelity", "capacity"] {
            assert!(!edge0[key].is_null(), "missing key {key}");
        }
        let role = node0["role"].as_str().unwrap();
        assert!(["user", "switch", "server"].contains(&role));
    }

    #[test]
    fn load_rejects_non_user_endpoints() {
        let c = ScenarioConfig::default();
        let g = generate_topology(&c).unwrap();
        let server = g.servers()[0];
        let user = g.users()[0];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("requests.json");
        save_requests(
            &[Request {
                s: user,
                d: server,
                n: 9,
                m: 1,
            }],
            &path,
        )
        .unwrap();
        let err = load_requests(&path, &g).unwrap_err();
        assert!(err.to_string().contains("not a user"));
    }
}
