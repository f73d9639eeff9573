//! Seeded scenario generation: preferential-attachment topologies, degree-based
//! role assignment, and uniform request sampling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EdgeSpec, GraphError, NetworkGraph, NodeId, NodeRole, Request, ScenarioConfig};

/// Stream separation between the topology and request draws of one seed.
const REQUEST_STREAM: u64 = 0x9e37_79b9_7f4a_7c15;

/// Barabasi-Albert growth: start from `attachment` isolated nodes, then attach
/// each new node to `attachment` distinct existing nodes sampled with
/// probability proportional to degree. Always yields a connected graph with
/// `attachment * (node_count - attachment)` edges.
fn preferential_attachment(
    node_count: usize,
    attachment: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(u32, u32)> {
    let mut edges = Vec::with_capacity(attachment * (node_count - attachment));
    // Node ids repeated once per incident edge; uniform draws from this list
    // are degree-proportional.
    let mut repeated: Vec<u32> = Vec::new();
    let mut targets: Vec<u32> = (0..attachment as u32).collect();
    for source in attachment as u32..node_count as u32 {
        for &t in &targets {
            edges.push((t, source));
        }
        repeated.extend_from_slice(&targets);
        repeated.extend(std::iter::repeat(source).take(attachment));
        if (source as usize) + 1 < node_count {
            let mut next = Vec::with_capacity(attachment);
            while next.len() < attachment {
                let pick = repeated[rng.gen_range(0..repeated.len())];
                if !next.contains(&pick) {
                    next.push(pick);
                }
            }
            targets = next;
        }
    }
    edges
}

/// Degree-based role split: the `server_count` highest-degree nodes become
/// servers, then the `user_count` lowest-degree nodes of the remainder become
/// users; everything else is a switch. Degree ties break toward the smaller id.
pub fn assign_roles(
    node_count: usize,
    edges: &[(u32, u32)],
    server_count: usize,
    user_count: usize,
) -> Result<Vec<NodeRole>, GraphError> {
    if server_count + user_count > node_count {
        return Err(GraphError::InvalidConfig(format!(
            "server_count {server_count} + user_count {user_count} exceeds node_count {node_count}"
        )));
    }
    let mut degree = vec![0usize; node_count];
    for &(u, v) in edges {
        degree[u as usize] += 1;
        degree[v as usize] += 1;
    }
    let mut order: Vec<u32> = (0..node_count as u32).collect();
    order.sort_by_key(|&n| (std::cmp::Reverse(degree[n as usize]), n));
    let mut roles = vec![NodeRole::Switch; node_count];
    for &n in order.iter().take(server_count) {
        roles[n as usize] = NodeRole::Server;
    }
    let mut pool: Vec<u32> = order[server_count..].to_vec();
    pool.sort_by_key(|&n| (degree[n as usize], n));
    for &n in pool.iter().take(user_count) {
        roles[n as usize] = NodeRole::User;
    }
    Ok(roles)
}

/// Builds the topology for `config`: seeded preferential attachment, roles from
/// degrees, then per-edge fidelity/capacity and per-relay switching capacity
/// drawn uniformly. All draws come from `ChaCha8Rng::seed_from_u64(seed)` in a
/// fixed order, so equal configs give byte-equal graphs.
pub fn generate_topology(config: &ScenarioConfig) -> Result<NetworkGraph, GraphError> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let raw = preferential_attachment(config.node_count, config.attachment, &mut rng);
    let roles = assign_roles(
        config.node_count,
        &raw,
        config.server_count,
        config.user_count,
    )?;
    let (flo, fhi) = config.fidelity_range;
    let (clo, chi) = config.edge_capacity_range;
    let edges = raw
        .iter()
        .map(|&(u, v)| {
            let fidelity = if flo == fhi {
                flo
            } else {
                rng.gen_range(flo..=fhi)
            };
            let capacity = rng.gen_range(clo..=chi);
            EdgeSpec {
                u: NodeId(u),
                v: NodeId(v),
                fidelity,
                capacity,
            }
        })
        .collect::<Vec<_>>();
    let (slo, shi) = config.switch_capacity_range;
    let switch_capacity = roles
        .iter()
        .map(|r| if r.is_relay() { rng.gen_range(slo..=shi) } else { 0 })
        .collect();
    NetworkGraph::new(roles, switch_capacity, edges)
}

/// Samples `request_count` distinct ordered user pairs without replacement and
/// a uniform multiplicity per request. Uses a request-only stream derived from
/// the scenario seed so topology and request draws stay independent.
pub fn generate_requests(
    graph: &NetworkGraph,
    config: &ScenarioConfig,
) -> Result<Vec<Request>, GraphError> {
    config.validate()?;
    let users = graph.users();
    let mut pairs = Vec::with_capacity(users.len() * users.len().saturating_sub(1));
    for &s in &users {
        for &d in &users {
            if s != d {
                pairs.push((s, d));
            }
        }
    }
    if config.request_count > pairs.len() {
        return Err(GraphError::InvalidConfig(format!(
            "request_count {} exceeds {} distinct ordered user pairs in the graph",
            config.request_count,
            pairs.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(REQUEST_STREAM));
    let (mlo, mhi) = config.code_multiplicity_range;
    let mut requests = Vec::with_capacity(config.request_count);
    for i in 0..config.request_count {
        let j = rng.gen_range(i..pairs.len());
        pairs.swap(i, j);
        let (s, d) = pairs[i];
        let m = rng.gen_range(mlo..=mhi);
        requests.push(Request {
            s,
            d,
            n: config.code_size,
            m,
        });
    }
    Ok(requests)
}
