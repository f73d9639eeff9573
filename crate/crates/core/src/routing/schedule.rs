//! On-disk schedule format. Flows are stored as directed `u -> v` qubit
//! counts and corrections as per-server code counts, so a schedule file is
//! meaningful only alongside the topology it was solved for.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{ArcTable, NetworkGraph, NodeId};

use super::{IntegralSchedule, RequestSchedule};

#[derive(Debug, Error)]
pub enum ScheduleIoError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed schedule file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("request entries must be dense and ascending: position {position} holds k={k}")]
    BadIndex { position: usize, k: usize },
    #[error("request {k} routes over nonexistent arc {u}->{v}")]
    UnknownArc { k: usize, u: u32, v: u32 },
    #[error("request {k} corrects at node {node}, which is not a server")]
    UnknownServer { k: usize, node: u32 },
    #[error("request {k} lists arc {u}->{v} twice")]
    DuplicateArc { k: usize, u: u32, v: u32 },
    #[error("stored objective {stored} disagrees with summed deliveries {computed}")]
    ObjectiveMismatch { stored: u32, computed: u32 },
}

#[derive(Serialize, Deserialize)]
struct FlowRecord {
    u: u32,
    v: u32,
    qubits: u32,
}

#[derive(Serialize, Deserialize)]
struct EcRecord {
    server: u32,
    codes: u32,
}

#[derive(Serialize, Deserialize)]
struct RequestRecord {
    k: usize,
    #[serde(rename = "Y")]
    delivered: u32,
    flows: Vec<FlowRecord>,
    ec: Vec<EcRecord>,
}

#[derive(Serialize, Deserialize)]
struct ScheduleFile {
    requests: Vec<RequestRecord>,
    objective: u32,
    lp_objective: f64,
}

pub fn save_schedule(
    schedule: &IntegralSchedule,
    graph: &NetworkGraph,
    path: impl AsRef<Path>,
) -> Result<(), ScheduleIoError> {
    let arcs = ArcTable::new(graph);
    let servers = graph.servers();
    let file = ScheduleFile {
        requests: schedule
            .requests
            .iter()
            .enumerate()
            .map(|(k, slot)| RequestRecord {
                k,
                delivered: slot.delivered,
                flows: slot
                    .flows
                    .iter()
                    .enumerate()
                    .filter(|&(_, &q)| q > 0)
                    .map(|(a, &q)| {
                        let arc = arcs.arc(a);
                        FlowRecord {
                            u: arc.from.0,
                            v: arc.to.0,
                            qubits: q,
                        }
                    })
                    .collect(),
                ec: slot
                    .corrections
                    .iter()
                    .enumerate()
                    .filter(|&(_, &x)| x > 0)
                    .map(|(pos, &x)| EcRecord {
                        server: servers[pos].0,
                        codes: x,
                    })
                    .collect(),
            })
            .collect(),
        objective: schedule.objective(),
        lp_objective: schedule.lp_objective,
    };
    let mut text = serde_json::to_string_pretty(&file)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_schedule(
    path: impl AsRef<Path>,
    graph: &NetworkGraph,
) -> Result<IntegralSchedule, ScheduleIoError> {
    let text = std::fs::read_to_string(path)?;
    let file: ScheduleFile = serde_json::from_str(&text)?;
    let arcs = ArcTable::new(graph);
    let layout_servers = graph.servers();

    let mut requests = Vec::with_capacity(file.requests.len());
    for (position, rec) in file.requests.iter().enumerate() {
        if rec.k != position {
            return Err(ScheduleIoError::BadIndex {
                position,
                k: rec.k,
            });
        }
        let mut flows = vec![0u32; arcs.len()];
        for f in &rec.flows {
            let arc = arcs
                .find(NodeId(f.u), NodeId(f.v))
                .ok_or(ScheduleIoError::UnknownArc {
                    k: rec.k,
                    u: f.u,
                    v: f.v,
                })?;
            if flows[arc] != 0 {
                return Err(ScheduleIoError::DuplicateArc {
                    k: rec.k,
                    u: f.u,
                    v: f.v,
                });
            }
            flows[arc] = f.qubits;
        }
        let mut corrections = vec![0u32; layout_servers.len()];
        for e in &rec.ec {
            let pos = layout_servers
                .binary_search(&NodeId(e.server))
                .map_err(|_| ScheduleIoError::UnknownServer {
                    k: rec.k,
                    node: e.server,
                })?;
            corrections[pos] = e.codes;
        }
        requests.push(RequestSchedule {
            delivered: rec.delivered,
            flows,
            corrections,
        });
    }

    let schedule = IntegralSchedule {
        requests,
        lp_objective: file.lp_objective,
    };
    if schedule.objective() != file.objective {
        return Err(ScheduleIoError::ObjectiveMismatch {
            stored: file.objective,
            computed: schedule.objective(),
        });
    }
    Ok(schedule)
}
