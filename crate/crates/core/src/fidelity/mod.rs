//! End-to-end fidelity evaluation of integral schedules.
//!
//! A delivered code is a sequence of segments: bundles of qubit paths that
//! reunite either at an error-correction server or at the destination. Path
//! fidelity multiplies along arcs; at each correction server the branch
//! fidelities combine as a qubit-weighted mean plus the correction reward,
//! clamped to 1; the final segment contributes its weighted mean without a
//! reward. Purification strength is modeled by the standard two-pair pumping
//! recurrence.

mod decompose;

pub use decompose::decompose_flows;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netmodel::{ArcTable, NetworkGraph, NodeId, Request};
use crate::routing::IntegralSchedule;

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("fidelity {0} outside (0, 1]")]
    Domain(f64),
    #[error("branch qubits sum to {got}, code size is {expected}")]
    BranchMismatch { got: u32, expected: u32 },
    #[error("request {request}: {reason}")]
    Decomposition { request: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed metrics file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// Product of per-arc fidelities along one path; the empty path is the
/// identity channel.
pub fn path_fidelity(gammas: &[f64]) -> Result<f64, FidelityError> {
    let mut product = 1.0;
    for &g in gammas {
        if !(g > 0.0 && g <= 1.0) {
            return Err(FidelityError::Domain(g));
        }
        product *= g;
    }
    Ok(product)
}

/// Fidelity after an error-correction merge: the qubit-weighted mean of the
/// branch fidelities plus the correction reward, clamped to 1.
pub fn ec_merge_fidelity(
    branches: &[(u32, f64)],
    n: u32,
    omega: f64,
) -> Result<f64, FidelityError> {
    let got: u32 = branches.iter().map(|&(q, _)| q).sum();
    if got != n {
        return Err(FidelityError::BranchMismatch { got, expected: n });
    }
    let mean: f64 = branches
        .iter()
        .map(|&(q, f)| q as f64 / n as f64 * f)
        .sum();
    Ok((mean + omega).min(1.0))
}

/// Fidelity of one pair after pumping it with `n - 1` fresh pairs of the same
/// input fidelity. Fixed points at 0.5 and 1.
pub fn purified_fidelity(fidelity: f64, pairs: u32) -> Result<f64, FidelityError> {
    if !(fidelity > 0.0 && fidelity <= 1.0) {
        return Err(FidelityError::Domain(fidelity));
    }
    assert!(pairs >= 1, "purification needs at least one pair");
    let mut f = fidelity;
    for _ in 1..pairs {
        f = f * fidelity / (f * fidelity + (1.0 - f) * (1.0 - fidelity));
    }
    Ok(f)
}

/// One bundle of qubits sharing a path (a sequence of arc ids).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathBundle {
    pub arcs: Vec<usize>,
    pub qubits: u32,
}

/// One delivered code: segments of path bundles, merging at `merges[i]`
/// between segment i and i+1 and ending at the request destination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeRoute {
    pub request: usize,
    pub segments: Vec<Vec<PathBundle>>,
    pub merges: Vec<NodeId>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestMetrics {
    pub k: usize,
    pub delivered: u32,
    /// Mean final fidelity over this request's delivered codes; 0 when none.
    pub mean_fidelity: f64,
    /// Delivered codes whose final fidelity missed the threshold.
    pub below_threshold_codes: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleMetrics {
    /// Delivered codes over requested codes, in [0, 1].
    pub throughput: f64,
    /// Qubit-weighted mean of per-code final fidelities; 0 when nothing was
    /// delivered.
    pub average_fidelity: f64,
    pub per_request: Vec<RequestMetrics>,
}

/// Final fidelity of one decomposed code over the graph's arc fidelities.
pub fn code_fidelity(
    route: &CodeRoute,
    arcs: &ArcTable,
    n: u32,
    omega: f64,
) -> Result<f64, FidelityError> {
    let mut carried = 1.0;
    let last = route.segments.len() - 1;
    for (i, segment) in route.segments.iter().enumerate() {
        let mut branches = Vec::with_capacity(segment.len());
        for bundle in segment {
            let gammas: Vec<f64> = bundle.arcs.iter().map(|&a| arcs.fidelity(a)).collect();
            branches.push((bundle.qubits, carried * path_fidelity(&gammas)?));
        }
        carried = if i < last {
            ec_merge_fidelity(&branches, n, omega)?
        } else {
            ec_merge_fidelity(&branches, n, 0.0)?
        };
    }
    Ok(carried)
}

/// Decomposes the schedule into codes and scores each end to end.
///
/// `gamma_threshold` only flags low-fidelity codes; they still count toward
/// every average.
pub fn evaluate_schedule(
    schedule: &IntegralSchedule,
    graph: &NetworkGraph,
    requests: &[Request],
    gamma_threshold: f64,
    omega: f64,
) -> Result<ScheduleMetrics, FidelityError> {
    let arcs = ArcTable::new(graph);
    let routes = decompose_flows(schedule, graph, requests)?;

    let mut per_code: Vec<Vec<f64>> = vec![Vec::new(); requests.len()];
    for route in &routes {
        let n = requests[route.request].n;
        per_code[route.request].push(code_fidelity(route, &arcs, n, omega)?);
    }

    let mut per_request = Vec::with_capacity(requests.len());
    let mut weighted = 0.0;
    let mut weight = 0.0;
    for (k, fids) in per_code.iter().enumerate() {
        let delivered = schedule.requests[k].delivered;
        debug_assert_eq!(fids.len(), delivered as usize);
        let mean = if fids.is_empty() {
            0.0
        } else {
            fids.iter().sum::<f64>() / fids.len() as f64
        };
        let below = fids.iter().filter(|&&f| f < gamma_threshold).count() as u32;
        per_request.push(RequestMetrics {
            k,
            delivered,
            mean_fidelity: mean,
            below_threshold_codes: below,
        });
        let n = requests[k].n as f64;
        for &f in fids {
            weighted += n * f;
            weight += n;
        }
    }

    let requested: u32 = requests.iter().map(|r| r.m).sum();
    let throughput = if requested == 0 {
        0.0
    } else {
        schedule.objective() as f64 / requested as f64
    };
    let average_fidelity = if weight == 0.0 { 0.0 } else { weighted / weight };
    Ok(ScheduleMetrics {
        throughput,
        average_fidelity,
        per_request,
    })
}

pub fn save_metrics(metrics: &ScheduleMetrics, path: impl AsRef<Path>) -> Result<(), FidelityError> {
    let mut text = serde_json::to_string_pretty(metrics)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_metrics(path: impl AsRef<Path>) -> Result<ScheduleMetrics, FidelityError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
