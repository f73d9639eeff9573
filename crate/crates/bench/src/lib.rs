//! Shared fixtures for the benchmark targets.

use surfacenet_core::netmodel::{
    generate_requests, generate_topology, NetworkGraph, Request, ScenarioConfig,
};

/// A mid-sized random instance representative of sweep workloads.
pub fn bench_instance(seed: u64) -> (NetworkGraph, Vec<Request>) {
    let config = ScenarioConfig {
        seed,
        ..ScenarioConfig::default()
    };
    let graph = generate_topology(&config).expect("valid default config");
    let requests = generate_requests(&graph, &config).expect("valid default config");
    (graph, requests)
}
