//! Simulator and routing-optimization engine for surface-code quantum networks.
//!
//! A network carries logical qubits encoded in planar surface codes. Codes can
//! be split across parallel paths and re-merged by error correction at server
//! nodes. The crate builds an LP relaxation of the routing problem, solves it
//! with a bounded-variable primal simplex, rounds the solution to an integral
//! schedule, and evaluates end-to-end fidelity of the delivered codes. A
//! desk-scale surface-code simulator with an exact minimum-weight matching
//! decoder backs the error-correction merge model.

pub mod baselines;
pub mod experiments;
pub mod fidelity;
pub mod netmodel;
pub mod routing;
pub mod surface_code;

pub use baselines::BaselineKind;
pub use fidelity::{CodeRoute, FidelityError, ScheduleMetrics};
pub use netmodel::{EdgeSpec, NetworkGraph, NodeId, NodeRole, Request, ScenarioConfig};
pub use routing::{
    ConstraintFamily, FormulationConfig, IntegralSchedule, LpProblem, LpSolution, LpStatus,
    Transform,
};
pub use experiments::{Model, Regime, SweepRow, SweepSpec};
pub use surface_code::{SurfaceCodeError, SurfaceCodeLayout};
