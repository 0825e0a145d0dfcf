//! Deterministic simulator and controller library for latency-driven
//! edge-to-cloud offloading of serverless function requests.
//!
//! A small edge cluster serves function requests until its latency tail
//! degrades; a feedback controller then shifts a fraction of the incoming
//! traffic to a remote cloud pool over a bandwidth-limited link. Everything
//! runs inside a single-threaded discrete-event loop, so a run is a pure
//! function of its configuration and seed.
//!
//! The pieces compose bottom-up:
//!
//! * [`metrics`]: sliding-window latency store with nearest-rank percentiles.
//! * [`offload`]: the traffic controller (response ratio, decayed smoothing,
//!   threshold interpolation, inertia) plus the strategy trait the gateway
//!   consumes.
//! * [`gateway`]: weighted-random routing of requests between edge and cloud.
//! * [`cluster`]: node pools, function instances, FIFO queues, autoscaling
//!   with scale-to-zero, resource accounting.
//! * [`network`]: FIFO shared-pipe link model for offloaded requests.
//! * [`replicator`]: one-way cloud-to-edge service spec reconciliation.
//! * [`workload`]: request profiles and ramped Poisson arrivals.
//! * [`sim`]: the event loop tying the above together; [`sweep`] runs the
//!   workload x split experiment matrix and exports CSV/JSON artifacts.
//!
//! Each capability has a runnable demo under `examples/`; start with
//! `cargo run --example single_run`.

mod cli;
mod config;
mod export;
mod gateway;
mod metrics;
mod network;
mod offload;
mod replicator;
mod sim;
mod sweep;
mod workload;

pub mod cluster;
pub mod rng;

pub use cli::main as cli_main;
pub use config::{Config, ConfigError, GatewayMode, Split};
pub use export::{
    render_run_csv, render_summary_csv, render_summary_json, write_run_artifacts,
    write_sweep_artifacts, RUN_CSV_METRICS, RUN_HEADER, SUMMARY_HEADER,
};
pub use gateway::{observe_response, Gateway, RouteDecision};
pub use metrics::{nearest_rank, LatencySample, LatencyWindow, MetricsError};
pub use network::{offload_latency, Direction, Link, LinkSpec, Transfer};
pub use offload::{
    control_step, decayed_ratio, latency_ratio, target_traffic, update_traffic, FixedSplit,
    InvalidOffloadConfig, LatencyRatio, OffloadConfig, OffloadState, OffloadStrategy,
    RatioController, RatioSource, SampleScope,
};
pub use replicator::{
    builtin_manifest, load_manifest, load_manifest_str, merge, needs_apply, ManagedSpec,
    Reconciler, ReplicationError, ServiceSpec, ServiceStore, WatchEvent, WatchKind,
    EDGE_MANAGED_PREFIX,
};
pub use sim::{run, RunResult, SeriesPoint};
pub use sweep::{sweep, CellResult, SweepResult};
pub use workload::{
    ArrivalProcess, ProfileKind, ProfileSet, RampSchedule, Request, WorkloadKind, WorkloadProfile,
};

use serde::{Deserialize, Serialize};

/// Where a request was served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    Edge,
    Cloud,
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Site::Edge => write!(f, "edge"),
            Site::Cloud => write!(f, "cloud"),
        }
    }
}

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(
            Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
        )]
        pub struct $name(pub u64);

        impl std::fmt::Display for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, "{}", self.0)
            }
        }
    };
}

id_type!(
    /// Unique per generated request within a run.
    RequestId
);
id_type!(
    /// Index into the function catalog built from the service manifest.
    FunctionId
);
id_type!(InstanceId);
id_type!(NodeId);
