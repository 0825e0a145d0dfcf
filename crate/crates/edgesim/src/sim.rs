//! The discrete-event loop tying gateway, pools, link and controller
//! together. Single-threaded; events execute in (time, insertion sequence)
//! order, so a run is a pure function of (config, seed).
//!
//! Request life cycle. An arrival draws a profile and a route. Edge-bound
//! requests go straight into the edge pool; cloud-bound ones serialize
//! onto the uplink, execute in the cloud pool, and return over the
//! downlink, each leg charged half the round-trip delay. A completed
//! response feeds the latency window the controller reads on its own tick.
//! Requests rejected by a full queue count as failed; everything else
//! either completes or is left in flight when the run hits its hard
//! cutoff (arrival end plus drain grace) and is reported as residual.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::Serialize;

use crate::cluster::{DispatchOutcome, FunctionEntry, Pool};
use crate::config::{Config, GatewayMode};
use crate::gateway::{observe_response, Gateway};
use crate::metrics::{nearest_rank, LatencyWindow};
use crate::network::{Direction, Link};
use crate::offload::{decayed_ratio, FixedSplit, OffloadStrategy, RatioController};
use crate::replicator::{builtin_manifest, load_manifest, Reconciler, ServiceStore};
use crate::workload::{resolve_profile, ArrivalProcess, ProfileKind, Request, WorkloadKind};
use crate::{rng, FunctionId, InstanceId, RequestId, Site};

#[derive(Debug, Clone)]
enum EventKind {
    /// The next pre-drawn arrival instant. The request itself is built in
    /// the handler so the profile draw happens in arrival order.
    Arrival,
    DispatchComplete {
        site: Site,
        instance_id: InstanceId,
        request_id: RequestId,
    },
    TransferComplete {
        direction: Direction,
        request: Request,
    },
    InstanceReady {
        site: Site,
        instance_id: InstanceId,
    },
    AutoscaleTick {
        site: Site,
        k: u64,
    },
    ControlTick {
        k: u64,
    },
    MetricsTick {
        k: u64,
    },
}

struct TimedEvent {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for TimedEvent {
    fn eq(&self, other: &Self) -> bool {
        self.time == other.time && self.seq == other.seq
    }
}

impl Eq for TimedEvent {}

impl PartialOrd for TimedEvent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for TimedEvent {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time
            .partial_cmp(&other.time)
            .expect("event times are never NaN")
            .then(self.seq.cmp(&other.seq))
    }
}

/// One row of the per-run time series, emitted every metrics tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesPoint {
    pub t: f64,
    pub traffic_pct: f64,
    pub smoothed_ratio: f64,
    /// 0 until the window has samples.
    pub latency_p50: f64,
    pub latency_p95: f64,
    pub edge_instances: usize,
    pub cloud_instances: usize,
    pub edge_cpu_util: f64,
    pub cloud_cpu_util: f64,
    pub edge_memory_mb: u64,
    pub cloud_memory_mb: u64,
    /// Link occupancy and delivered bytes since the previous point.
    pub link_busy_fraction: f64,
    pub link_delivered_bytes: f64,
    pub generated: u64,
    pub completed: u64,
    pub failed: u64,
    pub in_system: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub workload: WorkloadKind,
    pub seed: u64,
    pub generated: u64,
    /// Completed with a response.
    pub successful: u64,
    /// Dropped by a full queue.
    pub failed: u64,
    /// Still in flight at the hard cutoff.
    pub residual: u64,
    pub edge_served: u64,
    pub cloud_served: u64,
    pub edge_rejected: u64,
    pub cloud_rejected: u64,
    /// Over successful requests; 0 when none.
    pub mean_latency_s: f64,
    pub p95_latency_s: f64,
    pub final_traffic_pct: f64,
    pub series: Vec<SeriesPoint>,
    pub config_snapshot: Vec<(String, String)>,
}

enum Strategy {
    Fixed(FixedSplit),
    Auto(RatioController),
}

impl Strategy {
    fn tick(&mut self, now: f64, window: &LatencyWindow) {
        match self {
            Strategy::Fixed(s) => s.on_control_tick(now, window),
            Strategy::Auto(c) => c.on_control_tick(now, window),
        }
    }

    fn pct(&self) -> f64 {
        match self {
            Strategy::Fixed(s) => s.traffic_pct(),
            Strategy::Auto(c) => c.traffic_pct(),
        }
    }

    fn smoothed_ratio(&self) -> f64 {
        match self {
            Strategy::Fixed(_) => 1.0,
            Strategy::Auto(c) => decayed_ratio(&c.state, &c.cfg),
        }
    }
}

struct Sim {
    now: f64,
    cutoff: f64,
    seq: u64,
    heap: BinaryHeap<Reverse<TimedEvent>>,
    arrivals: ArrivalProcess,
    profile_rng: rand_chacha::ChaCha8Rng,
    gateway: Gateway,
    strategy: Strategy,
    window: LatencyWindow,
    edge: Pool,
    cloud: Pool,
    link: Link,
    half_rtt: f64,
    workload: WorkloadKind,
    fn_for_kind: BTreeMap<ProfileKind, FunctionId>,
    next_request: u64,
    generated: u64,
    successful: u64,
    failed: u64,
    edge_served: u64,
    cloud_served: u64,
    /// Requests currently riding the link (either direction).
    in_transfer: u64,
    latencies: Vec<f64>,
    series: Vec<SeriesPoint>,
    last_series_t: f64,
}

impl Sim {
    fn schedule(&mut self, time: f64, kind: EventKind) {
        debug_assert!(time >= self.now, "cannot schedule into the past");
        self.seq += 1;
        self.heap.push(Reverse(TimedEvent {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn pool(&mut self, site: Site) -> &mut Pool {
        match site {
            Site::Edge => &mut self.edge,
            Site::Cloud => &mut self.cloud,
        }
    }

    fn handle_arrival(&mut self) {
        let kind = resolve_profile(self.workload, &mut self.profile_rng);
        let function_id = *self
            .fn_for_kind
            .get(&kind)
            .unwrap_or_else(|| panic!("no deployed function runs the {kind} profile"));
        let profile = self.edge.function(function_id).profile;
        let request = Request::new(RequestId(self.next_request), function_id, self.now, profile);
        self.next_request += 1;
        self.generated += 1;

        let decision = {
            let pct = self.strategy.pct();
            self.gateway.route(&request, pct)
        };
        match decision.target {
            Site::Edge => self.dispatch(Site::Edge, request),
            Site::Cloud => self.send_uplink(request),
        }

        if let Some(t) = self.arrivals.next_arrival() {
            self.schedule(t, EventKind::Arrival);
        }
    }

    fn dispatch(&mut self, site: Site, request: Request) {
        let now = self.now;
        match self.pool(site).dispatch(request, now) {
            DispatchOutcome::Started(exec) => self.schedule(
                exec.finish_time,
                EventKind::DispatchComplete {
                    site,
                    instance_id: exec.instance_id,
                    request_id: exec.request_id,
                },
            ),
            DispatchOutcome::Queued {
                new_cold: Some((instance_id, ready_at)),
                ..
            } => self.schedule(ready_at, EventKind::InstanceReady { site, instance_id }),
            DispatchOutcome::Queued { new_cold: None, .. } => {}
            DispatchOutcome::Rejected => self.failed += 1,
        }
    }

    fn send_uplink(&mut self, request: Request) {
        self.in_transfer += 1;
        let transfer = self
            .link
            .begin_transfer(request.request_bytes, Direction::Up, self.now);
        self.schedule(
            transfer.finish_time + self.half_rtt,
            EventKind::TransferComplete {
                direction: Direction::Up,
                request,
            },
        );
    }

    fn handle_dispatch_complete(
        &mut self,
        site: Site,
        instance_id: InstanceId,
        request_id: RequestId,
    ) {
        let now = self.now;
        let (done, next) = self.pool(site).complete(instance_id, request_id, now);
        if let Some(exec) = next {
            self.schedule(
                exec.finish_time,
                EventKind::DispatchComplete {
                    site,
                    instance_id: exec.instance_id,
                    request_id: exec.request_id,
                },
            );
        }
        match site {
            Site::Edge => self.finish_request(done, Site::Edge),
            Site::Cloud => {
                // Response rides the downlink back to the client.
                self.in_transfer += 1;
                let transfer =
                    self.link
                        .begin_transfer(done.response_bytes, Direction::Down, self.now);
                self.schedule(
                    transfer.finish_time + self.half_rtt,
                    EventKind::TransferComplete {
                        direction: Direction::Down,
                        request: done,
                    },
                );
            }
        }
    }

    fn handle_transfer_complete(&mut self, direction: Direction, request: Request) {
        self.in_transfer -= 1;
        match direction {
            Direction::Up => self.dispatch(Site::Cloud, request),
            Direction::Down => self.finish_request(request, Site::Cloud),
        }
    }

    fn finish_request(&mut self, request: Request, served_at: Site) {
        let sample = observe_response(&request, self.now, served_at);
        self.window
            .record(sample)
            .expect("in-order completions cannot be rejected");
        self.successful += 1;
        self.latencies.push(sample.latency);
        match served_at {
            Site::Edge => self.edge_served += 1,
            Site::Cloud => self.cloud_served += 1,
        }
    }

    fn handle_instance_ready(&mut self, site: Site, instance_id: InstanceId) {
        let now = self.now;
        for exec in self.pool(site).instance_ready(instance_id, now) {
            self.schedule(
                exec.finish_time,
                EventKind::DispatchComplete {
                    site,
                    instance_id: exec.instance_id,
                    request_id: exec.request_id,
                },
            );
        }
    }

    fn handle_autoscale_tick(&mut self, site: Site, k: u64) {
        let now = self.now;
        let action = self.pool(site).autoscale_step(now);
        for (instance_id, ready_at) in action.created {
            self.schedule(ready_at, EventKind::InstanceReady { site, instance_id });
        }
        let interval = self.pool(site).scaler.tick_interval_s;
        let next = (k + 1) as f64 * interval;
        if next <= self.cutoff {
            self.schedule(next, EventKind::AutoscaleTick { site, k: k + 1 });
        }
    }

    fn handle_control_tick(&mut self, k: u64, interval: f64) {
        let now = self.now;
        self.window.prune(now);
        self.strategy.tick(now, &self.window);
        let next = (k + 1) as f64 * interval;
        if next <= self.cutoff {
            self.schedule(next, EventKind::ControlTick { k: k + 1 });
        }
    }

    fn in_system(&self) -> u64 {
        self.edge.in_system() as u64 + self.cloud.in_system() as u64 + self.in_transfer
    }

    fn emit_series_point(&mut self, t: f64) {
        let edge_res = self.edge.sample_resources(t);
        let cloud_res = self.cloud.sample_resources(t);
        let in_system = self.in_system();
        assert_eq!(
            self.generated,
            self.successful + self.failed + in_system,
            "request conservation violated at t={t}: generated {} vs \
             {} completed + {} failed + {} in system",
            self.generated,
            self.successful,
            self.failed,
            in_system
        );
        self.edge.check_invariants();
        self.cloud.check_invariants();
        let point = SeriesPoint {
            t,
            traffic_pct: self.strategy.pct(),
            smoothed_ratio: self.strategy.smoothed_ratio(),
            latency_p50: self.window.percentile(50.0).unwrap_or(0.0),
            latency_p95: self.window.percentile(95.0).unwrap_or(0.0),
            edge_instances: edge_res.instances,
            cloud_instances: cloud_res.instances,
            edge_cpu_util: edge_res.cpu_util,
            cloud_cpu_util: cloud_res.cpu_util,
            edge_memory_mb: edge_res.memory_mb,
            cloud_memory_mb: cloud_res.memory_mb,
            link_busy_fraction: self.link.busy_fraction(self.last_series_t, t),
            link_delivered_bytes: self.link.delivered_bytes_in(self.last_series_t, t),
            generated: self.generated,
            completed: self.successful,
            failed: self.failed,
            in_system,
        };
        self.series.push(point);
        self.last_series_t = t;
    }

    fn handle_metrics_tick(&mut self, k: u64, interval: f64) {
        let t = self.now;
        self.emit_series_point(t);
        let next = (k + 1) as f64 * interval;
        if next <= self.cutoff {
            self.schedule(next, EventKind::MetricsTick { k: k + 1 });
        }
    }
}

/// Builds the function catalog by syncing the manifest from the cloud
/// store to the edge store, exactly as a live replicator would.
fn build_catalog(config: &Config) -> (Vec<FunctionEntry>, BTreeMap<ProfileKind, FunctionId>) {
    let manifest = match &config.manifest_path {
        Some(path) => load_manifest(path)
            .unwrap_or_else(|e| panic!("manifest {}: {e}", path.display())),
        None => builtin_manifest(),
    };
    let mut cloud_store = ServiceStore::new(Site::Cloud);
    for spec in manifest {
        cloud_store.apply_spec(spec);
    }
    let mut edge_store = ServiceStore::new(Site::Edge);
    let mut reconciler = Reconciler::new();
    reconciler
        .run_to_quiescence(&mut cloud_store, &mut edge_store)
        .expect("initial manifest sync cannot fail");

    let mut catalog = Vec::new();
    let mut fn_for_kind = BTreeMap::new();
    let names: Vec<String> = edge_store.names().cloned().collect();
    for (i, name) in names.iter().enumerate() {
        let spec = edge_store.get(name).expect("just listed");
        let id = FunctionId(i as u64);
        let kind = spec.managed_spec.profile;
        catalog.push(FunctionEntry {
            id,
            name: name.clone(),
            profile: config.profiles.get(kind),
            concurrency_limit: spec.managed_spec.concurrency_limit,
        });
        fn_for_kind.entry(kind).or_insert(id);
    }
    (catalog, fn_for_kind)
}

/// Executes one run to its hard cutoff and reports the outcome.
pub fn run(config: &Config) -> RunResult {
    config.validate().expect("config must validate before a run");
    let (catalog, fn_for_kind) = build_catalog(config);

    let strategy = match config.gateway_mode {
        GatewayMode::Fixed => Strategy::Fixed(FixedSplit(config.fixed_pct)),
        GatewayMode::Auto => Strategy::Auto(RatioController::new(config.offload)),
    };
    let cutoff = config.schedule.end() + config.drain_s;
    let mut sim = Sim {
        now: 0.0,
        cutoff,
        seq: 0,
        heap: BinaryHeap::new(),
        arrivals: ArrivalProcess::new(config.schedule, rng::stream(config.seed, "arrival")),
        profile_rng: rng::stream(config.seed, "profile"),
        gateway: Gateway::new(rng::stream(config.seed, "routing")),
        strategy,
        window: LatencyWindow::new(config.metrics_window_s, config.metrics_min_samples),
        edge: Pool::new(
            Site::Edge,
            config.edge_nodes.clone(),
            catalog.clone(),
            config.queue_cap,
            config.edge_scaler,
        ),
        cloud: Pool::new(
            Site::Cloud,
            config.cloud_nodes.clone(),
            catalog,
            config.queue_cap,
            config.cloud_scaler,
        ),
        link: Link::new(config.link),
        half_rtt: config.link.rtt_s / 2.0,
        workload: config.workload,
        fn_for_kind,
        next_request: 0,
        generated: 0,
        successful: 0,
        failed: 0,
        edge_served: 0,
        cloud_served: 0,
        in_transfer: 0,
        latencies: Vec::new(),
        series: Vec::new(),
        last_series_t: 0.0,
    };

    if let Some(t) = sim.arrivals.next_arrival() {
        sim.schedule(t, EventKind::Arrival);
    }
    let edge_tick = config.edge_scaler.tick_interval_s;
    let cloud_tick = config.cloud_scaler.tick_interval_s;
    sim.schedule(
        edge_tick,
        EventKind::AutoscaleTick {
            site: Site::Edge,
            k: 1,
        },
    );
    sim.schedule(
        cloud_tick,
        EventKind::AutoscaleTick {
            site: Site::Cloud,
            k: 1,
        },
    );
    sim.schedule(
        config.offload.control_interval_s,
        EventKind::ControlTick { k: 1 },
    );
    sim.schedule(
        config.series_interval_s,
        EventKind::MetricsTick { k: 1 },
    );

    while let Some(Reverse(event)) = sim.heap.pop() {
        if event.time > sim.cutoff {
            // Heap is time-ordered: everything left is beyond the cutoff.
            break;
        }
        sim.now = event.time;
        match event.kind {
            EventKind::Arrival => sim.handle_arrival(),
            EventKind::DispatchComplete {
                site,
                instance_id,
                request_id,
            } => sim.handle_dispatch_complete(site, instance_id, request_id),
            EventKind::TransferComplete { direction, request } => {
                sim.handle_transfer_complete(direction, request)
            }
            EventKind::InstanceReady { site, instance_id } => {
                sim.handle_instance_ready(site, instance_id)
            }
            EventKind::AutoscaleTick { site, k } => sim.handle_autoscale_tick(site, k),
            EventKind::ControlTick { k } => sim.handle_control_tick(k, config.offload.control_interval_s),
            EventKind::MetricsTick { k } => sim.handle_metrics_tick(k, config.series_interval_s),
        }
    }

    sim.now = cutoff;
    if sim.series.last().map(|p| p.t < cutoff).unwrap_or(true) {
        sim.emit_series_point(cutoff);
    }

    let residual = sim.generated - sim.successful - sim.failed;
    assert_eq!(
        residual,
        sim.in_system(),
        "residual accounting out of sync at cutoff"
    );
    let mean_latency_s = if sim.latencies.is_empty() {
        0.0
    } else {
        sim.latencies.iter().sum::<f64>() / sim.latencies.len() as f64
    };
    let mut sorted = sim.latencies.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("latencies are never NaN"));
    let p95_latency_s = nearest_rank(&sorted, 95.0).unwrap_or(0.0);

    RunResult {
        workload: config.workload,
        seed: config.seed,
        generated: sim.generated,
        successful: sim.successful,
        failed: sim.failed,
        residual,
        edge_served: sim.edge_served,
        cloud_served: sim.cloud_served,
        edge_rejected: sim.edge.rejected,
        cloud_rejected: sim.cloud.rejected,
        mean_latency_s,
        p95_latency_s,
        final_traffic_pct: sim.strategy.pct(),
        series: sim.series,
        config_snapshot: config.snapshot(),
    }
}
