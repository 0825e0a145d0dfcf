//! Compute pools: nodes host function instances, instances execute a
//! bounded number of requests concurrently and queue the rest FIFO.
//! A per-pool autoscaler adds instances against observed demand and
//! removes instances that stayed idle past a timeout, down to zero.
//!
//! Execution timing is deterministic: a request started at `t` on a node
//! with speed `s` finishes at `t + compute/s + io`. Saturation therefore
//! comes from slot scarcity, not from modelled CPU contention; the
//! resource accounting below is observational.

use std::collections::VecDeque;

use serde::Serialize;

use crate::workload::{Request, WorkloadProfile};
use crate::{FunctionId, InstanceId, NodeId, Site};

/// Wall-clock execution time of one request.
/// Compute scales with node speed; I/O does not.
pub fn service_time(profile: &WorkloadProfile, speed_factor: f64) -> f64 {
    assert!(speed_factor > 0.0, "speed_factor must be positive");
    profile.compute_s / speed_factor + profile.io_s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeSpec {
    pub node_id: NodeId,
    pub speed_factor: f64,
    pub max_instances: usize,
    /// Execution units for utilization accounting only.
    pub cores: u32,
}

/// One deployable function, resolved from the edge service store.
#[derive(Debug, Clone)]
pub struct FunctionEntry {
    pub id: FunctionId,
    pub name: String,
    pub profile: WorkloadProfile,
    pub concurrency_limit: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AutoscalerConfig {
    /// Desired instances = ceil(mean observed concurrency / this).
    pub target_concurrency: f64,
    /// Demand averaging horizon.
    pub scale_window_s: f64,
    /// Idle longer than this with an empty queue means removal.
    pub idle_timeout_s: f64,
    pub cold_start_delay_s: f64,
    pub max_instances_per_function: usize,
    pub tick_interval_s: f64,
}

impl AutoscalerConfig {
    pub fn edge_default() -> Self {
        AutoscalerConfig {
            target_concurrency: 1.0,
            scale_window_s: 6.0,
            idle_timeout_s: 30.0,
            cold_start_delay_s: 2.0,
            max_instances_per_function: 1,
            tick_interval_s: 2.0,
        }
    }

    pub fn cloud_default() -> Self {
        AutoscalerConfig {
            cold_start_delay_s: 1.0,
            max_instances_per_function: 40,
            ..Self::edge_default()
        }
    }
}

#[derive(Debug, Clone)]
struct RunningRequest {
    request: Request,
    finish_time: f64,
}

#[derive(Debug, Clone)]
pub struct FunctionInstance {
    pub instance_id: InstanceId,
    pub function_id: FunctionId,
    pub node_id: NodeId,
    pub concurrency_limit: usize,
    running: Vec<RunningRequest>,
    queue: VecDeque<Request>,
    /// Set while warm with nothing running or queued.
    pub idle_since: Option<f64>,
    /// Some(t): still cold, cannot execute before t.
    pub cold_until: Option<f64>,
}

impl FunctionInstance {
    pub fn in_flight(&self) -> usize {
        self.running.len()
    }

    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    fn is_warm(&self) -> bool {
        self.cold_until.is_none()
    }

    fn load(&self) -> usize {
        self.running.len() + self.queue.len()
    }
}

/// A request began executing; the caller schedules its completion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StartedExec {
    pub instance_id: InstanceId,
    pub request_id: crate::RequestId,
    pub finish_time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DispatchOutcome {
    Started(StartedExec),
    Queued {
        instance_id: InstanceId,
        /// Present when the dispatch had to scale from zero; the caller
        /// schedules an instance-ready wakeup at this time.
        new_cold: Option<(InstanceId, f64)>,
    },
    /// Every queue at capacity (or no node can host an instance).
    Rejected,
}

#[derive(Debug, Clone, Default)]
pub struct AutoscaleAction {
    /// Newly created cold instances and when they become ready.
    pub created: Vec<(InstanceId, f64)>,
    pub removed: Vec<InstanceId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceSample {
    pub t: f64,
    /// Compute-busy fraction across the pool since the previous sample.
    pub cpu_util: f64,
    /// Sum of memory footprints of live instances.
    pub memory_mb: u64,
    pub instances: usize,
}

/// Per-node compute-time integrator. Each running request contributes its
/// compute share uniformly over its service interval, which makes
/// utilization exact for pure-compute profiles and a principled smear when
/// I/O time is in the mix.
#[derive(Debug, Clone)]
struct NodeAccounting {
    active_rate: f64,
    last_update: f64,
    busy_integral: f64,
}

pub struct Pool {
    pub site: Site,
    nodes: Vec<NodeSpec>,
    catalog: Vec<FunctionEntry>,
    instances: Vec<FunctionInstance>,
    next_instance_id: u64,
    queue_cap: usize,
    pub scaler: AutoscalerConfig,
    accounting: Vec<NodeAccounting>,
    demand_samples: Vec<VecDeque<(f64, f64)>>,
    last_resource_sample: f64,
    /// Requests turned away because every queue was full.
    pub rejected: u64,
}

impl Pool {
    pub fn new(
        site: Site,
        nodes: Vec<NodeSpec>,
        catalog: Vec<FunctionEntry>,
        queue_cap: usize,
        scaler: AutoscalerConfig,
    ) -> Self {
        assert!(!nodes.is_empty(), "a pool needs at least one node");
        assert!(queue_cap >= 1, "queue capacity must be at least 1");
        for (i, entry) in catalog.iter().enumerate() {
            assert_eq!(
                entry.id.0 as usize, i,
                "catalog entries must be stored at their own id"
            );
        }
        for (i, node) in nodes.iter().enumerate() {
            assert_eq!(
                node.node_id.0 as usize, i,
                "nodes must be stored at their own id"
            );
        }
        let accounting = nodes
            .iter()
            .map(|_| NodeAccounting {
                active_rate: 0.0,
                last_update: 0.0,
                busy_integral: 0.0,
            })
            .collect();
        let demand_samples = catalog.iter().map(|_| VecDeque::new()).collect();
        Pool {
            site,
            nodes,
            catalog,
            instances: Vec::new(),
            next_instance_id: 0,
            queue_cap,
            scaler,
            accounting,
            demand_samples,
            last_resource_sample: 0.0,
            rejected: 0,
        }
    }

    pub fn catalog(&self) -> &[FunctionEntry] {
        &self.catalog
    }

    pub fn function(&self, id: FunctionId) -> &FunctionEntry {
        &self.catalog[id.0 as usize]
    }

    pub fn instance_count(&self) -> usize {
        self.instances.len()
    }

    pub fn instances(&self) -> &[FunctionInstance] {
        &self.instances
    }

    /// Requests currently owned by this pool (executing or queued).
    pub fn in_system(&self) -> usize {
        self.instances.iter().map(|i| i.load()).sum()
    }

    fn node_index(&self, node_id: NodeId) -> usize {
        node_id.0 as usize
    }

    fn instance_index(&self, id: InstanceId) -> usize {
        self.instances
            .iter()
            .position(|i| i.instance_id == id)
            .unwrap_or_else(|| panic!("unknown instance {id} in {} pool", self.site))
    }

    fn instances_on_node(&self, node_id: NodeId) -> usize {
        self.instances
            .iter()
            .filter(|i| i.node_id == node_id)
            .count()
    }

    /// Least-crowded node with a free instance slot, lowest id on ties.
    fn place_instance(&self) -> Option<NodeId> {
        self.nodes
            .iter()
            .filter(|n| self.instances_on_node(n.node_id) < n.max_instances)
            .min_by_key(|n| (self.instances_on_node(n.node_id), n.node_id))
            .map(|n| n.node_id)
    }

    /// Creates an instance for `function_id`, cold unless `prewarmed`.
    /// Returns None when no node has a free slot.
    pub fn add_instance(
        &mut self,
        function_id: FunctionId,
        now: f64,
        prewarmed: bool,
    ) -> Option<(InstanceId, f64)> {
        let node_id = self.place_instance()?;
        let id = InstanceId(self.next_instance_id);
        self.next_instance_id += 1;
        let entry = self.function(function_id);
        let ready_at = if prewarmed {
            now
        } else {
            now + self.scaler.cold_start_delay_s
        };
        self.instances.push(FunctionInstance {
            instance_id: id,
            function_id,
            node_id,
            concurrency_limit: entry.concurrency_limit,
            running: Vec::new(),
            queue: VecDeque::new(),
            idle_since: prewarmed.then_some(now),
            cold_until: (!prewarmed).then_some(ready_at),
        });
        Some((id, ready_at))
    }

    fn begin_execution(&mut self, idx: usize, request: Request, now: f64) -> StartedExec {
        let (node_idx, finish, request_id) = {
            let inst = &self.instances[idx];
            debug_assert!(inst.is_warm() && inst.running.len() < inst.concurrency_limit);
            let node_idx = self.node_index(inst.node_id);
            let speed = self.nodes[node_idx].speed_factor;
            let finish = now + service_time(&request.profile, speed);
            (node_idx, finish, request.id)
        };
        let compute = request.profile.compute_s / self.nodes[node_idx].speed_factor;
        let duration = finish - now;
        if duration > 0.0 && compute > 0.0 {
            self.integrate_node(node_idx, now);
            self.accounting[node_idx].active_rate += compute / duration;
        }
        let inst = &mut self.instances[idx];
        inst.idle_since = None;
        let instance_id = inst.instance_id;
        inst.running.push(RunningRequest {
            request,
            finish_time: finish,
        });
        StartedExec {
            instance_id,
            request_id,
            finish_time: finish,
        }
    }

    /// Routes a request inside the pool. Preference order: free slot on the
    /// least-busy warm instance, then the shortest queue with room, then
    /// scale-from-zero, then rejection.
    pub fn dispatch(&mut self, request: Request, now: f64) -> DispatchOutcome {
        let fid = request.function_id;
        let ready = self
            .instances
            .iter()
            .enumerate()
            .filter(|(_, i)| {
                i.function_id == fid && i.is_warm() && i.running.len() < i.concurrency_limit
            })
            .min_by_key(|(_, i)| (i.running.len(), i.instance_id))
            .map(|(idx, _)| idx);
        if let Some(idx) = ready {
            return DispatchOutcome::Started(self.begin_execution(idx, request, now));
        }

        let queueable = self
            .instances
            .iter()
            .enumerate()
            .filter(|(_, i)| i.function_id == fid && i.queue.len() < self.queue_cap)
            .min_by_key(|(_, i)| (i.load(), i.instance_id))
            .map(|(idx, _)| idx);
        if let Some(idx) = queueable {
            self.instances[idx].queue.push_back(request);
            return DispatchOutcome::Queued {
                instance_id: self.instances[idx].instance_id,
                new_cold: None,
            };
        }

        if self.instances.iter().all(|i| i.function_id != fid) {
            match self.add_instance(fid, now, false) {
                Some((id, ready_at)) => {
                    let idx = self.instance_index(id);
                    self.instances[idx].queue.push_back(request);
                    return DispatchOutcome::Queued {
                        instance_id: id,
                        new_cold: Some((id, ready_at)),
                    };
                }
                None => {
                    self.rejected += 1;
                    return DispatchOutcome::Rejected;
                }
            }
        }

        self.rejected += 1;
        DispatchOutcome::Rejected
    }

    /// Cold start finished: start as much queued work as fits.
    pub fn instance_ready(&mut self, instance_id: InstanceId, now: f64) -> Vec<StartedExec> {
        let idx = self.instance_index(instance_id);
        {
            let inst = &mut self.instances[idx];
            debug_assert!(
                inst.cold_until.map(|t| t <= now + 1e-9).unwrap_or(false),
                "instance_ready fired early or twice"
            );
            inst.cold_until = None;
        }
        let started = self.drain_queue(idx, now);
        let inst = &mut self.instances[idx];
        if inst.running.is_empty() && inst.queue.is_empty() {
            inst.idle_since = Some(now);
        }
        started
    }

    fn drain_queue(&mut self, idx: usize, now: f64) -> Vec<StartedExec> {
        let mut started = Vec::new();
        while self.instances[idx].is_warm()
            && self.instances[idx].running.len() < self.instances[idx].concurrency_limit
        {
            match self.instances[idx].queue.pop_front() {
                Some(req) => started.push(self.begin_execution(idx, req, now)),
                None => break,
            }
        }
        started
    }

    /// A request finished executing. Returns it, plus the queued request
    /// that took the freed slot, if any. Must be called exactly at the
    /// request's finish time for the accounting to stay exact.
    pub fn complete(
        &mut self,
        instance_id: InstanceId,
        request_id: crate::RequestId,
        now: f64,
    ) -> (Request, Option<StartedExec>) {
        let idx = self.instance_index(instance_id);
        let pos = self.instances[idx]
            .running
            .iter()
            .position(|r| r.request.id == request_id)
            .unwrap_or_else(|| panic!("request {request_id} not running on {instance_id}"));
        let done = self.instances[idx].running.swap_remove(pos);
        debug_assert!(
            (done.finish_time - now).abs() < 1e-9,
            "completion at {now} but request was due {}",
            done.finish_time
        );
        let node_idx = self.node_index(self.instances[idx].node_id);
        self.integrate_node(node_idx, now);
        let next = self.drain_queue(idx, now).into_iter().next();
        let inst = &mut self.instances[idx];
        if inst.running.is_empty() && inst.queue.is_empty() {
            inst.idle_since = Some(now);
        }
        (done.request, next)
    }

    fn integrate_node(&mut self, node_idx: usize, now: f64) {
        let acc = &mut self.accounting[node_idx];
        acc.busy_integral += acc.active_rate * (now - acc.last_update);
        acc.last_update = now;
        // Recompute the rate from scratch to stop float drift accumulating
        // across thousands of add/remove pairs.
        let node_id = self.nodes[node_idx].node_id;
        acc.active_rate = self
            .instances
            .iter()
            .filter(|i| i.node_id == node_id)
            .flat_map(|i| i.running.iter())
            .map(|r| {
                let speed = self.nodes[node_idx].speed_factor;
                let dur = service_time(&r.request.profile, speed);
                let compute = r.request.profile.compute_s / speed;
                if dur > 0.0 {
                    compute / dur
                } else {
                    0.0
                }
            })
            .sum();
    }

    /// One autoscaler tick: sample demand, scale up toward
    /// ceil(mean demand / target), retire instances idle past the timeout.
    pub fn autoscale_step(&mut self, now: f64) -> AutoscaleAction {
        let mut action = AutoscaleAction::default();
        let horizon = now - self.scaler.scale_window_s;
        for entry in 0..self.catalog.len() {
            let fid = FunctionId(entry as u64);
            let demand: usize = self
                .instances
                .iter()
                .filter(|i| i.function_id == fid)
                .map(|i| i.load())
                .sum();
            let samples = &mut self.demand_samples[entry];
            samples.push_back((now, demand as f64));
            while samples.front().map(|&(t, _)| t < horizon).unwrap_or(false) {
                samples.pop_front();
            }
            let mean = samples.iter().map(|&(_, d)| d).sum::<f64>() / samples.len() as f64;
            let desired = ((mean / self.scaler.target_concurrency).ceil() as usize)
                .min(self.scaler.max_instances_per_function);
            let current = self
                .instances
                .iter()
                .filter(|i| i.function_id == fid)
                .count();
            for _ in current..desired {
                match self.add_instance(fid, now, false) {
                    Some(created) => action.created.push(created),
                    None => break, // no node capacity left
                }
            }
        }

        let timeout = self.scaler.idle_timeout_s;
        let expired: Vec<InstanceId> = self
            .instances
            .iter()
            .filter(|i| {
                i.is_warm()
                    && i.running.is_empty()
                    && i.queue.is_empty()
                    && i.idle_since.map(|t| now - t >= timeout).unwrap_or(false)
            })
            .map(|i| i.instance_id)
            .collect();
        for id in expired {
            let idx = self.instance_index(id);
            self.instances.remove(idx);
            action.removed.push(id);
        }
        action
    }

    /// Utilization and memory since the previous call.
    pub fn sample_resources(&mut self, now: f64) -> ResourceSample {
        for idx in 0..self.nodes.len() {
            self.integrate_node(idx, now);
        }
        let dt = now - self.last_resource_sample;
        let total_cores: u32 = self.nodes.iter().map(|n| n.cores).sum();
        let busy: f64 = self.accounting.iter().map(|a| a.busy_integral).sum();
        let cpu_util = if dt > 0.0 {
            busy / (total_cores as f64 * dt)
        } else {
            0.0
        };
        for acc in &mut self.accounting {
            acc.busy_integral = 0.0;
        }
        self.last_resource_sample = now;
        let memory_mb = self
            .instances
            .iter()
            .map(|i| self.catalog[i.function_id.0 as usize].profile.memory_mb)
            .sum();
        ResourceSample {
            t: now,
            cpu_util,
            memory_mb,
            instances: self.instances.len(),
        }
    }

    /// Structural invariants; the simulator asserts them at every metrics
    /// tick and unit tests after every mutation.
    pub fn check_invariants(&self) {
        for inst in &self.instances {
            assert!(
                inst.running.len() <= inst.concurrency_limit,
                "{}: in_flight above concurrency limit",
                inst.instance_id
            );
            assert!(
                inst.queue.len() <= self.queue_cap,
                "{}: queue above capacity",
                inst.instance_id
            );
            if inst.cold_until.is_some() {
                assert!(
                    inst.running.is_empty(),
                    "{}: cold instance cannot execute",
                    inst.instance_id
                );
            } else if !inst.queue.is_empty() {
                assert_eq!(
                    inst.running.len(),
                    inst.concurrency_limit,
                    "{}: queued work while slots are free",
                    inst.instance_id
                );
            }
        }
        for node in &self.nodes {
            assert!(
                self.instances_on_node(node.node_id) <= node.max_instances,
                "node {} over instance capacity",
                node.node_id
            );
        }
    }
}
