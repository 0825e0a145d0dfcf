//! Edge-to-cloud link model: propagation delay plus a FIFO pipe that moves
//! at most `bandwidth` bytes per second. A transfer enqueued while the pipe
//! is busy waits for everything ahead of it, which is exactly how offload
//! latency comes apart when payloads outgrow the link.

use serde::Serialize;

use crate::workload::Request;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinkSpec {
    /// Round-trip propagation delay, charged half per direction.
    pub rtt_s: f64,
    pub bandwidth_bytes_per_s: f64,
    /// When true (default) both directions share one pipe; otherwise each
    /// direction gets the full bandwidth.
    pub shared_pipe: bool,
}

impl Default for LinkSpec {
    fn default() -> Self {
        LinkSpec {
            rtt_s: 0.05,
            bandwidth_bytes_per_s: 100e6,
            shared_pipe: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub bytes: u64,
    pub direction: Direction,
    pub enqueue_time: f64,
    pub start_time: f64,
    pub finish_time: f64,
}

/// Link state. The ledger records every transfer so tests and the metrics
/// exporter can reconstruct per-interval throughput exactly.
#[derive(Debug, Clone)]
pub struct Link {
    pub spec: LinkSpec,
    busy_until_shared: f64,
    busy_until_up: f64,
    busy_until_down: f64,
    ledger: Vec<Transfer>,
}

impl Link {
    pub fn new(spec: LinkSpec) -> Self {
        assert!(spec.bandwidth_bytes_per_s > 0.0, "bandwidth must be positive");
        assert!(spec.rtt_s >= 0.0, "rtt must be non-negative");
        Link {
            spec,
            busy_until_shared: 0.0,
            busy_until_up: 0.0,
            busy_until_down: 0.0,
            ledger: Vec::new(),
        }
    }

    fn busy_until(&mut self, direction: Direction) -> &mut f64 {
        if self.spec.shared_pipe {
            &mut self.busy_until_shared
        } else {
            match direction {
                Direction::Up => &mut self.busy_until_up,
                Direction::Down => &mut self.busy_until_down,
            }
        }
    }

    /// Enqueues a transfer. Starts at max(now, pipe free), runs for
    /// bytes/bandwidth, and occupies the pipe until it finishes.
    pub fn begin_transfer(&mut self, bytes: u64, direction: Direction, now: f64) -> Transfer {
        let duration = bytes as f64 / self.spec.bandwidth_bytes_per_s;
        let busy = self.busy_until(direction);
        let start = now.max(*busy);
        let finish = start + duration;
        *busy = finish;
        let t = Transfer {
            bytes,
            direction,
            enqueue_time: now,
            start_time: start,
            finish_time: finish,
        };
        self.ledger.push(t);
        t
    }

    pub fn ledger(&self) -> &[Transfer] {
        &self.ledger
    }

    /// Bytes delivered inside [t0, t1). A transfer moves bytes uniformly at
    /// link speed while it runs, so this can never exceed bandwidth * (t1 - t0)
    /// per pipe.
    pub fn delivered_bytes_in(&self, t0: f64, t1: f64) -> f64 {
        self.ledger
            .iter()
            .map(|t| {
                let dur = t.finish_time - t.start_time;
                if dur <= 0.0 {
                    return 0.0;
                }
                let overlap = (t.finish_time.min(t1) - t.start_time.max(t0)).max(0.0);
                t.bytes as f64 * overlap / dur
            })
            .sum()
    }

    /// Fraction of [t0, t1) the pipe spent transferring. With a shared pipe
    /// transfers never overlap, so this is exact utilization.
    pub fn busy_fraction(&self, t0: f64, t1: f64) -> f64 {
        let busy: f64 = self
            .ledger
            .iter()
            .map(|t| (t.finish_time.min(t1) - t.start_time.max(t0)).max(0.0))
            .sum();
        busy / (t1 - t0)
    }
}

/// End-to-end latency of shipping one request to the cloud and its response
/// back: half the RTT per direction, both payload transfers through the
/// pipe, and the cloud-side service time in between. Advances link state,
/// so queueing on a busy pipe shows up in the result.
pub fn offload_latency(link: &mut Link, req: &Request, cloud_service_time: f64, now: f64) -> f64 {
    let half_rtt = link.spec.rtt_s / 2.0;
    let up = link.begin_transfer(req.request_bytes, Direction::Up, now);
    let service_done = up.finish_time + half_rtt + cloud_service_time;
    let down = link.begin_transfer(req.response_bytes, Direction::Down, service_done);
    down.finish_time + half_rtt - now
}
