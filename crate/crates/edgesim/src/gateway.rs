//! Ingress routing: per request, one uniform draw against the current
//! cloud traffic percentage decides edge vs cloud. No per-function state,
//! no admission control; saturated edge queues do not bend the dice.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::metrics::LatencySample;
use crate::workload::Request;
use crate::Site;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteDecision {
    pub target: Site,
    /// Traffic percentage in effect when the draw happened, for audit.
    pub traffic_pct_at_decision: f64,
}

/// Owns the routing RNG stream. One instance per run; draws happen in
/// arrival order, which keeps routing reproducible and aligned across
/// split settings sharing a seed.
pub struct Gateway {
    rng: ChaCha8Rng,
}

impl Gateway {
    pub fn new(rng: ChaCha8Rng) -> Self {
        Gateway { rng }
    }

    /// Draw u in [0, 100); the request goes to the cloud iff u < pct.
    /// pct = 0 never offloads, pct = 100 always does, and the draw is
    /// consumed either way so request streams stay aligned.
    pub fn route(&mut self, _req: &Request, traffic_pct: f64) -> RouteDecision {
        debug_assert!((0.0..=100.0).contains(&traffic_pct));
        let u: f64 = self.rng.gen_range(0.0..100.0);
        let target = if u < traffic_pct {
            Site::Cloud
        } else {
            Site::Edge
        };
        RouteDecision {
            target,
            traffic_pct_at_decision: traffic_pct,
        }
    }
}

/// Turns a completed request into a latency sample. Completion before
/// arrival is a simulator bug, not a data error: fail hard.
pub fn observe_response(req: &Request, completion_time: f64, served_at: Site) -> LatencySample {
    let latency = completion_time - req.arrival_time;
    assert!(
        latency >= 0.0,
        "request {} completed at {completion_time} before its arrival at {}",
        req.id,
        req.arrival_time
    );
    LatencySample {
        timestamp: completion_time,
        latency,
        function_id: req.function_id,
        served_at,
    }
}
