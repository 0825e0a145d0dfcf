//! Sliding-window latency store backing the offload controller.
//!
//! The window is single-owner: callers mutate it through `&mut self` and the
//! simulator owns exactly one per run, so no internal locking is needed. If
//! the store is ever shared across threads, wrap it in a mutex at the call
//! site; the contract here is exclusive access.

use std::collections::VecDeque;

use crate::{FunctionId, Site};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MetricsError {
    #[error("latency must be non-negative, got {0}")]
    NegativeLatency(f64),
    #[error("sample timestamp {new} precedes newest recorded timestamp {newest}")]
    TimestampRegression { new: f64, newest: f64 },
    #[error("not enough samples to compute a percentile")]
    InsufficientData,
}

/// Nearest-rank percentile of an already sorted ascending slice: the value
/// at 1-based index ceil(q/100 * n), clamped into the slice. `q` in (0, 100].
/// None on an empty slice.
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    assert!(q > 0.0 && q <= 100.0, "percentile out of range: {q}");
    let n = sorted.len();
    if n == 0 {
        return None;
    }
    let rank = ((q / 100.0) * n as f64).ceil() as usize;
    Some(sorted[rank.clamp(1, n) - 1])
}

/// One observed end-to-end response latency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencySample {
    /// Completion time, simulated seconds.
    pub timestamp: f64,
    /// End-to-end latency in seconds. Never negative.
    pub latency: f64,
    pub function_id: FunctionId,
    pub served_at: Site,
}

/// Time-bounded sample store. Samples older than `window_s` relative to the
/// newest timestamp are pruned on insertion, so memory stays proportional to
/// traffic within one window.
#[derive(Debug, Clone)]
pub struct LatencyWindow {
    samples: VecDeque<LatencySample>,
    window_s: f64,
    /// Below this count the controller treats the window as uninformative.
    pub min_samples: usize,
}

impl LatencyWindow {
    pub fn new(window_s: f64, min_samples: usize) -> Self {
        assert!(window_s > 0.0, "window length must be positive");
        LatencyWindow {
            samples: VecDeque::new(),
            window_s,
            min_samples,
        }
    }

    /// Appends a sample and evicts everything older than the window.
    /// Timestamps must not regress: insertion order is completion order.
    pub fn record(&mut self, sample: LatencySample) -> Result<(), MetricsError> {
        if sample.latency < 0.0 {
            return Err(MetricsError::NegativeLatency(sample.latency));
        }
        if let Some(newest) = self.samples.back() {
            if sample.timestamp < newest.timestamp {
                return Err(MetricsError::TimestampRegression {
                    new: sample.timestamp,
                    newest: newest.timestamp,
                });
            }
        }
        self.samples.push_back(sample);
        self.prune(sample.timestamp);
        Ok(())
    }

    /// Evicts samples with `timestamp < now - window_s`. Called implicitly by
    /// `record`; the control loop also calls it on its own tick so an idle
    /// system does not keep reacting to stale samples.
    pub fn prune(&mut self, now: f64) {
        let cutoff = now - self.window_s;
        while let Some(front) = self.samples.front() {
            if front.timestamp < cutoff {
                self.samples.pop_front();
            } else {
                break;
            }
        }
    }

    /// Nearest-rank percentile over the current window: sort ascending, take
    /// the value at 1-based index ceil(q/100 * n). `q` in (0, 100].
    pub fn percentile(&self, q: f64) -> Result<f64, MetricsError> {
        if self.samples.is_empty() {
            return Err(MetricsError::InsufficientData);
        }
        let mut sorted: Vec<f64> = self.samples.iter().map(|s| s.latency).collect();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("NaN latency"));
        Ok(nearest_rank(&sorted, q).expect("non-empty checked above"))
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LatencySample> {
        self.samples.iter()
    }
}
