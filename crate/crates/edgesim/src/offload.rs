//! Latency-driven offload controller.
//!
//! Every control tick the controller turns the recent latency distribution
//! into a cloud traffic percentage in four pure steps:
//!
//! 1. `latency_ratio`: tail inflation of the window, p95 / p50. A healthy
//!    system sits near 1; queue buildup inflates the tail first.
//! 2. `decayed_ratio`: geometric smoothing over the ratio history so a
//!    single noisy tick cannot swing the output.
//! 3. `target_traffic`: maps the smoothed ratio onto [0, 100] between a soft
//!    and a hard threshold.
//! 4. `update_traffic`: first-order inertia toward that target.
//!
//! All four are pure functions over explicit state values; the simulator
//! (and any host process) owns the state and the tick cadence.

use std::collections::VecDeque;

use crate::metrics::LatencyWindow;

/// Controller constants. Defaults are the tuned values used throughout the
/// experiments; every run can override them via config.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct OffloadConfig {
    /// Per-step decay of older ratios in the smoothing sum, in (0, 1].
    pub c_decay: f64,
    /// How many past ratios the smoothing may reach back (history holds
    /// c_t + 1 entries including the current one).
    pub c_t: usize,
    /// Smoothed ratio at or below this maps to 0% cloud traffic.
    pub c_soft: f64,
    /// Smoothed ratio at or above this maps to 100% cloud traffic.
    pub c_hard: f64,
    /// Inertia of the output, in [0, 1). Higher means slower movement.
    pub c_in: f64,
    pub control_interval_s: f64,
}

impl Default for OffloadConfig {
    fn default() -> Self {
        OffloadConfig {
            c_decay: 0.9,
            c_t: 15,
            c_soft: 2.0,
            c_hard: 5.0,
            c_in: 0.9,
            control_interval_s: 2.0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("invalid offload config: {0}")]
pub struct InvalidOffloadConfig(pub String);

impl OffloadConfig {
    pub fn validate(&self) -> Result<(), InvalidOffloadConfig> {
        if !(self.c_decay > 0.0 && self.c_decay <= 1.0) {
            return Err(InvalidOffloadConfig(format!(
                "c_decay must be in (0, 1], got {}",
                self.c_decay
            )));
        }
        if !(self.c_soft < self.c_hard) {
            return Err(InvalidOffloadConfig(format!(
                "c_soft ({}) must be below c_hard ({})",
                self.c_soft, self.c_hard
            )));
        }
        if !(self.c_in >= 0.0 && self.c_in < 1.0) {
            return Err(InvalidOffloadConfig(format!(
                "c_in must be in [0, 1), got {}",
                self.c_in
            )));
        }
        if !(self.control_interval_s > 0.0) {
            return Err(InvalidOffloadConfig(format!(
                "control_interval_s must be positive, got {}",
                self.control_interval_s
            )));
        }
        Ok(())
    }
}

/// Which latency samples feed the controller window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum SampleScope {
    /// Pool edge- and cloud-served responses together (default). The
    /// controller sees what clients see.
    All,
    /// Only edge-served responses. Isolates edge health from cloud/link
    /// latency at the cost of going blind at 100% offload.
    EdgeOnly,
}

/// Controller state between ticks. `ratio_history` keeps the most recent
/// ratio at index 0 and never exceeds c_t + 1 entries.
#[derive(Debug, Clone, PartialEq)]
pub struct OffloadState {
    pub ratio_history: VecDeque<f64>,
    /// Cloud traffic percentage in [0, 100]. Starts at 0: nothing is
    /// offloaded until measurements justify it.
    pub traffic_pct: f64,
}

impl OffloadState {
    pub fn new() -> Self {
        OffloadState {
            ratio_history: VecDeque::new(),
            traffic_pct: 0.0,
        }
    }
}

impl Default for OffloadState {
    fn default() -> Self {
        Self::new()
    }
}

/// Why a ratio came out the way it did. Neutral values are reported
/// distinctly so callers can tell "healthy" from "blind".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioSource {
    Measured,
    /// Fewer than `min_samples` in the window; ratio forced to 1.
    InsufficientSamples,
    /// Median latency was zero; ratio forced to 1 instead of dividing.
    DegenerateMedian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyRatio {
    pub value: f64,
    pub source: RatioSource,
}

/// p95 / p50 of the window. Always >= 1 when measured, since the 95th
/// percentile cannot sit below the median.
pub fn latency_ratio(window: &LatencyWindow) -> LatencyRatio {
    if window.len() < window.min_samples {
        return LatencyRatio {
            value: 1.0,
            source: RatioSource::InsufficientSamples,
        };
    }
    let p50 = window.percentile(50.0).expect("window non-empty");
    let p95 = window.percentile(95.0).expect("window non-empty");
    if p50 == 0.0 {
        return LatencyRatio {
            value: 1.0,
            source: RatioSource::DegenerateMedian,
        };
    }
    LatencyRatio {
        value: p95 / p50,
        source: RatioSource::Measured,
    }
}

/// Decay-weighted mean of the ratio history:
/// sum(c_decay^k * r[k]) / sum(c_decay^k) for k = 0..=m with
/// m = min(c_t, len - 1). Empty history is neutral 1.
pub fn decayed_ratio(state: &OffloadState, cfg: &OffloadConfig) -> f64 {
    if state.ratio_history.is_empty() {
        return 1.0;
    }
    let m = cfg.c_t.min(state.ratio_history.len() - 1);
    let mut num = 0.0;
    let mut den = 0.0;
    let mut weight = 1.0;
    for k in 0..=m {
        num += weight * state.ratio_history[k];
        den += weight;
        weight *= cfg.c_decay;
    }
    num / den
}

/// Linear interpolation of the smoothed ratio between the thresholds:
/// 0 at or below c_soft, 100 at or above c_hard.
pub fn target_traffic(smoothed: f64, cfg: &OffloadConfig) -> f64 {
    if smoothed < cfg.c_soft {
        0.0
    } else if smoothed > cfg.c_hard {
        100.0
    } else {
        100.0 * (smoothed - cfg.c_soft) / (cfg.c_hard - cfg.c_soft)
    }
}

/// One inertia step toward the target. Mathematically a convex combination
/// of two values in [0, 100]; the clamp absorbs the one-ulp excursions
/// float rounding produces at the endpoints.
pub fn update_traffic(state: &OffloadState, target: f64, cfg: &OffloadConfig) -> OffloadState {
    debug_assert!((0.0..=100.0).contains(&target));
    let mut next = state.clone();
    next.traffic_pct =
        (state.traffic_pct * cfg.c_in + target * (1.0 - cfg.c_in)).clamp(0.0, 100.0);
    next
}

/// Full control tick: measure, remember, smooth, map, move.
pub fn control_step(
    state: &OffloadState,
    window: &LatencyWindow,
    cfg: &OffloadConfig,
) -> OffloadState {
    let ratio = latency_ratio(window);
    let mut next = state.clone();
    next.ratio_history.push_front(ratio.value);
    next.ratio_history.truncate(cfg.c_t + 1);
    let smoothed = decayed_ratio(&next, cfg);
    let target = target_traffic(smoothed, cfg);
    update_traffic(&next, target, cfg)
}

/// Extension point: anything that can answer "what fraction goes to the
/// cloud right now". The simulator ticks strategies at the control cadence
/// whether or not they use it.
pub trait OffloadStrategy {
    fn on_control_tick(&mut self, _now: f64, _window: &LatencyWindow) {}
    fn traffic_pct(&self) -> f64;
}

/// Constant split. Used for the fixed cells of the experiment matrix; the
/// controller is bypassed entirely.
#[derive(Debug, Clone, Copy)]
pub struct FixedSplit(pub f64);

impl OffloadStrategy for FixedSplit {
    fn traffic_pct(&self) -> f64 {
        debug_assert!((0.0..=100.0).contains(&self.0));
        self.0
    }
}

/// The ratio controller behind the `auto` split.
#[derive(Debug, Clone)]
pub struct RatioController {
    pub cfg: OffloadConfig,
    pub state: OffloadState,
}

impl RatioController {
    pub fn new(cfg: OffloadConfig) -> Self {
        RatioController {
            cfg,
            state: OffloadState::new(),
        }
    }
}

impl OffloadStrategy for RatioController {
    fn on_control_tick(&mut self, _now: f64, window: &LatencyWindow) {
        self.state = control_step(&self.state, window, &self.cfg);
    }

    fn traffic_pct(&self) -> f64 {
        self.state.traffic_pct
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::LatencySample;
    use crate::{FunctionId, Site};
    use proptest::prelude::*;

    fn window_with(latencies: &[f64], min_samples: usize) -> LatencyWindow {
        let mut w = LatencyWindow::new(1e12, min_samples);
        for (i, &l) in latencies.iter().enumerate() {
            w.record(LatencySample {
                timestamp: i as f64,
                latency: l,
                function_id: FunctionId(0),
                served_at: Site::Edge,
            })
            .unwrap();
        }
        w
    }

    #[test]
    fn ratio_of_1_to_100_is_1_9() {
        let lats: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let w = window_with(&lats, 10);
        let r = latency_ratio(&w);
        assert_eq!(r.value, 95.0 / 50.0);
        assert_eq!(r.source, RatioSource::Measured);
    }

    #[test]
    fn ratio_below_min_samples_is_neutral() {
        let w = window_with(&[0.1, 0.2, 0.3], 10);
        let r = latency_ratio(&w);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.source, RatioSource::InsufficientSamples);
    }

    #[test]
    fn ratio_with_zero_median_is_neutral_but_flagged() {
        let w = window_with(&[0.0; 20], 10);
        let r = latency_ratio(&w);
        assert_eq!(r.value, 1.0);
        assert_eq!(r.source, RatioSource::DegenerateMedian);
    }

    #[test]
    fn decayed_ratio_two_entries() {
        // (2 + 0.5 * 4) / (1 + 0.5) = 8/3, most recent entry first.
        let cfg = OffloadConfig {
            c_decay: 0.5,
            c_t: 5,
            ..OffloadConfig::default()
        };
        let mut state = OffloadState::new();
        state.ratio_history.push_back(2.0);
        state.ratio_history.push_back(4.0);
        assert_eq!(decayed_ratio(&state, &cfg), 8.0 / 3.0);
    }

    #[test]
    fn decayed_ratio_empty_history_is_neutral() {
        let state = OffloadState::new();
        assert_eq!(decayed_ratio(&state, &OffloadConfig::default()), 1.0);
    }

    #[test]
    fn decayed_ratio_ignores_entries_beyond_c_t() {
        let cfg = OffloadConfig {
            c_decay: 0.5,
            c_t: 1,
            ..OffloadConfig::default()
        };
        let mut state = OffloadState::new();
        for r in [2.0, 4.0, 1000.0, 1000.0] {
            state.ratio_history.push_back(r);
        }
        assert_eq!(decayed_ratio(&state, &cfg), 8.0 / 3.0);
    }

    #[test]
    fn target_midpoint_is_50() {
        let cfg = OffloadConfig {
            c_soft: 2.0,
            c_hard: 4.0,
            ..OffloadConfig::default()
        };
        assert_eq!(target_traffic(3.0, &cfg), 50.0);
        // The boundaries interpolate to the extremes exactly.
        assert_eq!(target_traffic(2.0, &cfg), 0.0);
        assert_eq!(target_traffic(4.0, &cfg), 100.0);
    }

    #[test]
    fn target_clamps_outside_thresholds() {
        let cfg = OffloadConfig::default();
        assert_eq!(target_traffic(0.5, &cfg), 0.0);
        assert_eq!(target_traffic(1.9999, &cfg), 0.0);
        assert_eq!(target_traffic(1e9, &cfg), 100.0);
    }

    #[test]
    fn update_converges_geometrically() {
        // From 0 toward a constant target v the gap shrinks by c_in per
        // step: |R_t - v| = c_in^t * v.
        let cfg = OffloadConfig::default();
        let v = 80.0;
        let mut state = OffloadState::new();
        for t in 1..=40 {
            state = update_traffic(&state, v, &cfg);
            let expected_gap = cfg.c_in.powi(t) * v;
            assert!(
                ((v - state.traffic_pct) - expected_gap).abs() < 1e-9,
                "step {t}: gap {} vs expected {expected_gap}",
                v - state.traffic_pct
            );
        }
    }

    #[test]
    fn sustained_overload_drives_output_to_100_geometrically() {
        let cfg = OffloadConfig::default();
        let mut state = OffloadState::new();
        // 60 samples whose top 4 are 50x the median, so the nearest-rank
        // p95 (rank 57) lands inside the inflated tail: ratio 50 > c_hard.
        let mut lats = vec![0.1; 56];
        lats.extend([5.0, 5.0, 5.0, 5.0]);
        let w = window_with(&lats, 10);
        for t in 1..=30 {
            state = control_step(&state, &w, &cfg);
            let expected = 100.0 * (1.0 - cfg.c_in.powi(t));
            assert!(
                (state.traffic_pct - expected).abs() < 1e-9,
                "step {t}: {} vs {expected}",
                state.traffic_pct
            );
        }
        assert!(state.traffic_pct > 95.0);
    }

    #[test]
    fn spike_then_calm_rises_then_decays() {
        let cfg = OffloadConfig {
            c_t: 3,
            ..OffloadConfig::default()
        };
        let mut state = OffloadState::new();
        let spiky = window_with(
            &[0.1; 50]
                .iter()
                .chain([8.0, 8.0, 8.0].iter())
                .copied()
                .collect::<Vec<_>>(),
            10,
        );
        for _ in 0..10 {
            state = control_step(&state, &spiky, &cfg);
        }
        let peak = state.traffic_pct;
        assert!(peak > 30.0, "controller should have reacted, got {peak}");
        let calm = window_with(&[0.1; 60], 10);
        for _ in 0..60 {
            state = control_step(&state, &calm, &cfg);
        }
        assert!(
            state.traffic_pct < 1.0,
            "output should decay toward 0 once latencies recover, got {}",
            state.traffic_pct
        );
    }

    #[test]
    fn history_never_exceeds_capacity() {
        let cfg = OffloadConfig {
            c_t: 4,
            ..OffloadConfig::default()
        };
        let w = window_with(&[0.1; 30], 10);
        let mut state = OffloadState::new();
        for _ in 0..50 {
            state = control_step(&state, &w, &cfg);
            assert!(state.ratio_history.len() <= cfg.c_t + 1);
        }
    }

    #[test]
    fn config_validation_catches_bad_ranges() {
        let ok = OffloadConfig::default();
        assert!(ok.validate().is_ok());
        let bad = OffloadConfig {
            c_decay: 0.0,
            ..ok
        };
        assert!(bad.validate().is_err());
        let bad = OffloadConfig {
            c_soft: 5.0,
            c_hard: 5.0,
            ..ok
        };
        assert!(bad.validate().is_err());
        let bad = OffloadConfig { c_in: 1.0, ..ok };
        assert!(bad.validate().is_err());
    }

    proptest! {
        // The smoothed ratio is a weighted mean, so it must stay within the
        // extremes of the history it was computed from.
        #[test]
        fn decayed_ratio_bounded_by_history(
            hist in proptest::collection::vec(1.0f64..100.0, 1..40),
            c_decay in 0.01f64..1.0,
            c_t in 0usize..40,
        ) {
            let cfg = OffloadConfig { c_decay, c_t, ..OffloadConfig::default() };
            let mut state = OffloadState::new();
            state.ratio_history.extend(hist.iter().copied());
            let s = decayed_ratio(&state, &cfg);
            let lo = hist.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = hist.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(s >= lo - 1e-12 && s <= hi + 1e-12);
        }

        // Output bounds survive arbitrary update sequences.
        #[test]
        fn traffic_stays_in_bounds(
            targets in proptest::collection::vec(0.0f64..=100.0, 1..200),
            c_in in 0.0f64..1.0,
        ) {
            let cfg = OffloadConfig { c_in, ..OffloadConfig::default() };
            let mut state = OffloadState::new();
            for t in targets {
                state = update_traffic(&state, t, &cfg);
                prop_assert!((0.0..=100.0).contains(&state.traffic_pct));
            }
        }

        // More tail inflation never asks for less cloud traffic.
        #[test]
        fn target_monotone_in_smoothed(a in 1.0f64..10.0, b in 1.0f64..10.0) {
            let cfg = OffloadConfig::default();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(target_traffic(lo, &cfg) <= target_traffic(hi, &cfg));
        }
    }
}
