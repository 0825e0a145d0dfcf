//! The offload controller reacting to a load swing: a healthy stretch,
//! then saturation with inflated tail latencies, then recovery. Each row
//! is one control tick.
//!
//!     cargo run --example control_loop

use edgesim::{
    decayed_ratio, latency_ratio, FunctionId, LatencySample, LatencyWindow, OffloadConfig,
    OffloadStrategy, RatioController, Site,
};

/// A 60-sample window whose worst four samples sit at `tail` seconds, so
/// the nearest-rank p95 lands inside the tail bucket.
fn window(body: f64, tail: f64) -> LatencyWindow {
    let mut w = LatencyWindow::new(1e9, 5);
    for i in 0..60 {
        let latency = if i < 56 { body } else { tail };
        w.record(LatencySample {
            timestamp: i as f64,
            latency,
            function_id: FunctionId(0),
            served_at: Site::Edge,
        })
        .unwrap();
    }
    w
}

fn main() {
    let cfg = OffloadConfig::default();
    let mut controller = RatioController::new(cfg);
    println!(
        "thresholds: ratio {} -> 0% cloud, ratio {} -> 100% cloud, inertia {}",
        cfg.c_soft, cfg.c_hard, cfg.c_in
    );
    println!(
        "{:>5} {:>10} {:>8} {:>10} {:>12}",
        "tick", "phase", "ratio", "smoothed", "traffic_pct"
    );

    let phases: [(&str, f64, f64, usize); 3] = [
        ("calm", 0.10, 0.12, 8),
        ("overload", 0.10, 0.80, 12),
        ("recovery", 0.10, 0.12, 20),
    ];
    let mut tick = 0;
    for (name, body, tail, ticks) in phases {
        let w = window(body, tail);
        for _ in 0..ticks {
            tick += 1;
            let now = tick as f64 * cfg.control_interval_s;
            controller.on_control_tick(now, &w);
            println!(
                "{tick:>5} {name:>10} {:>8.3} {:>10.3} {:>12.2}",
                latency_ratio(&w).value,
                decayed_ratio(&controller.state, &controller.cfg),
                controller.traffic_pct()
            );
        }
    }
}
