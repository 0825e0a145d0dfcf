//! Sliding-window latency metrics: percentiles follow the traffic, and
//! samples age out of the window so a past incident stops polluting the
//! present.
//!
//!     cargo run --example percentile_window

use edgesim::{nearest_rank, FunctionId, LatencySample, LatencyWindow, Site};

fn record(w: &mut LatencyWindow, t: f64, latency: f64) {
    w.record(LatencySample {
        timestamp: t,
        latency,
        function_id: FunctionId(0),
        served_at: Site::Edge,
    })
    .unwrap();
}

fn report(w: &LatencyWindow, label: &str) {
    println!(
        "{label:<28} n={:<4} p50={:<8.3} p95={:<8.3} ratio={:.2}",
        w.len(),
        w.percentile(50.0).unwrap_or(0.0),
        w.percentile(95.0).unwrap_or(0.0),
        w.percentile(95.0).unwrap_or(0.0) / w.percentile(50.0).unwrap_or(1.0).max(1e-12),
    );
}

fn main() {
    // Nearest-rank on a tiny population, the same rule the window applies.
    let sorted = [0.1, 0.2, 0.4, 0.8, 1.6];
    println!(
        "nearest-rank on {sorted:?}: p50={} p95={}\n",
        nearest_rank(&sorted, 50.0).unwrap(),
        nearest_rank(&sorted, 95.0).unwrap()
    );

    let mut w = LatencyWindow::new(30.0, 5);

    // Steady traffic at ~100 ms.
    for i in 0..100 {
        record(&mut w, i as f64 * 0.2, 0.1 + 0.001 * (i % 7) as f64);
    }
    report(&w, "steady (t=0..20s)");

    // A 5 s incident pushes the tail out.
    for i in 0..25 {
        record(&mut w, 20.0 + i as f64 * 0.2, 1.5);
    }
    report(&w, "incident tail (t=20..25s)");

    // Traffic recovers; the incident still haunts the 30 s window.
    for i in 0..100 {
        record(&mut w, 25.0 + i as f64 * 0.2, 0.1 + 0.001 * (i % 7) as f64);
    }
    report(&w, "recovered (t=25..45s)");

    // Once the window slides past it, the tail is forgotten.
    w.prune(60.0);
    report(&w, "window slid to t=60s");
}
