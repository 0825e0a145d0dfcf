//! End-to-end runs through the public API, checking properties that only
//! show up when all the pieces move together: cold starts on the latency
//! path, transfer costs at full offload, conservation across seeds, and
//! the shape of the emitted time series.

use edgesim::{run, Config, GatewayMode, Split, WorkloadKind};

fn short_io(split: f64) -> Config {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::Io;
    cfg.fixed_pct = split;
    cfg.schedule.low_rate = 3.0;
    cfg.schedule.high_rate = 8.0;
    cfg.schedule.warm_s = 10.0;
    cfg.schedule.ramp_s = 10.0;
    cfg.schedule.hold_s = 20.0;
    cfg
}

/// The very first request hits an empty pool and has to wait out the cold
/// start, so at trickle rates the tail latency cannot sit below it.
#[test]
fn cold_start_dominates_the_first_response() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::Io;
    cfg.fixed_pct = 0.0;
    cfg.schedule.low_rate = 0.5;
    cfg.schedule.high_rate = 0.5;
    cfg.schedule.warm_s = 10.0;
    cfg.schedule.ramp_s = 0.0;
    cfg.schedule.hold_s = 0.0;
    let result = run(&cfg);
    assert!(result.successful > 0, "trickle run produced no responses");
    assert!(
        result.p95_latency_s >= cfg.edge_scaler.cold_start_delay_s,
        "p95 {} sits below the {}s cold start the first request must absorb",
        result.p95_latency_s,
        cfg.edge_scaler.cold_start_delay_s
    );
}

/// At 100% offload every response crosses the link twice and pays the RTT,
/// so the mean cannot undercut that physical floor.
#[test]
fn full_offload_latency_floor_includes_rtt_and_transfers() {
    let cfg = short_io(100.0);
    let result = run(&cfg);
    let io = &cfg.profiles.io;
    let floor = cfg.link.rtt_s
        + (io.request_bytes + io.response_bytes) as f64 / cfg.link.bandwidth_bytes_per_s
        + io.io_s;
    assert!(result.successful > 0);
    assert_eq!(result.edge_served, 0, "a 100% split must not serve at the edge");
    assert!(
        result.mean_latency_s >= floor - 1e-9,
        "mean latency {} undercuts the offload floor {floor}",
        result.mean_latency_s
    );
}

/// Overloading the edge with the heavy workload fails requests through
/// queue rejection and nowhere else.
#[test]
fn overload_failures_are_queue_rejections() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::MatMult;
    cfg.fixed_pct = 0.0;
    let result = run(&cfg);
    assert!(
        result.failed > 0,
        "peak matmult demand should overwhelm the edge-only split"
    );
    assert_eq!(
        result.failed, result.edge_rejected,
        "every failure at 0% split must be an edge queue rejection"
    );
    assert_eq!(result.cloud_rejected, 0);
    assert_eq!(result.generated, result.successful + result.failed);
}

/// Request accounting closes exactly regardless of seed or split mode.
#[test]
fn conservation_holds_across_seeds_and_splits() {
    for seed in [1, 99, 2026] {
        for split in [Split::Fixed(25.0), Split::Auto] {
            let mut cfg = short_io(25.0).with_split(split);
            cfg.seed = seed;
            let result = run(&cfg);
            assert_eq!(
                result.generated,
                result.successful + result.failed,
                "seed {seed}, split {split}: accounting does not close"
            );
            assert_eq!(result.residual, 0, "seed {seed}, split {split}");
        }
    }
}

/// A manifest file replaces the built-in catalog: functions keep working
/// under their new names and concurrency settings.
#[test]
fn custom_manifest_drives_the_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("services.conf");
    std::fs::write(
        &path,
        "# alternates for the default trio\nechoer io 2\nshrink image 1\nmul matmult 1\n",
    )
    .unwrap();
    let mut cfg = short_io(50.0);
    cfg.manifest_path = Some(path);
    let result = run(&cfg);
    assert!(result.successful > 0, "manifest-driven catalog served nothing");
    assert_eq!(result.generated, result.successful + result.failed);
}

/// The time series is internally consistent: counters only grow, the
/// in-flight gauge matches their difference, and time moves forward.
#[test]
fn series_counters_are_monotone_and_consistent() {
    let result = run(&short_io(50.0));
    let mut prev_t = f64::NEG_INFINITY;
    let mut prev = (0, 0, 0);
    for p in &result.series {
        assert!(p.t > prev_t, "series time went backwards at {}", p.t);
        assert!(
            p.generated >= prev.0 && p.completed >= prev.1 && p.failed >= prev.2,
            "a counter decreased at t={}",
            p.t
        );
        assert_eq!(
            p.in_system,
            p.generated - p.completed - p.failed,
            "in-flight gauge out of step at t={}",
            p.t
        );
        prev_t = p.t;
        prev = (p.generated, p.completed, p.failed);
    }
    let last = result.series.last().unwrap();
    assert_eq!(last.in_system, result.residual);
    assert_eq!(last.generated, result.generated);
}

/// Under sustained overload the controller leaves its 0% starting point
/// and starts shifting traffic, and its output respects the mode.
#[test]
fn auto_mode_moves_traffic_under_overload() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::MatMult;
    cfg.gateway_mode = GatewayMode::Auto;
    let result = run(&cfg);
    let peak = result
        .series
        .iter()
        .map(|p| p.traffic_pct)
        .fold(0.0, f64::max);
    assert!(
        peak > 5.0,
        "controller never engaged: peak traffic {peak}% under a saturating workload"
    );
    for p in &result.series {
        assert!((0.0..=100.0).contains(&p.traffic_pct));
    }
    assert!(result.cloud_served > 0);
}
