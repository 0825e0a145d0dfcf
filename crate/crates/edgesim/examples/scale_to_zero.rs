//! Autoscaling over a burst: instances follow demand up, idle out after
//! traffic stops, and both pools end empty. The run keeps a zero-traffic
//! tail twice the idle timeout so the teardown is visible.
//!
//!     cargo run --example scale_to_zero

use edgesim::{run, Config, WorkloadKind};

fn main() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::Io;
    cfg.fixed_pct = 50.0;
    cfg.schedule.warm_s = 20.0;
    cfg.schedule.ramp_s = 20.0;
    cfg.schedule.hold_s = 40.0;
    cfg.drain_s = 2.0 * cfg.edge_scaler.idle_timeout_s;
    let arrivals_end = cfg.schedule.end();
    let result = run(&cfg);

    println!(
        "io workload at a 50% split, arrivals stop at t={arrivals_end}s, idle timeout {}s",
        cfg.edge_scaler.idle_timeout_s
    );
    println!(
        "{:>6} {:>7} {:>8} {:>10} {:>10}",
        "t_s", "edge_i", "cloud_i", "in_system", "phase"
    );
    for p in &result.series {
        let phase = if p.t <= arrivals_end { "traffic" } else { "idle tail" };
        println!(
            "{:>6} {:>7} {:>8} {:>10} {:>10}",
            p.t, p.edge_instances, p.cloud_instances, p.in_system, phase
        );
    }

    let last = result.series.last().unwrap();
    println!(
        "\nfinal instance counts: edge {}, cloud {}; {} of {} requests served",
        last.edge_instances, last.cloud_instances, result.successful, result.generated
    );
}
