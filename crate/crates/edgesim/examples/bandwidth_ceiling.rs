//! The shared uplink under a payload-heavy full offload: per-second
//! delivered bytes climb with the arrival ramp and then pin at the
//! configured bandwidth for the whole peak phase.
//!
//!     cargo run --example bandwidth_ceiling

use edgesim::{run, Config, WorkloadKind};

fn main() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::MatMult;
    cfg.fixed_pct = 100.0;
    cfg.series_interval_s = 1.0;
    let result = run(&cfg);

    let capacity = cfg.link.bandwidth_bytes_per_s;
    println!(
        "matmult fully offloaded: {} MB per request each way, link {} MB/s",
        cfg.profiles.matmult.request_bytes / 1_000_000,
        capacity / 1e6
    );
    println!("{:>6} {:>14} {:>10}", "t_s", "delivered_MB", "busy");
    for p in result.series.iter().step_by(15) {
        println!(
            "{:>6} {:>14.1} {:>9.1}%",
            p.t,
            p.link_delivered_bytes / 1e6,
            100.0 * p.link_busy_fraction
        );
    }

    let max_interval = result
        .series
        .iter()
        .map(|p| p.link_delivered_bytes)
        .fold(0.0, f64::max);
    let saturated = result
        .series
        .iter()
        .filter(|p| p.link_busy_fraction >= 0.999)
        .count();
    println!(
        "\nbusiest 1s interval delivered {:.1} MB of the {:.1} MB capacity; \
         {saturated} intervals ran fully busy",
        max_interval / 1e6,
        capacity / 1e6
    );
}
