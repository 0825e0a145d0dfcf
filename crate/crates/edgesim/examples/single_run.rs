//! One simulated run end to end: the mixed workload under the adaptive
//! controller, with the summary counters and a slice of the time series.
//!
//!     cargo run --example single_run

use edgesim::{run, Config, GatewayMode, WorkloadKind};

fn main() {
    let mut cfg = Config::default();
    cfg.workload = WorkloadKind::Mixed;
    cfg.gateway_mode = GatewayMode::Auto;
    let result = run(&cfg);

    println!("workload {} under the adaptive controller, seed {}", result.workload, result.seed);
    println!(
        "generated {}   successful {}   failed {}   residual {}",
        result.generated, result.successful, result.failed, result.residual
    );
    println!(
        "served at edge {}   cloud {}   rejected edge {}   cloud {}",
        result.edge_served, result.cloud_served, result.edge_rejected, result.cloud_rejected
    );
    println!(
        "mean latency {:.3}s   p95 {:.3}s   final cloud traffic {:.1}%\n",
        result.mean_latency_s, result.p95_latency_s, result.final_traffic_pct
    );

    println!(
        "{:>6} {:>9} {:>8} {:>8} {:>7} {:>7} {:>9}",
        "t_s", "traffic%", "p50_s", "p95_s", "edge_i", "cloud_i", "in_system"
    );
    for p in result.series.iter().filter(|p| p.t % 30.0 == 0.0) {
        println!(
            "{:>6} {:>9.1} {:>8.3} {:>8.3} {:>7} {:>7} {:>9}",
            p.t, p.traffic_pct, p.latency_p50, p.latency_p95, p.edge_instances,
            p.cloud_instances, p.in_system
        );
    }
}
