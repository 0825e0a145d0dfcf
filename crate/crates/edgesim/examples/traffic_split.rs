//! Weighted random routing: measured cloud share versus the configured
//! split over a seeded batch of draws. The extremes are exact, everything
//! in between converges at the usual 1/sqrt(n) pace.
//!
//!     cargo run --example traffic_split

use edgesim::{Gateway, ProfileKind, Request, RequestId, Site, WorkloadProfile, FunctionId};

fn main() {
    let draws = 50_000;
    let req = Request::new(
        RequestId(0),
        FunctionId(0),
        0.0,
        WorkloadProfile::builtin(ProfileKind::Io),
    );
    println!("{:>10} {:>12} {:>12} {:>10}", "split_pct", "cloud", "edge", "measured");
    for pct in [0.0, 25.0, 50.0, 75.0, 100.0] {
        let mut gw = Gateway::new(edgesim::rng::stream(42, "routing"));
        let cloud = (0..draws)
            .filter(|_| gw.route(&req, pct).target == Site::Cloud)
            .count();
        println!(
            "{pct:>10} {cloud:>12} {:>12} {:>9.2}%",
            draws - cloud,
            100.0 * cloud as f64 / draws as f64
        );
    }
}
