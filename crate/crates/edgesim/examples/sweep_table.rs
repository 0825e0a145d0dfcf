//! The full experiment matrix at the default settings: successful request
//! counts and mean latencies per workload and split. The 0% column shows
//! what the edge alone can carry; the auto column is the controller.
//!
//!     cargo run --example sweep_table

use edgesim::{sweep, CellResult, Config, Split, WorkloadKind};

fn cell<'a>(cells: &'a [CellResult], w: WorkloadKind, s: Split) -> &'a CellResult {
    cells
        .iter()
        .find(|c| c.workload == w && c.split == s)
        .expect("default matrix covers every workload x split")
}

fn main() {
    let cfg = Config::default();
    let result = sweep(&cfg);
    let splits = &cfg.sweep_splits;

    println!("successful requests (of ~3200 generated per row)");
    print!("{:<10}", "workload");
    for s in splits {
        print!("{:>9}", s.to_string());
    }
    println!();
    for &w in &cfg.sweep_workloads {
        print!("{:<10}", w.to_string());
        for &s in splits {
            print!("{:>9}", cell(&result.cells, w, s).result.successful);
        }
        println!();
    }

    println!("\nmean latency (s)");
    print!("{:<10}", "workload");
    for s in splits {
        print!("{:>9}", s.to_string());
    }
    println!();
    for &w in &cfg.sweep_workloads {
        print!("{:<10}", w.to_string());
        for &s in splits {
            print!("{:>9.3}", cell(&result.cells, w, s).result.mean_latency_s);
        }
        println!();
    }

    println!(
        "\n{} cells, base seed {}, {:.2}s wall",
        result.cells.len(),
        result.base_seed,
        result.wall_time_s
    );
}
