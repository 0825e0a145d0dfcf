//! Artifact rendering and writing.
//!
//! Renderers are pure string builders with pinned formats so identical
//! results serialize byte-identically: floats always carry six decimals
//! in CSV, summary rows follow cell order, JSON objects sort their keys.
//! Writers lay the strings out under an output directory:
//!
//! ```text
//! out/
//!   summary.csv          one row per cell
//!   summary.json         cells plus the full effective config
//!   runs/<cell>.csv      long-format time series, t_s,metric,value
//! ```

use std::io;
use std::path::{Path, PathBuf};

use crate::sim::RunResult;
use crate::sweep::SweepResult;

pub const SUMMARY_HEADER: &str = "workload,split,successful,failed,mean_latency_s,p95_latency_s";
pub const RUN_HEADER: &str = "t_s,metric,value";

fn float(v: f64) -> String {
    format!("{v:.6}")
}

pub fn render_summary_csv(sweep: &SweepResult) -> String {
    let mut out = String::with_capacity(64 * (sweep.cells.len() + 1));
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for cell in &sweep.cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            cell.workload,
            cell.split,
            cell.result.successful,
            cell.result.failed,
            float(cell.result.mean_latency_s),
            float(cell.result.p95_latency_s),
        ));
    }
    out
}

/// Long-format time series: one `t_s,metric,value` row per metric per
/// series point, in a fixed metric order.
pub fn render_run_csv(result: &RunResult) -> String {
    let mut out = String::from(RUN_HEADER);
    out.push('\n');
    for p in &result.series {
        let t = float(p.t);
        let mut row = |metric: &str, value: String| {
            out.push_str(&t);
            out.push(',');
            out.push_str(metric);
            out.push(',');
            out.push_str(&value);
            out.push('\n');
        };
        row("traffic_pct", float(p.traffic_pct));
        row("smoothed_ratio", float(p.smoothed_ratio));
        row("latency_p50_s", float(p.latency_p50));
        row("latency_p95_s", float(p.latency_p95));
        row("edge_instances", p.edge_instances.to_string());
        row("cloud_instances", p.cloud_instances.to_string());
        row("edge_cpu_util", float(p.edge_cpu_util));
        row("cloud_cpu_util", float(p.cloud_cpu_util));
        row("edge_memory_mb", p.edge_memory_mb.to_string());
        row("cloud_memory_mb", p.cloud_memory_mb.to_string());
        row("link_busy_fraction", float(p.link_busy_fraction));
        row("link_delivered_bytes", float(p.link_delivered_bytes));
        row("generated", p.generated.to_string());
        row("completed", p.completed.to_string());
        row("failed", p.failed.to_string());
        row("in_system", p.in_system.to_string());
    }
    out
}

/// Number of rows per series point in [`render_run_csv`].
pub const RUN_CSV_METRICS: usize = 16;

pub fn render_summary_json(sweep: &SweepResult) -> String {
    use serde_json::{json, Map, Value};
    let mut config = Map::new();
    for (k, v) in &sweep.config_snapshot {
        config.insert(k.clone(), Value::String(v.clone()));
    }
    let cells: Vec<Value> = sweep
        .cells
        .iter()
        .map(|cell| {
            json!({
                "workload": cell.workload.to_string(),
                "split": cell.split.to_string(),
                "rep": cell.rep,
                "seed": cell.seed,
                "generated": cell.result.generated,
                "successful": cell.result.successful,
                "failed": cell.result.failed,
                "residual": cell.result.residual,
                "edge_served": cell.result.edge_served,
                "cloud_served": cell.result.cloud_served,
                "mean_latency_s": cell.result.mean_latency_s,
                "p95_latency_s": cell.result.p95_latency_s,
                "final_traffic_pct": cell.result.final_traffic_pct,
            })
        })
        .collect();
    let doc = json!({
        "base_seed": sweep.base_seed,
        "repetitions": sweep.repetitions,
        "config": Value::Object(config),
        "cells": cells,
    });
    let mut text = serde_json::to_string_pretty(&doc).expect("static structure always serializes");
    text.push('\n');
    text
}

/// Writes one run's time series as `<dir>/runs/<stem>.csv`.
pub fn write_run_artifacts(dir: &Path, stem: &str, result: &RunResult) -> io::Result<PathBuf> {
    let runs = dir.join("runs");
    std::fs::create_dir_all(&runs)?;
    let path = runs.join(format!("{stem}.csv"));
    std::fs::write(&path, render_run_csv(result))?;
    Ok(path)
}

/// Writes summary.csv, summary.json and every cell's series CSV.
pub fn write_sweep_artifacts(dir: &Path, sweep: &SweepResult) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("summary.csv"), render_summary_csv(sweep))?;
    std::fs::write(dir.join("summary.json"), render_summary_json(sweep))?;
    let multi_rep = sweep.repetitions > 1;
    for cell in &sweep.cells {
        write_run_artifacts(dir, &cell.file_stem(multi_rep), &cell.result)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Split;
    use crate::sim::SeriesPoint;
    use crate::sweep::CellResult;
    use crate::workload::WorkloadKind;

    fn point(t: f64) -> SeriesPoint {
        SeriesPoint {
            t,
            traffic_pct: 12.5,
            smoothed_ratio: 1.25,
            latency_p50: 0.1,
            latency_p95: 0.42,
            edge_instances: 3,
            cloud_instances: 1,
            edge_cpu_util: 0.75,
            cloud_cpu_util: 0.0625,
            edge_memory_mb: 288,
            cloud_memory_mb: 128,
            link_busy_fraction: 0.5,
            link_delivered_bytes: 1e6,
            generated: 100,
            completed: 90,
            failed: 4,
            in_system: 6,
        }
    }

    fn fake_run(successful: u64, mean: f64, p95: f64) -> RunResult {
        RunResult {
            workload: WorkloadKind::Io,
            seed: 7,
            generated: successful + 5,
            successful,
            failed: 3,
            residual: 2,
            edge_served: successful - 10,
            cloud_served: 10,
            edge_rejected: 3,
            cloud_rejected: 0,
            mean_latency_s: mean,
            p95_latency_s: p95,
            final_traffic_pct: 25.0,
            series: vec![point(5.0), point(10.0)],
            config_snapshot: vec![("run.seed".into(), "7".into())],
        }
    }

    fn fake_sweep() -> SweepResult {
        SweepResult {
            base_seed: 42,
            repetitions: 1,
            cells: vec![
                CellResult {
                    workload: WorkloadKind::Io,
                    split: Split::Fixed(0.0),
                    rep: 0,
                    seed: 1,
                    result: fake_run(100, 0.5, 1.25),
                },
                CellResult {
                    workload: WorkloadKind::Io,
                    split: Split::Auto,
                    rep: 0,
                    seed: 1,
                    result: fake_run(200, 0.25, 2.0),
                },
            ],
            wall_time_s: 0.1,
            config_snapshot: vec![
                ("run.seed".into(), "42".into()),
                ("workload.kind".into(), "io".into()),
            ],
        }
    }

    #[test]
    fn summary_csv_is_exactly_pinned() {
        let expected = "workload,split,successful,failed,mean_latency_s,p95_latency_s\n\
                        io,0,100,3,0.500000,1.250000\n\
                        io,auto,200,3,0.250000,2.000000\n";
        assert_eq!(render_summary_csv(&fake_sweep()), expected);
    }

    #[test]
    fn run_csv_emits_every_metric_per_point() {
        let csv = render_run_csv(&fake_run(100, 0.5, 1.0));
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], RUN_HEADER);
        assert_eq!(lines.len(), 1 + 2 * RUN_CSV_METRICS);
        assert_eq!(lines[1], "5.000000,traffic_pct,12.500000");
        assert!(lines.iter().any(|l| *l == "10.000000,in_system,6"));
    }

    #[test]
    fn summary_json_contains_cells_and_config() {
        let text = render_summary_json(&fake_sweep());
        let doc: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(doc["base_seed"], 42);
        assert_eq!(doc["cells"].as_array().unwrap().len(), 2);
        assert_eq!(doc["cells"][0]["split"], "0");
        assert_eq!(doc["cells"][1]["split"], "auto");
        assert_eq!(doc["cells"][0]["mean_latency_s"], 0.5);
        assert_eq!(doc["config"]["workload.kind"], "io");
    }

    #[test]
    fn rendering_is_deterministic() {
        let sweep = fake_sweep();
        assert_eq!(render_summary_csv(&sweep), render_summary_csv(&sweep));
        assert_eq!(render_summary_json(&sweep), render_summary_json(&sweep));
        assert_eq!(
            render_run_csv(&sweep.cells[0].result),
            render_run_csv(&sweep.cells[0].result)
        );
    }

    #[test]
    fn artifacts_land_under_the_output_dir() {
        let dir = tempfile::tempdir().unwrap();
        let sweep = fake_sweep();
        write_sweep_artifacts(dir.path(), &sweep).unwrap();
        assert!(dir.path().join("summary.csv").is_file());
        assert!(dir.path().join("summary.json").is_file());
        assert!(dir.path().join("runs/io_0.csv").is_file());
        assert!(dir.path().join("runs/io_auto.csv").is_file());
        let on_disk = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(on_disk, render_summary_csv(&sweep));
    }
}
