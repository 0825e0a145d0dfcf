//! The experiment matrix: every configured workload crossed with every
//! traffic split, repeated `sweep.repetitions` times. Cells execute
//! sequentially in declaration order, so artifacts are reproducible
//! row by row.

use std::time::Instant;

use crate::config::{Config, Split};
use crate::sim::{run, RunResult};
use crate::workload::WorkloadKind;
use crate::rng;

#[derive(Debug, Clone)]
pub struct CellResult {
    pub workload: WorkloadKind,
    pub split: Split,
    pub rep: u32,
    /// The derived per-cell seed the run actually used.
    pub seed: u64,
    pub result: RunResult,
}

impl CellResult {
    /// Stable artifact stem, e.g. `matmult_25` or `io_auto_r2`.
    pub fn file_stem(&self, multi_rep: bool) -> String {
        if multi_rep {
            format!("{}_{}_r{}", self.workload, self.split, self.rep)
        } else {
            format!("{}_{}", self.workload, self.split)
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub base_seed: u64,
    pub repetitions: u32,
    pub cells: Vec<CellResult>,
    pub wall_time_s: f64,
    pub config_snapshot: Vec<(String, String)>,
}

/// Runs the full matrix. The per-cell seed folds in the workload and the
/// repetition but deliberately not the split: all cells of one table row
/// replay identical arrival, profile and routing draws, so a higher split
/// moves a superset of the same requests to the cloud rather than
/// reshuffling traffic.
pub fn sweep(config: &Config) -> SweepResult {
    config.validate().expect("config must validate before a sweep");
    let started = Instant::now();
    let mut cells = Vec::new();
    for &workload in &config.sweep_workloads {
        for &split in &config.sweep_splits {
            for rep in 0..config.sweep_repetitions {
                let mut cell_cfg = config.with_split(split);
                cell_cfg.workload = workload;
                cell_cfg.seed =
                    rng::derive_seed(config.seed, &format!("cell/{workload}/{rep}"));
                let result = run(&cell_cfg);
                cells.push(CellResult {
                    workload,
                    split,
                    rep,
                    seed: cell_cfg.seed,
                    result,
                });
            }
        }
    }
    SweepResult {
        base_seed: config.seed,
        repetitions: config.sweep_repetitions,
        cells,
        wall_time_s: started.elapsed().as_secs_f64(),
        config_snapshot: config.snapshot(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> Config {
        let mut c = Config::default();
        c.schedule.low_rate = 3.0;
        c.schedule.high_rate = 6.0;
        c.schedule.warm_s = 5.0;
        c.schedule.ramp_s = 5.0;
        c.schedule.hold_s = 5.0;
        c.sweep_workloads = vec![WorkloadKind::Io, WorkloadKind::Image];
        c.sweep_splits = vec![Split::Fixed(0.0), Split::Fixed(100.0)];
        c
    }

    #[test]
    fn cells_come_out_in_declaration_order() {
        let result = sweep(&tiny_config());
        let order: Vec<String> = result.cells.iter().map(|c| c.file_stem(false)).collect();
        assert_eq!(order, vec!["io_0", "io_100", "image_0", "image_100"]);
    }

    #[test]
    fn seed_ignores_split_but_not_workload_or_rep() {
        let mut cfg = tiny_config();
        cfg.sweep_repetitions = 2;
        let result = sweep(&cfg);
        let find = |w: WorkloadKind, s: Split, r: u32| {
            result
                .cells
                .iter()
                .find(|c| c.workload == w && c.split == s && c.rep == r)
                .unwrap()
                .seed
        };
        let io0 = find(WorkloadKind::Io, Split::Fixed(0.0), 0);
        assert_eq!(io0, find(WorkloadKind::Io, Split::Fixed(100.0), 0));
        assert_ne!(io0, find(WorkloadKind::Image, Split::Fixed(0.0), 0));
        assert_ne!(io0, find(WorkloadKind::Io, Split::Fixed(0.0), 1));
    }

    #[test]
    fn same_row_cells_share_their_arrival_trace() {
        // With the split excluded from the seed, both cells of a row must
        // generate the identical request count.
        let result = sweep(&tiny_config());
        assert_eq!(
            result.cells[0].result.generated,
            result.cells[1].result.generated
        );
    }

    #[test]
    fn repetition_stems_stay_distinct() {
        let cell = CellResult {
            workload: WorkloadKind::Io,
            split: Split::Auto,
            rep: 2,
            seed: 1,
            result: crate::sim::run(&{
                let mut c = tiny_config();
                c.schedule.warm_s = 1.0;
                c.schedule.ramp_s = 1.0;
                c.schedule.hold_s = 1.0;
                c.workload = WorkloadKind::Io;
                c
            }),
        };
        assert_eq!(cell.file_stem(true), "io_auto_r2");
        assert_eq!(cell.file_stem(false), "io_auto");
    }
}
