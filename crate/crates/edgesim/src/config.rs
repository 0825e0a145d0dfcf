//! Flat `key = value` run configuration.
//!
//! A config file is a list of assignments over the built-in defaults;
//! an empty file is a valid, fully specified experiment. `#` starts a
//! comment anywhere on a line. Unknown keys and malformed values are
//! hard errors with line numbers, so typos cannot silently fall back
//! to defaults.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::cluster::{AutoscalerConfig, NodeSpec};
use crate::network::LinkSpec;
use crate::offload::OffloadConfig;
use crate::workload::{ProfileKind, ProfileSet, RampSchedule, WorkloadKind};
use crate::NodeId;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("failed to read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: expected 'key = value', got '{text}'")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key '{key}'")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for '{key}': {reason}")]
    InvalidValue {
        line: usize,
        key: String,
        reason: String,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// How the gateway decides the cloud share of traffic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum GatewayMode {
    /// Constant percentage from `gateway.fixed_pct`.
    Fixed,
    /// The latency-feedback controller drives the percentage.
    Auto,
}

impl std::fmt::Display for GatewayMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GatewayMode::Fixed => write!(f, "fixed"),
            GatewayMode::Auto => write!(f, "auto"),
        }
    }
}

impl std::str::FromStr for GatewayMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fixed" => Ok(GatewayMode::Fixed),
            "auto" => Ok(GatewayMode::Auto),
            other => Err(format!("unknown mode '{other}' (expected fixed or auto)")),
        }
    }
}

/// One cell of the traffic-split axis: a pinned percentage or the
/// controller. Displays as `0`, `25`, ... or `auto`; fractional
/// percentages print as-is.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Split {
    Fixed(f64),
    Auto,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Fixed(pct) if pct.fract() == 0.0 => write!(f, "{}", *pct as i64),
            Split::Fixed(pct) => write!(f, "{pct}"),
            Split::Auto => write!(f, "auto"),
        }
    }
}

impl std::str::FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Split::Auto);
        }
        let pct: f64 = s
            .parse()
            .map_err(|_| format!("expected a percentage or 'auto', got '{s}'"))?;
        if !(0.0..=100.0).contains(&pct) {
            return Err(format!("split percentage must be in [0, 100], got {pct}"));
        }
        Ok(Split::Fixed(pct))
    }
}

impl Serialize for Split {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl Split {
    pub const SWEEP_DEFAULT: [Split; 6] = [
        Split::Fixed(0.0),
        Split::Fixed(25.0),
        Split::Fixed(50.0),
        Split::Fixed(75.0),
        Split::Fixed(100.0),
        Split::Auto,
    ];
}

/// Everything a run needs. Field groups mirror the config key prefixes.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub seed: u64,
    /// Grace period after arrivals stop before the run is cut off.
    pub drain_s: f64,
    /// Spacing of time-series rows in runs/<cell>.csv.
    pub series_interval_s: f64,
    pub workload: WorkloadKind,
    pub schedule: RampSchedule,
    pub gateway_mode: GatewayMode,
    pub fixed_pct: f64,
    pub metrics_window_s: f64,
    pub metrics_min_samples: usize,
    pub offload: OffloadConfig,
    pub edge_nodes: Vec<NodeSpec>,
    pub cloud_nodes: Vec<NodeSpec>,
    /// Per-instance FIFO queue bound; overflow counts as failure.
    pub queue_cap: usize,
    pub edge_scaler: AutoscalerConfig,
    pub cloud_scaler: AutoscalerConfig,
    pub link: LinkSpec,
    pub profiles: ProfileSet,
    /// Optional service manifest; the built-in three functions otherwise.
    pub manifest_path: Option<PathBuf>,
    pub sweep_workloads: Vec<WorkloadKind>,
    pub sweep_splits: Vec<Split>,
    pub sweep_repetitions: u32,
}

impl Default for Config {
    fn default() -> Self {
        let edge_nodes = vec![
            node(0, 1.0, 4, 1),
            node(1, 1.0, 4, 1),
            node(2, 1.0, 4, 1),
            node(3, 1.0, 4, 1),
            node(4, 2.0, 4, 1),
        ];
        let cloud_nodes = vec![node(0, 4.0, 64, 64)];
        Config {
            seed: 42,
            drain_s: 30.0,
            series_interval_s: 5.0,
            workload: WorkloadKind::MatMult,
            schedule: RampSchedule::default(),
            gateway_mode: GatewayMode::Fixed,
            fixed_pct: 0.0,
            metrics_window_s: 30.0,
            metrics_min_samples: 5,
            offload: OffloadConfig::default(),
            edge_nodes,
            cloud_nodes,
            queue_cap: 20,
            edge_scaler: AutoscalerConfig::edge_default(),
            cloud_scaler: AutoscalerConfig::cloud_default(),
            link: LinkSpec::default(),
            profiles: ProfileSet::default(),
            manifest_path: None,
            sweep_workloads: WorkloadKind::ALL.to_vec(),
            sweep_splits: Split::SWEEP_DEFAULT.to_vec(),
            sweep_repetitions: 1,
        }
    }
}

fn node(id: u64, speed: f64, max_instances: usize, cores: u32) -> NodeSpec {
    NodeSpec {
        node_id: NodeId(id),
        speed_factor: speed,
        max_instances,
        cores,
    }
}

fn invalid(line: usize, key: &str, reason: impl std::fmt::Display) -> ConfigError {
    ConfigError::InvalidValue {
        line,
        key: key.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_as<T>(line: usize, key: &str, value: &str) -> Result<T, ConfigError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e| invalid(line, key, e))
}

/// `speed:max_instances:cores` per node, comma separated.
fn parse_nodes(line: usize, key: &str, value: &str) -> Result<Vec<NodeSpec>, ConfigError> {
    let mut nodes = Vec::new();
    for (i, part) in value.split(',').enumerate() {
        let fields: Vec<&str> = part.trim().split(':').collect();
        if fields.len() != 3 {
            return Err(invalid(
                line,
                key,
                format!("node '{part}' must be speed:max_instances:cores"),
            ));
        }
        let speed: f64 = fields[0]
            .parse()
            .map_err(|_| invalid(line, key, format!("bad speed '{}'", fields[0])))?;
        let max_instances: usize = fields[1]
            .parse()
            .map_err(|_| invalid(line, key, format!("bad max_instances '{}'", fields[1])))?;
        let cores: u32 = fields[2]
            .parse()
            .map_err(|_| invalid(line, key, format!("bad cores '{}'", fields[2])))?;
        nodes.push(node(i as u64, speed, max_instances, cores));
    }
    Ok(nodes)
}

fn parse_list<T>(line: usize, key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T: std::str::FromStr,
    T::Err: std::fmt::Display,
{
    value
        .split(',')
        .map(|part| parse_as(line, key, part.trim()))
        .collect()
}

fn render_nodes(nodes: &[NodeSpec]) -> String {
    nodes
        .iter()
        .map(|n| format!("{}:{}:{}", n.speed_factor, n.max_instances, n.cores))
        .collect::<Vec<_>>()
        .join(",")
}

fn render_list<T: std::fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

impl Config {
    pub fn from_file(path: &Path) -> Result<Config, ConfigError> {
        let text = std::fs::read_to_string(path)?;
        text.parse()
    }

    fn apply(&mut self, line: usize, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "run.seed" => self.seed = parse_as(line, key, value)?,
            "run.drain_s" => self.drain_s = parse_as(line, key, value)?,
            "run.series_interval_s" => self.series_interval_s = parse_as(line, key, value)?,

            "workload.kind" => self.workload = parse_as(line, key, value)?,
            "workload.low_rps" => self.schedule.low_rate = parse_as(line, key, value)?,
            "workload.high_rps" => self.schedule.high_rate = parse_as(line, key, value)?,
            "workload.warm_s" => self.schedule.warm_s = parse_as(line, key, value)?,
            "workload.ramp_s" => self.schedule.ramp_s = parse_as(line, key, value)?,
            "workload.hold_s" => self.schedule.hold_s = parse_as(line, key, value)?,

            "gateway.mode" => self.gateway_mode = parse_as(line, key, value)?,
            "gateway.fixed_pct" => self.fixed_pct = parse_as(line, key, value)?,

            "metrics.window_s" => self.metrics_window_s = parse_as(line, key, value)?,
            "metrics.min_samples" => self.metrics_min_samples = parse_as(line, key, value)?,

            "offload.c_decay" => self.offload.c_decay = parse_as(line, key, value)?,
            "offload.c_t" => self.offload.c_t = parse_as(line, key, value)?,
            "offload.c_soft" => self.offload.c_soft = parse_as(line, key, value)?,
            "offload.c_hard" => self.offload.c_hard = parse_as(line, key, value)?,
            "offload.c_in" => self.offload.c_in = parse_as(line, key, value)?,
            "offload.interval_s" => self.offload.control_interval_s = parse_as(line, key, value)?,

            "cluster.edge.nodes" => self.edge_nodes = parse_nodes(line, key, value)?,
            "cluster.cloud.nodes" => self.cloud_nodes = parse_nodes(line, key, value)?,
            "cluster.queue_cap" => self.queue_cap = parse_as(line, key, value)?,

            "autoscaler.target_concurrency" => {
                let v = parse_as(line, key, value)?;
                self.edge_scaler.target_concurrency = v;
                self.cloud_scaler.target_concurrency = v;
            }
            "autoscaler.scale_window_s" => {
                let v = parse_as(line, key, value)?;
                self.edge_scaler.scale_window_s = v;
                self.cloud_scaler.scale_window_s = v;
            }
            "autoscaler.idle_timeout_s" => {
                let v = parse_as(line, key, value)?;
                self.edge_scaler.idle_timeout_s = v;
                self.cloud_scaler.idle_timeout_s = v;
            }
            "autoscaler.tick_interval_s" => {
                let v = parse_as(line, key, value)?;
                self.edge_scaler.tick_interval_s = v;
                self.cloud_scaler.tick_interval_s = v;
            }
            "autoscaler.edge.cold_start_s" => {
                self.edge_scaler.cold_start_delay_s = parse_as(line, key, value)?
            }
            "autoscaler.cloud.cold_start_s" => {
                self.cloud_scaler.cold_start_delay_s = parse_as(line, key, value)?
            }
            "autoscaler.edge.max_instances_per_function" => {
                self.edge_scaler.max_instances_per_function = parse_as(line, key, value)?
            }
            "autoscaler.cloud.max_instances_per_function" => {
                self.cloud_scaler.max_instances_per_function = parse_as(line, key, value)?
            }

            "network.rtt_s" => self.link.rtt_s = parse_as(line, key, value)?,
            "network.bandwidth_bytes_per_s" => {
                self.link.bandwidth_bytes_per_s = parse_as(line, key, value)?
            }
            "network.shared_pipe" => self.link.shared_pipe = parse_as(line, key, value)?,

            "manifest.path" => self.manifest_path = Some(PathBuf::from(value)),

            "sweep.workloads" => self.sweep_workloads = parse_list(line, key, value)?,
            "sweep.splits" => self.sweep_splits = parse_list(line, key, value)?,
            "sweep.repetitions" => self.sweep_repetitions = parse_as(line, key, value)?,

            _ => {
                if let Some(rest) = key.strip_prefix("profile.") {
                    return self.apply_profile(line, key, rest, value);
                }
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
        }
        Ok(())
    }

    fn apply_profile(
        &mut self,
        line: usize,
        key: &str,
        rest: &str,
        value: &str,
    ) -> Result<(), ConfigError> {
        let (kind_str, field) = rest.split_once('.').ok_or_else(|| ConfigError::UnknownKey {
            line,
            key: key.to_string(),
        })?;
        let kind: ProfileKind = kind_str
            .parse()
            .map_err(|e: String| invalid(line, key, e))?;
        let profile = self.profiles.get_mut(kind);
        match field {
            "compute_s" => profile.compute_s = parse_as(line, key, value)?,
            "io_s" => profile.io_s = parse_as(line, key, value)?,
            "request_bytes" => profile.request_bytes = parse_as(line, key, value)?,
            "response_bytes" => profile.response_bytes = parse_as(line, key, value)?,
            "memory_mb" => profile.memory_mb = parse_as(line, key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Semantic checks beyond per-field parsing.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |msg: String| Err(ConfigError::Invalid(msg));
        if self.schedule.low_rate <= 0.0 || self.schedule.high_rate <= 0.0 {
            return fail(format!(
                "arrival rates must be positive (low {}, high {})",
                self.schedule.low_rate, self.schedule.high_rate
            ));
        }
        if self.schedule.end() <= 0.0 {
            return fail("schedule has zero duration".into());
        }
        if !(0.0..=100.0).contains(&self.fixed_pct) {
            return fail(format!(
                "gateway.fixed_pct must be in [0, 100], got {}",
                self.fixed_pct
            ));
        }
        self.offload
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.metrics_window_s <= 0.0 {
            return fail("metrics.window_s must be positive".into());
        }
        if self.queue_cap == 0 {
            return fail("cluster.queue_cap must be at least 1".into());
        }
        for (name, nodes) in [("edge", &self.edge_nodes), ("cloud", &self.cloud_nodes)] {
            if nodes.is_empty() {
                return fail(format!("cluster.{name}.nodes must list at least one node"));
            }
            for n in nodes.iter() {
                if n.speed_factor <= 0.0 || n.max_instances == 0 || n.cores == 0 {
                    return fail(format!(
                        "cluster.{name}.nodes: speed, max_instances and cores must be positive"
                    ));
                }
            }
        }
        for (name, s) in [("edge", &self.edge_scaler), ("cloud", &self.cloud_scaler)] {
            if s.target_concurrency <= 0.0
                || s.scale_window_s <= 0.0
                || s.tick_interval_s <= 0.0
                || s.idle_timeout_s < 0.0
                || s.cold_start_delay_s < 0.0
                || s.max_instances_per_function == 0
            {
                return fail(format!("autoscaler ({name}) values out of range"));
            }
        }
        if self.link.bandwidth_bytes_per_s <= 0.0 || self.link.rtt_s < 0.0 {
            return fail("network link values out of range".into());
        }
        for kind in ProfileKind::ALL {
            let p = self.profiles.get(kind);
            if p.compute_s < 0.0 || p.io_s < 0.0 {
                return fail(format!("profile.{kind}: times must be non-negative"));
            }
            if p.compute_s + p.io_s <= 0.0 {
                return fail(format!("profile.{kind}: service time must be positive"));
            }
        }
        if self.drain_s < 0.0 || self.series_interval_s <= 0.0 {
            return fail("run timing values out of range".into());
        }
        if self.sweep_workloads.is_empty() || self.sweep_splits.is_empty() {
            return fail("sweep axes must be non-empty".into());
        }
        if self.sweep_repetitions == 0 {
            return fail("sweep.repetitions must be at least 1".into());
        }
        Ok(())
    }

    /// Pins a sweep cell onto this config.
    pub fn with_split(&self, split: Split) -> Config {
        let mut c = self.clone();
        match split {
            Split::Fixed(pct) => {
                c.gateway_mode = GatewayMode::Fixed;
                c.fixed_pct = pct;
            }
            Split::Auto => c.gateway_mode = GatewayMode::Auto,
        }
        c
    }

    /// Every effective key-value pair in canonical order. Feeding these
    /// lines back through the parser reproduces this config exactly.
    pub fn snapshot(&self) -> Vec<(String, String)> {
        let mut kv: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| kv.push((k.to_string(), v));
        push("run.seed", self.seed.to_string());
        push("run.drain_s", self.drain_s.to_string());
        push("run.series_interval_s", self.series_interval_s.to_string());
        push("workload.kind", self.workload.to_string());
        push("workload.low_rps", self.schedule.low_rate.to_string());
        push("workload.high_rps", self.schedule.high_rate.to_string());
        push("workload.warm_s", self.schedule.warm_s.to_string());
        push("workload.ramp_s", self.schedule.ramp_s.to_string());
        push("workload.hold_s", self.schedule.hold_s.to_string());
        push("gateway.mode", self.gateway_mode.to_string());
        push("gateway.fixed_pct", self.fixed_pct.to_string());
        push("metrics.window_s", self.metrics_window_s.to_string());
        push("metrics.min_samples", self.metrics_min_samples.to_string());
        push("offload.c_decay", self.offload.c_decay.to_string());
        push("offload.c_t", self.offload.c_t.to_string());
        push("offload.c_soft", self.offload.c_soft.to_string());
        push("offload.c_hard", self.offload.c_hard.to_string());
        push("offload.c_in", self.offload.c_in.to_string());
        push(
            "offload.interval_s",
            self.offload.control_interval_s.to_string(),
        );
        push("cluster.edge.nodes", render_nodes(&self.edge_nodes));
        push("cluster.cloud.nodes", render_nodes(&self.cloud_nodes));
        push("cluster.queue_cap", self.queue_cap.to_string());
        push(
            "autoscaler.target_concurrency",
            self.edge_scaler.target_concurrency.to_string(),
        );
        push(
            "autoscaler.scale_window_s",
            self.edge_scaler.scale_window_s.to_string(),
        );
        push(
            "autoscaler.idle_timeout_s",
            self.edge_scaler.idle_timeout_s.to_string(),
        );
        push(
            "autoscaler.tick_interval_s",
            self.edge_scaler.tick_interval_s.to_string(),
        );
        push(
            "autoscaler.edge.cold_start_s",
            self.edge_scaler.cold_start_delay_s.to_string(),
        );
        push(
            "autoscaler.cloud.cold_start_s",
            self.cloud_scaler.cold_start_delay_s.to_string(),
        );
        push(
            "autoscaler.edge.max_instances_per_function",
            self.edge_scaler.max_instances_per_function.to_string(),
        );
        push(
            "autoscaler.cloud.max_instances_per_function",
            self.cloud_scaler.max_instances_per_function.to_string(),
        );
        push("network.rtt_s", self.link.rtt_s.to_string());
        push(
            "network.bandwidth_bytes_per_s",
            self.link.bandwidth_bytes_per_s.to_string(),
        );
        push("network.shared_pipe", self.link.shared_pipe.to_string());
        for kind in ProfileKind::ALL {
            let p = self.profiles.get(kind);
            push(&format!("profile.{kind}.compute_s"), p.compute_s.to_string());
            push(&format!("profile.{kind}.io_s"), p.io_s.to_string());
            push(
                &format!("profile.{kind}.request_bytes"),
                p.request_bytes.to_string(),
            );
            push(
                &format!("profile.{kind}.response_bytes"),
                p.response_bytes.to_string(),
            );
            push(
                &format!("profile.{kind}.memory_mb"),
                p.memory_mb.to_string(),
            );
        }
        if let Some(path) = &self.manifest_path {
            push("manifest.path", path.display().to_string());
        }
        push("sweep.workloads", render_list(&self.sweep_workloads));
        push("sweep.splits", render_list(&self.sweep_splits));
        push("sweep.repetitions", self.sweep_repetitions.to_string());
        kv
    }
}

impl std::str::FromStr for Config {
    type Err = ConfigError;

    fn from_str(text: &str) -> Result<Config, ConfigError> {
        let mut config = Config::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: content.to_string(),
            })?;
            config.apply(line, key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default_experiment() {
        let c: Config = "".parse().unwrap();
        assert_eq!(c, Config::default());
        assert_eq!(c.seed, 42);
        assert_eq!(c.schedule.high_rate, 20.0);
        assert_eq!(c.edge_nodes.len(), 5);
        assert_eq!(c.edge_scaler.max_instances_per_function, 1);
        assert_eq!(c.cloud_scaler.max_instances_per_function, 40);
        assert_eq!(c.cloud_scaler.cold_start_delay_s, 1.0);
        assert_eq!(c.queue_cap, 20);
    }

    #[test]
    fn comments_blanks_and_spacing_are_tolerated() {
        let text = "\n# full line comment\n  run.seed = 7   # trailing comment\n\n\tworkload.kind=io\n";
        let c: Config = text.parse().unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.workload, WorkloadKind::Io);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = "run.seed = 1\nrun.sed = 2\n".parse::<Config>().unwrap_err();
        match err {
            ConfigError::UnknownKey { line, key } => {
                assert_eq!(line, 2);
                assert_eq!(key, "run.sed");
            }
            other => panic!("expected UnknownKey, got {other}"),
        }
    }

    #[test]
    fn bad_value_reports_key_and_line() {
        let err = "network.rtt_s = fast\n".parse::<Config>().unwrap_err();
        match err {
            ConfigError::InvalidValue { line, key, .. } => {
                assert_eq!(line, 1);
                assert_eq!(key, "network.rtt_s");
            }
            other => panic!("expected InvalidValue, got {other}"),
        }
    }

    #[test]
    fn missing_equals_is_a_syntax_error() {
        let err = "run.seed 5\n".parse::<Config>().unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: 1, .. }));
    }

    #[test]
    fn node_lists_parse_in_order() {
        let c: Config = "cluster.edge.nodes = 1.5:2:1, 3:8:4\n".parse().unwrap();
        assert_eq!(c.edge_nodes.len(), 2);
        assert_eq!(c.edge_nodes[0].node_id, NodeId(0));
        assert_eq!(c.edge_nodes[0].speed_factor, 1.5);
        assert_eq!(c.edge_nodes[1].max_instances, 8);
        assert_eq!(c.edge_nodes[1].cores, 4);
    }

    #[test]
    fn malformed_node_entry_is_rejected() {
        assert!("cluster.edge.nodes = 1.5:2\n".parse::<Config>().is_err());
        assert!("cluster.edge.nodes = a:2:1\n".parse::<Config>().is_err());
    }

    #[test]
    fn profile_overrides_take_effect() {
        let text = "profile.image.compute_s = 0.5\nprofile.io.request_bytes = 1024\n";
        let c: Config = text.parse().unwrap();
        assert_eq!(c.profiles.image.compute_s, 0.5);
        assert_eq!(c.profiles.io.request_bytes, 1024);
        // Untouched fields keep their defaults.
        assert_eq!(c.profiles.image.memory_mb, 96);
    }

    #[test]
    fn split_parsing_and_display() {
        assert_eq!("auto".parse::<Split>().unwrap(), Split::Auto);
        assert_eq!("25".parse::<Split>().unwrap(), Split::Fixed(25.0));
        assert_eq!("33.5".parse::<Split>().unwrap(), Split::Fixed(33.5));
        assert!("101".parse::<Split>().is_err());
        assert!("-5".parse::<Split>().is_err());
        assert_eq!(Split::Fixed(0.0).to_string(), "0");
        assert_eq!(Split::Fixed(33.5).to_string(), "33.5");
        assert_eq!(Split::Auto.to_string(), "auto");
    }

    #[test]
    fn sweep_axes_parse_as_lists() {
        let text = "sweep.workloads = io, mixed\nsweep.splits = 0, 50, auto\n";
        let c: Config = text.parse().unwrap();
        assert_eq!(c.sweep_workloads, vec![WorkloadKind::Io, WorkloadKind::Mixed]);
        assert_eq!(
            c.sweep_splits,
            vec![Split::Fixed(0.0), Split::Fixed(50.0), Split::Auto]
        );
    }

    #[test]
    fn with_split_pins_mode_and_pct() {
        let base = Config::default();
        let fixed = base.with_split(Split::Fixed(75.0));
        assert_eq!(fixed.gateway_mode, GatewayMode::Fixed);
        assert_eq!(fixed.fixed_pct, 75.0);
        let auto = base.with_split(Split::Auto);
        assert_eq!(auto.gateway_mode, GatewayMode::Auto);
    }

    #[test]
    fn snapshot_roundtrips_through_the_parser() {
        let mut custom = Config::default();
        custom.seed = 9;
        custom.workload = WorkloadKind::Mixed;
        custom.gateway_mode = GatewayMode::Auto;
        custom.fixed_pct = 33.5;
        custom.offload.c_soft = 1.5;
        custom.link.shared_pipe = false;
        custom.profiles.matmult.request_bytes = 123;
        custom.manifest_path = Some(PathBuf::from("services.txt"));
        custom.sweep_splits = vec![Split::Fixed(10.0), Split::Auto];
        let text: String = custom
            .snapshot()
            .iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let reparsed: Config = text.parse().unwrap();
        assert_eq!(reparsed, custom);
    }

    #[test]
    fn semantic_validation_rejects_bad_combinations() {
        assert!("offload.c_soft = 9\n".parse::<Config>().is_err(), "soft above hard");
        assert!("gateway.fixed_pct = 150\n".parse::<Config>().is_err());
        assert!("network.bandwidth_bytes_per_s = 0\n".parse::<Config>().is_err());
        assert!("workload.low_rps = 0\n".parse::<Config>().is_err());
        assert!("cluster.queue_cap = 0\n".parse::<Config>().is_err());
        assert!("sweep.repetitions = 0\n".parse::<Config>().is_err());
        assert!("profile.io.io_s = -1\n".parse::<Config>().is_err());
    }
}
