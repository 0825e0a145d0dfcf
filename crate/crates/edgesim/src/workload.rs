//! Request profiles and the ramped arrival process used by the experiments.
//!
//! A run picks one workload. The first three map to a single function with
//! fixed demands; `mixed` draws uniformly among the three base profiles for
//! every request, hitting all three functions in one run.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::{FunctionId, RequestId};

/// Workload selected for a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WorkloadKind {
    MatMult,
    Image,
    Io,
    Mixed,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 4] = [
        WorkloadKind::MatMult,
        WorkloadKind::Image,
        WorkloadKind::Io,
        WorkloadKind::Mixed,
    ];
}

impl std::fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            WorkloadKind::MatMult => "matmult",
            WorkloadKind::Image => "image",
            WorkloadKind::Io => "io",
            WorkloadKind::Mixed => "mixed",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for WorkloadKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matmult" => Ok(WorkloadKind::MatMult),
            "image" => Ok(WorkloadKind::Image),
            "io" => Ok(WorkloadKind::Io),
            "mixed" => Ok(WorkloadKind::Mixed),
            other => Err(format!(
                "unknown workload '{other}' (expected matmult, image, io or mixed)"
            )),
        }
    }
}

/// Identity of a base profile; `mixed` resolves to one of these per request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ProfileKind {
    MatMult,
    Image,
    Io,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::MatMult, ProfileKind::Image, ProfileKind::Io];
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ProfileKind::MatMult => "matmult",
            ProfileKind::Image => "image",
            ProfileKind::Io => "io",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "matmult" => Ok(ProfileKind::MatMult),
            "image" => Ok(ProfileKind::Image),
            "io" => Ok(ProfileKind::Io),
            other => Err(format!(
                "unknown profile '{other}' (expected matmult, image or io)"
            )),
        }
    }
}

/// Per-request demands of a function. Compute scales with node speed,
/// I/O time does not.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkloadProfile {
    pub kind: ProfileKind,
    pub compute_s: f64,
    pub io_s: f64,
    pub request_bytes: u64,
    pub response_bytes: u64,
    pub memory_mb: u64,
}

impl WorkloadProfile {
    /// Built-in demand set: a compute-heavy function with bulky payloads,
    /// a lighter compute function, and an I/O-bound one with tiny payloads.
    pub fn builtin(kind: ProfileKind) -> WorkloadProfile {
        match kind {
            ProfileKind::MatMult => WorkloadProfile {
                kind,
                compute_s: 0.40,
                io_s: 0.0,
                request_bytes: 3_000_000,
                response_bytes: 3_000_000,
                memory_mb: 128,
            },
            ProfileKind::Image => WorkloadProfile {
                kind,
                compute_s: 0.20,
                io_s: 0.0,
                request_bytes: 1_000_000,
                response_bytes: 200_000,
                memory_mb: 96,
            },
            ProfileKind::Io => WorkloadProfile {
                kind,
                compute_s: 0.0,
                io_s: 0.10,
                request_bytes: 64_000,
                response_bytes: 64_000,
                memory_mb: 64,
            },
        }
    }
}

/// The three base profiles a run resolves requests against. Starts from
/// the built-in demands; individual fields can be overridden by config.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileSet {
    pub matmult: WorkloadProfile,
    pub image: WorkloadProfile,
    pub io: WorkloadProfile,
}

impl Default for ProfileSet {
    fn default() -> Self {
        ProfileSet {
            matmult: WorkloadProfile::builtin(ProfileKind::MatMult),
            image: WorkloadProfile::builtin(ProfileKind::Image),
            io: WorkloadProfile::builtin(ProfileKind::Io),
        }
    }
}

impl ProfileSet {
    pub fn get(&self, kind: ProfileKind) -> WorkloadProfile {
        match kind {
            ProfileKind::MatMult => self.matmult,
            ProfileKind::Image => self.image,
            ProfileKind::Io => self.io,
        }
    }

    pub fn get_mut(&mut self, kind: ProfileKind) -> &mut WorkloadProfile {
        match kind {
            ProfileKind::MatMult => &mut self.matmult,
            ProfileKind::Image => &mut self.image,
            ProfileKind::Io => &mut self.io,
        }
    }
}

/// Low rate held, linear ramp, high rate held, then silence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RampSchedule {
    pub low_rate: f64,
    pub high_rate: f64,
    pub warm_s: f64,
    pub ramp_s: f64,
    pub hold_s: f64,
}

impl Default for RampSchedule {
    fn default() -> Self {
        RampSchedule {
            low_rate: 2.0,
            high_rate: 20.0,
            warm_s: 60.0,
            ramp_s: 60.0,
            hold_s: 120.0,
        }
    }
}

impl RampSchedule {
    /// When arrivals stop.
    pub fn end(&self) -> f64 {
        self.warm_s + self.ramp_s + self.hold_s
    }

    /// Instantaneous arrival rate in requests/s.
    pub fn rate_at(&self, t: f64) -> f64 {
        if t < 0.0 || t >= self.end() {
            0.0
        } else if t < self.warm_s {
            self.low_rate
        } else if t < self.warm_s + self.ramp_s {
            let frac = (t - self.warm_s) / self.ramp_s;
            self.low_rate + (self.high_rate - self.low_rate) * frac
        } else {
            self.high_rate
        }
    }

    fn peak_rate(&self) -> f64 {
        self.low_rate.max(self.high_rate)
    }
}

/// Non-homogeneous Poisson arrivals by thinning: propose at the peak rate,
/// accept with probability rate(t)/peak. Deterministic under its seed.
pub struct ArrivalProcess {
    pub schedule: RampSchedule,
    rng: ChaCha8Rng,
    now: f64,
}

impl ArrivalProcess {
    pub fn new(schedule: RampSchedule, rng: ChaCha8Rng) -> Self {
        assert!(schedule.low_rate > 0.0 && schedule.high_rate > 0.0);
        ArrivalProcess {
            schedule,
            rng,
            now: 0.0,
        }
    }

    /// Next arrival timestamp, or None once the schedule has ended.
    pub fn next_arrival(&mut self) -> Option<f64> {
        let peak = self.schedule.peak_rate();
        loop {
            let u: f64 = self.rng.gen();
            self.now += -(1.0 - u).ln() / peak;
            if self.now >= self.schedule.end() {
                return None;
            }
            let accept: f64 = self.rng.gen();
            if accept * peak < self.schedule.rate_at(self.now) {
                return Some(self.now);
            }
        }
    }
}

/// Picks the base profile a request runs as. Only `mixed` consumes
/// randomness; keeping the draw isolated here keeps the per-run RNG
/// streams aligned across splits.
pub fn resolve_profile(workload: WorkloadKind, rng: &mut ChaCha8Rng) -> ProfileKind {
    match workload {
        WorkloadKind::MatMult => ProfileKind::MatMult,
        WorkloadKind::Image => ProfileKind::Image,
        WorkloadKind::Io => ProfileKind::Io,
        WorkloadKind::Mixed => ProfileKind::ALL[rng.gen_range(0..3)],
    }
}

/// One function invocation travelling through the system.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: RequestId,
    pub function_id: FunctionId,
    pub arrival_time: f64,
    pub profile: WorkloadProfile,
    pub request_bytes: u64,
    pub response_bytes: u64,
}

impl Request {
    pub fn new(
        id: RequestId,
        function_id: FunctionId,
        arrival_time: f64,
        profile: WorkloadProfile,
    ) -> Self {
        Request {
            id,
            function_id,
            arrival_time,
            profile,
            request_bytes: profile.request_bytes,
            response_bytes: profile.response_bytes,
        }
    }
}
