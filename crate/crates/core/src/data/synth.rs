use chrono::{NaiveDate, NaiveDateTime};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::roadgraph::DirectedRoadGraph;

use super::{DataError, SpeedMatrix};

const MAX_CLIPPING_RATE: f64 = 0.01;

/// A Gaussian dip in the daily profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Peak {
    pub center_hour: f64,
    pub width_hours: f64,
    pub depth: f64,
}

/// Base speed over one day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    /// Free-flow speed minus rush-hour dips. Hours wrap around midnight.
    Peaks { free_flow: f64, peaks: Vec<Peak> },
    /// One value per interval.
    Table { values: Vec<f64> },
}

impl ProfileSpec {
    pub fn values(&self, intervals_per_day: usize) -> Vec<f64> {
        match self {
            ProfileSpec::Table { values } => values.clone(),
            ProfileSpec::Peaks { free_flow, peaks } => (0..intervals_per_day)
                .map(|t| {
                    let hour = 24.0 * t as f64 / intervals_per_day as f64;
                    let dip: f64 = peaks
                        .iter()
                        .map(|p| {
                            let d = (hour - p.center_hour).rem_euclid(24.0);
                            let d = d.min(24.0 - d) / p.width_hours;
                            p.depth * (-0.5 * d * d).exp()
                        })
                        .sum();
                    free_flow - dip
                })
                .collect(),
        }
    }
}

/// AR(1) noise `e_t = phi e_{t-1} + sigma z_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub phi: f64,
    pub sigma: f64,
}

/// Subtracts `depth` from every listed segment for `duration` intervals
/// starting at absolute interval `start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CongestionEvent {
    pub segments: Vec<usize>,
    pub start: usize,
    pub duration: usize,
    pub depth: f64,
}

/// Events drawn from the seed. Each hits one segment and its upstream
/// (in-neighbour) segments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomEvents {
    pub count: usize,
    pub min_duration: usize,
    pub max_duration: usize,
    pub min_depth: f64,
    pub max_depth: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    #[serde(default = "spec_version")]
    pub version: u32,
    pub seed: u64,
    pub segment_count: usize,
    pub days: usize,
    pub intervals_per_day: usize,
    #[serde(default = "default_start")]
    pub start: NaiveDateTime,
    pub profile: ProfileSpec,
    /// Each segment's profile is shifted by a constant drawn uniformly from
    /// `±segment_offset`.
    #[serde(default)]
    pub segment_offset: f64,
    #[serde(default)]
    pub spatial_coupling: f64,
    pub noise: NoiseSpec,
    /// Per-segment noise overriding `noise`; empty or one entry per segment.
    #[serde(default)]
    pub segment_noise: Vec<NoiseSpec>,
    #[serde(default)]
    pub events: Vec<CongestionEvent>,
    #[serde(default)]
    pub random_events: Option<RandomEvents>,
}

pub const SPEC_VERSION: u32 = 1;

fn spec_version() -> u32 {
    SPEC_VERSION
}

fn default_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

fn bad(field: &'static str, message: impl Into<String>) -> DataError {
    DataError::Spec {
        field,
        message: message.into(),
    }
}

impl SyntheticSpec {
    pub fn interval_minutes(&self) -> u32 {
        (1440 / self.intervals_per_day.max(1)) as u32
    }

    pub fn interval_count(&self) -> usize {
        self.days * self.intervals_per_day
    }

    pub fn from_toml(text: &str) -> Result<Self, DataError> {
        let spec: Self = toml::from_str(text).map_err(|e| DataError::Format(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.version != SPEC_VERSION {
            return Err(bad("version", format!("unsupported version {}", self.version)));
        }
        if self.segment_count == 0 {
            return Err(bad("segment_count", "must be positive"));
        }
        if self.days == 0 {
            return Err(bad("days", "must be positive"));
        }
        if self.intervals_per_day == 0 || 1440 % self.intervals_per_day != 0 {
            return Err(bad("intervals_per_day", "must divide 1440"));
        }
        let profile = self.profile.values(self.intervals_per_day);
        if profile.len() != self.intervals_per_day {
            return Err(bad(
                "profile",
                format!("table has {} values, expected {}", profile.len(), self.intervals_per_day),
            ));
        }
        if let ProfileSpec::Peaks { peaks, .. } = &self.profile {
            if peaks.iter().any(|p| !(p.width_hours > 0.0)) {
                return Err(bad("profile", "peak widths must be positive"));
            }
        }
        if profile.iter().any(|v| !v.is_finite()) {
            return Err(bad("profile", "values must be finite"));
        }
        if !(self.segment_offset.is_finite() && self.segment_offset >= 0.0) {
            return Err(bad("segment_offset", "must be finite and non-negative"));
        }
        if !(self.spatial_coupling.abs() < 1.0) {
            return Err(bad("spatial_coupling", "must lie in (-1, 1)"));
        }
        if !self.segment_noise.is_empty() && self.segment_noise.len() != self.segment_count {
            return Err(bad("segment_noise", "needs one entry per segment"));
        }
        for n in std::iter::once(&self.noise).chain(&self.segment_noise) {
            if !(n.phi.abs() < 1.0) {
                return Err(bad("noise", format!("|phi| = {} must be below 1", n.phi.abs())));
            }
            if !(n.sigma.is_finite() && n.sigma >= 0.0) {
                return Err(bad("noise", "sigma must be finite and non-negative"));
            }
        }
        let mut max_depth = 0.0f64;
        for e in &self.events {
            if e.segments.iter().any(|&s| s >= self.segment_count) {
                return Err(bad("events", "segment index out of range"));
            }
            if !(e.depth.is_finite() && e.depth >= 0.0) {
                return Err(bad("events", "depth must be finite and non-negative"));
            }
            max_depth = max_depth.max(e.depth);
        }
        if let Some(r) = &self.random_events {
            if r.min_duration == 0 || r.min_duration > r.max_duration || r.max_duration > self.interval_count() {
                return Err(bad("random_events", "need 1 <= min_duration <= max_duration <= intervals"));
            }
            if !(r.min_depth >= 0.0 && r.min_depth <= r.max_depth && r.max_depth.is_finite()) {
                return Err(bad("random_events", "need 0 <= min_depth <= max_depth"));
            }
            max_depth = max_depth.max(r.max_depth);
        }
        let lowest = profile.iter().copied().fold(f64::INFINITY, f64::min) - self.segment_offset;
        if lowest <= max_depth {
            return Err(bad(
                "profile",
                format!("lowest base speed {lowest} does not exceed congestion depth {max_depth}"),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOutput {
    pub matrix: SpeedMatrix,
    pub clipped_cells: usize,
    pub clipping_rate: f64,
    /// Per-segment base speed offsets.
    pub offsets: Vec<f64>,
    /// Explicit plus drawn events.
    pub events: Vec<CongestionEvent>,
}

/// Simulates speeds on `graph`, one row per node, with segment ids `0..N`
/// matching the node ids of an edge list.
///
/// `speed(i, t) = base_i(t) + coupling * mean_j (speed(j, t-1) - base_j(t-1))
/// + noise_i(t) - congestion_i(t)` where `j` runs over in-neighbours of `i`.
pub fn generate_synthetic(spec: &SyntheticSpec, graph: &DirectedRoadGraph) -> Result<SyntheticOutput, DataError> {
    spec.validate()?;
    let n = spec.segment_count;
    if graph.node_count() != n {
        return Err(bad(
            "segment_count",
            format!("{n} segments but the graph has {} nodes", graph.node_count()),
        ));
    }
    let per_day = spec.intervals_per_day;
    let total = spec.interval_count();
    let profile = spec.profile.values(per_day);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);

    let offsets: Vec<f64> = (0..n)
        .map(|_| {
            if spec.segment_offset > 0.0 {
                rng.random_range(-spec.segment_offset..=spec.segment_offset)
            } else {
                0.0
            }
        })
        .collect();

    let mut events = spec.events.clone();
    if let Some(r) = &spec.random_events {
        for _ in 0..r.count {
            let duration = rng.random_range(r.min_duration..=r.max_duration);
            let start = rng.random_range(0..=total - duration);
            let depth = rng.random_range(r.min_depth..=r.max_depth);
            let center = rng.random_range(0..n);
            let mut segments = vec![center];
            segments.extend_from_slice(graph.in_neighbors(center));
            events.push(CongestionEvent {
                segments,
                start,
                duration,
                depth,
            });
        }
    }
    let mut congestion = Array2::<f64>::zeros((n, total));
    for e in &events {
        for &s in &e.segments {
            for t in e.start..(e.start + e.duration).min(total) {
                congestion[[s, t]] = congestion[[s, t]].max(e.depth);
            }
        }
    }

    let noise: Vec<NoiseSpec> = if spec.segment_noise.is_empty() {
        vec![spec.noise; n]
    } else {
        spec.segment_noise.clone()
    };
    // Start the noise in its stationary distribution.
    let mut state: Vec<f64> = noise
        .iter()
        .map(|ns| {
            let z: f64 = rng.sample(StandardNormal);
            ns.sigma / (1.0 - ns.phi * ns.phi).sqrt() * z
        })
        .collect();

    let mut values = Array2::<f64>::zeros((n, total));
    let mut clipped = 0;
    let mut deviation = vec![0.0; n];
    for t in 0..total {
        let mut next_dev = vec![0.0; n];
        for i in 0..n {
            let z: f64 = rng.sample(StandardNormal);
            if t > 0 {
                state[i] = noise[i].phi * state[i] + noise[i].sigma * z;
            }
            let upstream = graph.in_neighbors(i);
            let coupled = if upstream.is_empty() {
                0.0
            } else {
                upstream.iter().map(|&j| deviation[j]).sum::<f64>() / upstream.len() as f64
            };
            let base = profile[t % per_day] + offsets[i];
            let mut v = base + spec.spatial_coupling * coupled + state[i] - congestion[[i, t]];
            if v < 0.0 {
                v = 0.0;
                clipped += 1;
            }
            next_dev[i] = v - base;
            values[[i, t]] = v;
        }
        deviation = next_dev;
    }

    let rate = clipped as f64 / (n * total) as f64;
    if rate > MAX_CLIPPING_RATE {
        return Err(DataError::Clipping { rate });
    }
    if clipped > 0 {
        log::warn!("{clipped} synthetic cells clipped at zero");
    }
    let ids = (0..n).map(|i| i.to_string()).collect();
    let matrix = SpeedMatrix::new(values, spec.interval_minutes(), spec.start, ids)?;
    Ok(SyntheticOutput {
        matrix,
        clipped_cells: clipped,
        clipping_rate: rate,
        offsets,
        events,
    })
}
