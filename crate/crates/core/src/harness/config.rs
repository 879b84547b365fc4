//! Scenario configuration, read from JSON. Every field has a default, so an
//! empty object `{}` is the stock 10-tag, 1 km² scenario.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, HarnessError};
use crate::planner::{PlannerKind, VoidConfig};
use crate::rf::PropagationConfig;
use crate::rng::{stream_rng, Stream};
use crate::tracker::TrackerConfig;
use crate::world::{Area, ObjectState, TargetDynamics, UavKinematics, UavState};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RandomMarker {
    Random,
}

/// Initial tag positions: `"random"` or an explicit list of `[x, y]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TagPlacement {
    Random(RandomMarker),
    Fixed(Vec<[f64; 2]>),
}

impl Default for TagPlacement {
    fn default() -> Self {
        TagPlacement::Random(RandomMarker::Random)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StartPose {
    pub x: f64,
    pub y: f64,
    /// Radians.
    pub heading: f64,
}

impl Default for StartPose {
    fn default() -> Self {
        Self {
            x: 0.0,
            y: 0.0,
            heading: std::f64::consts::FRAC_PI_4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub area: Area,
    pub tag_count: usize,
    pub tags: TagPlacement,
    /// Carrier per tag; empty means 150.0, 150.1, ... MHz.
    pub tag_frequencies_mhz: Vec<f64>,
    /// Tag height above ground, meters.
    pub tag_height: f64,
    /// Random tags are never placed closer than this to the start pose.
    pub min_start_distance: f64,
    pub uav_start: StartPose,
    /// Seconds.
    pub max_flight_time: f64,
    pub kinematics: UavKinematics,
    pub void: VoidConfig,
    pub tracker: TrackerConfig,
    pub propagation: PropagationConfig,
    /// True tag motion.
    pub target_dynamics: TargetDynamics,
    /// Motion model assumed by the filter; defaults to `target_dynamics`.
    pub filter_dynamics: Option<TargetDynamics>,
    pub planner: PlannerKind,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            area: Area::default(),
            tag_count: 10,
            tags: TagPlacement::default(),
            tag_frequencies_mhz: Vec::new(),
            tag_height: 1.0,
            min_start_distance: 150.0,
            uav_start: StartPose::default(),
            max_flight_time: 3000.0,
            kinematics: UavKinematics::default(),
            void: VoidConfig::default(),
            tracker: TrackerConfig::default(),
            propagation: PropagationConfig::default(),
            target_dynamics: TargetDynamics::default(),
            filter_dynamics: None,
            planner: PlannerKind::default(),
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Ok(Self::from_json(&text)?)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::invalid(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, got {}", self.schema_version),
            ));
        }
        self.area.validate()?;
        if self.tag_count == 0 {
            return Err(ConfigError::invalid("tag_count", "must be >= 1"));
        }
        if let TagPlacement::Fixed(points) = &self.tags {
            if points.len() != self.tag_count {
                return Err(ConfigError::invalid(
                    "tags",
                    format!("{} positions for {} tags", points.len(), self.tag_count),
                ));
            }
            if points.iter().any(|p| !self.area.contains(p[0], p[1])) {
                return Err(ConfigError::invalid("tags", "positions must lie inside the area"));
            }
        }
        if !self.tag_frequencies_mhz.is_empty() {
            if self.tag_frequencies_mhz.len() != self.tag_count {
                return Err(ConfigError::invalid("tag_frequencies_mhz", "one frequency per tag"));
            }
            if self.tag_frequencies_mhz.iter().any(|f| !(*f > 0.0)) {
                return Err(ConfigError::invalid("tag_frequencies_mhz", "must be > 0"));
            }
        }
        if !self.area.contains(self.uav_start.x, self.uav_start.y) {
            return Err(ConfigError::invalid("uav_start", "must lie inside the area"));
        }
        if !(self.max_flight_time >= 0.0 && self.max_flight_time.is_finite()) {
            return Err(ConfigError::invalid("max_flight_time", "must be finite and >= 0"));
        }
        if !(self.min_start_distance >= 0.0) {
            return Err(ConfigError::invalid("min_start_distance", "must be >= 0"));
        }
        self.kinematics.validate()?;
        self.void.validate()?;
        self.tracker.validate()?;
        self.propagation.validate()?;
        self.planner.validate()?;
        self.target_dynamics.validate("target_dynamics")?;
        self.filter_dynamics().validate("filter_dynamics")?;
        let periods = [self.target_dynamics.period, self.filter_dynamics().period];
        if periods.iter().any(|p| *p != self.void.period) {
            return Err(ConfigError::invalid(
                "void.period",
                "target, filter and planner periods must agree",
            ));
        }
        if let TagPlacement::Random(_) = self.tags {
            let [cx, cy] = [self.uav_start.x, self.uav_start.y];
            let corners = [
                [self.area.x_min, self.area.y_min],
                [self.area.x_min, self.area.y_max],
                [self.area.x_max, self.area.y_min],
                [self.area.x_max, self.area.y_max],
            ];
            let farthest = corners
                .iter()
                .map(|c| (c[0] - cx).hypot(c[1] - cy))
                .fold(0.0, f64::max);
            if farthest <= self.min_start_distance {
                return Err(ConfigError::invalid(
                    "min_start_distance",
                    "no room for random tags outside the start exclusion zone",
                ));
            }
        }
        Ok(())
    }

    pub fn filter_dynamics(&self) -> TargetDynamics {
        self.filter_dynamics.unwrap_or(self.target_dynamics)
    }

    /// Number of measurement periods in a full-length mission.
    pub fn max_steps(&self) -> u64 {
        (self.max_flight_time / self.void.period + 1e-9).floor() as u64
    }

    pub fn start_state(&self) -> UavState {
        UavState::new(
            [self.uav_start.x, self.uav_start.y, self.kinematics.altitude],
            self.uav_start.heading,
        )
    }

    /// Per-tag propagation constants with λ from each tag's carrier.
    pub fn tag_propagation(&self) -> Vec<PropagationConfig> {
        (0..self.tag_count)
            .map(|i| {
                let mhz = self
                    .tag_frequencies_mhz
                    .get(i)
                    .copied()
                    .unwrap_or(150.0 + 0.1 * (i % 21) as f64);
                self.propagation.with_frequency_mhz(mhz)
            })
            .collect()
    }

    /// Initial ground-truth tag states. Tag ids run from 1.
    pub fn initial_tags(&self) -> Vec<ObjectState> {
        match &self.tags {
            TagPlacement::Fixed(points) => points
                .iter()
                .enumerate()
                .map(|(i, p)| ObjectState::new(i + 1, [p[0], p[1], self.tag_height]))
                .collect(),
            TagPlacement::Random(_) => {
                let mut rng = stream_rng(self.seed, Stream::TagPlacement);
                let start = [self.uav_start.x, self.uav_start.y];
                (0..self.tag_count)
                    .map(|i| loop {
                        let x = rng.random_range(self.area.x_min..=self.area.x_max);
                        let y = rng.random_range(self.area.y_min..=self.area.y_max);
                        if (x - start[0]).hypot(y - start[1]) >= self.min_start_distance {
                            break ObjectState::new(i + 1, [x, y, self.tag_height]);
                        }
                    })
                    .collect()
            }
        }
    }
}
