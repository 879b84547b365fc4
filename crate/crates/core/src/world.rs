//! Scenario state: observer kinematics with waypoint rollout, and random-walk
//! target dynamics.
//!
//! The observer flies at a fixed altitude. A control action is a 2D waypoint;
//! the flight towards it follows a trapezoidal speed profile (accelerate,
//! cruise at `max_speed`, brake to a stop on the waypoint) integrated with a
//! small explicit Euler step and sampled once per measurement period.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

/// Axis-aligned mission rectangle, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Self {
        Self {
            x_min,
            x_max,
            y_min,
            y_max,
        }
    }

    /// `[0, side] x [0, side]`.
    pub fn square(side: f64) -> Self {
        Self::new(0.0, side, 0.0, side)
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn center(&self) -> [f64; 2] {
        [
            0.5 * (self.x_min + self.x_max),
            0.5 * (self.y_min + self.y_max),
        ]
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min && x <= self.x_max && y >= self.y_min && y <= self.y_max
    }

    pub fn clamp(&self, p: [f64; 2]) -> [f64; 2] {
        [
            p[0].clamp(self.x_min, self.x_max),
            p[1].clamp(self.y_min, self.y_max),
        ]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [self.x_min, self.x_max, self.y_min, self.y_max]
            .iter()
            .all(|v| v.is_finite());
        if !finite || self.x_max <= self.x_min || self.y_max <= self.y_min {
            return Err(ConfigError::invalid("area", "must be a non-empty finite rectangle"));
        }
        Ok(())
    }
}

impl Default for Area {
    fn default() -> Self {
        Self::square(1000.0)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(angle: f64) -> f64 {
    let a = angle.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Observer pose plus current ground speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UavState {
    /// x, y and altitude above ground, meters.
    pub position: [f64; 3],
    /// Radians in `[0, 2π)`, measured counter-clockwise from +x.
    pub heading: f64,
    /// m/s
    pub speed: f64,
}

impl UavState {
    /// Hovering pose.
    pub fn new(position: [f64; 3], heading: f64) -> Self {
        Self {
            position,
            heading: normalize_angle(heading),
            speed: 0.0,
        }
    }

    pub fn xy(&self) -> [f64; 2] {
        [self.position[0], self.position[1]]
    }

    pub fn hovering(&self) -> Self {
        Self {
            speed: 0.0,
            ..*self
        }
    }
}

/// Ground-truth state of one radio tag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectState {
    pub tag_id: usize,
    pub position: [f64; 3],
}

impl ObjectState {
    pub fn new(tag_id: usize, position: [f64; 3]) -> Self {
        Self { tag_id, position }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UavKinematics {
    /// m/s
    pub max_speed: f64,
    /// Symmetric acceleration and braking magnitude, m/s².
    pub accel: f64,
    /// Flight altitude above ground, meters.
    pub altitude: f64,
    /// Euler step, seconds.
    pub integration_dt: f64,
}

impl Default for UavKinematics {
    fn default() -> Self {
        Self {
            max_speed: 5.0,
            accel: 2.5,
            altitude: 30.0,
            integration_dt: 1e-3,
        }
    }
}

impl UavKinematics {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.max_speed > 0.0 && self.max_speed.is_finite()) {
            return Err(ConfigError::invalid("kinematics.max_speed", "must be > 0"));
        }
        if !(self.accel > 0.0) {
            return Err(ConfigError::invalid("kinematics.accel", "must be > 0"));
        }
        if !(self.integration_dt > 0.0 && self.integration_dt <= 0.01) {
            return Err(ConfigError::invalid(
                "kinematics.integration_dt",
                "must be in (0, 0.01] seconds",
            ));
        }
        if !self.altitude.is_finite() {
            return Err(ConfigError::invalid("kinematics.altitude", "must be finite"));
        }
        Ok(())
    }
}

/// Random-walk model: each period a target moves by a zero-mean Gaussian
/// displacement with diagonal covariance `process_noise` (m²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TargetDynamics {
    pub process_noise: [f64; 3],
    /// Step period T0, seconds.
    pub period: f64,
}

impl Default for TargetDynamics {
    fn default() -> Self {
        Self {
            process_noise: [1.0, 1.0, 0.0],
            period: 1.0,
        }
    }
}

impl TargetDynamics {
    pub fn stationary(period: f64) -> Self {
        Self {
            process_noise: [0.0; 3],
            period,
        }
    }

    pub fn std_devs(&self) -> [f64; 3] {
        self.process_noise.map(f64::sqrt)
    }

    pub fn validate(&self, field: &'static str) -> Result<(), ConfigError> {
        if self.process_noise.iter().any(|q| !(*q >= 0.0 && q.is_finite())) {
            return Err(ConfigError::invalid(field, "process noise entries must be >= 0"));
        }
        if self.process_noise[2] != 0.0 {
            return Err(ConfigError::invalid(field, "z-axis process noise must be 0"));
        }
        if !(self.period > 0.0) {
            return Err(ConfigError::invalid(field, "period must be > 0"));
        }
        Ok(())
    }
}

/// Adds one random-walk displacement to `position` in place. Axes with zero
/// deviation draw nothing, so the z coordinate never moves.
pub(crate) fn jitter_position<R: Rng + ?Sized>(
    position: &mut [f64; 3],
    std_devs: &[f64; 3],
    area: &Area,
    rng: &mut R,
) {
    for (coord, sd) in position.iter_mut().zip(std_devs) {
        if *sd > 0.0 {
            let n: f64 = rng.sample(StandardNormal);
            *coord += sd * n;
        }
    }
    position[0] = position[0].clamp(area.x_min, area.x_max);
    position[1] = position[1].clamp(area.y_min, area.y_max);
}

/// One random-walk step of a target, clamped to the mission area.
pub fn target_step<R: Rng + ?Sized>(
    state: &ObjectState,
    dynamics: &TargetDynamics,
    area: &Area,
    rng: &mut R,
) -> ObjectState {
    let mut next = *state;
    jitter_position(&mut next.position, &dynamics.std_devs(), area, rng);
    next
}

/// Flies from `current` towards `waypoint` for `horizon` periods and returns
/// the pose at the end of each period.
///
/// The waypoint is first clamped to `area`. Speed along the straight path is
/// raised by at most `accel·dt` per Euler step, capped by `max_speed` and by
/// the braking envelope `sqrt(2·accel·remaining)`, so the observer stops on
/// the waypoint without overshoot. Any velocity component not aligned with
/// the new path is discarded (the airframe re-aims on the spot).
pub fn uav_rollout(
    current: &UavState,
    waypoint: [f64; 2],
    kin: &UavKinematics,
    area: &Area,
    horizon: usize,
    period: f64,
) -> Vec<UavState> {
    let target = area.clamp(waypoint);
    let start = current.xy();
    let dx = target[0] - start[0];
    let dy = target[1] - start[1];
    let total = dx.hypot(dy);
    if total == 0.0 {
        return vec![current.hovering(); horizon];
    }
    let dir = [dx / total, dy / total];
    let heading = normalize_angle(dy.atan2(dx));

    let substeps = ((period / kin.integration_dt).round() as usize).max(1);
    let dt = period / substeps as f64;

    let mut travelled = 0.0_f64;
    let mut speed = current.speed.clamp(0.0, kin.max_speed);
    let mut poses = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        for _ in 0..substeps {
            if travelled >= total {
                break;
            }
            let brake = (2.0 * kin.accel * (total - travelled)).sqrt();
            speed = (speed + kin.accel * dt).min(kin.max_speed).min(brake);
            travelled = (travelled + speed * dt).min(total);
        }
        if travelled >= total {
            travelled = total;
            speed = 0.0;
        }
        let position = if travelled == total {
            [target[0], target[1], current.position[2]]
        } else {
            [
                start[0] + dir[0] * travelled,
                start[1] + dir[1] * travelled,
                current.position[2],
            ]
        };
        poses.push(UavState {
            position,
            heading,
            speed,
        });
    }
    poses
}
