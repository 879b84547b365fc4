//! Per-decision planning cost on a fixed belief snapshot.

use std::time::Instant;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::SCHEMA_VERSION;
use super::metrics::Stats;
use crate::error::ConfigError;
use crate::planner::{select_action, PlanContext, PlannerKind, VoidConfig};
use crate::rf::{likelihood_calls, reset_likelihood_calls, PropagationConfig};
use crate::rng::{stream_rng, Stream};
use crate::tracker::ObjectBelief;
use crate::world::{Area, UavKinematics, UavState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub particles: usize,
    pub tags: usize,
    pub actions: usize,
    pub horizon: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub area_side: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            particles: 10_000,
            tags: 10,
            actions: 12,
            horizon: 11,
            repetitions: 20,
            seed: 0,
            area_side: 1000.0,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.repetitions < 10 {
            return Err(ConfigError::invalid("reps", "must be >= 10"));
        }
        if self.particles == 0 || self.tags == 0 {
            return Err(ConfigError::invalid("particles", "particles and tags must be >= 1"));
        }
        if !(self.area_side > 0.0) {
            return Err(ConfigError::invalid("area_side", "must be > 0"));
        }
        self.void_config().validate()
    }

    fn void_config(&self) -> VoidConfig {
        VoidConfig {
            horizon: self.horizon,
            action_count: self.actions,
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub planner: PlannerKind,
    /// Seconds per decision.
    pub timing: Stats,
    /// Likelihood evaluations in one decision.
    pub likelihood_calls: u64,
    pub chosen: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub schema_version: u32,
    pub config: BenchConfig,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, name: &str) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.planner.strategy.name() == name)
    }
}

/// Mid-mission beliefs: each tag a Gaussian cloud of its own spread around a
/// random truth, none localized yet.
pub fn snapshot(cfg: &BenchConfig) -> Vec<ObjectBelief> {
    let mut rng = stream_rng(cfg.seed, Stream::Bench);
    let area = Area::square(cfg.area_side);
    (1..=cfg.tags)
        .map(|id| {
            let cx = rng.random_range(0.0..cfg.area_side);
            let cy = rng.random_range(0.0..cfg.area_side);
            let spread = rng.random_range(40.0..200.0);
            let noise = Normal::new(0.0, spread).expect("positive spread");
            let particles = (0..cfg.particles)
                .map(|_| {
                    let [x, y] = area.clamp([cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]);
                    [x, y, 1.0]
                })
                .collect();
            ObjectBelief::from_points(id, particles).expect("non-empty")
        })
        .collect()
}

/// Times one decision of each planner `repetitions` times on the same
/// snapshot. Likelihood calls are counted on this thread only.
pub fn bench_planners(cfg: &BenchConfig) -> Result<BenchReport, ConfigError> {
    cfg.validate()?;
    let beliefs = snapshot(cfg);
    let area = Area::square(cfg.area_side);
    let kinematics = UavKinematics::default();
    let void = cfg.void_config();
    let propagation: Vec<PropagationConfig> = (0..cfg.tags)
        .map(|i| PropagationConfig::default().with_frequency_mhz(150.0 + 0.1 * (i % 21) as f64))
        .collect();
    let c = area.center();
    let uav = UavState::new([c[0], c[1], kinematics.altitude], 0.0);
    let ctx = PlanContext {
        beliefs: &beliefs,
        propagation: &propagation,
        uav: &uav,
        kinematics: &kinematics,
        area: &area,
        void: &void,
    };

    let planners = [
        PlannerKind::lavapilot(true),
        PlannerKind::renyi(0.5, true),
        PlannerKind::shannon(true),
    ];
    let rows = planners
        .into_iter()
        .map(|planner| {
            let mut times = Vec::with_capacity(cfg.repetitions);
            let mut calls = 0;
            let mut chosen = String::new();
            for _ in 0..cfg.repetitions {
                reset_likelihood_calls();
                let started = Instant::now();
                let decision = select_action(&ctx, &planner);
                times.push(started.elapsed().as_secs_f64());
                calls = likelihood_calls();
                chosen = decision.map_or_else(|| "none".into(), |d| d.action.label.to_string());
            }
            BenchRow {
                planner,
                timing: Stats::from_values(&times).expect("repetitions >= 10"),
                likelihood_calls: calls,
                chosen,
            }
        })
        .collect();
    Ok(BenchReport {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        rows,
    })
}
