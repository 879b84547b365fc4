//! Monte-Carlo batches of independent missions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SCHEMA_VERSION};
use super::metrics::{HeatMap, Stats};
use super::mission::{run_mission, MissionRecord, ViolationKind};
use crate::error::{ConfigError, HarnessError};
use crate::planner::{DecisionOutcome, PlannerKind};
use crate::rng::trial_seed;

pub const HEATMAP_BIN_M: f64 = 10.0;

/// Per-trial metrics, one row of the batch table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial: usize,
    pub seed: u64,
    pub rms_m: f64,
    pub mean_sigma_m: f64,
    pub flight_time_s: f64,
    pub all_localized: bool,
    pub steps: u64,
    pub decisions: usize,
    pub escapes: usize,
    pub fallbacks: usize,
    pub audit_failures: usize,
    pub divergence_steps: usize,
    /// Wall-clock; excluded from determinism comparisons.
    pub planning_time: Option<Stats>,
}

/// Gate check over every decision of the batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct VoidAudit {
    pub decisions: usize,
    /// Decisions that went through the void gate: neither hover fallbacks
    /// nor radial escapes, which are exempt.
    pub gated: usize,
    /// Gated decisions whose trajectory void probability met the bound.
    pub satisfied: usize,
    pub escapes: usize,
    pub fallbacks: usize,
    pub failures: usize,
}

impl VoidAudit {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McSummary {
    pub schema_version: u32,
    pub planner: PlannerKind,
    pub trials: usize,
    pub master_seed: u64,
    pub rms_m: Stats,
    pub mean_sigma_m: Stats,
    pub flight_time_s: Stats,
    pub localized_fraction: f64,
    /// Wall-clock over all decisions; excluded from determinism comparisons.
    pub planning_time: Option<Stats>,
    pub void_audit: VoidAudit,
    pub heatmap: HeatMap,
    pub per_trial: Vec<TrialMetrics>,
    pub config: ScenarioConfig,
}

/// Config of trial `trial`: the batch config with a derived seed.
pub fn trial_config(cfg: &ScenarioConfig, trial: usize) -> ScenarioConfig {
    ScenarioConfig {
        seed: trial_seed(cfg.seed, trial),
        ..cfg.clone()
    }
}

/// Runs `trials` missions on a pool of `parallelism` threads. Records come
/// back in trial order whatever the pool size.
pub fn run_trials(cfg: &ScenarioConfig, trials: usize, parallelism: usize) -> Result<Vec<MissionRecord>, HarnessError> {
    if trials == 0 {
        return Err(ConfigError::invalid("trials", "must be >= 1").into());
    }
    if parallelism == 0 {
        return Err(ConfigError::invalid("parallel", "must be >= 1").into());
    }
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(parallelism).build()?;
    pool.install(|| {
        (0..trials)
            .into_par_iter()
            .map(|t| run_mission(&trial_config(cfg, t)))
            .collect()
    })
}

fn trial_metrics(trial: usize, rec: &MissionRecord) -> TrialMetrics {
    let s = &rec.summary;
    let count = |kind| s.violations.iter().filter(|v| v.kind == kind).count();
    TrialMetrics {
        trial,
        seed: rec.seed,
        rms_m: s.rms_m,
        mean_sigma_m: s.mean_sigma_m,
        flight_time_s: s.flight_time_s,
        all_localized: s.all_localized,
        steps: s.steps,
        decisions: s.decisions,
        escapes: count(ViolationKind::Escape),
        fallbacks: count(ViolationKind::Fallback),
        audit_failures: s.audit_failures,
        divergence_steps: s.divergence_steps,
        planning_time: s.planning_time,
    }
}

/// Aggregates finished trials. `records` must be non-empty and in trial order.
pub fn summarize(cfg: &ScenarioConfig, records: &[MissionRecord]) -> McSummary {
    assert!(!records.is_empty(), "no trials to summarize");
    let per_trial: Vec<TrialMetrics> = records.iter().enumerate().map(|(t, r)| trial_metrics(t, r)).collect();
    let stat = |f: fn(&TrialMetrics) -> f64| {
        let v: Vec<f64> = per_trial.iter().map(f).collect();
        Stats::from_values(&v).expect("non-empty")
    };

    let mut heatmap = HeatMap::new(&cfg.area, HEATMAP_BIN_M);
    let mut audit = VoidAudit::default();
    let mut times = Vec::new();
    for rec in records {
        for p in rec.uav_positions() {
            heatmap.add(p[0], p[1]);
        }
        for d in &rec.decisions {
            audit.decisions += 1;
            times.push(d.planning_time_s);
            match d.outcome {
                DecisionOutcome::Fallback => audit.fallbacks += 1,
                DecisionOutcome::Escape => audit.escapes += 1,
                DecisionOutcome::Selected => {}
            }
            if d.outcome == DecisionOutcome::Selected {
                audit.gated += 1;
                if d.void_prob >= cfg.void.b_min {
                    audit.satisfied += 1;
                }
            }
            if d.verified == Some(false) {
                audit.failures += 1;
            }
        }
    }
    let localized = per_trial.iter().filter(|t| t.all_localized).count();

    McSummary {
        schema_version: SCHEMA_VERSION,
        planner: cfg.planner,
        trials: records.len(),
        master_seed: cfg.seed,
        rms_m: stat(|t| t.rms_m),
        mean_sigma_m: stat(|t| t.mean_sigma_m),
        flight_time_s: stat(|t| t.flight_time_s),
        localized_fraction: localized as f64 / records.len() as f64,
        planning_time: Stats::from_values(&times),
        void_audit: audit,
        heatmap,
        per_trial,
        config: cfg.clone(),
    }
}

pub fn run_montecarlo(cfg: &ScenarioConfig, trials: usize, parallelism: usize) -> Result<McSummary, HarnessError> {
    let records = run_trials(cfg, trials, parallelism)?;
    Ok(summarize(cfg, &records))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::TagPlacement;
    use crate::tracker::TrackerConfig;
    use crate::world::Area;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            area: Area::square(400.0),
            tag_count: 2,
            tags: TagPlacement::default(),
            max_flight_time: 66.0,
            tracker: TrackerConfig {
                particle_count: 300,
                ..Default::default()
            },
            seed: 11,
            ..Default::default()
        }
    }

    fn without_timing(mut s: McSummary) -> McSummary {
        s.planning_time = None;
        for t in &mut s.per_trial {
            t.planning_time = None;
        }
        s
    }

    #[test]
    fn single_trial_matches_its_mission() {
        let cfg = small();
        let s = run_montecarlo(&cfg, 1, 1).unwrap();
        let rec = run_mission(&trial_config(&cfg, 0)).unwrap();
        assert_eq!(s.rms_m.mean, rec.summary.rms_m);
        assert_eq!(s.rms_m.median, rec.summary.rms_m);
        assert_eq!(s.flight_time_s.mean, rec.summary.flight_time_s);
        assert_eq!(s.heatmap.total(), rec.rows.len() as u64);
    }

    #[test]
    fn parallelism_does_not_change_results() {
        let cfg = small();
        let a = without_timing(run_montecarlo(&cfg, 4, 1).unwrap());
        let b = without_timing(run_montecarlo(&cfg, 4, 3).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn heatmap_counts_every_pose() {
        let cfg = small();
        let records = run_trials(&cfg, 3, 2).unwrap();
        let s = summarize(&cfg, &records);
        let poses: usize = records.iter().map(|r| r.rows.len()).sum();
        assert_eq!(s.heatmap.total(), poses as u64);
    }

    #[test]
    fn zero_trials_is_a_config_error() {
        assert!(matches!(run_montecarlo(&small(), 0, 1), Err(HarnessError::Config(_))));
    }
}
