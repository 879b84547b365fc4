//! The closed simulate → measure → track → plan loop for one mission.

use std::collections::VecDeque;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{ScenarioConfig, SCHEMA_VERSION};
use super::metrics::{compute_rms, Stats};
use crate::error::HarnessError;
use crate::planner::{select_action, verify_proposition1, ActionLabel, DecisionOutcome, PlanContext, PlannerKind};
use crate::rf::sample_measurement;
use crate::rng::{stream_rng, Stream};
use crate::tracker::{ObjectBelief, UpdateOutcome};
use crate::world::{target_step, UavState};

/// Per-tag slice of one step row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagStep {
    pub truth: [f64; 3],
    pub rssi: f64,
    pub estimate: [f64; 3],
    pub sigma: f64,
    pub localized: bool,
    /// The update underflowed and the weights were reset.
    pub diverged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub k: u64,
    pub uav: UavState,
    pub tags: Vec<TagStep>,
    /// Wall-clock seconds, only on steps that ended with a planning decision.
    pub planning_time_s: Option<f64>,
    pub void_prob: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    /// Step after which the decision was taken; 0 is the pre-flight plan.
    pub k: u64,
    pub label: ActionLabel,
    pub outcome: DecisionOutcome,
    pub target_tag: Option<usize>,
    pub waypoint: [f64; 2],
    pub void_prob: f64,
    /// Safe-distance check; `None` when the void constraint is off.
    pub verified: Option<bool>,
    pub planning_time_s: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    /// Observer was inside a tag's void circle and left radially.
    Escape,
    /// No candidate met the bound; hovered in place.
    Fallback,
    /// A gated decision failed the safe-distance re-check.
    AuditFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViolationEvent {
    pub k: u64,
    pub kind: ViolationKind,
    pub void_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TagSummary {
    pub tag_id: usize,
    pub localized_at: Option<u64>,
    /// Estimate and truth at the localization step, or at the end.
    pub estimate: [f64; 3],
    pub truth: [f64; 3],
    pub error_m: f64,
    pub sigma_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSummary {
    pub steps: u64,
    pub all_localized: bool,
    pub flight_time_s: f64,
    pub rms_m: f64,
    pub mean_sigma_m: f64,
    pub tags: Vec<TagSummary>,
    pub decisions: usize,
    pub planning_time: Option<Stats>,
    pub violations: Vec<ViolationEvent>,
    pub audit_failures: usize,
    pub divergence_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionRecord {
    pub schema_version: u32,
    pub planner: PlannerKind,
    pub seed: u64,
    pub tag_count: usize,
    pub rows: Vec<StepRow>,
    pub decisions: Vec<DecisionRecord>,
    pub summary: MissionSummary,
}

impl MissionRecord {
    /// Observer positions for every step, in order.
    pub fn uav_positions(&self) -> impl Iterator<Item = [f64; 3]> + '_ {
        self.rows.iter().map(|r| r.uav.position)
    }
}

struct Planned {
    record: DecisionRecord,
    rollout: Vec<UavState>,
    violation: Option<ViolationEvent>,
}

fn decide(cfg: &ScenarioConfig, k: u64, ctx: &PlanContext<'_>) -> Option<Planned> {
    let started = Instant::now();
    let decision = select_action(ctx, &cfg.planner)?;
    let planning_time_s = started.elapsed().as_secs_f64();

    let verified = (cfg.planner.void_enabled && decision.outcome == DecisionOutcome::Selected)
        .then(|| verify_proposition1(&decision.action, ctx.beliefs, cfg.void.r_min, cfg.void.b_min));
    let action = &decision.action;
    let violation = match (decision.outcome, verified) {
        (_, Some(false)) => Some(ViolationKind::AuditFailure),
        (DecisionOutcome::Escape, _) => Some(ViolationKind::Escape),
        (DecisionOutcome::Fallback, _) if action.void_prob < cfg.void.b_min => Some(ViolationKind::Fallback),
        _ => None,
    }
    .map(|kind| ViolationEvent {
        k,
        kind,
        void_prob: action.void_prob,
    });
    Some(Planned {
        record: DecisionRecord {
            k,
            label: action.label,
            outcome: decision.outcome,
            target_tag: decision.target_tag,
            waypoint: action.waypoint,
            void_prob: action.void_prob,
            verified,
            planning_time_s,
        },
        rollout: decision.action.rollout,
        violation,
    })
}

/// Runs one mission to completion: every tag localized or the flight-time
/// budget exhausted.
pub fn run_mission(cfg: &ScenarioConfig) -> Result<MissionRecord, HarnessError> {
    cfg.validate()?;
    let n = cfg.tag_count;
    let propagation = cfg.tag_propagation();
    let filter_dynamics = cfg.filter_dynamics();
    let mut truths = cfg.initial_tags();
    let mut motion_rngs: Vec<_> = (1..=n).map(|id| stream_rng(cfg.seed, Stream::TargetMotion(id))).collect();
    let mut measure_rngs: Vec<_> = (1..=n).map(|id| stream_rng(cfg.seed, Stream::Measurement(id))).collect();
    let mut filter_rngs: Vec<_> = (1..=n).map(|id| stream_rng(cfg.seed, Stream::Filter(id))).collect();
    let mut beliefs: Vec<ObjectBelief> = filter_rngs
        .iter_mut()
        .enumerate()
        .map(|(i, rng)| ObjectBelief::uniform(i + 1, &cfg.area, cfg.tag_height, &cfg.tracker, rng))
        .collect();

    let mut uav = cfg.start_state();
    let mut plan: VecDeque<UavState> = VecDeque::new();
    let mut rows = Vec::new();
    let mut decisions = Vec::new();
    let mut violations = Vec::new();
    let mut divergence_steps = 0;
    let mut at_localization: Vec<Option<(u64, [f64; 3], [f64; 3], f64)>> = vec![None; n];
    let mut finished_at = None;
    let steps = cfg.max_steps();
    let horizon = cfg.void.horizon as u64;

    let plan_now = |k: u64,
                        uav: &UavState,
                        beliefs: &[ObjectBelief],
                        plan: &mut VecDeque<UavState>,
                        decisions: &mut Vec<DecisionRecord>,
                        violations: &mut Vec<ViolationEvent>| {
        let ctx = PlanContext {
            beliefs,
            propagation: &propagation,
            uav,
            kinematics: &cfg.kinematics,
            area: &cfg.area,
            void: &cfg.void,
        };
        let planned = decide(cfg, k, &ctx)?;
        *plan = planned.rollout.into();
        violations.extend(planned.violation);
        decisions.push(planned.record.clone());
        Some(planned.record)
    };

    if steps > 0 {
        plan_now(0, &uav, &beliefs, &mut plan, &mut decisions, &mut violations);
    }

    for k in 1..=steps {
        for (truth, rng) in truths.iter_mut().zip(&mut motion_rngs) {
            *truth = target_step(truth, &cfg.target_dynamics, &cfg.area, rng);
        }
        uav = plan.pop_front().unwrap_or_else(|| uav.hovering());

        let mut tags = Vec::with_capacity(n);
        for i in 0..n {
            let z = sample_measurement(&truths[i], &uav, &propagation[i], k, &mut measure_rngs[i])?;
            let belief = &mut beliefs[i];
            belief.predict(&filter_dynamics, &cfg.area, &mut filter_rngs[i]);
            let diverged = belief.update(&z, &uav, &propagation[i]) == UpdateOutcome::Diverged;
            belief.resample_if_needed(&cfg.tracker, &mut filter_rngs[i]);
            if diverged {
                divergence_steps += 1;
            }
            let estimate = belief.estimate();
            let sigma = belief.uncertainty();
            if belief.mark_localized(cfg.tracker.sigma_min) {
                at_localization[i] = Some((k, estimate, truths[i].position, sigma));
            }
            tags.push(TagStep {
                truth: truths[i].position,
                rssi: z.rssi,
                estimate,
                sigma,
                localized: belief.localized,
                diverged,
            });
        }

        let done = beliefs.iter().all(|b| b.localized);
        let mut row = StepRow {
            k,
            uav,
            tags,
            planning_time_s: None,
            void_prob: None,
        };
        if !done && k % horizon == 0 {
            if let Some(rec) = plan_now(k, &uav, &beliefs, &mut plan, &mut decisions, &mut violations) {
                row.planning_time_s = Some(rec.planning_time_s);
                row.void_prob = Some(rec.void_prob);
            }
        }
        rows.push(row);
        if done {
            finished_at = Some(k);
            break;
        }
    }

    let tags: Vec<TagSummary> = beliefs
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (localized_at, estimate, truth, sigma) = match at_localization[i] {
                Some((k, e, t, s)) => (Some(k), e, t, s),
                None => (None, b.estimate(), truths[i].position, b.uncertainty()),
            };
            TagSummary {
                tag_id: b.tag_id,
                localized_at,
                estimate,
                truth,
                error_m: compute_rms(&[estimate], &[truth]).unwrap_or(f64::NAN),
                sigma_m: sigma,
            }
        })
        .collect();
    let estimates: Vec<[f64; 3]> = tags.iter().map(|t| t.estimate).collect();
    let truth_at: Vec<[f64; 3]> = tags.iter().map(|t| t.truth).collect();
    let rms_m = compute_rms(&estimates, &truth_at).map_err(|e| HarnessError::Invariant(e.to_string()))?;
    let mean_sigma_m = tags.iter().map(|t| t.sigma_m).sum::<f64>() / n as f64;
    let times: Vec<f64> = decisions.iter().map(|d| d.planning_time_s).collect();
    let audit_failures = violations
        .iter()
        .filter(|v| v.kind == ViolationKind::AuditFailure)
        .count();

    let summary = MissionSummary {
        steps: rows.len() as u64,
        all_localized: finished_at.is_some(),
        flight_time_s: finished_at.map_or(cfg.max_flight_time, |k| k as f64 * cfg.void.period),
        rms_m,
        mean_sigma_m,
        tags,
        decisions: decisions.len(),
        planning_time: Stats::from_values(&times),
        violations,
        audit_failures,
        divergence_steps,
    };
    Ok(MissionRecord {
        schema_version: SCHEMA_VERSION,
        planner: cfg.planner,
        seed: cfg.seed,
        tag_count: n,
        rows,
        decisions,
        summary,
    })
}
