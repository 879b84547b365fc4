//! Action selection under a void constraint.
//!
//! The void region of an observer pose is the open horizontal disc of radius
//! `r_min` around it. For a particle belief, the void probability of a region
//! is one minus the particle weight inside it; for a candidate trajectory it
//! is the minimum over every tag belief and every sampled pose. An action is
//! admissible when that minimum is at least `b_min`.
//!
//! Two families of planners share the constraint:
//!
//! * [`lavapilot_select`] heads for the unlocalized tag with the smallest
//!   belief spread, trying the near point on its void circle and the two
//!   tangent points before a ring of fixed headings. It never evaluates a
//!   measurement likelihood.
//! * [`info_gain_select`] scores the heading ring by the expected change of
//!   each belief (Rényi divergence or Shannon entropy) under the measurement
//!   predicted at the end of the rollout.

use std::f64::consts::TAU;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::rf::{self, PropagationConfig};
use crate::tracker::ObjectBelief;
use crate::world::{uav_rollout, Area, ObjectState, UavKinematics, UavState};

/// Void radius used when the constraint is switched off.
pub const NO_VOID_RADIUS: f64 = 0.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VoidConfig {
    /// Safe horizontal distance, meters.
    pub r_min: f64,
    /// Lower bound on the trajectory void probability.
    pub b_min: f64,
    /// Look-ahead horizon in periods; also the replanning cadence.
    pub horizon: usize,
    /// Period T0, seconds.
    pub period: f64,
    /// Size of the discrete heading set.
    pub action_count: usize,
}

impl Default for VoidConfig {
    fn default() -> Self {
        Self {
            r_min: 50.0,
            b_min: 0.8,
            horizon: 11,
            period: 1.0,
            action_count: 12,
        }
    }
}

impl VoidConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.r_min > 0.0) {
            return Err(ConfigError::invalid("void.r_min", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.b_min) {
            return Err(ConfigError::invalid("void.b_min", "must be in [0, 1]"));
        }
        if self.horizon == 0 {
            return Err(ConfigError::invalid("void.horizon", "must be >= 1"));
        }
        if !(self.period > 0.0) {
            return Err(ConfigError::invalid("void.period", "must be > 0"));
        }
        if self.action_count < 3 {
            return Err(ConfigError::invalid("void.action_count", "must be >= 3"));
        }
        Ok(())
    }

    /// Distance flown at top speed over one horizon.
    pub fn reach(&self, kin: &UavKinematics) -> f64 {
        kin.max_speed * self.horizon as f64 * self.period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "strategy", rename_all = "lowercase")]
pub enum Strategy {
    #[serde(rename = "lavapilot")]
    LavaPilot,
    Renyi { alpha: f64 },
    Shannon,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::LavaPilot => "lavapilot",
            Strategy::Renyi { .. } => "renyi",
            Strategy::Shannon => "shannon",
        }
    }
}

/// Planner choice plus whether the void constraint is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlannerKind {
    #[serde(flatten)]
    pub strategy: Strategy,
    #[serde(default = "enabled")]
    pub void_enabled: bool,
}

fn enabled() -> bool {
    true
}

impl Default for PlannerKind {
    fn default() -> Self {
        Self::lavapilot(true)
    }
}

impl PlannerKind {
    pub fn lavapilot(void_enabled: bool) -> Self {
        Self {
            strategy: Strategy::LavaPilot,
            void_enabled,
        }
    }

    pub fn renyi(alpha: f64, void_enabled: bool) -> Self {
        Self {
            strategy: Strategy::Renyi { alpha },
            void_enabled,
        }
    }

    pub fn shannon(void_enabled: bool) -> Self {
        Self {
            strategy: Strategy::Shannon,
            void_enabled,
        }
    }

    /// The void radius this planner actually enforces.
    pub fn effective_r_min(&self, cfg: &VoidConfig) -> f64 {
        if self.void_enabled {
            cfg.r_min
        } else {
            NO_VOID_RADIUS
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if let Strategy::Renyi { alpha } = self.strategy {
            if !(alpha > 0.0 && alpha != 1.0 && alpha.is_finite()) {
                return Err(ConfigError::invalid("planner.alpha", "must be in (0, 1) or (1, inf)"));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PlannerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let void = if self.void_enabled { "void" } else { "novoid" };
        match self.strategy {
            Strategy::Renyi { alpha } => write!(f, "renyi(alpha={alpha})-{void}"),
            s => write!(f, "{}-{void}", s.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActionLabel {
    /// Near point of the void circle on the line of sight.
    A,
    /// Tangent point, counter-clockwise of A.
    B,
    /// Tangent point, clockwise of A.
    C,
    /// Radial exit when already inside a tag's void circle.
    Escape,
    /// Index into the heading ring.
    Discrete(usize),
    Stay,
}

impl fmt::Display for ActionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ActionLabel::A => f.write_str("A"),
            ActionLabel::B => f.write_str("B"),
            ActionLabel::C => f.write_str("C"),
            ActionLabel::Escape => f.write_str("escape"),
            ActionLabel::Discrete(i) => write!(f, "discrete_{i}"),
            ActionLabel::Stay => f.write_str("stay"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAction {
    pub waypoint: [f64; 2],
    pub rollout: Vec<UavState>,
    pub void_prob: f64,
    pub label: ActionLabel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecisionOutcome {
    /// Passed the void gate.
    Selected,
    /// Observer was inside a tag's void circle; gate skipped.
    Escape,
    /// Nothing passed the gate; hover in place.
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Decision {
    pub action: CandidateAction,
    pub outcome: DecisionOutcome,
    /// LAVAPilot's chosen tag.
    pub target_tag: Option<usize>,
    pub reward: Option<f64>,
}

/// Read-only inputs of one planning epoch.
#[derive(Debug, Clone, Copy)]
pub struct PlanContext<'a> {
    pub beliefs: &'a [ObjectBelief],
    /// Propagation constants per belief, same order as `beliefs`.
    pub propagation: &'a [PropagationConfig],
    pub uav: &'a UavState,
    pub kinematics: &'a UavKinematics,
    pub area: &'a Area,
    pub void: &'a VoidConfig,
}

impl PlanContext<'_> {
    fn rollout_to(&self, waypoint: [f64; 2]) -> ([f64; 2], Vec<UavState>) {
        let waypoint = self.area.clamp(waypoint);
        let rollout = uav_rollout(
            self.uav,
            waypoint,
            self.kinematics,
            self.area,
            self.void.horizon,
            self.void.period,
        );
        (waypoint, rollout)
    }

    fn heading_waypoint(&self, index: usize) -> [f64; 2] {
        let theta = TAU * index as f64 / self.void.action_count as f64;
        let reach = self.void.reach(self.kinematics);
        let p = self.uav.xy();
        [p[0] + reach * theta.cos(), p[1] + reach * theta.sin()]
    }
}

/// Whether `particle` lies strictly inside the void disc of `pose`.
pub fn in_void(particle: &ObjectState, pose: &UavState, r_min: f64) -> bool {
    inside(&particle.position, pose, r_min * r_min)
}

#[inline]
fn inside(p: &[f64; 3], pose: &UavState, r2: f64) -> bool {
    let dx = p[0] - pose.position[0];
    let dy = p[1] - pose.position[1];
    dx * dx + dy * dy < r2
}

/// `1 - Σ w_i [x_i inside the void disc of pose]`.
pub fn void_probability(belief: &ObjectBelief, pose: &UavState, r_min: f64) -> f64 {
    let r2 = r_min * r_min;
    let mass: f64 = belief
        .particles()
        .iter()
        .zip(belief.weights())
        .filter(|(p, _)| inside(p, pose, r2))
        .map(|(_, w)| *w)
        .sum();
    1.0 - mass
}

/// Minimum void probability over every (belief, pose) pair.
pub fn trajectory_void_probability(beliefs: &[ObjectBelief], rollout: &[UavState], r_min: f64) -> f64 {
    VoidGate::new(beliefs, r_min).evaluate(rollout)
}

/// Trajectory void probability with per-belief bounding boxes, so poses far
/// from a belief skip its particles. Results equal the plain double loop.
pub struct VoidGate<'a> {
    beliefs: &'a [ObjectBelief],
    bounds: Vec<[f64; 4]>,
    r_min: f64,
}

impl<'a> VoidGate<'a> {
    pub fn new(beliefs: &'a [ObjectBelief], r_min: f64) -> Self {
        let bounds = beliefs
            .iter()
            .map(|b| {
                b.particles().iter().fold(
                    [f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY],
                    |acc, p| [acc[0].min(p[0]), acc[1].max(p[0]), acc[2].min(p[1]), acc[3].max(p[1])],
                )
            })
            .collect();
        Self { beliefs, bounds, r_min }
    }

    pub fn evaluate(&self, rollout: &[UavState]) -> f64 {
        let mut lowest = 1.0_f64;
        for (belief, bb) in self.beliefs.iter().zip(&self.bounds) {
            for pose in rollout {
                let [x, y, _] = pose.position;
                if x + self.r_min < bb[0] || x - self.r_min > bb[1] || y + self.r_min < bb[2] || y - self.r_min > bb[3]
                {
                    continue;
                }
                lowest = lowest.min(void_probability(belief, pose, self.r_min));
            }
        }
        lowest
    }
}

/// Candidate waypoints on the void circle of radius `r_min` around
/// `estimate`, as seen from `uav`.
///
/// Outside the circle this yields A (the near point on the line of sight)
/// then the tangent points B and C. On or inside the circle it yields a
/// single radial escape point; when the observer sits exactly on the
/// estimate the escape follows `heading`.
pub fn candidate_points_abc(uav: [f64; 2], estimate: [f64; 2], r_min: f64, heading: f64) -> Vec<(ActionLabel, [f64; 2])> {
    let dx = uav[0] - estimate[0];
    let dy = uav[1] - estimate[1];
    let dist = dx.hypot(dy);
    if dist == 0.0 {
        let p = [estimate[0] + r_min * heading.cos(), estimate[1] + r_min * heading.sin()];
        return vec![(ActionLabel::Escape, p)];
    }
    let u = [dx / dist, dy / dist];
    let on_circle = |c: f64, s: f64| {
        [
            estimate[0] + r_min * (c * u[0] - s * u[1]),
            estimate[1] + r_min * (s * u[0] + c * u[1]),
        ]
    };
    if dist <= r_min {
        return vec![(ActionLabel::Escape, on_circle(1.0, 0.0))];
    }
    let beta = (r_min / dist).acos();
    let (s, c) = beta.sin_cos();
    vec![
        (ActionLabel::A, on_circle(1.0, 0.0)),
        (ActionLabel::B, on_circle(c, s)),
        (ActionLabel::C, on_circle(c, -s)),
    ]
}

/// Index of the unlocalized belief with the smallest spread; ties go to the
/// lower tag id.
fn least_uncertain(beliefs: &[ObjectBelief]) -> Option<usize> {
    beliefs
        .iter()
        .enumerate()
        .filter(|(_, b)| !b.localized)
        .map(|(i, b)| (i, b.uncertainty(), b.tag_id))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.2.cmp(&b.2)))
        .map(|(i, _, _)| i)
}

/// Horizontal estimate of the belief closest to `uav`, if it lies within
/// `r_min`. Ties go to the earlier belief.
fn nearest_void_circle(beliefs: &[ObjectBelief], uav: [f64; 2], r_min: f64) -> Option<[f64; 2]> {
    beliefs
        .iter()
        .map(|b| {
            let [x, y, _] = b.estimate();
            ((x - uav[0]).hypot(y - uav[1]), [x, y])
        })
        .filter(|(d, _)| *d <= r_min)
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, e)| e)
}

fn stay(ctx: &PlanContext<'_>, gate: &VoidGate<'_>) -> CandidateAction {
    let (waypoint, rollout) = ctx.rollout_to(ctx.uav.xy());
    let void_prob = gate.evaluate(&rollout);
    CandidateAction {
        waypoint,
        rollout,
        void_prob,
        label: ActionLabel::Stay,
    }
}

/// Task-driven selection: approach the least uncertain unlocalized tag.
/// Returns `None` once every tag is localized.
pub fn lavapilot_select(ctx: &PlanContext<'_>, void_enabled: bool) -> Option<Decision> {
    let target = least_uncertain(ctx.beliefs)?;
    let r_min = if void_enabled { ctx.void.r_min } else { NO_VOID_RADIUS };
    let gate = VoidGate::new(ctx.beliefs, r_min);
    let belief = &ctx.beliefs[target];
    let [ex, ey, _] = belief.estimate();
    let estimate = [ex, ey];
    let decision = |action, outcome| Decision {
        action,
        outcome,
        target_tag: Some(belief.tag_id),
        reward: None,
    };

    // Inside some other tag's void circle no rollout can pass the gate, so
    // leave that circle first.
    let uav_xy = ctx.uav.xy();
    let toward = match nearest_void_circle(ctx.beliefs, uav_xy, r_min) {
        Some(other) => candidate_points_abc(uav_xy, other, r_min, ctx.uav.heading),
        None => candidate_points_abc(uav_xy, estimate, r_min, ctx.uav.heading),
    };
    for (label, point) in toward {
        let (waypoint, rollout) = ctx.rollout_to(point);
        let void_prob = gate.evaluate(&rollout);
        let action = CandidateAction {
            waypoint,
            rollout,
            void_prob,
            label,
        };
        if label == ActionLabel::Escape {
            return Some(decision(action, DecisionOutcome::Escape));
        }
        if void_prob >= ctx.void.b_min {
            return Some(decision(action, DecisionOutcome::Selected));
        }
    }

    let mut best: Option<(f64, CandidateAction)> = None;
    for i in 0..ctx.void.action_count {
        let (waypoint, rollout) = ctx.rollout_to(ctx.heading_waypoint(i));
        let void_prob = gate.evaluate(&rollout);
        if void_prob < ctx.void.b_min {
            continue;
        }
        let dist = (waypoint[0] - estimate[0]).hypot(waypoint[1] - estimate[1]);
        if best.as_ref().is_none_or(|(d, _)| dist < *d) {
            best = Some((
                dist,
                CandidateAction {
                    waypoint,
                    rollout,
                    void_prob,
                    label: ActionLabel::Discrete(i),
                },
            ));
        }
    }
    Some(match best {
        Some((_, action)) => decision(action, DecisionOutcome::Selected),
        None => decision(stay(ctx, &gate), DecisionOutcome::Fallback),
    })
}

/// `ln(Σ w_i exp(scale · l_i) / Σ w_i)` with `l` already shifted so its
/// maximum is zero.
fn log_mean_exp(weights: &[f64], shifted: &[f64], scale: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for (w, l) in weights.iter().zip(shifted) {
        num += w * (scale * l).exp();
        den += w;
    }
    (num / den).ln()
}

fn shift_to_max(log_likelihoods: &[f64]) -> Option<Vec<f64>> {
    let peak = log_likelihoods.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return None;
    }
    Some(log_likelihoods.iter().map(|l| l - peak).collect())
}

/// Entropy of the weights reweighted by `exp(shifted)`.
fn reweighted_entropy(weights: &[f64], shifted: &[f64]) -> f64 {
    let log_norm = log_mean_exp(weights, shifted, 1.0) + weights.iter().sum::<f64>().ln();
    let mut h = 0.0;
    for (w, l) in weights.iter().zip(shifted) {
        if *w > 0.0 {
            let ln_p = w.ln() + l - log_norm;
            h -= ln_p.exp() * ln_p;
        }
    }
    h
}

/// Entropy of the weights minus entropy after reweighting by the
/// likelihoods `exp(log_likelihoods)`.
pub fn shannon_reward(weights: &[f64], log_likelihoods: &[f64]) -> f64 {
    let Some(shifted) = shift_to_max(log_likelihoods) else {
        return 0.0;
    };
    let zeros = vec![0.0; shifted.len()];
    reweighted_entropy(weights, &zeros) - reweighted_entropy(weights, &shifted)
}

/// Particle estimate of the Rényi α-divergence between the posterior and the
/// prior: `1/(α-1) · ln[Σ w g^α / (Σ w g)^α]` (weights normalized).
pub fn renyi_reward(weights: &[f64], log_likelihoods: &[f64], alpha: f64) -> f64 {
    let Some(shifted) = shift_to_max(log_likelihoods) else {
        return 0.0;
    };
    (log_mean_exp(weights, &shifted, alpha) - alpha * log_mean_exp(weights, &shifted, 1.0)) / (alpha - 1.0)
}

/// Information reward of observing `belief` from `pose`, using the
/// noise-free measurement predicted at the belief's estimate.
fn belief_reward(belief: &ObjectBelief, pose: &UavState, cfg: &PropagationConfig, strategy: Strategy) -> f64 {
    let Ok(predicted) = rf::power_at(&belief.estimate(), pose, cfg) else {
        return 0.0;
    };
    let lls: Vec<f64> = belief
        .particles()
        .iter()
        .map(|p| rf::log_likelihood_at(predicted, p, pose, cfg))
        .collect();
    match strategy {
        Strategy::Renyi { alpha } => renyi_reward(belief.weights(), &lls, alpha),
        Strategy::Shannon => shannon_reward(belief.weights(), &lls),
        Strategy::LavaPilot => unreachable!("LAVAPilot uses no information reward"),
    }
}

/// Information-gain selection over the heading ring plus hovering. The
/// reward of a candidate is summed over unlocalized tags, evaluated at the
/// last rollout pose. Returns `None` once every tag is localized.
///
/// # Panics
/// If `kind` is LAVAPilot, or `ctx.propagation` does not match `ctx.beliefs`.
pub fn info_gain_select(ctx: &PlanContext<'_>, kind: &PlannerKind) -> Option<Decision> {
    assert!(!matches!(kind.strategy, Strategy::LavaPilot));
    assert_eq!(ctx.beliefs.len(), ctx.propagation.len());
    if ctx.beliefs.iter().all(|b| b.localized) {
        return None;
    }
    let r_min = kind.effective_r_min(ctx.void);
    let gate = VoidGate::new(ctx.beliefs, r_min);
    let n = ctx.void.action_count;
    let mut best: Option<(f64, CandidateAction)> = None;
    for i in 0..=n {
        let (label, target) = if i < n {
            (ActionLabel::Discrete(i), ctx.heading_waypoint(i))
        } else {
            (ActionLabel::Stay, ctx.uav.xy())
        };
        let (waypoint, rollout) = ctx.rollout_to(target);
        let void_prob = gate.evaluate(&rollout);
        if void_prob < ctx.void.b_min {
            continue;
        }
        let terminal = rollout.last().copied().unwrap_or(*ctx.uav);
        let reward: f64 = ctx
            .beliefs
            .iter()
            .zip(ctx.propagation)
            .filter(|(b, _)| !b.localized)
            .map(|(b, cfg)| belief_reward(b, &terminal, cfg, kind.strategy))
            .sum();
        if best.as_ref().is_none_or(|(r, _)| reward > *r) {
            best = Some((
                reward,
                CandidateAction {
                    waypoint,
                    rollout,
                    void_prob,
                    label,
                },
            ));
        }
    }
    Some(match best {
        Some((reward, action)) => Decision {
            action,
            outcome: DecisionOutcome::Selected,
            target_tag: None,
            reward: Some(reward),
        },
        None => Decision {
            action: stay(ctx, &gate),
            outcome: DecisionOutcome::Fallback,
            target_tag: None,
            reward: None,
        },
    })
}

/// Dispatches to the configured planner.
pub fn select_action(ctx: &PlanContext<'_>, kind: &PlannerKind) -> Option<Decision> {
    match kind.strategy {
        Strategy::LavaPilot => lavapilot_select(ctx, kind.void_enabled),
        _ => info_gain_select(ctx, kind),
    }
}

/// The safe-distance guarantee for one decision: the chosen trajectory keeps
/// void probability at least `b_min` against every belief.
pub fn verify_proposition1(action: &CandidateAction, beliefs: &[ObjectBelief], r_min: f64, b_min: f64) -> bool {
    trajectory_void_probability(beliefs, &action.rollout, r_min) >= b_min
}
