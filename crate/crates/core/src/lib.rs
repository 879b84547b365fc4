//! Tracking radio-tagged objects from an aerial observer with a particle
//! filter, and planning the observer's path so it stays clear of them.
//!
//! `world` holds kinematics and target motion, `rf` the received-power model,
//! `tracker` the per-tag particle filter, `planner` the void-constrained
//! planner and its information-gain baselines, and `harness` the mission
//! loop, Monte-Carlo batches and file outputs.

pub mod error;
pub mod harness;
pub mod planner;
pub mod rf;
pub mod rng;
pub mod tracker;
pub mod world;

pub use error::{ConfigError, HarnessError};
pub use planner::{
    select_action, trajectory_void_probability, void_probability, CandidateAction, Decision, PlanContext,
    PlannerKind, Strategy, VoidConfig,
};
pub use rf::{received_power, Measurement, PropagationConfig};
pub use tracker::{ObjectBelief, TrackerConfig};
pub use world::{uav_rollout, Area, ObjectState, TargetDynamics, UavKinematics, UavState};
