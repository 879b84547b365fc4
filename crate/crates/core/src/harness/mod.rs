//! Scenario configuration, the mission loop, batching, benchmarks and
//! file outputs.

pub mod bench;
pub mod config;
pub mod export;
pub mod metrics;
pub mod mission;
pub mod montecarlo;

pub use bench::{bench_planners, BenchConfig, BenchReport, BenchRow};
pub use config::{ScenarioConfig, TagPlacement, SCHEMA_VERSION};
pub use metrics::{compute_rms, HeatMap, Stats};
pub use mission::{run_mission, MissionRecord, MissionSummary, StepRow, TagStep};
pub use montecarlo::{run_montecarlo, run_trials, summarize, McSummary, VoidAudit};
