use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use tagtrack_core::harness::export::{
    write_bench_csv, write_heatmap_csv, write_json, write_steps_csv, write_trials_csv,
};
use tagtrack_core::harness::mission::{DecisionRecord, MissionSummary};
use tagtrack_core::harness::{bench_planners, run_mission, run_montecarlo, BenchConfig, ScenarioConfig, SCHEMA_VERSION};
use tagtrack_core::{HarnessError, PlannerKind};

#[derive(Parser)]
#[command(name = "tagtrack", version, about = "Radio-tag tracking and void-constrained path planning simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one mission.
    Simulate {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run a batch of missions with derived seeds.
    Montecarlo {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        parallel: usize,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Time one planning decision per planner on a fixed belief snapshot.
    Bench {
        #[arg(long, default_value_t = 10_000)]
        particles: usize,
        #[arg(long, default_value_t = 10)]
        tags: usize,
        #[arg(long, default_value_t = 12)]
        actions: usize,
        #[arg(long, default_value_t = 11)]
        horizon: usize,
        #[arg(long, default_value_t = 20)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Directory for the report; printed to stdout only when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Print the default scenario config as JSON.
    Config,
}

#[derive(Args)]
struct ScenarioArgs {
    /// JSON scenario file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    planner: Option<PlannerArg>,
    /// Rényi order, used with `--planner renyi`.
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,
    #[arg(long = "void", value_enum)]
    void_mode: Option<Switch>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct OutputArgs {
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlannerArg {
    Lavapilot,
    Renyi,
    Shannon,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path)?,
            None => ScenarioConfig::default(),
        };
        let void_enabled = self.void_mode.map_or(cfg.planner.void_enabled, |v| v == Switch::On);
        if let Some(p) = self.planner {
            cfg.planner = match p {
                PlannerArg::Lavapilot => PlannerKind::lavapilot(void_enabled),
                PlannerArg::Renyi => PlannerKind::renyi(self.alpha, void_enabled),
                PlannerArg::Shannon => PlannerKind::shannon(void_enabled),
            };
        }
        cfg.planner.void_enabled = void_enabled;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Serialize)]
struct MissionReport<'a> {
    schema_version: u32,
    planner: PlannerKind,
    seed: u64,
    summary: &'a MissionSummary,
    decisions: &'a [DecisionRecord],
    config: &'a ScenarioConfig,
}

fn create_dir(dir: &Path) -> Result<(), HarnessError> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn audit(failures: usize) -> Result<(), HarnessError> {
    if failures > 0 {
        return Err(HarnessError::Invariant(format!(
            "{failures} planning decision(s) violated the void bound"
        )));
    }
    Ok(())
}

fn simulate(scenario: &ScenarioArgs, output: &OutputArgs) -> Result<(), HarnessError> {
    let cfg = scenario.resolve()?;
    let record = run_mission(&cfg)?;
    create_dir(&output.out)?;
    match output.format {
        Format::Csv => write_steps_csv(&record, &output.out.join("steps.csv"))?,
        Format::Json => write_json(&record, &output.out.join("record.json"))?,
    }
    let report = MissionReport {
        schema_version: SCHEMA_VERSION,
        planner: record.planner,
        seed: record.seed,
        summary: &record.summary,
        decisions: &record.decisions,
        config: &cfg,
    };
    write_json(&report, &output.out.join("summary.json"))?;
    let s = &record.summary;
    println!(
        "{}: {} steps, flight time {} s, RMS {:.2} m, all localized: {}",
        cfg.planner, s.steps, s.flight_time_s, s.rms_m, s.all_localized
    );
    audit(s.audit_failures)
}

fn montecarlo(scenario: &ScenarioArgs, trials: usize, parallel: usize, output: &OutputArgs) -> Result<(), HarnessError> {
    let cfg = scenario.resolve()?;
    let summary = run_montecarlo(&cfg, trials, parallel)?;
    create_dir(&output.out)?;
    write_json(&summary, &output.out.join("summary.json"))?;
    if output.format == Format::Csv {
        write_trials_csv(&summary, &output.out.join("trials.csv"))?;
        write_heatmap_csv(&summary.heatmap, &output.out.join("heatmap.csv"))?;
    }
    println!(
        "{}: {} trials, RMS mean {:.2} m, flight time mean {:.1} s, void audit {}/{} gated decisions, {} escapes, {} fallbacks",
        cfg.planner,
        summary.trials,
        summary.rms_m.mean,
        summary.flight_time_s.mean,
        summary.void_audit.satisfied,
        summary.void_audit.gated,
        summary.void_audit.escapes,
        summary.void_audit.fallbacks
    );
    audit(summary.void_audit.failures)
}

fn bench(cfg: &BenchConfig, out: Option<&Path>, format: Format) -> Result<(), HarnessError> {
    let report = bench_planners(cfg)?;
    println!("{:<28} {:>12} {:>12} {:>12} {:>12} {:>12}", "planner", "mean_s", "min_s", "max_s", "median_s", "lik_calls");
    for r in &report.rows {
        let t = &r.timing;
        println!(
            "{:<28} {:>12.6} {:>12.6} {:>12.6} {:>12.6} {:>12}",
            r.planner.to_string(),
            t.mean,
            t.min,
            t.max,
            t.median,
            r.likelihood_calls
        );
    }
    if let Some(dir) = out {
        create_dir(dir)?;
        match format {
            Format::Csv => write_bench_csv(&report, &dir.join("bench.csv"))?,
            Format::Json => write_json(&report, &dir.join("bench.json"))?,
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate { scenario, output } => simulate(&scenario, &output),
        Command::Montecarlo {
            scenario,
            trials,
            parallel,
            output,
        } => montecarlo(&scenario, trials, parallel, &output),
        Command::Bench {
            particles,
            tags,
            actions,
            horizon,
            reps,
            seed,
            out,
            format,
        } => {
            let cfg = BenchConfig {
                particles,
                tags,
                actions,
                horizon,
                repetitions: reps,
                seed,
                ..Default::default()
            };
            bench(&cfg, out.as_deref(), format)
        }
        Command::Config => {
            let text = serde_json::to_string_pretty(&ScenarioConfig::default()).expect("config serializes");
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
