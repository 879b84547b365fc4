//! File outputs: step CSV, JSON documents and heat-map grids.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::bench::BenchReport;
use super::metrics::HeatMap;
use super::mission::MissionRecord;
use super::montecarlo::McSummary;
use crate::error::HarnessError;

/// Column names for a record with `tag_count` tags, in file order.
pub fn steps_header(tag_count: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["k", "uav_x", "uav_y", "uav_z", "uav_heading"]
        .map(String::from)
        .into();
    for id in 1..=tag_count {
        for field in ["rssi", "est_x", "est_y", "est_z", "sigma", "localized"] {
            cols.push(format!("tag{id}_{field}"));
        }
    }
    cols.push("planning_time_s".into());
    cols.push("void_prob".into());
    cols
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer(path: &Path) -> Result<csv::Writer<File>, HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

fn finish(mut w: csv::Writer<File>, path: &Path) -> Result<(), HarnessError> {
    w.flush().map_err(|e| HarnessError::io(path, e))
}

/// One row per simulation step, header first.
pub fn write_steps_csv(record: &MissionRecord, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(steps_header(record.tag_count)).map_err(csv_err(path))?;
    for row in &record.rows {
        let [x, y, z] = row.uav.position;
        let mut fields = vec![
            row.k.to_string(),
            x.to_string(),
            y.to_string(),
            z.to_string(),
            row.uav.heading.to_string(),
        ];
        for t in &row.tags {
            fields.extend([
                t.rssi.to_string(),
                t.estimate[0].to_string(),
                t.estimate[1].to_string(),
                t.estimate[2].to_string(),
                t.sigma.to_string(),
                u8::from(t.localized).to_string(),
            ]);
        }
        fields.push(opt(row.planning_time_s));
        fields.push(opt(row.void_prob));
        w.write_record(&fields).map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| HarnessError::io(path, std::io::Error::other(e)))?;
    writeln!(out).and_then(|_| out.flush()).map_err(|e| HarnessError::io(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let file = File::open(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| HarnessError::io(path, std::io::Error::other(e)))
}

/// Visit counts as a grid: first column is the lower y edge of each row,
/// header carries the lower x edge of each column. Rows run south to north.
pub fn write_heatmap_csv(map: &HeatMap, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    let mut header = vec!["y\\x".to_string()];
    header.extend((0..map.nx).map(|ix| (map.origin[0] + ix as f64 * map.bin_size).to_string()));
    w.write_record(&header).map_err(csv_err(path))?;
    for iy in 0..map.ny {
        let mut fields = vec![(map.origin[1] + iy as f64 * map.bin_size).to_string()];
        fields.extend((0..map.nx).map(|ix| map.get(ix, iy).to_string()));
        w.write_record(&fields).map_err(csv_err(path))?;
    }
    finish(w, path)
}

/// One row per trial.
pub fn write_trials_csv(summary: &McSummary, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record([
        "trial",
        "seed",
        "rms_m",
        "mean_sigma_m",
        "flight_time_s",
        "all_localized",
        "decisions",
        "escapes",
        "fallbacks",
        "audit_failures",
        "median_planning_time_s",
    ])
    .map_err(csv_err(path))?;
    for t in &summary.per_trial {
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.rms_m.to_string(),
            t.mean_sigma_m.to_string(),
            t.flight_time_s.to_string(),
            u8::from(t.all_localized).to_string(),
            t.decisions.to_string(),
            t.escapes.to_string(),
            t.fallbacks.to_string(),
            t.audit_failures.to_string(),
            opt(t.planning_time.map(|s| s.median)),
        ])
        .map_err(csv_err(path))?;
    }
    finish(w, path)
}

pub fn write_bench_csv(report: &BenchReport, path: &Path) -> Result<(), HarnessError> {
    let mut w = csv_writer(path)?;
    w.write_record(["planner", "mean_s", "min_s", "max_s", "median_s", "likelihood_calls", "chosen"])
        .map_err(csv_err(path))?;
    for r in &report.rows {
        w.write_record([
            r.planner.to_string(),
            r.timing.mean.to_string(),
            r.timing.min.to_string(),
            r.timing.max.to_string(),
            r.timing.median.to_string(),
            r.likelihood_calls.to_string(),
            r.chosen.clone(),
        ])
        .map_err(csv_err(path))?;
    }
    finish(w, path)
}
