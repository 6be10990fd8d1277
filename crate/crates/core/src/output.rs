//! Run artifacts: CSV tables and a JSON summary.
//!
//! Floats are written in Rust's shortest round-trip form, so identical runs
//! produce byte-identical files (apart from `wall_time_s` in the summary).

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::RunConfig;
use crate::diagnostics::{RunBounds, RunVerdict, DiagRow};
use crate::error::Result;
use crate::grid::GridSystem;
use crate::sim::RunResult;

fn ids(v: &[u64]) -> String {
    v.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

pub fn write_events(path: &Path, run: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "t", "x", "class", "fronts_in", "fronts_out", "temple_before", "temple_after", "varpi_before",
        "varpi_after", "case", "front_count",
    ])?;
    for e in &run.state.events {
        w.write_record([
            e.t.to_string(),
            e.x.to_string(),
            e.class.as_str().to_string(),
            ids(&e.fronts_in),
            ids(&e.fronts_out),
            e.temple_before.to_string(),
            e.temple_after.to_string(),
            serde_json::to_value(e.varpi_before)?.as_str().unwrap_or_default().to_string(),
            serde_json::to_value(e.varpi_after)?.as_str().unwrap_or_default().to_string(),
            e.case.map(|c| format!("{c:?}").to_lowercase()).unwrap_or_default(),
            e.front_count.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per piece of each snapshot; `x_left` is `-inf` for the first piece.
pub fn write_snapshots(path: &Path, run: &RunResult) -> Result<()> {
    let grid = &run.state.grid;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "piece", "x_left", "region", "index", "rho", "z", "y", "ydot"])?;
    for s in &run.snapshots {
        for (k, v) in s.profile.values.iter().enumerate() {
            let x_left = if k == 0 { "-inf".to_string() } else { s.profile.breaks[k - 1].to_string() };
            w.write_record([
                s.t.to_string(),
                k.to_string(),
                x_left,
                v.region.to_string(),
                v.index.to_string(),
                grid.rho(*v).to_string(),
                grid.z(*v).to_string(),
                s.y.to_string(),
                s.ydot.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, run: &RunResult) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for k in &run.state.trajectory {
        w.serialize(k)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_diagnostics(path: &Path, rows: &[DiagRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Every front segment, for space-time diagrams.
pub fn write_fronts(path: &Path, run: &RunResult) -> Result<()> {
    let grid = &run.state.grid;
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "id", "kind", "t_start", "t_end", "x_start", "speed", "left_region", "left_index", "right_region",
        "right_index", "rho_left", "rho_right",
    ])?;
    for f in &run.state.traces {
        w.write_record([
            f.id.to_string(),
            serde_json::to_value(f.kind)?.as_str().unwrap_or_default().to_string(),
            f.t_start.to_string(),
            f.t_end.to_string(),
            f.x_start.to_string(),
            f.speed.to_string(),
            f.left.region.to_string(),
            f.left.index.to_string(),
            f.right.region.to_string(),
            f.right.index.to_string(),
            grid.rho(f.left).to_string(),
            grid.rho(f.right).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct GridInfo {
    pub n: u32,
    pub n_circ: u32,
    pub delta_hat: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
    pub points_per_region: Vec<usize>,
}

impl GridInfo {
    pub fn new(grid: &GridSystem) -> Self {
        Self {
            n: grid.n,
            n_circ: grid.n_circ,
            delta_hat: grid.delta_hat,
            delta_lo: grid.delta_lo,
            delta_hi: grid.delta_hi,
            points_per_region: grid.regions.iter().map(|r| r.points.len()).collect(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct Summary<'a> {
    pub config: &'a RunConfig,
    pub grid: GridInfo,
    pub varsigma: f64,
    pub events: usize,
    pub fronts_total: usize,
    pub max_front_count: usize,
    pub final_y: f64,
    pub final_diagnostics: Option<DiagRow>,
    pub bounds: RunBounds,
    pub tv_z_max: f64,
    pub sup_z_max: f64,
    pub temple_max: f64,
    pub verdict: RunVerdict,
    pub wall_time_s: f64,
}

/// Write all artifacts of one run into `dir` (created if missing).
pub fn write_run(dir: &Path, config: &RunConfig, run: &RunResult, verdict: RunVerdict, wall_time_s: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    write_events(&dir.join("events.csv"), run)?;
    write_snapshots(&dir.join("snapshots.csv"), run)?;
    write_trajectory(&dir.join("trajectory.csv"), run)?;
    write_diagnostics(&dir.join("diagnostics.csv"), &run.diagnostics)?;
    write_fronts(&dir.join("fronts.csv"), run)?;
    let summary = Summary {
        config,
        grid: GridInfo::new(&run.state.grid),
        varsigma: run.state.varsigma(),
        events: run.state.events.len(),
        fronts_total: run.state.traces.len(),
        max_front_count: run.state.max_front_count(),
        final_y: run.state.y(),
        final_diagnostics: run.diagnostics.last().copied(),
        bounds: run.bounds,
        tv_z_max: run.tv_z_max,
        sup_z_max: run.sup_z_max,
        temple_max: run.temple_max,
        verdict,
        wall_time_s,
    };
    fs::write(dir.join("summary.json"), serde_json::to_string_pretty(&summary)?)?;
    Ok(())
}
