//! `frontrack` command-line driver.
//!
//! Exit codes: 0 success, 2 bad configuration or arguments, 3 a run-time
//! check failed, 4 front count exploded, 5 anything else.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use frontrack::config::{load_config, RunConfig};
use frontrack::diagnostics::{convergence_study, verify_run};
use frontrack::grid::{admissible_level, build_grid, grid_dump};
use frontrack::output::{write_run, GridInfo};
use frontrack::riemann::{solve_classical, solve_constrained};
use frontrack::{Error, RegionParams, RoadNetwork};

#[derive(Parser)]
#[command(name = "frontrack", version, about = "Wavefront tracking for LWR traffic with a moving bottleneck")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one simulation and write CSV/JSON artifacts.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Grid level (overrides the config).
        #[arg(long)]
        n: Option<u32>,
        #[arg(long)]
        t_end: Option<f64>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve one Riemann problem on the grid and print the waves as JSON.
    ///
    /// With `--gamma-r` the states sit in two regions split at x = 0.
    Riemann {
        #[arg(long)]
        gamma_l: f64,
        #[arg(long)]
        gamma_r: Option<f64>,
        #[arg(long)]
        rho_l: f64,
        #[arg(long)]
        rho_r: f64,
        /// Bottleneck speed limit (both regions).
        #[arg(long, default_value_t = 0.0)]
        vb: f64,
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Put the bottleneck at x = 0.
        #[arg(long)]
        constrained: bool,
        /// Grid level; densities are floored onto its grid (default: at least 8).
        #[arg(long)]
        n: Option<u32>,
    },
    /// Summarise the grid of a configuration (JSON), or dump every point (CSV).
    Grid {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: Option<u32>,
        /// Print every grid point instead of the summary.
        #[arg(long)]
        dump: bool,
    },
    /// Run at several levels and compare against a finest one.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated levels (overrides the config).
        #[arg(long, value_delimiter = ',')]
        levels: Vec<u32>,
        #[arg(long)]
        finest: Option<u32>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Fine enough that typed densities are not visibly rounded.
const DEFAULT_RIEMANN_LEVEL: u32 = 8;

enum Failure {
    Model(Error),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Model(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Model(e.into())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Model(e.into())
    }
}

fn exit_code(f: &Failure) -> u8 {
    match f {
        Failure::Check(_) => 3,
        Failure::Model(e) => match e {
            Error::Config(_)
            | Error::Domain(_)
            | Error::Network(_)
            | Error::Alignment { .. }
            | Error::LevelBelowMinimal { .. }
            | Error::OutOfRange(_) => 2,
            Error::Invariant(_) | Error::Cascade { .. } | Error::PruningFailure { .. } | Error::GridClosure { .. } => 3,
            Error::FrontExplosion { .. } => 4,
            _ => 5,
        },
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn with_level(cfg: RunConfig, n: Option<u32>) -> RunConfig {
    RunConfig { n: n.unwrap_or(cfg.n), ..cfg }
}

fn run(config: PathBuf, n: Option<u32>, t_end: Option<f64>, out: Option<PathBuf>) -> Result<(), Failure> {
    let mut cfg = with_level(load_config(&config)?, n);
    if let Some(t) = t_end {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::Config(format!("t_end = {t} must be positive")).into());
        }
        cfg.raw.t_end = t;
        cfg.scenario.t_end = t;
        cfg.scenario.snapshots.retain(|&s| s <= t);
    }
    let dir = out.unwrap_or_else(|| cfg.output_dir());
    let start = Instant::now();
    let result = cfg.scenario.run(cfg.n)?;
    let wall = start.elapsed().as_secs_f64();
    let verdict = verify_run(&result, cfg.tolerances.temple, cfg.tolerances.constraint)?;
    write_run(&dir, &cfg, &result, verdict, wall)?;
    eprintln!(
        "n = {}, {} events, {} fronts at peak, y(t_end) = {:.6}, artifacts in {}",
        cfg.n,
        result.state.events.len(),
        result.state.max_front_count(),
        result.state.y(),
        dir.display()
    );
    if verdict.passed() {
        Ok(())
    } else {
        Err(Failure::Check(format!("run checks failed: {verdict:?}")))
    }
}

#[allow(clippy::too_many_arguments)]
fn riemann(
    gamma_l: f64,
    gamma_r: Option<f64>,
    rho_l: f64,
    rho_r: f64,
    vb: f64,
    alpha: f64,
    constrained: bool,
    n: Option<u32>,
) -> Result<(), Failure> {
    let left = RegionParams::new(gamma_l, vb.min(gamma_l))?;
    let net = match gamma_r {
        Some(g) => RoadNetwork::new(vec![0.0], vec![left, RegionParams::new(g, vb.min(g))?], alpha)?,
        None => RoadNetwork::new(vec![], vec![left], alpha)?,
    };
    let n = match n {
        Some(n) => n,
        None => admissible_level(&net)?.max(DEFAULT_RIEMANN_LEVEL),
    };
    let grid = build_grid(&net, n)?;
    for rho in [rho_l, rho_r] {
        if !(0.0..=1.0).contains(&rho) {
            return Err(Error::Domain(rho).into());
        }
    }
    let l = grid.floor(0, rho_l);
    let r = grid.floor(net.num_regions() - 1, rho_r);
    let (seq, ydot, case) = if constrained {
        let s = solve_constrained(&grid, l, r)?;
        (s.seq, Some(s.ydot), Some(s.case))
    } else {
        (solve_classical(&grid, l, r)?, None, None)
    };
    let waves: Vec<_> = seq
        .waves
        .iter()
        .map(|w| {
            serde_json::json!({
                "kind": w.kind.as_str(),
                "speed": w.speed,
                "rho_left": grid.rho(w.left),
                "rho_right": grid.rho(w.right),
                "z_left": grid.z(w.left),
                "z_right": grid.z(w.right),
            })
        })
        .collect();
    print_json(&serde_json::json!({
        "n": n,
        "rho_left": grid.rho(l),
        "rho_right": grid.rho(r),
        "waves": waves,
        "ydot": ydot,
        "case": case,
    }))
}

fn grid(config: PathBuf, n: Option<u32>, dump: bool) -> Result<(), Failure> {
    let cfg = with_level(load_config(&config)?, n);
    let grid = build_grid(&cfg.scenario.network, cfg.n)?;
    if !dump {
        return print_json(&GridInfo::new(&grid));
    }
    let mut w = csv::Writer::from_writer(std::io::stdout().lock());
    for row in grid_dump(&grid) {
        w.serialize(row).map_err(Error::from)?;
    }
    w.flush()?;
    Ok(())
}

fn converge(config: PathBuf, levels: Vec<u32>, finest: Option<u32>, out: Option<PathBuf>) -> Result<(), Failure> {
    let cfg = load_config(&config)?;
    let levels = if levels.is_empty() { cfg.raw.levels.clone() } else { levels };
    let finest = finest
        .or(cfg.raw.finest)
        .or_else(|| levels.iter().max().map(|m| m + 3))
        .ok_or_else(|| Error::Config("no levels given".into()))?;
    let report = convergence_study(&cfg.scenario, &levels, finest, None)?;
    match out {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(&report)?)?,
        None => print_json(&report)?,
    }
    if report.l1_decreasing {
        Ok(())
    } else {
        Err(Failure::Check("L1 distance to the finest level is not decreasing".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run { config, n, t_end, out } => run(config, n, t_end, out),
        Cmd::Riemann { gamma_l, gamma_r, rho_l, rho_r, vb, alpha, constrained, n } => {
            riemann(gamma_l, gamma_r, rho_l, rho_r, vb, alpha, constrained, n)
        }
        Cmd::Grid { config, n, dump } => grid(config, n, dump),
        Cmd::Converge { config, levels, finest, out } => converge(config, levels, finest, out),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Model(e) => eprintln!("error: {e}"),
                Failure::Check(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(exit_code(&f))
        }
    }
}
