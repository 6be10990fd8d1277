//! Functionals and bound checks evaluated on simulator states and histories.

use serde::Serialize;

use crate::batch;
use crate::error::{Error, Result};
use crate::flux::{f_alpha_capacity, flux_raw, psi_raw};
use crate::grid::{GridRef, GridSystem};
use crate::network::RoadNetwork;
use crate::profile::{l1_distance, rho_profile, z_profile, InitialProfile, Piecewise, StateProfile};
use crate::riemann::WaveKind;
use crate::sim::{FrontTrace, RunResult, Scenario, SimState, TrajectoryKnot};

/// Which branch of the bottleneck term is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarpiBranch {
    /// Inside a region, flanked by the non-classical pair.
    ActiveZero,
    /// Inside a region, not flanked by the non-classical pair.
    Inactive,
    /// At (or within ς of) the downstream boundary.
    Boundary,
}

/// Temple weight of one front.
pub fn front_temple(grid: &GridSystem, l: GridRef, r: GridRef, kind: WaveKind) -> f64 {
    if kind == WaveKind::GammaJump {
        let dg = (grid.gamma(r.region) - grid.gamma(l.region)).abs();
        if grid.z(l) < grid.z(r) {
            dg
        } else {
            0.5 * dg
        }
    } else {
        (grid.z(r) - grid.z(l)).abs()
    }
}

fn hat_check_gap(grid: &GridSystem, m: usize) -> f64 {
    let r = grid.region(m);
    r.z_hat() - r.z_check()
}

/// The bottleneck term ϖ.
pub fn varpi(
    grid: &GridSystem,
    region: usize,
    y: f64,
    left: GridRef,
    right: GridRef,
    varsigma: f64,
) -> (f64, VarpiBranch) {
    let net = &grid.network;
    let dist = net.right_boundary(region) - y;
    if region + 1 < net.num_regions() && dist < varsigma {
        return (2.0 * hat_check_gap(grid, region + 1), VarpiBranch::Boundary);
    }
    if left == grid.hat(region) && right == grid.check(region) {
        (0.0, VarpiBranch::ActiveZero)
    } else {
        (2.0 * hat_check_gap(grid, region), VarpiBranch::Inactive)
    }
}

/// `C = 2 max_m (ẑ_m - ž_m)`.
pub fn temple_constant(grid: &GridSystem) -> f64 {
    (0..grid.regions.len()).map(|m| 2.0 * hat_check_gap(grid, m)).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TempleBreakdown {
    /// `(front id, weight)` in front order.
    pub contributions: Vec<(u64, f64)>,
    pub varpi: f64,
    pub branch: VarpiBranch,
    pub total: f64,
}

pub fn temple(state: &SimState) -> TempleBreakdown {
    let contributions: Vec<(u64, f64)> = state
        .fronts
        .iter()
        .map(|f| (f.id, front_temple(&state.grid, f.left, f.right, f.kind)))
        .collect();
    let (varpi, branch) = state.current_varpi();
    let total = contributions.iter().map(|c| c.1).sum::<f64>() + varpi;
    TempleBreakdown { contributions, varpi, branch, total }
}

/// Total variation of the z-profile, jumps at region boundaries included.
pub fn total_variation_z(grid: &GridSystem, profile: &StateProfile) -> f64 {
    z_profile(grid, profile).total_variation()
}

/// Same as [`total_variation_z`] for a plain value profile.
pub fn total_variation(profile: &Piecewise<f64>) -> f64 {
    profile.total_variation()
}

/// TV of the exact (unsampled) initial z-profile.
pub fn initial_tv_z(network: &RoadNetwork, init: &InitialProfile) -> f64 {
    let mut cuts: Vec<f64> = init.steps.iter().map(|s| s.0).chain(network.boundaries.iter().copied()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pw = init.as_piecewise();
    let z_at = |x: f64| psi_raw(network.gamma(network.region_of(x)), pw.eval(x));
    let mut prev = z_at(cuts.first().map_or(0.0, |c| c - 1.0));
    let mut tv = 0.0;
    for &c in &cuts {
        let z = z_at(c);
        tv += (z - prev).abs();
        prev = z;
    }
    tv
}

/// `f(γ, ρ(y±)) - ẏ ρ(y±) - F_α(y, ẏ)` on both sides of the bottleneck.
pub fn constraint_residual(state: &SimState) -> (f64, f64) {
    let g = &state.grid;
    let b = &state.bottleneck;
    let params = g.network.regions[b.region];
    let cap = f_alpha_capacity(params, g.network.alpha, b.speed);
    let res = |r: GridRef| {
        let rho = g.rho(r);
        flux_raw(g.gamma(r.region), rho) - b.speed * rho - cap
    };
    (res(state.left_of_bottleneck()), res(state.right_of_bottleneck()))
}

/// Bounds that every state of one run must respect.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunBounds {
    pub tv_z0: f64,
    pub tv_gamma: f64,
    pub c_temple: f64,
    /// `TV(z_∘) + TV(γ) + C`.
    pub tv_bound: f64,
    /// `max γ / 4`.
    pub sup_bound: f64,
    /// `max γ · (TV(z_∘) + 2 TV(γ) + C)`.
    pub lipschitz: f64,
}

impl RunBounds {
    pub fn new(grid: &GridSystem, initial: &StateProfile) -> Self {
        let tv_z0 = total_variation_z(grid, initial);
        let tv_gamma = grid.network.tv_gamma();
        let c_temple = temple_constant(grid);
        let gmax = grid.network.max_gamma();
        Self {
            tv_z0,
            tv_gamma,
            c_temple,
            tv_bound: tv_z0 + tv_gamma + c_temple,
            sup_bound: 0.25 * gmax,
            lipschitz: gmax * (tv_z0 + 2.0 * tv_gamma + c_temple),
        }
    }
}

/// One row of the diagnostics time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagRow {
    pub t: f64,
    pub temple: f64,
    pub tv_z: f64,
    pub sup_z: f64,
    pub front_count: usize,
    pub residual_left: f64,
    pub residual_right: f64,
    pub xi: f64,
}

pub fn diag_row(state: &SimState) -> DiagRow {
    let z = z_profile(&state.grid, &state.profile_at(state.t));
    let (residual_left, residual_right) = constraint_residual(state);
    let b = &state.bottleneck;
    let g = state.grid.gamma(b.region);
    DiagRow {
        t: state.t,
        temple: state.temple(),
        tv_z: z.total_variation(),
        sup_z: z.sup_abs(),
        front_count: state.front_count(),
        residual_left,
        residual_right,
        xi: psi_raw(g, b.speed / g),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiReport {
    /// `(t, ξ)` at every knot of the trajectory.
    pub series: Vec<(f64, f64)>,
    pub positive_variation: f64,
    pub total_variation: f64,
    pub sup: f64,
    /// Positive variation accumulated while the bottleneck was in each region.
    pub posvar_by_region: Vec<f64>,
    /// `TV ≤ 2 PV + sup|ξ|`, as stated for the monitor; reported, not enforced.
    pub stated_bound_holds: bool,
    /// `TV ≤ 2 PV + 2 sup|ξ|`, which always holds for a function of bounded variation.
    pub sharp_bound_holds: bool,
}

/// `ξ(t) = ψ(γ(y), ẏ/γ(y))` along the bottleneck path.
pub fn xi_monitor(knots: &[TrajectoryKnot], grid: &GridSystem) -> XiReport {
    let series: Vec<(f64, f64)> = knots
        .iter()
        .map(|k| {
            let g = grid.gamma(k.region);
            (k.t, psi_raw(g, k.ydot / g))
        })
        .collect();
    let mut pv = 0.0;
    let mut tv = 0.0;
    let mut by_region = vec![0.0; grid.regions.len()];
    for (i, w) in series.windows(2).enumerate() {
        let d = w[1].1 - w[0].1;
        tv += d.abs();
        if d > 0.0 {
            pv += d;
            by_region[knots[i + 1].region] += d;
        }
    }
    let sup = series.iter().fold(0.0f64, |m, s| m.max(s.1.abs()));
    XiReport {
        series,
        positive_variation: pv,
        total_variation: tv,
        sup,
        posvar_by_region: by_region,
        stated_bound_holds: tv <= 2.0 * pv + sup + 1e-12,
        sharp_bound_holds: tv <= 2.0 * pv + 2.0 * sup + 1e-12,
    }
}

/// Profile at time `t` rebuilt from front traces (fronts alive on `[t_start, t_end)`).
pub fn profile_from_traces(traces: &[FrontTrace], far_left: GridRef, t: f64) -> StateProfile {
    let mut alive: Vec<&FrontTrace> = traces.iter().filter(|f| f.t_start <= t && t < f.t_end).collect();
    alive.sort_by(|a, b| a.pos(t).total_cmp(&b.pos(t)).then(a.id.cmp(&b.id)));
    let mut breaks: Vec<f64> = Vec::with_capacity(alive.len());
    let mut values = vec![far_left];
    for f in alive {
        let x = f.pos(t);
        if breaks.last().is_some_and(|&l| x <= l) {
            *values.last_mut().unwrap() = f.right;
        } else {
            breaks.push(x);
            values.push(f.right);
        }
    }
    Piecewise::from_pieces(breaks, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MassAudit {
    pub mass_start: f64,
    pub mass_end: f64,
    /// `∫ (f - cρ)` through the left edge minus through the right edge.
    pub net_inflow: f64,
    pub residual: f64,
}

/// Mass balance over the window `[a + c t, b + c t]`, `t ∈ [t0, t1]`, from the
/// exact front history.
pub fn mass_balance(
    grid: &GridSystem,
    traces: &[FrontTrace],
    far_left: GridRef,
    window: (f64, f64),
    c: f64,
    t0: f64,
    t1: f64,
) -> Result<MassAudit> {
    let (a, b) = window;
    if !(a.is_finite() && b.is_finite() && a < b && t0 < t1) {
        return Err(Error::Window(format!("bad audit window [{a}, {b}] × [{t0}, {t1}]")));
    }
    let mass = |t: f64| {
        let p = rho_profile(grid, &profile_from_traces(traces, far_left, t));
        p.integral(a + c * t, b + c * t)
    };
    let edge_flux = |edge: f64| -> f64 {
        let mut cuts = vec![t0, t1];
        for f in traces {
            if f.speed != c {
                let t = (edge - f.x_start + f.speed * f.t_start) / (f.speed - c);
                if t > t0 && t < t1 && t >= f.t_start && t <= f.t_end {
                    cuts.push(t);
                }
            }
            for t in [f.t_start, f.t_end] {
                if t > t0 && t < t1 {
                    cuts.push(t);
                }
            }
        }
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        cuts.windows(2)
            .map(|w| {
                let tm = 0.5 * (w[0] + w[1]);
                let s = profile_from_traces(traces, far_left, tm).eval(edge + c * tm);
                let rho = grid.rho(s);
                (flux_raw(grid.gamma(s.region), rho) - c * rho) * (w[1] - w[0])
            })
            .sum()
    };
    let mass_start = mass(t0);
    let mass_end = mass(t1);
    let net_inflow = edge_flux(a) - edge_flux(b);
    Ok(MassAudit { mass_start, mass_end, net_inflow, residual: mass_end - mass_start - net_inflow })
}

/// `∫_0^T |ẏ_a - ẏ_b| dt` for two piecewise-constant speed histories.
pub fn ydot_l1(a: &[TrajectoryKnot], b: &[TrajectoryKnot], t_end: f64) -> f64 {
    let mut cuts: Vec<f64> = a.iter().chain(b).map(|k| k.t).filter(|&t| t < t_end).collect();
    cuts.push(0.0);
    cuts.push(t_end);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let at = |ks: &[TrajectoryKnot], t: f64| ks[ks.partition_point(|k| k.t <= t).saturating_sub(1)].ydot;
    cuts.windows(2).map(|w| (at(a, w[0]) - at(b, w[0])).abs() * (w[1] - w[0])).sum()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelReport {
    pub n: u32,
    /// `Σ_snapshots ‖ρ_n(t) - ρ_finest(t)‖_{L1(window)}`.
    pub l1_to_finest: f64,
    pub l1_per_snapshot: Vec<f64>,
    pub ydot_l1_to_finest: f64,
    pub tv_z_max: f64,
    pub temple_max: f64,
    pub max_fronts: usize,
    pub events: usize,
    pub tv_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub levels: Vec<u32>,
    pub finest: u32,
    pub window: (f64, f64),
    pub per_level: Vec<LevelReport>,
    /// L1 distance to the finest level strictly decreasing over the compared levels.
    pub l1_decreasing: bool,
    /// Bottleneck speed distance at the last compared level no larger than at the first.
    pub ydot_trend: bool,
    /// Every level's TV(z) stays under that level's own bound.
    pub tv_uniform: bool,
    /// `TV(z_∘) + TV(γ) + C` from the exact (unsampled) data; informational,
    /// since floor sampling can add up to one cell per jump.
    pub common_tv_bound: f64,
    pub tv_z_max: f64,
}

/// Run the scenario at every level and at `finest`, and compare.
pub fn convergence_study(scenario: &Scenario, levels: &[u32], finest: u32, window: Option<(f64, f64)>) -> Result<ConvergenceReport> {
    if levels.is_empty() {
        return Err(Error::Config("convergence study needs at least one level".into()));
    }
    let mut all: Vec<u32> = levels.to_vec();
    all.push(finest);
    let runs = batch::map(&all, |&n| scenario.run(n));
    let runs: Vec<_> = runs.into_iter().collect::<Result<_>>()?;
    let fine = runs.last().unwrap();
    let window = window.unwrap_or_else(|| scenario.default_window());

    let exact_tv = initial_tv_z(&scenario.network, &scenario.initial);
    let c = temple_constant(&fine.state.grid);
    let common_tv_bound = exact_tv + scenario.network.tv_gamma() + c;

    let mut per_level = Vec::new();
    for (k, &n) in levels.iter().enumerate() {
        let run = &runs[k];
        let mut per = Vec::new();
        for (s, f) in run.snapshots.iter().zip(&fine.snapshots) {
            let a = rho_profile(&run.state.grid, &s.profile);
            let b = rho_profile(&fine.state.grid, &f.profile);
            per.push(l1_distance(&a, &b, window)?);
        }
        per_level.push(LevelReport {
            n,
            l1_to_finest: per.iter().sum(),
            l1_per_snapshot: per,
            ydot_l1_to_finest: ydot_l1(&run.state.trajectory, &fine.state.trajectory, scenario.t_end),
            tv_z_max: run.tv_z_max,
            temple_max: run.temple_max,
            max_fronts: run.state.max_front_count(),
            events: run.state.events.len(),
            tv_bound: run.bounds.tv_bound,
        });
    }
    let l1_decreasing = per_level.windows(2).all(|w| w[1].l1_to_finest < w[0].l1_to_finest);
    let ydot_trend = per_level.last().unwrap().ydot_l1_to_finest <= per_level[0].ydot_l1_to_finest + 1e-15;
    let tv_uniform = runs.iter().all(|r| r.tv_z_max <= r.bounds.tv_bound + 1e-10);
    let tv_z_max = runs.iter().map(|r| r.tv_z_max).fold(0.0, f64::max);
    Ok(ConvergenceReport {
        levels: levels.to_vec(),
        finest,
        window,
        per_level,
        l1_decreasing,
        ydot_trend,
        tv_uniform,
        common_tv_bound,
        tv_z_max,
    })
}

/// Pass/fail summary of the per-run checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunVerdict {
    /// Largest `T_after - T_before` over all events.
    pub max_temple_increase: f64,
    pub temple_monotone: bool,
    pub tv_within_bound: bool,
    pub sup_within_bound: bool,
    /// Largest positive constraint residual over events and snapshots.
    pub max_residual: f64,
    pub constraint_ok: bool,
    /// Largest `‖z(t) - z(s)‖_{L1} / |t - s|` over snapshot pairs.
    pub lipschitz_ratio: f64,
    pub lipschitz_ok: bool,
}

impl RunVerdict {
    pub fn passed(&self) -> bool {
        self.temple_monotone && self.tv_within_bound && self.sup_within_bound && self.constraint_ok && self.lipschitz_ok
    }
}

pub fn verify_run(run: &RunResult, temple_tol: f64, constraint_tol: f64) -> Result<RunVerdict> {
    let max_temple_increase =
        run.state.events.iter().map(|e| e.temple_after - e.temple_before).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-10;
    let tv_within_bound = run.tv_z_max <= run.bounds.tv_bound + tol
        && run.snapshots.iter().all(|s| total_variation_z(&run.state.grid, &s.profile) <= run.bounds.tv_bound + tol);
    let sup_within_bound = run.sup_z_max <= run.bounds.sup_bound + tol;
    let max_residual = run
        .diagnostics
        .iter()
        .flat_map(|d| [d.residual_left, d.residual_right])
        .fold(f64::NEG_INFINITY, f64::max);
    let grid = &run.state.grid;
    let zs: Vec<(f64, Piecewise<f64>)> = run.snapshots.iter().map(|s| (s.t, z_profile(grid, &s.profile))).collect();
    let mut lipschitz_ratio: f64 = 0.0;
    for (i, (t, a)) in zs.iter().enumerate() {
        for (s, b) in &zs[i + 1..] {
            if s > t {
                let lo = a.breaks.first().into_iter().chain(b.breaks.first()).fold(0.0, |m: f64, &x| m.min(x));
                let hi = a.breaks.last().into_iter().chain(b.breaks.last()).fold(0.0, |m: f64, &x| m.max(x));
                let d = l1_distance(a, b, (lo - 1.0, hi + 1.0))?;
                lipschitz_ratio = lipschitz_ratio.max(d / (s - t));
            }
        }
    }
    Ok(RunVerdict {
        max_temple_increase: max_temple_increase.max(0.0),
        temple_monotone: max_temple_increase <= temple_tol,
        tv_within_bound,
        sup_within_bound,
        max_residual: max_residual.max(0.0),
        constraint_ok: max_residual <= constraint_tol,
        lipschitz_ratio,
        lipschitz_ok: lipschitz_ratio <= run.bounds.lipschitz * (1.0 + 1e-9) + 1e-12,
    })
}
