//! Riemann solvers on grid states.
//!
//! Within one region the flux is strictly concave, so an increasing jump is a
//! single Lax shock and a decreasing jump becomes a fan of sub-fronts between
//! adjacent grid states. Across a region boundary the standing γ-jump is
//! chosen by the minimum-jump rule: the interface carries the flux level
//! `min(demand_L, supply_R)`, and the traces on either side are the grid
//! states at that level closest to the data.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::flux::{f_alpha_capacity, flux_raw, velocity_raw};
use crate::grid::{GridRef, GridSystem, LEVEL_EPS};

/// Speeds this close to zero (relative to γ) are rounding noise of `γ(1 - ρ - (1 - ρ))`.
const ZERO_SPEED_EPS: f64 = 1e-13;
/// Slack for the speed ordering checks in the constrained solver.
const ORDER_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WaveKind {
    Shock,
    /// One sub-front of a discretised rarefaction fan.
    Rarefaction,
    GammaJump,
    NonClassical,
}

impl WaveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            WaveKind::Shock => "shock",
            WaveKind::Rarefaction => "rarefaction",
            WaveKind::GammaJump => "gamma_jump",
            WaveKind::NonClassical => "non_classical",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wave {
    pub left: GridRef,
    pub right: GridRef,
    pub kind: WaveKind,
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveSequence {
    pub left: GridRef,
    pub right: GridRef,
    pub waves: Vec<Wave>,
}

impl WaveSequence {
    pub fn is_empty(&self) -> bool {
        self.waves.is_empty()
    }

    pub fn len(&self) -> usize {
        self.waves.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RiemannInput {
    pub left: GridRef,
    pub right: GridRef,
    /// Solve with the bottleneck constraint of the right state's region.
    pub constrained: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintCase {
    /// Constraint violated by the classical solution: non-classical shock at `V_b`.
    Active,
    /// Classical solution satisfies the constraint, bottleneck moves at `V_b`.
    Free,
    /// Traffic slower than the bottleneck: it moves at `v(γ, ρ_R)`.
    Blocked,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstrainedSolution {
    pub seq: WaveSequence,
    pub ydot: f64,
    pub case: ConstraintCase,
}

fn snap_zero(speed: f64, gamma: f64) -> f64 {
    if speed.abs() <= ZERO_SPEED_EPS * gamma {
        0.0
    } else {
        speed
    }
}

/// Classical solution inside one region.
fn solve_same(grid: &GridSystem, l: GridRef, r: GridRef) -> Vec<Wave> {
    debug_assert_eq!(l.region, r.region);
    let g = grid.gamma(l.region);
    let speed = |a: GridRef, b: GridRef| snap_zero(g * (1.0 - grid.rho(a) - grid.rho(b)), g);
    if l.index == r.index {
        vec![]
    } else if l.index < r.index {
        vec![Wave { left: l, right: r, kind: WaveKind::Shock, speed: speed(l, r) }]
    } else {
        (r.index..l.index)
            .rev()
            .map(|i| {
                let a = GridRef::new(l.region, i + 1);
                let b = GridRef::new(l.region, i);
                Wave { left: a, right: b, kind: WaveKind::Rarefaction, speed: speed(a, b) }
            })
            .collect()
    }
}

/// Traces `(ρ'_L, ρ'_R)` of the standing jump between two regions, and its flux level.
pub fn envelope_cross(grid: &GridSystem, l: GridRef, r: GridRef) -> Result<(GridRef, GridRef, f64)> {
    if l.region == r.region {
        return Err(Error::Degenerate("envelope_cross needs two different regions".into()));
    }
    let (ml, mr) = (l.region, r.region);
    let (half_l, half_r) = (grid.half(ml), grid.half(mr));
    let l_low = l.index <= half_l.index;
    let r_high = r.index >= half_r.index;
    let demand = if l_low { grid.flux(l) } else { 0.25 * grid.gamma(ml) };
    let supply = if r_high { grid.flux(r) } else { 0.25 * grid.gamma(mr) };

    if demand < supply - LEVEL_EPS {
        let lp = if l_low { l } else { half_l };
        let rp = grid.at_level(mr, demand, false)?;
        Ok((lp, rp, demand))
    } else if supply < demand - LEVEL_EPS {
        let lp = grid.at_level(ml, supply, true)?;
        let rp = if r_high { r } else { half_r };
        Ok((lp, rp, supply))
    } else {
        let level = demand.min(supply);
        let lp = if l_low { l } else { half_l };
        let rp = if r_high { r } else { half_r };
        let straddles = grid.rho(lp) < 0.5 && grid.rho(rp) > 0.5;
        if !straddles {
            return Ok((lp, rp, level));
        }
        // Both traces equal the data but sit on opposite sides of ½. Keep the
        // jump on one side and add a standing shock to the mirror state,
        // whichever moves the data less.
        let cost_right = 2.0 * grid.rho(r) - 1.0;
        let cost_left = 1.0 - 2.0 * grid.rho(l);
        // Exact ties (mirror-image data) keep the left state.
        if cost_right <= cost_left + LEVEL_EPS {
            Ok((l, grid.at_level(mr, level, false)?, level))
        } else {
            Ok((grid.at_level(ml, level, true)?, r, level))
        }
    }
}

/// Classical (unconstrained) Riemann solver.
pub fn solve_classical(grid: &GridSystem, l: GridRef, r: GridRef) -> Result<WaveSequence> {
    let waves = if l.region == r.region {
        solve_same(grid, l, r)
    } else {
        let (lp, rp, _) = envelope_cross(grid, l, r)?;
        let mut w = solve_same(grid, l, lp);
        w.push(Wave { left: lp, right: rp, kind: WaveKind::GammaJump, speed: 0.0 });
        w.extend(solve_same(grid, rp, r));
        w
    };
    Ok(WaveSequence { left: l, right: r, waves })
}

/// State at `ξ = x/t`; a wave travelling exactly at `ξ` yields its right state.
pub fn evaluate_solution(seq: &WaveSequence, xi: f64) -> GridRef {
    let mut state = seq.left;
    for w in &seq.waves {
        if w.speed <= xi {
            state = w.right;
        } else {
            break;
        }
    }
    state
}

/// Constrained Riemann solver with the bottleneck at `x = 0`, using the
/// constraint of the right state's region.
pub fn solve_constrained(grid: &GridSystem, l: GridRef, r: GridRef) -> Result<ConstrainedSolution> {
    let m = r.region;
    let reg = grid.region(m);
    let (g, vb) = (reg.gamma, reg.v_b);
    let alpha = grid.network.alpha;
    let classical = solve_classical(grid, l, r)?;
    let u = evaluate_solution(&classical, vb);
    if u.region != m {
        return Err(Error::Invariant(format!(
            "trace at the bottleneck speed lies in region {} instead of {m}",
            u.region
        )));
    }

    // f(u) - V_b u - F_α changes sign exactly at ρ̌ and ρ̂, and f(u) - V_b u at ρ*;
    // comparing grid indices keeps the boundary cases exact.
    let sol = if u.index > reg.check && u.index < reg.hat {
        let hat = grid.hat(m);
        let check = grid.check(m);
        let left = solve_classical(grid, l, hat)?;
        let right = solve_classical(grid, check, r)?;
        if let Some(w) = left.waves.iter().find(|w| w.speed > vb + ORDER_EPS) {
            return Err(Error::Invariant(format!(
                "upstream wave at speed {} overtakes the bottleneck ({vb})",
                w.speed
            )));
        }
        if let Some(w) = right.waves.iter().find(|w| w.speed < vb - ORDER_EPS) {
            return Err(Error::Invariant(format!(
                "downstream wave at speed {} lags the bottleneck ({vb})",
                w.speed
            )));
        }
        let mut waves = left.waves;
        waves.push(Wave { left: hat, right: check, kind: WaveKind::NonClassical, speed: vb });
        waves.extend(right.waves);
        ConstrainedSolution { seq: WaveSequence { left: l, right: r, waves }, ydot: vb, case: ConstraintCase::Active }
    } else if u.index > reg.star {
        let ydot = velocity_raw(g, grid.rho(u));
        ConstrainedSolution { seq: classical, ydot, case: ConstraintCase::Blocked }
    } else {
        ConstrainedSolution { seq: classical, ydot: vb, case: ConstraintCase::Free }
    };

    let trace = evaluate_solution(&sol.seq, vb);
    let rho = grid.rho(trace);
    let cap = f_alpha_capacity(reg_params(grid, m), alpha, vb);
    if flux_raw(g, rho) - vb * rho > cap + 1e-10 {
        return Err(Error::Invariant(format!(
            "constrained solution violates the capacity at the bottleneck: ρ = {rho}"
        )));
    }
    Ok(sol)
}

fn reg_params(grid: &GridSystem, m: usize) -> crate::flux::RegionParams {
    grid.network.regions[m]
}

/// Dispatch on [`RiemannInput::constrained`]; the bottleneck speed is `None` when unconstrained.
pub fn solve(grid: &GridSystem, input: RiemannInput) -> Result<(WaveSequence, Option<f64>)> {
    if input.constrained {
        let s = solve_constrained(grid, input.left, input.right)?;
        Ok((s.seq, Some(s.ydot)))
    } else {
        Ok((solve_classical(grid, input.left, input.right)?, None))
    }
}
