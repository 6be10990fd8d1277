//! Piecewise-constant profiles on the real line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridRef, GridSystem};

/// Right-continuous step function: `values[0]` on `(-∞, breaks[0])`,
/// `values[i]` on `[breaks[i-1], breaks[i])`, `values[k]` on `[breaks[k-1], ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piecewise<T> {
    pub breaks: Vec<f64>,
    pub values: Vec<T>,
}

impl<T: Copy + PartialEq> Piecewise<T> {
    pub fn constant(v: T) -> Self {
        Self { breaks: vec![], values: vec![v] }
    }

    /// Build from raw pieces, dropping breaks between equal values.
    pub fn from_pieces(breaks: Vec<f64>, values: Vec<T>) -> Self {
        debug_assert_eq!(breaks.len() + 1, values.len());
        let mut out = Self { breaks: Vec::with_capacity(breaks.len()), values: vec![values[0]] };
        for (b, v) in breaks.into_iter().zip(values.into_iter().skip(1)) {
            if *out.values.last().unwrap() != v {
                out.breaks.push(b);
                out.values.push(v);
            }
        }
        out
    }

    pub fn eval(&self, x: f64) -> T {
        self.values[self.breaks.partition_point(|&b| b <= x)]
    }

    /// Value just left of `x`.
    pub fn eval_left(&self, x: f64) -> T {
        self.values[self.breaks.partition_point(|&b| b < x)]
    }

    pub fn map<U: Copy + PartialEq>(&self, f: impl Fn(T) -> U) -> Piecewise<U> {
        Piecewise { breaks: self.breaks.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }
}

impl Piecewise<f64> {
    pub fn total_variation(&self) -> f64 {
        self.values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `∫_lo^hi self dx`, exactly.
    pub fn integral(&self, lo: f64, hi: f64) -> f64 {
        let mut acc = 0.0;
        let mut x = lo;
        let mut i = self.breaks.partition_point(|&b| b <= lo);
        while x < hi {
            let next = self.breaks.get(i).copied().unwrap_or(f64::INFINITY).min(hi);
            acc += self.values[i] * (next - x);
            x = next;
            i += 1;
        }
        acc
    }
}

/// Total variation of a sequence of values.
pub fn total_variation(values: &[f64]) -> f64 {
    values.windows(2).map(|w| (w[1] - w[0]).abs()).sum()
}

/// Exact `∫_window |a - b| dx` by merging breakpoints.
pub fn l1_distance(a: &Piecewise<f64>, b: &Piecewise<f64>, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Window(format!("window [{lo}, {hi}] must be bounded")));
    }
    if hi < lo {
        return Err(Error::Window(format!("window [{lo}, {hi}] is reversed")));
    }
    let mut cuts: Vec<f64> = a
        .breaks
        .iter()
        .chain(&b.breaks)
        .copied()
        .filter(|&x| x > lo && x < hi)
        .collect();
    cuts.push(lo);
    cuts.push(hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    Ok(cuts
        .windows(2)
        .map(|w| (a.eval(w[0]) - b.eval(w[0])).abs() * (w[1] - w[0]))
        .sum())
}

/// Initial density as configured: `left` on `(-∞, steps[0].0)`, then each
/// `(x, value)` step from `x` on.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct InitialProfile {
    pub left: f64,
    #[serde(default)]
    pub steps: Vec<(f64, f64)>,
}

impl InitialProfile {
    pub fn constant(rho: f64) -> Self {
        Self { left: rho, steps: vec![] }
    }

    pub fn validate(&self) -> Result<()> {
        for v in std::iter::once(self.left).chain(self.steps.iter().map(|s| s.1)) {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(v));
            }
        }
        if self.steps.iter().any(|s| !s.0.is_finite()) {
            return Err(Error::Config("initial step positions must be finite".into()));
        }
        if self.steps.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::Config("initial step positions must be strictly increasing".into()));
        }
        Ok(())
    }

    pub fn as_piecewise(&self) -> Piecewise<f64> {
        let mut values = vec![self.left];
        values.extend(self.steps.iter().map(|s| s.1));
        Piecewise { breaks: self.steps.iter().map(|s| s.0).collect(), values }
    }
}

pub type StateProfile = Piecewise<GridRef>;

/// Floor the initial datum onto the grid of each region.
///
/// Region boundaries always become breakpoints (the states on either side
/// belong to different regions).
pub fn sample_initial(grid: &GridSystem, init: &InitialProfile) -> Result<StateProfile> {
    init.validate()?;
    let net = &grid.network;
    let mut cuts: Vec<f64> = init.steps.iter().map(|s| s.0).chain(net.boundaries.iter().copied()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let pw = init.as_piecewise();
    let mut states = Vec::with_capacity(cuts.len() + 1);
    let left_x = cuts.first().map_or(0.0, |&c| c - 1.0);
    states.push(grid.floor(net.region_of(left_x), pw.eval(left_x)));
    for &c in &cuts {
        states.push(grid.floor(net.region_of(c), pw.eval(c)));
    }
    Ok(Piecewise::from_pieces(cuts, states))
}

/// Resample an existing state profile through the densities it represents.
pub fn resample(grid: &GridSystem, p: &StateProfile) -> StateProfile {
    Piecewise::from_pieces(p.breaks.clone(), p.values.iter().map(|&r| grid.floor(r.region, grid.rho(r))).collect())
}

pub fn z_profile(grid: &GridSystem, p: &StateProfile) -> Piecewise<f64> {
    Piecewise { breaks: p.breaks.clone(), values: p.values.iter().map(|&r| grid.z(r)).collect() }
}

pub fn rho_profile(grid: &GridSystem, p: &StateProfile) -> Piecewise<f64> {
    Piecewise { breaks: p.breaks.clone(), values: p.values.iter().map(|&r| grid.rho(r)).collect() }
}
