//! Run configuration in TOML.
//!
//! ```toml
//! alpha = 0.6
//! y0 = 0.0
//! t_end = 2.0
//! n = 6                  # optional; defaults to the smallest admissible level
//! levels = [5, 6, 7]     # for convergence studies
//! finest = 9
//! snapshots = [1.0, 2.0]
//! output = "runs/case1"
//!
//! [network]
//! boundaries = [1.0]
//! gamma = [1.0, 2.0]
//! v_b = [0.3, 0.5]
//!
//! [initial]
//! left = 0.4
//! steps = [[0.5, 0.2], [3.0, 0.6]]
//!
//! [tolerances]
//! collision = 1e-12
//! constraint = 1e-8
//! temple = 1e-10
//! front_cap = 1000000
//! varsigma = 0.0       # optional; defaults to 2 δ̄ of the grid
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::RegionParams;
use crate::grid::admissible_level;
use crate::network::RoadNetwork;
use crate::profile::InitialProfile;
use crate::sim::{RunOptions, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    #[serde(default)]
    pub boundaries: Vec<f64>,
    pub gamma: Vec<f64>,
    pub v_b: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub collision: f64,
    pub constraint: f64,
    pub temple: f64,
    pub front_cap: usize,
    pub cascade_limit: usize,
    pub varsigma: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        let o = RunOptions::default();
        Self {
            collision: o.collision_tol,
            constraint: 1e-8,
            temple: 1e-10,
            front_cap: o.front_cap,
            cascade_limit: o.cascade_limit,
            varsigma: o.varsigma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub alpha: f64,
    #[serde(default)]
    pub y0: f64,
    pub t_end: f64,
    #[serde(default)]
    pub n: Option<u32>,
    #[serde(default)]
    pub levels: Vec<u32>,
    #[serde(default)]
    pub finest: Option<u32>,
    #[serde(default)]
    pub snapshots: Vec<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    pub network: NetworkSpec,
    #[serde(default)]
    pub initial: InitialProfile,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// A validated configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub scenario: Scenario,
    /// Level to run at (explicit or the smallest admissible one).
    pub n: u32,
    pub tolerances: Tolerances,
}

impl RunConfig {
    pub fn output_dir(&self) -> PathBuf {
        self.raw.output.clone().unwrap_or_else(|| PathBuf::from("run"))
    }
}

fn invalid(e: impl std::fmt::Display) -> Error {
    Error::Config(e.to_string())
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(invalid)?;
    validate(raw)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let raw: RawConfig =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    validate(raw)
}

pub fn validate(raw: RawConfig) -> Result<RunConfig> {
    let net = &raw.network;
    if net.gamma.len() != net.v_b.len() {
        return Err(invalid("network.gamma and network.v_b must have the same length"));
    }
    let regions = net
        .gamma
        .iter()
        .zip(&net.v_b)
        .map(|(&g, &v)| RegionParams::new(g, v))
        .collect::<Result<Vec<_>>>()
        .map_err(invalid)?;
    let network = RoadNetwork::new(net.boundaries.clone(), regions, raw.alpha).map_err(invalid)?;
    raw.initial.validate().map_err(invalid)?;
    if !(raw.t_end > 0.0 && raw.t_end.is_finite()) {
        return Err(invalid(format!("t_end = {} must be positive", raw.t_end)));
    }
    if !raw.y0.is_finite() {
        return Err(invalid("y0 must be finite"));
    }
    if raw.snapshots.iter().any(|&s| !(0.0..=raw.t_end).contains(&s)) {
        return Err(invalid("snapshot times must lie in [0, t_end]"));
    }
    let tol = raw.tolerances;
    if !(tol.collision > 0.0 && tol.constraint > 0.0 && tol.temple >= 0.0 && tol.varsigma.is_none_or(|v| v >= 0.0)) {
        return Err(invalid("tolerances must be positive"));
    }
    if tol.front_cap == 0 || tol.cascade_limit == 0 {
        return Err(invalid("front_cap and cascade_limit must be positive"));
    }
    let n = match raw.n {
        Some(n) => n,
        None => admissible_level(&network).map_err(invalid)?,
    };
    let options = RunOptions {
        collision_tol: tol.collision,
        front_cap: tol.front_cap,
        cascade_limit: tol.cascade_limit,
        varsigma: tol.varsigma,
        check_invariants: true,
    };
    let mut snapshots = raw.snapshots.clone();
    snapshots.sort_by(f64::total_cmp);
    let scenario = Scenario {
        network,
        initial: raw.initial.clone(),
        y0: raw.y0,
        t_end: raw.t_end,
        snapshots,
        options,
    };
    Ok(RunConfig { raw, scenario, n, tolerances: tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        alpha = 0.6
        t_end = 1.0
        [network]
        gamma = [1.0]
        v_b = [0.3]
    "#;

    #[test]
    fn minimal_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.tolerances, Tolerances::default());
        assert_eq!(c.tolerances.front_cap, 1_000_000);
        assert_eq!(c.scenario.y0, 0.0);
        assert_eq!(c.scenario.initial, InitialProfile::default());
        assert_eq!(c.n, admissible_level(&c.scenario.network).unwrap());
    }

    #[test]
    fn non_dyadic_gamma() {
        let e = parse_config(&MINIMAL.replace("gamma = [1.0]", "gamma = [0.7]")).unwrap_err();
        assert!(e.to_string().contains("gamma not dyadic"), "{e}");
    }

    #[test]
    fn alpha_out_of_range() {
        let e = parse_config(&MINIMAL.replace("alpha = 0.6", "alpha = 1.2")).unwrap_err();
        assert!(matches!(e, Error::Config(_)));
        assert!(e.to_string().contains("alpha"));
    }

    #[test]
    fn parse_error_has_line() {
        let e = parse_config("alpha = 0.6\nt_end = \n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn profile_values_checked() {
        let text = format!("{MINIMAL}\n[initial]\nleft = 1.5\n");
        assert!(parse_config(&text).is_err());
    }
}
