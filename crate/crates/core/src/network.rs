use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flux::{critical_densities, CriticalDensities, ModelParams, RegionParams};

/// Deepest dyadic denominator accepted for speed limits: γ = k / 2^p with p ≤ this.
pub const MAX_DYADIC_DEPTH: u32 = 20;

/// Road with piecewise-constant speed limit and bottleneck speed.
///
/// Region `m` is `[a_m, a_{m+1})` with `a_0 = -∞` and `a_{M+1} = +∞`, so there
/// are `boundaries.len() + 1` regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadNetwork {
    pub boundaries: Vec<f64>,
    pub regions: Vec<RegionParams>,
    pub alpha: f64,
}

/// Smallest `p` with `x · 2^p` an integer, if `p ≤ max_depth`.
pub fn dyadic_depth(x: f64, max_depth: u32) -> Option<u32> {
    (0..=max_depth).find(|&p| {
        let s = x * (1u64 << p) as f64;
        s.fract() == 0.0
    })
}

impl RoadNetwork {
    pub fn new(boundaries: Vec<f64>, regions: Vec<RegionParams>, alpha: f64) -> Result<Self> {
        let net = Self { boundaries, regions, alpha };
        net.validate()?;
        Ok(net)
    }

    /// Single region covering the whole line.
    pub fn uniform(gamma: f64, v_b: f64, alpha: f64) -> Result<Self> {
        Self::new(vec![], vec![RegionParams::new(gamma, v_b)?], alpha)
    }

    pub fn validate(&self) -> Result<()> {
        ModelParams::new(self.alpha)?;
        if self.regions.len() != self.boundaries.len() + 1 {
            return Err(Error::Network(format!(
                "{} boundaries need {} regions, got {}",
                self.boundaries.len(),
                self.boundaries.len() + 1,
                self.regions.len()
            )));
        }
        if self.boundaries.iter().any(|a| !a.is_finite()) {
            return Err(Error::Network("boundaries must be finite".into()));
        }
        if self.boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Network("boundaries must be strictly increasing".into()));
        }
        for r in &self.regions {
            RegionParams::new(r.gamma, r.v_b)?;
            if dyadic_depth(r.gamma, MAX_DYADIC_DEPTH).is_none() {
                return Err(Error::Network(format!(
                    "gamma not dyadic: {} is not k/2^p with p <= {MAX_DYADIC_DEPTH}",
                    r.gamma
                )));
            }
        }
        Ok(())
    }

    pub fn num_regions(&self) -> usize {
        self.regions.len()
    }

    /// Region containing `x`; a boundary point belongs to the region on its right.
    pub fn region_of(&self, x: f64) -> usize {
        self.boundaries.partition_point(|&a| a <= x)
    }

    /// Right end of region `m` (`+∞` for the last one).
    pub fn right_boundary(&self, m: usize) -> f64 {
        self.boundaries.get(m).copied().unwrap_or(f64::INFINITY)
    }

    pub fn gamma(&self, m: usize) -> f64 {
        self.regions[m].gamma
    }

    pub fn max_gamma(&self) -> f64 {
        self.regions.iter().map(|r| r.gamma).fold(0.0, f64::max)
    }

    /// Total variation of the speed-limit profile.
    pub fn tv_gamma(&self) -> f64 {
        self.regions.windows(2).map(|w| (w[1].gamma - w[0].gamma).abs()).sum()
    }

    pub fn critical(&self, m: usize) -> CriticalDensities {
        critical_densities(self.regions[m], self.alpha)
    }

    /// Smallest level `n` with every `γ_m · 2^n` an integer.
    pub fn alignment_level(&self) -> u32 {
        self.regions
            .iter()
            .filter_map(|r| dyadic_depth(r.gamma, MAX_DYADIC_DEPTH))
            .max()
            .unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rp(g: f64, v: f64) -> RegionParams {
        RegionParams::new(g, v).unwrap()
    }

    #[test]
    fn dyadic() {
        assert_eq!(dyadic_depth(1.0, 20), Some(0));
        assert_eq!(dyadic_depth(0.5, 20), Some(1));
        assert_eq!(dyadic_depth(1.375, 20), Some(3));
        assert_eq!(dyadic_depth(0.3, 20), None);
    }

    #[test]
    fn region_lookup() {
        let net = RoadNetwork::new(vec![0.0, 1.0], vec![rp(1.0, 0.3); 3], 0.6).unwrap();
        assert_eq!(net.region_of(-5.0), 0);
        assert_eq!(net.region_of(0.0), 1);
        assert_eq!(net.region_of(0.5), 1);
        assert_eq!(net.region_of(1.0), 2);
        assert_eq!(net.right_boundary(0), 0.0);
        assert_eq!(net.right_boundary(2), f64::INFINITY);
    }

    #[test]
    fn rejects_bad_networks() {
        assert!(RoadNetwork::new(vec![0.0], vec![rp(1.0, 0.3)], 0.6).is_err());
        assert!(RoadNetwork::new(vec![1.0, 0.0], vec![rp(1.0, 0.3); 3], 0.6).is_err());
        let e = RoadNetwork::uniform(0.3, 0.1, 0.6).unwrap_err();
        assert!(e.to_string().contains("gamma not dyadic"));
        assert!(RoadNetwork::uniform(1.0, 0.3, 1.2).is_err());
    }

    #[test]
    fn tv_and_alignment() {
        let net =
            RoadNetwork::new(vec![0.0, 1.0], vec![rp(1.0, 0.3), rp(1.5, 0.3), rp(0.25, 0.1)], 0.6)
                .unwrap();
        assert_eq!(net.tv_gamma(), 1.75);
        assert_eq!(net.alignment_level(), 2);
        assert_eq!(net.max_gamma(), 1.5);
    }
}
