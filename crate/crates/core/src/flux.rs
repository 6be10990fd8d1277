//! Closed-form scalar functions of the traffic model.
//!
//! The flux is the LWR flux `f(γ, ρ) = γ ρ (1 - ρ)` with the maximal density
//! normalised to one. Everything here is pure; densities are validated at the
//! public boundary and the `*_raw` helpers skip the check for inner loops that
//! only ever see grid densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Global model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Maximal density. Fixed to one.
    pub rho_max: f64,
    /// Capacity-reduction factor at the bottleneck, in (0, 1).
    pub alpha: f64,
}

impl ModelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Network(format!("alpha = {alpha} must lie in (0, 1)")));
        }
        Ok(Self { rho_max: 1.0, alpha })
    }
}

/// Speed limit and bottleneck maximal speed of one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionParams {
    pub gamma: f64,
    pub v_b: f64,
}

impl RegionParams {
    pub fn new(gamma: f64, v_b: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Network(format!("gamma = {gamma} must be positive")));
        }
        if !(v_b >= 0.0 && v_b < gamma) {
            return Err(Error::Network(format!(
                "bottleneck speed {v_b} must satisfy 0 <= v_b < gamma = {gamma}"
            )));
        }
        Ok(Self { gamma, v_b })
    }
}

/// The densities where the constraint line `F_α + V_b ρ` meets the
/// fundamental diagram, plus the threshold `ρ*` above which the bottleneck
/// slows down to the traffic speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalDensities {
    pub rho_star: f64,
    pub rho_check: f64,
    pub rho_hat: f64,
}

fn check_density(rho: f64) -> Result<()> {
    if (0.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(Error::Domain(rho))
    }
}

#[inline]
pub fn flux_raw(gamma: f64, rho: f64) -> f64 {
    gamma * rho * (1.0 - rho)
}

#[inline]
pub fn velocity_raw(gamma: f64, rho: f64) -> f64 {
    gamma * (1.0 - rho)
}

#[inline]
pub(crate) fn psi_raw(gamma: f64, rho: f64) -> f64 {
    let d = 2.0 * rho - 1.0;
    let s = if rho > 0.5 {
        1.0
    } else if rho < 0.5 {
        -1.0
    } else {
        0.0
    };
    0.25 * gamma * s * d * d
}

#[inline]
pub(crate) fn psi_inv_raw(gamma: f64, z: f64) -> f64 {
    let r = (4.0 * z.abs() / gamma).min(1.0).sqrt();
    let s = if z > 0.0 {
        1.0
    } else if z < 0.0 {
        -1.0
    } else {
        0.0
    };
    0.5 * (1.0 + s * r)
}

/// `f(γ, ρ) = γ ρ (1 - ρ)`.
pub fn flux(gamma: f64, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(flux_raw(gamma, rho))
}

/// Mean traffic speed `v(γ, ρ) = γ (1 - ρ)`.
pub fn velocity(gamma: f64, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(velocity_raw(gamma, rho))
}

/// Capacity at the bottleneck, `F_α = α (γ - ẏ)² / (4γ)`.
///
/// The bottleneck speed is an explicit argument; the Riemann solver passes
/// the region's maximal bottleneck speed.
pub fn f_alpha_capacity(region: RegionParams, alpha: f64, ydot: f64) -> f64 {
    let d = region.gamma - ydot;
    alpha * d * d / (4.0 * region.gamma)
}

/// `ρ* = 1 - V_b / γ`.
pub fn rho_star(region: RegionParams) -> f64 {
    1.0 - region.v_b / region.gamma
}

/// Roots of `f(γ, ρ) = F_α(V_b) + V_b ρ` in closed form.
pub fn critical_densities(region: RegionParams, alpha: f64) -> CriticalDensities {
    let RegionParams { gamma, v_b } = region;
    let root = (1.0 - alpha).sqrt();
    let scale = (gamma - v_b) / (2.0 * gamma);
    CriticalDensities {
        rho_star: rho_star(region),
        rho_check: scale * (1.0 - root),
        rho_hat: scale * (1.0 + root),
    }
}

/// Rankine–Hugoniot speed between two densities of the same region.
///
/// For the quadratic flux this is exactly `γ (1 - ρ1 - ρ2)`.
pub fn shock_speed(gamma: f64, rho1: f64, rho2: f64) -> Result<f64> {
    check_density(rho1)?;
    check_density(rho2)?;
    if rho1 == rho2 {
        return Err(Error::Degenerate(format!("shock between equal densities {rho1}")));
    }
    Ok(gamma * (1.0 - rho1 - rho2))
}

/// The homeomorphism `ψ(γ, ρ) = (γ/4) sign(ρ - ½) (2ρ - 1)²` onto `[-γ/4, γ/4]`.
pub fn psi(gamma: f64, rho: f64) -> Result<f64> {
    check_density(rho)?;
    Ok(psi_raw(gamma, rho))
}

/// Inverse of [`psi`].
pub fn psi_inv(gamma: f64, z: f64) -> Result<f64> {
    let bound = 0.25 * gamma;
    if z.abs() > bound * (1.0 + 1e-14) {
        return Err(Error::Range { z, bound });
    }
    Ok(psi_inv_raw(gamma, z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn flux_examples() {
        assert_eq!(flux(1.0, 0.5).unwrap(), 0.25);
        assert_eq!(flux(1.0, 0.0).unwrap(), 0.0);
        assert_eq!(flux(1.0, 1.0).unwrap(), 0.0);
        assert!(close(flux(2.0, 0.25).unwrap(), 0.375, 1e-15));
        assert_eq!(flux(1.0, 1.5), Err(Error::Domain(1.5)));
        assert!(flux(1.0, -0.1).is_err());
    }

    #[test]
    fn velocity_examples() {
        assert_eq!(velocity(1.0, 0.0).unwrap(), 1.0);
        assert_eq!(velocity(1.0, 1.0).unwrap(), 0.0);
        assert_eq!(velocity(2.0, 0.5).unwrap(), 1.0);
        assert!(velocity(1.0, 2.0).is_err());
    }

    #[test]
    fn capacity_examples() {
        let r = RegionParams::new(1.0, 0.3).unwrap();
        assert!(close(f_alpha_capacity(r, 0.6, 0.3), 0.0735, 1e-15));
        assert_eq!(f_alpha_capacity(r, 0.6, 1.0), 0.0);
        let r2 = RegionParams::new(2.0, 0.0).unwrap();
        assert!(close(f_alpha_capacity(r2, 0.5, 0.0), 0.25, 1e-15));
    }

    #[test]
    fn rho_star_examples() {
        assert!(close(rho_star(RegionParams::new(1.0, 0.3).unwrap()), 0.7, 1e-15));
        assert_eq!(rho_star(RegionParams::new(1.0, 0.0).unwrap()), 1.0);
        assert_eq!(rho_star(RegionParams::new(2.0, 1.0).unwrap()), 0.5);
    }

    #[test]
    fn critical_density_examples() {
        let c = critical_densities(RegionParams::new(1.0, 0.3).unwrap(), 0.6);
        assert!(close(c.rho_check, 0.128_640_3, 1e-6));
        assert!(close(c.rho_hat, 0.571_359_7, 1e-6));
        assert!(close(c.rho_star, 0.7, 1e-15));

        let c = critical_densities(RegionParams::new(2.0, 0.5).unwrap(), 0.5);
        assert!(close(c.rho_check, 1.5 * (1.0 - 0.5f64.sqrt()) / 4.0, 1e-15));
        assert!(close(c.rho_check, 0.109_834_9, 1e-6));
        assert!(close(c.rho_hat, 0.640_165_1, 1e-6));

        // double root as alpha -> 1
        let c = critical_densities(RegionParams::new(1.0, 0.0).unwrap(), 1.0 - 1e-12);
        assert!(close(c.rho_check, 0.5, 1e-5));
        assert!(close(c.rho_hat, 0.5, 1e-5));
    }

    #[test]
    fn shock_speed_examples() {
        assert!(close(shock_speed(1.0, 0.2, 0.8).unwrap(), 0.0, 1e-15));
        assert!(close(shock_speed(1.0, 0.2, 0.6).unwrap(), 0.2, 1e-15));
        assert_eq!(shock_speed(2.0, 0.0, 1.0).unwrap(), 0.0);
        assert!(matches!(shock_speed(1.0, 0.3, 0.3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi(1.0, 0.5).unwrap(), 0.0);
        assert_eq!(psi(1.0, 1.0).unwrap(), 0.25);
        assert_eq!(psi(1.0, 0.0).unwrap(), -0.25);
        assert_eq!(psi(2.0, 0.75).unwrap(), 0.125);
        // first closed form: sign(½ - ρ)(f(γ, ρ) - f(γ, ½))
        for &rho in &[0.0, 0.1, 0.3, 0.5, 0.7, 1.0] {
            let s = if rho < 0.5 { 1.0 } else if rho > 0.5 { -1.0 } else { 0.0 };
            let alt = s * (flux_raw(1.0, rho) - 0.25);
            assert!(close(psi(1.0, rho).unwrap(), alt, 1e-15));
        }
    }

    #[test]
    fn psi_inv_examples() {
        assert_eq!(psi_inv(1.0, 0.0).unwrap(), 0.5);
        assert_eq!(psi_inv(1.0, 0.25).unwrap(), 1.0);
        assert_eq!(psi_inv(2.0, -0.125).unwrap(), 0.25);
        assert!(matches!(psi_inv(1.0, 0.3), Err(Error::Range { .. })));
    }

    #[test]
    fn constraint_vanishes_at_traffic_speed() {
        for i in 0..=100 {
            let rho = i as f64 / 100.0;
            let lhs = flux_raw(1.5, rho) - velocity_raw(1.5, rho) * rho;
            assert!(lhs.abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_params() {
        assert!(ModelParams::new(1.2).is_err());
        assert!(ModelParams::new(0.0).is_err());
        assert!(RegionParams::new(1.0, 1.0).is_err());
        assert!(RegionParams::new(-1.0, 0.0).is_err());
    }
}
