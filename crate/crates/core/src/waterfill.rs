//! Water-filling over a noise spectrum and the nonfeedback capacity
//!
//! `C(P) = (1/2π)∫ ½ log₂(max(S_Z, ν)/S_Z) dθ`, where the water level `ν`
//! spends the budget: `(1/2π)∫ (ν − S_Z)⁺ dθ = P`. The active band is kept
//! implicit in `(ν − S_Z)⁺`, so spectra with several wells need no special
//! handling.

use alloc::vec::Vec;

use crate::scalar::bisect_increasing;
use crate::spectrum::{mean_integral_even, PsdSpec, QuadratureConfig};
use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// Bisection stops once the `ν` bracket is this narrow relative to `max S_Z + P`.
const LEVEL_REL_TOL: f64 = 1e-12;
/// Largest accepted `|mean(S_X) − P|`.
pub const POWER_TOL: f64 = 1e-10;

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub power: f64,
    pub water_level: f64,
    pub capacity_bits: f64,
    pub power_residual: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    psd: PsdSpec,
}

impl WaterfillSolution {
    pub fn noise_psd(&self) -> &PsdSpec {
        &self.psd
    }

    /// `S_X(θ) = (ν − S_Z(θ))⁺`.
    pub fn input_psd(&self, theta: f64) -> Result<f64> {
        Ok((self.water_level - self.psd.eval(theta)?).max(0.0))
    }

    /// `S_Y(θ) = S_X(θ) + S_Z(θ) = max(S_Z(θ), ν)`.
    pub fn output_psd(&self, theta: f64) -> Result<f64> {
        Ok(self.psd.eval(theta)?.max(self.water_level))
    }

    /// `(θ, S_Z, S_X, S_Y)` on `points` equispaced frequencies in `[−π, π]`.
    pub fn spectra_grid(&self, points: usize) -> Vec<[f64; 4]> {
        let pi = core::f64::consts::PI;
        (0..points)
            .map(|k| {
                let theta = if points == 1 {
                    0.0
                } else if k + 1 == points {
                    pi
                } else {
                    -pi + 2.0 * pi * k as f64 / (points - 1) as f64
                };
                let s = self.psd.eval_unchecked(theta);
                [
                    theta,
                    s,
                    (self.water_level - s).max(0.0),
                    s.max(self.water_level),
                ]
            })
            .collect()
    }
}

/// Mean input power `(1/2π)∫ (ν − S_Z)⁺ dθ` poured at level `nu`.
pub fn filled_power(psd: &PsdSpec, nu: f64, config: &QuadratureConfig) -> Result<f64> {
    mean_integral_even(|t| (nu - psd.eval_unchecked(t)).max(0.0), config, &[])
}

/// Water level `ν` spending exactly `power` on `psd`.
pub fn water_level(psd: &PsdSpec, power: f64, config: &QuadratureConfig) -> Result<f64> {
    Ok(solve_level(psd, power, config)?.0)
}

fn solve_level(psd: &PsdSpec, power: f64, config: &QuadratureConfig) -> Result<(f64, f64)> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidInput("power must be positive and finite"));
    }
    config.validate()?;
    let (lo, max) = psd.scan_extent();
    let mut hi = max + power;
    // the scan can miss the true maximum slightly; widen until the bracket holds
    while filled_power(psd, hi, config)? < power {
        hi += power;
    }
    let x_tol = LEVEL_REL_TOL * (max + power);
    let nu = bisect_increasing(
        |nu| Ok(filled_power(psd, nu, config)? - power),
        lo,
        hi,
        x_tol,
    )?;
    let residual = (filled_power(psd, nu, config)? - power).abs();
    if residual > POWER_TOL.max(config.abs_tolerance) {
        return Err(Error::NoConvergence {
            what: "water level",
            achieved: residual,
            requested: POWER_TOL.max(config.abs_tolerance),
        });
    }
    Ok((nu, residual))
}

/// Nonfeedback capacity `C(P)` in bits per channel use.
pub fn nonfeedback_capacity(
    psd: &PsdSpec,
    power: f64,
    config: &QuadratureConfig,
) -> Result<WaterfillSolution> {
    let (nu, power_residual) = solve_level(psd, power, config)?;
    let zeros = psd.zeros();
    let capacity = mean_integral_even(
        |t| {
            let s = psd.eval_unchecked(t).max(f64::MIN_POSITIVE);
            0.5 * (s.max(nu) / s).log2()
        },
        config,
        &zeros,
    )?;
    Ok(WaterfillSolution {
        power,
        water_level: nu,
        capacity_bits: capacity.max(0.0),
        power_residual,
        psd: psd.clone(),
    })
}
