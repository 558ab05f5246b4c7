//! Power spectral densities on `θ ∈ [−π, π]`.
//!
//! A [`PsdSpec`] is one of three forms: a moving-average filter
//! `σ²·|Σ_k b_k e^{ikθ}|²`, a uniformly sampled half-spectrum on `[0, π]`
//! with piecewise linear interpolation, or a white level. Every form is even
//! in `θ` by construction: evaluation always works on `|θ|`.

mod noise;
mod quadrature;

use alloc::vec::Vec;

use core::f64::consts::PI;
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::{scalar, Error, Result};

pub use noise::sample_noise_path;
pub use quadrature::{
    composite_gauss_legendre, mean_integral, mean_integral_even, QuadratureConfig,
};

/// Relative level below which a spectrum value counts as a zero.
pub const ZERO_THRESHOLD: f64 = 1e-12;

/// Grid resolution used when scanning a spectrum on `[0, π]`.
pub(crate) const SCAN_INTERVALS: usize = 2048;

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type", rename_all = "lowercase"))]
#[derive(Debug, Clone, PartialEq)]
pub enum PsdForm {
    /// `σ²·|Σ_k b_k e^{ikθ}|²` with taps `b_0..b_q`.
    Ma { coeffs: Vec<f64>, sigma2: f64 },
    /// Values at `θ_j = jπ/(N−1)`, `j = 0..N`, mirrored to negative `θ`.
    Samples { values: Vec<f64> },
    /// Constant level.
    White { level: f64 },
}

/// A validated power spectral density.
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(try_from = "PsdForm", into = "PsdForm"))]
#[derive(Debug, Clone, PartialEq)]
pub struct PsdSpec {
    form: PsdForm,
}

impl PsdSpec {
    pub fn ma(coeffs: Vec<f64>, sigma2: f64) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("MA spectrum needs at least one tap"));
        }
        if coeffs.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidInput("MA taps must be finite"));
        }
        if coeffs.iter().all(|&b| b == 0.0) {
            return Err(Error::InvalidInput("MA taps must not all be zero"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidInput(
                "innovation variance must be positive and finite",
            ));
        }
        Ok(Self {
            form: PsdForm::Ma { coeffs, sigma2 },
        })
    }

    pub fn samples(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::InvalidInput(
                "sampled spectrum needs at least two values",
            ));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidInput(
                "sampled spectrum values must be finite and nonnegative",
            ));
        }
        if values.windows(2).any(|w| w[0] == 0.0 && w[1] == 0.0) {
            // zero on a whole interval makes every log functional diverge
            return Err(Error::InvalidInput(
                "sampled spectrum vanishes on an interval",
            ));
        }
        Ok(Self {
            form: PsdForm::Samples { values },
        })
    }

    pub fn white(level: f64) -> Result<Self> {
        if !(level > 0.0 && level.is_finite()) {
            return Err(Error::InvalidInput(
                "white noise level must be positive and finite",
            ));
        }
        Ok(Self {
            form: PsdForm::White { level },
        })
    }

    /// `Z_i = U_i + U_{i−1}` with unit innovations: `S_Z(θ) = 2(1 + cos θ)`.
    pub fn first_order_ma() -> Self {
        Self {
            form: PsdForm::Ma {
                coeffs: alloc::vec![1.0, 1.0],
                sigma2: 1.0,
            },
        }
    }

    pub fn form(&self) -> &PsdForm {
        &self.form
    }

    /// `S_Z(θ)` for `θ ∈ [−π, π]`.
    pub fn eval(&self, theta: f64) -> Result<f64> {
        if !(theta.abs() <= PI) {
            return Err(Error::InvalidInput("frequency must lie in [-pi, pi]"));
        }
        Ok(self.eval_unchecked(theta))
    }

    pub(crate) fn eval_unchecked(&self, theta: f64) -> f64 {
        let theta = theta.abs();
        match &self.form {
            PsdForm::Ma { coeffs, sigma2 } => {
                // modulus form keeps relative accuracy next to spectral zeros
                let (mut re, mut im) = (0.0, 0.0);
                for (k, b) in coeffs.iter().enumerate() {
                    let (s, c) = (k as f64 * theta).sin_cos();
                    re += b * c;
                    im += b * s;
                }
                sigma2 * (re * re + im * im)
            }
            PsdForm::Samples { values } => {
                let last = values.len() - 1;
                let t = (theta / PI * last as f64).min(last as f64);
                let j = (t.floor() as usize).min(last - 1);
                let frac = t - j as f64;
                values[j] + frac * (values[j + 1] - values[j])
            }
            PsdForm::White { level } => *level,
        }
    }

    /// Frequencies in `[0, π]` where the spectrum drops to
    /// [`ZERO_THRESHOLD`] times its maximum.
    pub fn zeros(&self) -> Vec<f64> {
        let (_, max) = self.scan_extent();
        let threshold = ZERO_THRESHOLD * max;
        let mut zeros = Vec::new();
        match &self.form {
            PsdForm::White { .. } => {}
            PsdForm::Samples { values } => {
                // piecewise linear: minima sit on the nodes
                let last = values.len() - 1;
                for (j, v) in values.iter().enumerate() {
                    if *v <= threshold {
                        zeros.push(if j == last {
                            PI
                        } else {
                            PI * j as f64 / last as f64
                        });
                    }
                }
            }
            PsdForm::Ma { .. } => {
                let h = PI / SCAN_INTERVALS as f64;
                let grid: Vec<f64> = (0..=SCAN_INTERVALS)
                    .map(|j| self.eval_unchecked(grid_point(j)))
                    .collect();
                // 0 and π are stationary points of every even spectrum
                if grid[0] <= threshold {
                    zeros.push(0.0);
                }
                for j in 1..SCAN_INTERVALS {
                    let is_min = grid[j] <= grid[j - 1] && grid[j] < grid[j + 1];
                    if !is_min {
                        continue;
                    }
                    let (lo, hi) = ((j - 1) as f64 * h, (j + 1) as f64 * h);
                    let refined =
                        scalar::golden_section_min(|t| Ok(self.eval_unchecked(t)), lo, hi, 1e-13);
                    if let Ok((t, v)) = refined {
                        if v <= threshold && zeros.last().is_none_or(|&z| (t - z).abs() > 1e-9) {
                            zeros.push(t);
                        }
                    }
                }
                if grid[SCAN_INTERVALS] <= threshold
                    && zeros.last().is_none_or(|&z| (PI - z).abs() > 1e-9)
                {
                    zeros.push(PI);
                }
            }
        }
        zeros
    }

    /// `(min, max)` of the spectrum over a uniform grid on `[0, π]`.
    pub fn scan_extent(&self) -> (f64, f64) {
        match &self.form {
            PsdForm::White { level } => (*level, *level),
            PsdForm::Samples { values } => {
                values.iter().fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
                    (lo.min(*v), hi.max(*v))
                })
            }
            PsdForm::Ma { .. } => (0..=SCAN_INTERVALS)
                .map(|j| self.eval_unchecked(grid_point(j)))
                .fold((f64::INFINITY, 0.0_f64), |(lo, hi), v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    /// `(h_0, h_1)` with `Z_i = h_0 U_i + h_1 U_{i−1}` for unit innovations,
    /// when the spectrum is white or a first-order MA.
    pub fn first_order_taps(&self) -> Option<(f64, f64)> {
        match &self.form {
            PsdForm::White { level } => Some((level.sqrt(), 0.0)),
            PsdForm::Ma { coeffs, sigma2 } if coeffs.len() <= 2 => {
                let s = sigma2.sqrt();
                Some((s * coeffs[0], s * coeffs.get(1).copied().unwrap_or(0.0)))
            }
            _ => None,
        }
    }
}

impl TryFrom<PsdForm> for PsdSpec {
    type Error = Error;

    fn try_from(form: PsdForm) -> Result<Self> {
        match form {
            PsdForm::Ma { coeffs, sigma2 } => Self::ma(coeffs, sigma2),
            PsdForm::Samples { values } => Self::samples(values),
            PsdForm::White { level } => Self::white(level),
        }
    }
}

impl From<PsdSpec> for PsdForm {
    fn from(spec: PsdSpec) -> Self {
        spec.form
    }
}

fn grid_point(j: usize) -> f64 {
    if j == SCAN_INTERVALS {
        PI
    } else {
        PI * j as f64 / SCAN_INTERVALS as f64
    }
}
