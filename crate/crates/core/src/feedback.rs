//! Feedback rates and feedback-capacity bounds.
//!
//! For noise `Z_i = U_i + U_{i−1}` with unit innovations the
//! Schalkwijk-Kailath scheme reaches `−log₂ x₀`, where `x₀` is the root in
//! `(0, 1)` of `P x² = (1 + x)(1 − x)³`. That rate is compared against the
//! upper-bound families
//!
//! - `2·C(P)` and `C(P) + ½`,
//! - `(1 + 1/α)·C(αP)` and `C(αP) + ½·log₂(1 + 1/α)` for every `α > 0`,
//!
//! and against the conjectured bound `C(2P)`.

use alloc::vec::Vec;

use crate::scalar::{bisect_increasing, golden_section_min};
use crate::spectrum::{PsdForm, PsdSpec, QuadratureConfig};
use crate::waterfill::nonfeedback_capacity;
use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// `P x² − (1 + x)(1 − x)³`.
pub fn sk_poly(power: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    power * x * x - (1.0 + x) * y * y * y
}

fn sk_poly_derivative(power: f64, x: f64) -> f64 {
    let y = 1.0 - x;
    2.0 * power * x + y * y * (2.0 + 4.0 * x)
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SkSolution {
    pub power: f64,
    /// Per-use contraction of the receiver's error standard deviation.
    pub x0: f64,
    pub rate_bits: f64,
    /// `|sk_poly(power, x0)|`.
    pub residual: f64,
}

/// The unique root of `sk_poly(power, ·)` in `(0, 1)`.
///
/// `P x²` increases and `(1 + x)(1 − x)³` decreases on `[0, 1]`, and
/// `sk_poly(P, 0) = −1 < 0 < P = sk_poly(P, 1)`, so bisection brackets the
/// root; three Newton steps then polish it.
pub fn sk_root(power: f64) -> Result<SkSolution> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidInput("power must be positive and finite"));
    }
    let f = |x: f64| sk_poly(power, x);
    let mut x = bisect_increasing(|x| Ok(f(x)), 0.0, 1.0, 1e-12)?;
    for _ in 0..3 {
        let step = f(x) / sk_poly_derivative(power, x);
        let next = x - step;
        if next > 0.0 && next < 1.0 && f(next).abs() <= f(x).abs() {
            x = next;
        }
    }
    Ok(SkSolution {
        power,
        x0: x,
        rate_bits: -x.log2(),
        residual: f(x).abs(),
    })
}

/// Power above which the scheme's rate exceeds one bit: `sk_poly(P, ½) > 0`
/// exactly when `P > 3/4`.
pub fn sk_rate_threshold() -> f64 {
    0.75
}

/// Rate for a scaled channel `σ²·b²·|1 + e^{iθ}|²`, evaluated at the
/// equivalent unit-innovation power `P / (σ² b²)`.
pub fn sk_root_for(psd: &PsdSpec, power: f64) -> Result<SkSolution> {
    match psd.form() {
        PsdForm::Ma { coeffs, sigma2 } if coeffs.len() == 2 && coeffs[0] == coeffs[1] => {
            let scale = sigma2 * coeffs[0] * coeffs[0];
            let mut sol = sk_root(power / scale)?;
            sol.power = power;
            Ok(sol)
        }
        _ => Err(Error::UnsupportedForm(
            "the feedback rate equation covers only b·(1 + e^{iθ}) noise",
        )),
    }
}

/// `(2·C(P), C(P) + ½)`.
pub fn cover_pombra_bounds(c_p: f64) -> Result<(f64, f64)> {
    if !(c_p >= 0.0) {
        return Err(Error::InvalidInput("capacity must be nonnegative"));
    }
    Ok((2.0 * c_p, c_p + 0.5))
}

/// Both bounds of the α-family given `C(αP)`.
pub fn chen_yanagi_from_capacity(c_alpha_p: f64, alpha: f64) -> (f64, f64) {
    let inv = 1.0 / alpha;
    (
        (1.0 + inv) * c_alpha_p,
        c_alpha_p + 0.5 * (1.0 + inv).log2(),
    )
}

/// `((1 + 1/α)·C(αP), C(αP) + ½·log₂(1 + 1/α))`.
pub fn chen_yanagi_bound(
    psd: &PsdSpec,
    power: f64,
    alpha: f64,
    config: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidInput("alpha must be positive and finite"));
    }
    if !(power > 0.0) {
        return Err(Error::InvalidInput("power must be positive"));
    }
    let c = nonfeedback_capacity(psd, alpha * power, config)?.capacity_bits;
    Ok(chen_yanagi_from_capacity(c, alpha))
}

/// `points` log-spaced values on `[min, max]`.
pub fn log_grid(min: f64, max: f64, points: usize) -> Result<Vec<f64>> {
    if !(min > 0.0 && max >= min && max.is_finite()) || points == 0 {
        return Err(Error::InvalidInput(
            "log grid needs 0 < min <= max and at least one point",
        ));
    }
    if points == 1 {
        return Ok(alloc::vec![min]);
    }
    let (lmin, lmax) = (min.ln(), max.ln());
    Ok((0..points)
        .map(|k| match k {
            0 => min,
            k if k + 1 == points => max,
            k => (lmin + (lmax - lmin) * k as f64 / (points - 1) as f64).exp(),
        })
        .collect())
}

/// 50 log-spaced values of `α` over `[0.1, 10]`.
pub fn default_alpha_grid() -> Vec<f64> {
    log_grid(0.1, 10.0, 50).expect("static grid")
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyPoint {
    pub alpha: f64,
    pub bound1: f64,
    pub bound2: f64,
}

impl CyPoint {
    pub fn tightest(&self) -> f64 {
        self.bound1.min(self.bound2)
    }
}

/// Refinement tolerance in `α` for the golden-section stage.
const ALPHA_TOL: f64 = 1e-6;

fn cy_curve(
    psd: &PsdSpec,
    power: f64,
    alpha_grid: &[f64],
    config: &QuadratureConfig,
) -> Result<Vec<CyPoint>> {
    alpha_grid
        .iter()
        .map(|&alpha| {
            let (bound1, bound2) = chen_yanagi_bound(psd, power, alpha, config)?;
            Ok(CyPoint {
                alpha,
                bound1,
                bound2,
            })
        })
        .collect()
}

/// Refines the grid minimizer of `min(bound1, bound2)` by golden section
/// between its grid neighbours.
pub fn refine_cy_minimum(
    psd: &PsdSpec,
    power: f64,
    curve: &[CyPoint],
    config: &QuadratureConfig,
) -> Result<(f64, f64)> {
    let (k, best) = curve
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.tightest().total_cmp(&b.1.tightest()))
        .ok_or(Error::InvalidInput("alpha grid must not be empty"))?;
    if curve.len() == 1 {
        return Ok((best.alpha, best.tightest()));
    }
    let mut neighbours: Vec<f64> = curve.iter().map(|p| p.alpha).collect();
    neighbours.sort_by(f64::total_cmp);
    let pos = neighbours
        .iter()
        .position(|a| *a == best.alpha)
        .unwrap_or(k);
    let lo = neighbours[pos.saturating_sub(1)];
    let hi = neighbours[(pos + 1).min(neighbours.len() - 1)];
    let (alpha, value) = golden_section_min(
        |a| {
            let (b1, b2) = chen_yanagi_bound(psd, power, a, config)?;
            Ok(b1.min(b2))
        },
        lo,
        hi,
        ALPHA_TOL,
    )?;
    Ok(if value < best.tightest() {
        (alpha, value)
    } else {
        (best.alpha, best.tightest())
    })
}

/// Tightest α-family bound over `alpha_grid`, refined between the grid
/// neighbours of the best grid point. Returns `(α*, bound)`.
pub fn minimize_cy(
    psd: &PsdSpec,
    power: f64,
    alpha_grid: &[f64],
    config: &QuadratureConfig,
) -> Result<(f64, f64)> {
    if alpha_grid.is_empty() {
        return Err(Error::InvalidInput("alpha grid must not be empty"));
    }
    let curve = cy_curve(psd, power, alpha_grid, config)?;
    refine_cy_minimum(psd, power, &curve, config)
}

/// Every bound next to the achievable feedback rate.
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub power: f64,
    pub c_p: f64,
    pub c_2p: f64,
    pub cp_double: f64,
    pub cp_plus_half: f64,
    pub cy_curve: Vec<CyPoint>,
    pub cy_min_alpha: f64,
    pub cy_min: f64,
    /// The conjectured bound `C(2P)`.
    pub conjecture_bound: f64,
    /// Present only for channels covered by the feedback rate equation.
    pub sk: Option<SkSolution>,
    pub violated: bool,
    pub margin: Option<f64>,
}

impl BoundReport {
    pub fn sk_rate(&self) -> Option<f64> {
        self.sk.map(|s| s.rate_bits)
    }

    /// Names of the consistency checks that fail: an achievable rate above an
    /// upper bound, or a verdict that disagrees with the margin.
    pub fn failed_checks(&self) -> Vec<&'static str> {
        let mut failed = Vec::new();
        if let Some(rate) = self.sk_rate() {
            if rate > self.cp_double {
                failed.push("sk_rate <= 2C(P)");
            }
            if rate > self.cp_plus_half {
                failed.push("sk_rate <= C(P) + 1/2");
            }
            if rate > self.cy_min {
                failed.push("sk_rate <= cy_min");
            }
            if self
                .cy_curve
                .iter()
                .any(|p| rate > p.bound1 || rate > p.bound2)
            {
                failed.push("sk_rate <= every cy_curve entry");
            }
        }
        if self.violated != self.margin.is_some_and(|m| m > 0.0) {
            failed.push("violated <=> margin > 0");
        }
        failed
    }
}

/// Fills a [`BoundReport`] for `psd` at `power`. The feedback rate is
/// included when the spectrum has the form `σ²·b²·|1 + e^{iθ}|²`.
pub fn bound_report(
    psd: &PsdSpec,
    power: f64,
    alpha_grid: &[f64],
    config: &QuadratureConfig,
) -> Result<BoundReport> {
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::InvalidInput("power must be positive and finite"));
    }
    if alpha_grid.is_empty() {
        return Err(Error::InvalidInput("alpha grid must not be empty"));
    }
    let c_p = nonfeedback_capacity(psd, power, config)?.capacity_bits;
    let c_2p = nonfeedback_capacity(psd, 2.0 * power, config)?.capacity_bits;
    let curve = cy_curve(psd, power, alpha_grid, config)?;
    assemble_report(psd, power, c_p, c_2p, curve, config)
}

/// Builds the report from capacities computed elsewhere (possibly in
/// parallel); the refinement stage runs here.
pub fn assemble_report(
    psd: &PsdSpec,
    power: f64,
    c_p: f64,
    c_2p: f64,
    cy_curve: Vec<CyPoint>,
    config: &QuadratureConfig,
) -> Result<BoundReport> {
    let (cp_double, cp_plus_half) = cover_pombra_bounds(c_p)?;
    let (cy_min_alpha, cy_min) = refine_cy_minimum(psd, power, &cy_curve, config)?;
    let sk = match sk_root_for(psd, power) {
        Ok(sol) => Some(sol),
        Err(Error::UnsupportedForm(_)) => None,
        Err(e) => return Err(e),
    };
    let margin = sk.map(|s| s.rate_bits - c_2p);
    Ok(BoundReport {
        power,
        c_p,
        c_2p,
        cp_double,
        cp_plus_half,
        cy_curve,
        cy_min_alpha,
        cy_min,
        conjecture_bound: c_2p,
        sk,
        violated: margin.is_some_and(|m| m > 0.0),
        margin,
    })
}

/// Compares the feedback rate with `C(2P)` on `Z_i = U_i + U_{i−1}`.
pub fn conjecture_check(power: f64, config: &QuadratureConfig) -> Result<BoundReport> {
    bound_report(
        &PsdSpec::first_order_ma(),
        power,
        &default_alpha_grid(),
        config,
    )
}
