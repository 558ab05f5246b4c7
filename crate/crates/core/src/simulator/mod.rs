//! Executable Schalkwijk-Kailath feedback scheme over first-order MA noise.
//!
//! The message point `θ` (variance 1/12, mean ½) is sent as
//! `X_1 = g_1·(θ − ½)` and `X_i = g_i·(θ − θ̂_{i−1})`, where `θ̂_{i−1}` is the
//! linear MMSE estimate of `θ` from `Y^{i−1}`. `|g_i|` normalizes
//! `E[X_i²] = P`; the sign of `g_i` is the one giving the smaller posterior
//! error variance (ties go to `+`). With `Z_i = h_0 U_i + h_1 U_{i−1}` the
//! estimation error lives in a two-dimensional state: the message error and
//! the receiver's residual on `U_{i−1}`.
//!
//! [`variance_recursion`] propagates that state's covariance in scale-free
//! form (log error variance plus a normalized cross term), so long horizons
//! do not underflow. [`brute_force_conditioning`] recomputes the same trace
//! from the full joint covariance and exists to validate the recursion.

mod brute;
mod monte_carlo;

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

use crate::spectrum::PsdSpec;
use crate::{Error, Result};

pub use brute::{brute_force_conditioning, BRUTE_FORCE_MAX_STEPS};
pub use monte_carlo::{
    simulate_transmission, MonteCarloPlan, MonteCarloReport, Tally, TrialOutcome,
};

/// Variance of the message point: uniform on `[0, 1]`.
pub const MESSAGE_VARIANCE: f64 = 1.0 / 12.0;

/// Largest `n·R` for which the message grid stays resolvable in `f64`.
pub const MAX_MESSAGE_BITS: f64 = 53.0;

#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub power: f64,
    pub horizon: usize,
    pub rate_bits: f64,
    pub seed: u64,
    /// Steps excluded from the contraction estimate.
    pub burn_in: usize,
    /// Overrides `⌈2^{n·R}⌉` when set.
    pub pam_levels_override: Option<u64>,
}

impl SchemeConfig {
    /// Config with seed 0 and a burn-in of a quarter of the horizon.
    pub fn new(power: f64, horizon: usize, rate_bits: f64) -> Result<Self> {
        let cfg = Self {
            power,
            horizon,
            rate_bits,
            seed: 0,
            burn_in: horizon / 4,
            pam_levels_override: None,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn with_pam_levels(mut self, levels: u64) -> Self {
        self.pam_levels_override = Some(levels);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.power > 0.0 && self.power.is_finite()) {
            return Err(Error::InvalidInput("power must be positive and finite"));
        }
        if self.horizon < 2 {
            return Err(Error::InvalidInput("horizon must be at least 2"));
        }
        if !(self.rate_bits > 0.0 && self.rate_bits.is_finite()) {
            return Err(Error::InvalidInput("rate must be positive and finite"));
        }
        if self.burn_in >= self.horizon {
            return Err(Error::InvalidInput(
                "burn-in must be shorter than the horizon",
            ));
        }
        Ok(())
    }

    /// Message set size `M = ⌈2^{n·R}⌉`.
    pub fn pam_levels(&self) -> Result<u64> {
        if let Some(m) = self.pam_levels_override {
            if m == 0 {
                return Err(Error::InvalidInput("message set must not be empty"));
            }
            return Ok(m);
        }
        let bits = self.horizon as f64 * self.rate_bits;
        if bits > MAX_MESSAGE_BITS {
            return Err(Error::InvalidInput(
                "n*R exceeds 53 bits; message grid is not resolvable in f64",
            ));
        }
        Ok((bits.exp2().ceil() as u64).max(1))
    }
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub step: usize,
    /// `E[X_i²]`.
    pub power: f64,
    /// `Var(θ − θ̂_i)`; may underflow to zero on long horizons.
    pub error_variance: f64,
    pub log_error_variance: f64,
    /// `sqrt(error_variance_i / error_variance_{i−1})`.
    pub contraction: f64,
    /// Sign of the transmit gain `g_i`.
    pub gain_sign: f64,
}

/// Receiver update coefficients of one step, in normalized form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct FilterStep {
    /// `Cov(θ − θ̂_{i−1}, innovation) / sqrt(Var(θ − θ̂_{i−1}))`.
    pub cross: f64,
    /// Variance of the innovation `Y_i − E[Y_i | Y^{i−1}]`.
    pub innovation_variance: f64,
}

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceTrace {
    pub prior_variance: f64,
    pub burn_in: usize,
    pub steps: Vec<TraceStep>,
    /// Geometric mean of the per-step contraction after the burn-in.
    pub contraction_estimate: f64,
    #[cfg_attr(feature = "serde", serde(skip))]
    pub(crate) filter: Vec<FilterStep>,
}

impl VarianceTrace {
    fn from_steps(steps: Vec<TraceStep>, burn_in: usize, filter: Vec<FilterStep>) -> Self {
        let tail = &steps[burn_in.min(steps.len())..];
        let mean_log =
            tail.iter().map(|s| s.contraction.ln()).sum::<f64>() / tail.len().max(1) as f64;
        Self {
            prior_variance: MESSAGE_VARIANCE,
            burn_in,
            contraction_estimate: mean_log.exp(),
            steps,
            filter,
        }
    }

    /// `−log₂` of the contraction estimate: the scheme's rate in bits per use.
    pub fn rate_bits(&self) -> f64 {
        -self.contraction_estimate.log2()
    }

    pub fn terminal_error_variance(&self) -> f64 {
        self.steps
            .last()
            .map_or(self.prior_variance, |s| s.error_variance)
    }

    pub fn log_variance_before(&self, step: usize) -> f64 {
        if step <= 1 {
            self.prior_variance.ln()
        } else {
            self.steps[step - 2].log_error_variance
        }
    }
}

pub(crate) fn noise_taps(noise: &PsdSpec) -> Result<(f64, f64)> {
    noise.first_order_taps().ok_or(Error::UnsupportedForm(
        "the feedback scheme needs white or first-order MA noise",
    ))
}

/// Exact error-variance trace of the scheme, with no sampling.
pub fn variance_recursion(config: &SchemeConfig, noise: &PsdSpec) -> Result<VarianceTrace> {
    config.validate()?;
    let (h0, h1) = noise_taps(noise)?;
    let p = config.power;
    let sqrt_p = p.sqrt();

    let mut log_a = MESSAGE_VARIANCE.ln();
    // residual variance of U_{i−1}; U_0 = 0 is known
    let mut b = 0.0;
    // Cov(message error, U residual) / sqrt(message error variance)
    let mut c = 0.0;

    let mut steps = Vec::with_capacity(config.horizon);
    let mut filter = Vec::with_capacity(config.horizon);
    for step in 1..=config.horizon {
        let candidate = |sign: f64| {
            let g = sign * sqrt_p;
            let cross = g + h1 * c;
            let s = p + h1 * h1 * b + 2.0 * h1 * g * c + h0 * h0;
            (1.0 - cross * cross / s, cross, s)
        };
        let plus = candidate(1.0);
        let minus = candidate(-1.0);
        let (sign, (ratio2, cross, s)) = if minus.0 < plus.0 {
            (-1.0, minus)
        } else {
            (1.0, plus)
        };
        if !(ratio2 > 0.0 && ratio2 < 1.0 && s > 0.0) {
            return Err(Error::Conditioning(
                "error covariance lost positive definiteness",
            ));
        }
        let ratio = ratio2.sqrt();
        b = 1.0 - h0 * h0 / s;
        c = -cross * h0 / (s * ratio);
        if b < -1e-12 {
            return Err(Error::Conditioning(
                "innovation residual variance went negative",
            ));
        }
        b = b.max(0.0);
        log_a += ratio2.ln();
        steps.push(TraceStep {
            step,
            power: sqrt_p * sqrt_p,
            error_variance: log_a.exp(),
            log_error_variance: log_a,
            contraction: ratio,
            gain_sign: sign,
        });
        filter.push(FilterStep {
            cross,
            innovation_variance: s,
        });
    }
    Ok(VarianceTrace::from_steps(steps, config.burn_in, filter))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feedback::sk_root;

    #[test]
    fn white_noise_contraction() {
        let cfg = SchemeConfig::new(3.0, 50, 0.5).unwrap();
        let tr = variance_recursion(&cfg, &PsdSpec::white(1.0).unwrap()).unwrap();
        for s in &tr.steps {
            assert!((s.contraction - 0.5).abs() < 1e-15);
            assert_eq!(s.gain_sign, 1.0);
        }
        assert!((tr.rate_bits() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_order_ma_matches_root() {
        for p in [0.5, 1.0, 3.0] {
            let cfg = SchemeConfig::new(p, 400, 0.5).unwrap().with_burn_in(100);
            let tr = variance_recursion(&cfg, &PsdSpec::first_order_ma()).unwrap();
            let x0 = sk_root(p).unwrap().x0;
            assert!((tr.contraction_estimate - x0).abs() < 1e-9, "P = {p}");
        }
    }

    #[test]
    fn gains_alternate_on_first_order_ma() {
        let cfg = SchemeConfig::new(1.0, 20, 0.5).unwrap();
        let tr = variance_recursion(&cfg, &PsdSpec::first_order_ma()).unwrap();
        for w in tr.steps.windows(2) {
            assert_eq!(w[0].gain_sign, -w[1].gain_sign);
        }
    }

    #[test]
    fn error_variance_strictly_decreasing() {
        let cfg = SchemeConfig::new(2.0, 100, 0.5).unwrap();
        let tr = variance_recursion(&cfg, &PsdSpec::first_order_ma()).unwrap();
        for w in tr.steps.windows(2) {
            assert!(w[1].log_error_variance < w[0].log_error_variance);
        }
    }

    #[test]
    fn config_validation() {
        assert!(SchemeConfig::new(0.0, 10, 1.0).is_err());
        assert!(SchemeConfig::new(1.0, 1, 1.0).is_err());
        assert!(SchemeConfig::new(1.0, 10, 0.0).is_err());
        let cfg = SchemeConfig::new(1.0, 10, 1.0).unwrap().with_burn_in(10);
        assert!(cfg.validate().is_err());
        let too_many = SchemeConfig::new(1.0, 60, 1.0).unwrap();
        assert!(too_many.pam_levels().is_err());
        assert_eq!(
            SchemeConfig::new(1.0, 10, 1.0)
                .unwrap()
                .pam_levels()
                .unwrap(),
            1024
        );
    }

    #[test]
    fn unsupported_noise() {
        let cfg = SchemeConfig::new(1.0, 10, 1.0).unwrap();
        let ma2 = PsdSpec::ma(alloc::vec![1.0, 0.5, 0.25], 1.0).unwrap();
        assert!(matches!(
            variance_recursion(&cfg, &ma2),
            Err(Error::UnsupportedForm(_))
        ));
        let sampled = PsdSpec::samples(alloc::vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            variance_recursion(&cfg, &sampled),
            Err(Error::UnsupportedForm(_))
        ));
    }
}
