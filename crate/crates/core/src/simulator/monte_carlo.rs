//! Message-level Monte Carlo for the feedback scheme.
//!
//! Each trial draws a message index, maps it to the equispaced grid
//! `θ_m = m/(M−1)` on `[0, 1]`, runs transmitter and receiver against a
//! sampled noise path (`sample_noise_path` with a per-trial seed), and decodes `θ̂_n` to the nearest grid point (ties
//! to the lower index). Trials are independent given `(seed, trial)`, so
//! they may run in any order; [`MonteCarloPlan::report`] reduces them in
//! trial order.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{noise_taps, variance_recursion, SchemeConfig, VarianceTrace};
use crate::spectrum::{sample_noise_path, PsdSpec};
use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// Smallest log error variance for which the transmit gain stays finite.
const MIN_LOG_VARIANCE: f64 = -667.0; // ≈ ln(1e-290)

#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub pam_levels: u64,
    /// A single message: nothing to decode.
    pub degenerate: bool,
    pub empirical_avg_power: f64,
    pub decode_errors: u64,
    pub error_rate: f64,
    pub contraction_empirical: f64,
    /// Mean of `(θ − θ̂_n)²` across trials.
    pub empirical_error_variance: f64,
    /// `Var(θ − θ̂_n)` from the deterministic trace.
    pub predicted_error_variance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub energy: f64,
    /// `(θ − θ̂_i)²` for `i = 0..=n` (index 0 is the prior mean).
    pub squared_errors: Vec<f64>,
    pub decode_error: bool,
}

/// Everything a trial needs, computed once.
#[derive(Debug, Clone)]
pub struct MonteCarloPlan {
    config: SchemeConfig,
    trace: VarianceTrace,
    taps: (f64, f64),
    noise: PsdSpec,
    levels: u64,
}

impl MonteCarloPlan {
    pub fn new(config: &SchemeConfig, noise: &PsdSpec) -> Result<Self> {
        config.validate()?;
        let levels = config.pam_levels()?;
        let trace = variance_recursion(config, noise)?;
        let taps = noise_taps(noise)?;
        if config.horizon > 1
            && trace.steps[config.horizon - 2].log_error_variance < MIN_LOG_VARIANCE
        {
            return Err(Error::InvalidInput(
                "horizon too long for a floating-point Monte Carlo run",
            ));
        }
        let noise = PsdSpec::ma(vec![taps.0, taps.1], 1.0)?;
        Ok(Self {
            config: *config,
            trace,
            taps,
            noise,
            levels,
        })
    }

    pub fn trace(&self) -> &VarianceTrace {
        &self.trace
    }

    pub fn pam_levels(&self) -> u64 {
        self.levels
    }

    pub fn trial(&self, trial: u64) -> Result<TrialOutcome> {
        let seed = trial_seed(self.config.seed, trial);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let m = self.levels;
        let index = rng.random_range(0..m);
        let theta = if m == 1 {
            0.5
        } else {
            index as f64 / (m - 1) as f64
        };
        let z = sample_noise_path(&self.noise, self.config.horizon, seed)?;

        let (h0, h1) = self.taps;
        let sqrt_p = self.config.power.sqrt();
        // the receiver's estimate is carried as its error θ − θ̂, which keeps
        // full relative precision long after θ̂ agrees with θ to the last ulp
        let mut error = theta - 0.5;
        let mut u_hat = 0.0;
        let mut energy = 0.0;
        let mut squared_errors = Vec::with_capacity(self.config.horizon + 1);
        squared_errors.push(error * error);
        for (i, (step, filt)) in self.trace.steps.iter().zip(&self.trace.filter).enumerate() {
            let half_log_a = 0.5 * self.trace.log_variance_before(i + 1);
            let gain = step.gain_sign * sqrt_p * (-half_log_a).exp();
            let x = gain * error;
            energy += x * x;
            let innovation = x + z[i] - h1 * u_hat;
            let s = filt.innovation_variance;
            error -= half_log_a.exp() * filt.cross / s * innovation;
            u_hat = h0 / s * innovation;
            squared_errors.push(error * error);
        }
        let estimate = theta - error;
        let decoded = if m == 1 {
            0
        } else {
            nearest_index(estimate, m)
        };
        Ok(TrialOutcome {
            energy,
            squared_errors,
            decode_error: decoded != index,
        })
    }

    /// Empty running sums for [`MonteCarloPlan::finish`].
    pub fn tally(&self) -> Tally {
        Tally {
            trials: 0,
            energy: 0.0,
            errors: 0,
            mse: vec![0.0; self.config.horizon + 1],
        }
    }

    /// Reduces outcomes given in trial order.
    pub fn report(&self, outcomes: &[TrialOutcome]) -> MonteCarloReport {
        let mut tally = self.tally();
        outcomes.iter().for_each(|o| tally.add(o));
        self.finish(&tally)
    }

    pub fn finish(&self, tally: &Tally) -> MonteCarloReport {
        let n = self.config.horizon;
        let t = tally.trials.max(1) as f64;
        let mse: Vec<f64> = tally.mse.iter().map(|v| v / t).collect();
        let burn = self.trace.burn_in;
        let contraction = (mse[n] / mse[burn]).powf(1.0 / (2.0 * (n - burn) as f64));
        MonteCarloReport {
            trials: tally.trials,
            pam_levels: self.levels,
            degenerate: self.levels == 1,
            empirical_avg_power: tally.energy / (t * n as f64),
            decode_errors: tally.errors,
            error_rate: tally.errors as f64 / t,
            contraction_empirical: contraction,
            empirical_error_variance: mse[n],
            predicted_error_variance: self.trace.terminal_error_variance(),
        }
    }
}

/// Running sums over trial outcomes. Floating-point sums depend on order, so
/// outcomes must be added in trial order for reproducible reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Tally {
    trials: u64,
    energy: f64,
    errors: u64,
    mse: Vec<f64>,
}

impl Tally {
    pub fn add(&mut self, outcome: &TrialOutcome) {
        self.trials += 1;
        self.energy += outcome.energy;
        self.errors += u64::from(outcome.decode_error);
        for (acc, e) in self.mse.iter_mut().zip(&outcome.squared_errors) {
            *acc += e;
        }
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }
}

/// Grid index closest to `estimate` on `m/(levels − 1)`; halves go down.
fn nearest_index(estimate: f64, levels: u64) -> u64 {
    let top = (levels - 1) as f64;
    let t = (estimate * top - 0.5).ceil();
    t.clamp(0.0, top) as u64
}

/// Decorrelated per-trial seed (splitmix64 finalizer).
pub(crate) fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trials` trials sequentially and reduces them.
pub fn simulate_transmission(
    config: &SchemeConfig,
    noise: &PsdSpec,
    trials: u64,
) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required"));
    }
    let plan = MonteCarloPlan::new(config, noise)?;
    let outcomes = (0..trials)
        .map(|t| plan.trial(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(plan.report(&outcomes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_index_ties_go_down() {
        // levels 5: grid 0, .25, .5, .75, 1
        assert_eq!(nearest_index(0.375, 5), 1);
        assert_eq!(nearest_index(0.376, 5), 2);
        assert_eq!(nearest_index(-0.3, 5), 0);
        assert_eq!(nearest_index(1.7, 5), 4);
        assert_eq!(nearest_index(0.125, 5), 0);
    }

    #[test]
    fn trial_seeds_differ() {
        assert_ne!(trial_seed(7, 0), trial_seed(7, 1));
        assert_ne!(trial_seed(7, 0), trial_seed(8, 0));
    }

    #[test]
    fn single_message_is_degenerate() {
        let cfg = SchemeConfig::new(1.0, 10, 0.5).unwrap().with_pam_levels(1);
        let r = simulate_transmission(&cfg, &PsdSpec::first_order_ma(), 50).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.error_rate, 0.0);
    }

    #[test]
    fn white_noise_low_rate_decodes() {
        let cfg = SchemeConfig::new(3.0, 20, 0.5).unwrap().with_seed(3);
        let r = simulate_transmission(&cfg, &PsdSpec::white(1.0).unwrap(), 200).unwrap();
        assert_eq!(r.decode_errors, 0);
        assert_eq!(r.pam_levels, 1024);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SchemeConfig::new(1.0, 10, 0.5).unwrap();
        assert!(simulate_transmission(&cfg, &PsdSpec::first_order_ma(), 0).is_err());
    }

    #[test]
    fn overlong_horizon_rejected() {
        let cfg = SchemeConfig::new(3.0, 600, 0.05).unwrap();
        assert!(matches!(
            MonteCarloPlan::new(&cfg, &PsdSpec::first_order_ma()),
            Err(Error::InvalidInput(_))
        ));
    }
}
