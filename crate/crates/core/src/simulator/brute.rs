use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use super::{noise_taps, SchemeConfig, TraceStep, VarianceTrace, MESSAGE_VARIANCE};
use crate::spectrum::PsdSpec;
use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// Largest horizon accepted by [`brute_force_conditioning`].
pub const BRUTE_FORCE_MAX_STEPS: usize = 64;

/// Recomputes the first `min(horizon, n_max)` steps of the variance trace
/// from the full joint covariance of `(θ, U_1..U_n, W_1..W_i)`.
///
/// `W_j = Y_j + g_j θ̂_{j−1} = g_j θ + Z_j` is the output with the
/// receiver-known feedback term removed; `W^i` and `Y^i` generate the same
/// information. The posterior precision of `θ` is the Schur complement
/// `1/Var(θ) + gᵀ Var(W | θ)⁻¹ g`, where `g` regresses `W` on `θ` and
/// `Var(W | θ)` is conditioned out of the innovation block. Each step solves
/// these blocks from scratch, so the cost is cubic per step.
pub fn brute_force_conditioning(
    config: &SchemeConfig,
    noise: &PsdSpec,
    n_max: usize,
) -> Result<VarianceTrace> {
    config.validate()?;
    if n_max == 0 || n_max > BRUTE_FORCE_MAX_STEPS {
        return Err(Error::InvalidInput(
            "brute-force horizon must be between 1 and 64",
        ));
    }
    let (h0, h1) = noise_taps(noise)?;
    let n = config.horizon.min(n_max);

    let mut gains: Vec<f64> = Vec::with_capacity(n);
    let mut precision = 1.0 / MESSAGE_VARIANCE;
    let mut steps = Vec::with_capacity(n);
    for step in 1..=n {
        let magnitude = (config.power * precision).sqrt();
        gains.push(magnitude);
        let plus = posterior_precision(&gains, n, h0, h1)?;
        *gains.last_mut().expect("pushed above") = -magnitude;
        let minus = posterior_precision(&gains, n, h0, h1)?;
        let (sign, next) = if minus > plus {
            (-1.0, minus)
        } else {
            (1.0, plus)
        };
        *gains.last_mut().expect("pushed above") = sign * magnitude;

        let power = magnitude * magnitude / precision;
        let contraction = (precision / next).sqrt();
        precision = next;
        steps.push(TraceStep {
            step,
            power,
            error_variance: 1.0 / precision,
            log_error_variance: -precision.ln(),
            contraction,
            gain_sign: sign,
        });
    }
    Ok(VarianceTrace::from_steps(
        steps,
        config.burn_in.min(n - 1),
        Vec::new(),
    ))
}

/// `1 / Var(θ | W_1..W_k)` for transmit gains `gains` (length `k`).
fn posterior_precision(gains: &[f64], n: usize, h0: f64, h1: f64) -> Result<f64> {
    let k = gains.len();
    // base variables: θ, U_1..U_n (independent)
    let dim_base = 1 + n;
    let base_var = |j: usize| if j == 0 { MESSAGE_VARIANCE } else { 1.0 };
    // rows: θ, U_1..U_n, W_1..W_k as combinations of the base
    let rows = 1 + n + k;
    let t = DMatrix::from_fn(rows, dim_base, |r, c| {
        if r < dim_base {
            return if r == c { 1.0 } else { 0.0 };
        }
        let j = r - dim_base + 1; // W_j, 1-based
        match c {
            0 => gains[j - 1],
            c if c == j => h0,
            c if j >= 2 && c == j - 1 => h1,
            _ => 0.0,
        }
    });
    let mut scaled = t.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= base_var(j);
    }
    let joint = scaled * t.transpose();

    let w = dim_base..rows;
    let u = 1..dim_base;
    let var_theta = joint[(0, 0)];
    let w_theta = DVector::from_iterator(k, w.clone().map(|r| joint[(r, 0)]));
    let w_u = DMatrix::from_fn(k, n, |r, c| joint[(w.start + r, u.start + c)]);
    let u_u = DMatrix::from_fn(n, n, |r, c| joint[(u.start + r, u.start + c)]);

    let u_chol = u_u.cholesky().ok_or(Error::Conditioning(
        "innovation covariance is not positive definite",
    ))?;
    let w_given_theta = &w_u * u_chol.solve(&w_u.transpose());
    let regression = w_theta / var_theta;
    let chol = w_given_theta.cholesky().ok_or(Error::Conditioning(
        "output covariance given the message is singular",
    ))?;
    let info = regression.dot(&chol.solve(&regression));
    let precision = 1.0 / var_theta + info;
    if !(precision.is_finite() && precision > 0.0) {
        return Err(Error::Conditioning("posterior precision is not finite"));
    }
    Ok(precision)
}
