use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{PsdForm, PsdSpec};
use crate::{Error, Result};
#[allow(unused_imports)] // inherent float methods take over when std is linked
use num_traits::Float;

/// Draws `Z_1..Z_n` with `Z_i = σ·Σ_k b_k U_{i−k}` for i.i.d. standard
/// normal innovations `U`. Innovations before index 1 are zero, so the path
/// is exactly stationary from index `q + 1` on.
///
/// The generator is ChaCha8 seeded from `seed`; the same `(spec, n, seed)`
/// always yields the same path.
pub fn sample_noise_path(spec: &PsdSpec, n: usize, seed: u64) -> Result<Vec<f64>> {
    let PsdForm::Ma { coeffs, sigma2 } = spec.form() else {
        return Err(Error::UnsupportedForm(
            "noise paths need a moving-average spectrum",
        ));
    };
    if n == 0 {
        return Err(Error::InvalidInput("noise path length must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let innovations: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let sigma = sigma2.sqrt();
    Ok((0..n)
        .map(|i| {
            let acc: f64 = coeffs
                .iter()
                .enumerate()
                .take(i + 1)
                .map(|(k, b)| b * innovations[i - k])
                .sum();
            sigma * acc
        })
        .collect())
}
