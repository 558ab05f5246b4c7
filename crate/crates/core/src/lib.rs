//! Capacity computations for stationary additive Gaussian noise channels
//! `Y_i = X_i + Z_i`, with and without output feedback.
//!
//! The crate covers four pieces:
//!
//! - [`spectrum`]: power spectral densities, `(1/2π)∫ dθ` functionals with
//!   integrable log singularities, and seeded moving-average noise paths.
//! - [`waterfill`]: the water-filling solution and nonfeedback capacity `C(P)`.
//! - [`feedback`]: the Schalkwijk-Kailath rate for the first-order MA channel
//!   `S_Z(θ) = |1 + e^{iθ}|²`, the upper-bound families on `C_FB(P)` and the
//!   comparison against the `C(2P)` conjecture.
//! - [`simulator`]: an executable linear-Gaussian realization of the
//!   feedback scheme (deterministic variance trace and Monte Carlo).
//!
//! All capacities are in bits per channel use. The crate is `no_std` and
//! only needs `alloc`.

#![no_std]
// `!(x > 0.0)` style guards are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod feedback;
pub mod scalar;
pub mod simulator;
pub mod spectrum;
pub mod waterfill;

pub use error::{Error, Result};
pub use feedback::{BoundReport, CyPoint, SkSolution};
pub use simulator::{MonteCarloReport, SchemeConfig, TraceStep, VarianceTrace};

pub use spectrum::{PsdSpec, QuadratureConfig};
pub use waterfill::WaterfillSolution;
