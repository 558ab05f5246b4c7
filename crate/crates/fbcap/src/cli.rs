//! Argument definitions for the `fbcap` binary.

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "fbcap",
    version,
    about = "Capacity, feedback rates and bounds for Gaussian noise channels with memory"
)]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Absolute tolerance of the spectral quadrature.
    #[arg(long, default_value_t = 1e-10, global = true)]
    pub tol: f64,
    /// Report `wall_time_s` as null so that repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub no_timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Water-filling capacity without feedback.
    Capacity {
        /// `paper`, `white:LEVEL` or a JSON spec file.
        #[arg(long, default_value = "paper")]
        psd: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
        /// Also tabulate the noise, input and output spectra on this many
        /// frequencies.
        #[arg(long, default_value_t = 0)]
        grid_points: usize,
    },
    /// Root and rate of the first-order feedback scheme.
    SkRate {
        /// `paper`, `white:LEVEL` or a JSON spec file.
        #[arg(long, default_value = "paper")]
        psd: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
    },
    /// Every upper bound on the feedback capacity next to the feedback rate.
    Bounds {
        /// `paper`, `white:LEVEL` or a JSON spec file.
        #[arg(long, default_value = "paper")]
        psd: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        alpha_min: f64,
        #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
        alpha_max: f64,
        #[arg(long, default_value_t = 50)]
        alpha_points: usize,
    },
    /// Feedback rate against C(2P) on the first-order moving-average channel
    /// at unit power.
    Counterexample {
        /// Also tabulate the comparison over `A..B[:steps]` (linear, inclusive).
        #[arg(long)]
        power_sweep: Option<PowerSweep>,
    },
    /// Deterministic variance trace and Monte Carlo run of the feedback scheme.
    Simulate {
        /// `paper`, `white:LEVEL` or a JSON spec file.
        #[arg(long, default_value = "paper")]
        psd: String,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        power: f64,
        /// Bits per channel use; defaults to 0.9 times the trace rate.
        #[arg(long, allow_negative_numbers = true)]
        rate: Option<f64>,
        #[arg(long, default_value_t = 40)]
        horizon: usize,
        /// Defaults to a quarter of the horizon.
        #[arg(long)]
        burn_in: Option<usize>,
        /// Zero skips the Monte Carlo stage.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trace as CSV to this path.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
}

/// `A..B[:steps]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSweep {
    pub start: f64,
    pub end: f64,
    pub steps: usize,
}

impl PowerSweep {
    pub const DEFAULT_STEPS: usize = 40;

    pub fn powers(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.end - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|k| {
                if k + 1 == self.steps {
                    self.end
                } else {
                    self.start + h * k as f64
                }
            })
            .collect()
    }
}

impl FromStr for PowerSweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (range, steps) = match s.split_once(':') {
            Some((r, n)) => (
                r,
                n.parse::<usize>()
                    .map_err(|_| format!("bad step count {n:?}"))?,
            ),
            None => (s, Self::DEFAULT_STEPS),
        };
        let (a, b) = range
            .split_once("..")
            .ok_or_else(|| format!("expected A..B[:steps], got {s:?}"))?;
        let start: f64 = a.parse().map_err(|_| format!("bad sweep start {a:?}"))?;
        let end: f64 = b.parse().map_err(|_| format!("bad sweep end {b:?}"))?;
        if !(start > 0.0 && end >= start && end.is_finite()) {
            return Err("sweep needs 0 < A <= B".into());
        }
        if steps == 0 {
            return Err("sweep needs at least one step".into());
        }
        Ok(Self { start, end, steps })
    }
}
