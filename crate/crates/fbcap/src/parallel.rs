//! Monte Carlo trials spread over the rayon pool.
//!
//! Trials run in parallel in fixed-size chunks; each chunk is collected in
//! trial order and folded into the running sums sequentially, so the report
//! is bit-identical to [`fbcap_core::simulator::simulate_transmission`] for
//! any thread count.

use fbcap_core::simulator::{MonteCarloPlan, TrialOutcome};
use fbcap_core::{Error, MonteCarloReport, PsdSpec, Result, SchemeConfig};
use rayon::prelude::*;

/// Trials held in memory at once.
const CHUNK: u64 = 1024;

pub fn run_plan(plan: &MonteCarloPlan, trials: u64) -> Result<MonteCarloReport> {
    if trials == 0 {
        return Err(Error::InvalidInput("at least one trial is required"));
    }
    let mut tally = plan.tally();
    let mut start = 0;
    while start < trials {
        let end = trials.min(start + CHUNK);
        let outcomes: Vec<TrialOutcome> = (start..end)
            .into_par_iter()
            .map(|t| plan.trial(t))
            .collect::<Result<_>>()?;
        outcomes.iter().for_each(|o| tally.add(o));
        start = end;
    }
    Ok(plan.finish(&tally))
}

pub fn simulate_parallel(
    config: &SchemeConfig,
    noise: &PsdSpec,
    trials: u64,
) -> Result<MonteCarloReport> {
    run_plan(&MonteCarloPlan::new(config, noise)?, trials)
}
