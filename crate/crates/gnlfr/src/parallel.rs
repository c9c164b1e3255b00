//! Rayon drivers. Every replicate and every fold owns its own state, so the
//! results are the same for any thread count.

use gnlfr_core::analysis::{LooContext, LooFold};
use gnlfr_core::simgen::{run_replicate, MpeReport, ReplicateOutcome, ScenarioSpec};
use gnlfr_core::Result;
use rayon::prelude::*;

/// All replicates of a scenario, in replicate order.
pub fn run_replicates(spec: &ScenarioSpec) -> Result<Vec<ReplicateOutcome>> {
    spec.validate()?;
    (0..spec.replicates)
        .into_par_iter()
        .map(|b| run_replicate(spec, b))
        .collect()
}

pub fn run_scenario(spec: &ScenarioSpec) -> Result<MpeReport> {
    let outcomes = run_replicates(spec)?;
    MpeReport::from_errors(outcomes.iter().map(|o| o.error).collect())
}

/// Every leave-one-out fold, in subject order.
pub fn loo_folds(ctx: &LooContext) -> Result<Vec<LooFold>> {
    (0..ctx.len()).into_par_iter().map(|i| ctx.fold(i)).collect()
}
