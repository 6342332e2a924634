//! Rayon drivers over the core's per-trial substreams.
//!
//! Work is split into fixed chunks of trial indices. Each trial draws from
//! its own substream and per-chunk results are combined in index order, so
//! every function here returns exactly what the sequential core function
//! returns, whatever the thread count.

use netpower_core::oracle::{
    count_rejections, expected_power_design, power_design, replicate_stream, trial_stream,
    type_one_design, CltPlan, Design,
};
use netpower_core::rng::Stream;
use netpower_core::{
    ClassLabels, CltDiagnostics, MCEstimate, SurfacePlan, SurfaceRow, SwitchProbs, TestConfig,
};
use rayon::prelude::*;

use crate::Error;

const CHUNK: u64 = 1024;

fn chunks(total: u64) -> impl IndexedParallelIterator<Item = std::ops::Range<u64>> {
    let count = usize::try_from(total.div_ceil(CHUNK)).expect("chunk count fits in usize");
    (0..count).into_par_iter().map(move |i| {
        let i = i as u64;
        i * CHUNK..((i + 1) * CHUNK).min(total)
    })
}

/// Runs `f` on a pool with `threads` workers (all cores when `None`).
pub fn with_threads<R: Send>(
    threads: Option<usize>,
    f: impl FnOnce() -> R + Send,
) -> Result<R, Error> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::Runtime(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub fn par_count_rejections<D: Design + ?Sized>(design: &D, stream: Stream, trials: u64) -> u64 {
    chunks(trials)
        .map(|range| count_rejections(design, stream, range))
        .sum()
}

/// Rejection indicator of every trial, in trial order.
pub fn par_trial_outcomes<D: Design + ?Sized>(
    design: &D,
    stream: Stream,
    trials: u64,
) -> Vec<bool> {
    let trials = usize::try_from(trials).expect("trial count fits in usize");
    (0..trials)
        .into_par_iter()
        .map(|k| design.trial(&mut stream.child(k as u64).rng()))
        .collect()
}

pub fn empirical_power(
    c: &ClassLabels,
    d: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> netpower_core::Result<MCEstimate> {
    let design = power_design(c, d, cfg, trials)?;
    let hits = par_count_rejections(&design, trial_stream(seed), trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

pub fn empirical_type_one(
    c: &ClassLabels,
    d: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> netpower_core::Result<MCEstimate> {
    let design = type_one_design(c, d, cfg, trials)?;
    let hits = par_count_rejections(&design, trial_stream(seed), trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

pub fn empirical_expected_power(
    p: &SwitchProbs,
    c: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> netpower_core::Result<MCEstimate> {
    let design = expected_power_design(p, c, cfg, trials)?;
    let hits = par_count_rejections(&design, trial_stream(seed), trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

/// Standardized gaps of every replicate, in replicate order.
pub fn standardized_gaps(plan: &CltPlan<'_>, replicates: u64, seed: u64) -> Vec<f64> {
    let stream = replicate_stream(seed);
    let parts: Vec<Vec<f64>> = chunks(replicates)
        .map(|range| plan.standardized_gaps(stream, range))
        .collect();
    parts.concat()
}

pub fn clt_diagnostics(
    p: &SwitchProbs,
    c: &ClassLabels,
    replicates: u64,
    seed: u64,
) -> netpower_core::Result<CltDiagnostics> {
    let plan = CltPlan::new(p, c, replicates)?;
    let values = standardized_gaps(&plan, replicates, seed);
    Ok(CltDiagnostics::from_values(values, seed))
}

/// Evaluates every grid point; rows come back in grid order.
pub fn power_surface(plan: &SurfacePlan<'_>) -> netpower_core::Result<Vec<SurfaceRow>> {
    (0..plan.len())
        .into_par_iter()
        .map(|i| plan.evaluate(i))
        .collect()
}
