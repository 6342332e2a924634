//! Brute-force simulation of the whole experiment: draw every unit's
//! outcome from its realized treatment, average under the intended labels,
//! and apply the test. Nothing here uses the closed forms in
//! [`crate::power`], so the two can check each other.
//!
//! Trial `k` of a run with master seed `s` always draws from the substream
//! `(s, trials, k)`. The functions here run trials sequentially; drivers
//! that split a range of trials across threads obtain identical counts.

use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Error, Result};
use crate::interference::{flips, sample_gap_with, standardize, switch_moments, SwitchMoments};
use crate::labels::{ClassLabels, Label, SwitchProbs};
use crate::normal::{normal_cdf, z_critical};
use crate::power::{MeasurementModel, TestConfig};
use crate::rng::{purpose, Stream, StreamRng};

/// A Monte Carlo proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MCEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl MCEstimate {
    pub fn from_counts(hits: u64, trials: u64, seed: u64) -> Self {
        debug_assert!(trials >= 1);
        let estimate = hits as f64 / trials as f64;
        MCEstimate {
            estimate,
            std_error: libm::sqrt(estimate * (1.0 - estimate) / trials as f64),
            trials,
            seed,
        }
    }
}

/// Substream parent for the trials of a run with the given master seed.
pub fn trial_stream(seed: u64) -> Stream {
    Stream::new(seed).child(purpose::TRIALS)
}

/// Substream parent for the replicates of a CLT run.
pub fn replicate_stream(seed: u64) -> Stream {
    Stream::new(seed).child(purpose::REPLICATES)
}

/// One simulated experiment that either rejects H0 or not.
pub trait Design: Sync {
    fn trial(&self, rng: &mut StreamRng) -> bool;
}

/// Counts rejections over the trials in `range`.
pub fn count_rejections<D: Design + ?Sized>(design: &D, stream: Stream, range: Range<u64>) -> u64 {
    range
        .map(|k| design.trial(&mut stream.child(k).rng()) as u64)
        .sum()
}

#[derive(Debug, Clone, Copy)]
enum Outcome {
    Normal { mu: [f64; 2], sigma: f64 },
    Bernoulli { mu: [f64; 2] },
}

impl Outcome {
    #[inline]
    fn draw(&self, realized: Label, rng: &mut StreamRng) -> f64 {
        match *self {
            Outcome::Normal { mu, sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                mu[realized as usize] + sigma * z
            }
            Outcome::Bernoulli { mu } => (rng.random::<f64>() < mu[realized as usize]) as u8 as f64,
        }
    }
}

/// The pieces of the test that do not change between trials.
#[derive(Debug, Clone, Copy)]
struct TestStatistic {
    outcome: Outcome,
    n_a: f64,
    n_b: f64,
    se: f64,
    z_alpha: f64,
}

impl TestStatistic {
    fn new(c: &ClassLabels, cfg: &TestConfig) -> Result<Self> {
        cfg.validate()?;
        let n_a = c.count(Label::A);
        let n_b = c.len() - n_a;
        if n_a == 0 {
            return Err(Error::EmptyClass(Label::A));
        }
        if n_b == 0 {
            return Err(Error::EmptyClass(Label::B));
        }
        let (n_a, n_b, n) = (n_a as f64, n_b as f64, c.len() as f64);
        let (outcome, se) = match cfg.model {
            MeasurementModel::Normal { mu_a, mu_b, sigma } => (
                Outcome::Normal {
                    mu: [mu_a, mu_b],
                    sigma,
                },
                sigma * libm::sqrt(1.0 / n_a + 1.0 / n_b),
            ),
            MeasurementModel::Bernoulli { mu_a, mu_b } => {
                let var = mu_a * (1.0 - mu_a) + mu_b * (1.0 - mu_b);
                (
                    Outcome::Bernoulli { mu: [mu_a, mu_b] },
                    libm::sqrt(2.0 * var / n),
                )
            }
        };
        Ok(TestStatistic {
            outcome,
            n_a,
            n_b,
            se,
            z_alpha: z_critical(cfg.alpha)?,
        })
    }

    #[inline]
    fn rejects(&self, sum_a: f64, sum_b: f64) -> bool {
        (sum_a / self.n_a - sum_b / self.n_b) / self.se > self.z_alpha
    }
}

/// Trials with intended labels `c` and fixed realized labels `d`.
#[derive(Debug, Clone)]
pub struct FixedDesign<'a> {
    c: &'a ClassLabels,
    d: &'a ClassLabels,
    stat: TestStatistic,
}

impl<'a> FixedDesign<'a> {
    pub fn new(c: &'a ClassLabels, d: &'a ClassLabels, cfg: &TestConfig) -> Result<Self> {
        d.check_len(c.len())?;
        Ok(FixedDesign {
            c,
            d,
            stat: TestStatistic::new(c, cfg)?,
        })
    }
}

impl Design for FixedDesign<'_> {
    fn trial(&self, rng: &mut StreamRng) -> bool {
        let (mut sum_a, mut sum_b) = (0.0, 0.0);
        for (&ci, &di) in self.c.as_slice().iter().zip(self.d.as_slice()) {
            let x = self.stat.outcome.draw(di, rng);
            match ci {
                Label::A => sum_a += x,
                Label::B => sum_b += x,
            }
        }
        self.stat.rejects(sum_a, sum_b)
    }
}

/// Trials that first draw realized labels by Bernoulli switching, then
/// measure.
#[derive(Debug, Clone)]
pub struct SwitchingDesign<'a> {
    c: &'a ClassLabels,
    p: &'a SwitchProbs,
    stat: TestStatistic,
}

impl<'a> SwitchingDesign<'a> {
    pub fn new(p: &'a SwitchProbs, c: &'a ClassLabels, cfg: &TestConfig) -> Result<Self> {
        c.check_len(p.len())?;
        Ok(SwitchingDesign {
            c,
            p,
            stat: TestStatistic::new(c, cfg)?,
        })
    }
}

impl Design for SwitchingDesign<'_> {
    fn trial(&self, rng: &mut StreamRng) -> bool {
        let (mut sum_a, mut sum_b) = (0.0, 0.0);
        for (&ci, &pi) in self.c.as_slice().iter().zip(self.p.as_slice()) {
            let di = if flips(pi, rng) { ci.opposite() } else { ci };
            let x = self.stat.outcome.draw(di, rng);
            match ci {
                Label::A => sum_a += x,
                Label::B => sum_b += x,
            }
        }
        self.stat.rejects(sum_a, sum_b)
    }
}

/// One experiment: outcomes from `d`, test under `c`. Returns whether H0 is
/// rejected.
pub fn simulate_trial(
    c: &ClassLabels,
    d: &ClassLabels,
    cfg: &TestConfig,
    stream: Stream,
) -> Result<bool> {
    Ok(FixedDesign::new(c, d, cfg)?.trial(&mut stream.rng()))
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(invalid("trials", "at least one trial is required"));
    }
    Ok(())
}

/// Prepares the design behind [`empirical_power`], validating inputs.
pub fn power_design<'a>(
    c: &'a ClassLabels,
    d: &'a ClassLabels,
    cfg: &TestConfig,
    trials: u64,
) -> Result<FixedDesign<'a>> {
    check_trials(trials)?;
    cfg.validate_h1()?;
    FixedDesign::new(c, d, cfg)
}

/// Prepares the design behind [`empirical_type_one`]; requires μ_A = μ_B.
pub fn type_one_design<'a>(
    c: &'a ClassLabels,
    d: &'a ClassLabels,
    cfg: &TestConfig,
    trials: u64,
) -> Result<FixedDesign<'a>> {
    check_trials(trials)?;
    if cfg.delta() != 0.0 {
        return Err(invalid("delta", "type-I simulation requires mu_a = mu_b"));
    }
    FixedDesign::new(c, d, cfg)
}

/// Prepares the design behind [`empirical_expected_power`].
pub fn expected_power_design<'a>(
    p: &'a SwitchProbs,
    c: &'a ClassLabels,
    cfg: &TestConfig,
    trials: u64,
) -> Result<SwitchingDesign<'a>> {
    check_trials(trials)?;
    cfg.validate_h1()?;
    SwitchingDesign::new(p, c, cfg)
}

/// Rejection rate under H1 with fixed realized labels.
pub fn empirical_power(
    c: &ClassLabels,
    d: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let design = power_design(c, d, cfg, trials)?;
    let hits = count_rejections(&design, trial_stream(seed), 0..trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

/// Rejection rate under H0 with fixed realized labels.
pub fn empirical_type_one(
    c: &ClassLabels,
    d: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let design = type_one_design(c, d, cfg, trials)?;
    let hits = count_rejections(&design, trial_stream(seed), 0..trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

/// Rejection rate under H1 averaged over the switching mechanism.
pub fn empirical_expected_power(
    p: &SwitchProbs,
    c: &ClassLabels,
    cfg: &TestConfig,
    trials: u64,
    seed: u64,
) -> Result<MCEstimate> {
    let design = expected_power_design(p, c, cfg, trials)?;
    let hits = count_rejections(&design, trial_stream(seed), 0..trials);
    Ok(MCEstimate::from_counts(hits, trials, seed))
}

/// Summary of the standardized gap over many switching replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CltDiagnostics {
    pub mean: f64,
    pub sd: f64,
    pub ks_distance: f64,
    pub replicates: u64,
    pub seed: u64,
}

/// Validated inputs for a CLT run.
#[derive(Debug, Clone)]
pub struct CltPlan<'a> {
    p: &'a SwitchProbs,
    moments: SwitchMoments,
}

impl<'a> CltPlan<'a> {
    pub fn new(p: &'a SwitchProbs, c: &ClassLabels, replicates: u64) -> Result<Self> {
        if replicates < 100 {
            return Err(invalid(
                "replicates",
                "at least 100 replicates are required",
            ));
        }
        let moments = switch_moments(p, c)?;
        if !(moments.s_n_sq > 0.0) {
            return Err(Error::DegenerateSwitching);
        }
        Ok(CltPlan { p, moments })
    }

    pub fn moments(&self) -> &SwitchMoments {
        &self.moments
    }

    /// Standardized gaps for the replicates in `range`, in index order.
    pub fn standardized_gaps(&self, stream: Stream, range: Range<u64>) -> Vec<f64> {
        range
            .map(|k| {
                let gap = sample_gap_with(self.p, &mut stream.child(k).rng());
                // s_n^2 > 0 was checked in `new`.
                standardize(gap as f64, &self.moments).unwrap_or(f64::NAN)
            })
            .collect()
    }
}

impl CltDiagnostics {
    /// Reduces standardized gaps (in replicate order) to summary statistics.
    pub fn from_values(mut values: Vec<f64>, seed: u64) -> Self {
        let r = values.len() as f64;
        let mean = values.iter().sum::<f64>() / r;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
        let ks_distance = ks_distance(&mut values, normal_cdf);
        CltDiagnostics {
            mean,
            sd: libm::sqrt(var),
            ks_distance,
            replicates: values.len() as u64,
            seed,
        }
    }
}

pub fn clt_diagnostics(
    p: &SwitchProbs,
    c: &ClassLabels,
    replicates: u64,
    seed: u64,
) -> Result<CltDiagnostics> {
    let plan = CltPlan::new(p, c, replicates)?;
    let values = plan.standardized_gaps(replicate_stream(seed), 0..replicates);
    Ok(CltDiagnostics::from_values(values, seed))
}

/// Kolmogorov–Smirnov distance sup |F_n − F| between the empirical
/// distribution of `samples` and `cdf`. Sorts `samples` in place.
pub fn ks_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}
