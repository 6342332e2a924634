//! Bernoulli switching: every unit independently receives the opposite of
//! its intended treatment with its own probability `p_i`.

use alloc::vec::Vec;

use rand::Rng;

use crate::error::{Error, Result};
use crate::labels::{ClassLabels, Label, SwitchProbs};
use crate::rng::{purpose, Stream, StreamRng};

/// Analytic moments of the switching mechanism.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct SwitchMoments {
    /// E[n_S - n_D] = n - 2 sum p_i.
    pub mu_p: f64,
    /// sum p_i (1 - p_i); Var(n_S - n_D) = 4 s_n^2.
    pub s_n_sq: f64,
    /// Expected class sizes after switching.
    pub exp_nA: f64,
    pub exp_nB: f64,
}

/// Counts realized by one draw of the mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct SwitchSummary {
    pub n_S: usize,
    pub n_D: usize,
    /// `n_XY` counts units intended for X that ended up in Y.
    pub n_AA: usize,
    pub n_AB: usize,
    pub n_BA: usize,
    pub n_BB: usize,
    pub nA_tilde: usize,
    pub nB_tilde: usize,
}

impl SwitchSummary {
    pub fn from_labels(c: &ClassLabels, d: &ClassLabels) -> Result<Self> {
        d.check_len(c.len())?;
        let mut s = SwitchSummary::default();
        for (&ci, &di) in c.as_slice().iter().zip(d.as_slice()) {
            s.record(ci, di);
        }
        Ok(s)
    }

    #[inline]
    fn record(&mut self, intended: Label, realized: Label) {
        match (intended, realized) {
            (Label::A, Label::A) => self.n_AA += 1,
            (Label::A, Label::B) => self.n_AB += 1,
            (Label::B, Label::A) => self.n_BA += 1,
            (Label::B, Label::B) => self.n_BB += 1,
        }
        self.n_S = self.n_AA + self.n_BB;
        self.n_D = self.n_AB + self.n_BA;
        self.nA_tilde = self.n_AA + self.n_BA;
        self.nB_tilde = self.n_BB + self.n_AB;
    }

    /// n_S - n_D.
    pub fn gap(&self) -> i64 {
        self.n_S as i64 - self.n_D as i64
    }
}

fn check_pair(p: &SwitchProbs, c: &ClassLabels) -> Result<()> {
    c.check_len(p.len())
}

#[allow(non_snake_case)]
pub fn switch_moments(p: &SwitchProbs, c: &ClassLabels) -> Result<SwitchMoments> {
    check_pair(p, c)?;
    let n = p.len() as f64;
    let mut sum_p = 0.0;
    let mut s_n_sq = 0.0;
    let mut exp_nA = 0.0;
    for (&pi, &ci) in p.as_slice().iter().zip(c.as_slice()) {
        sum_p += pi;
        s_n_sq += pi * (1.0 - pi);
        exp_nA += match ci {
            Label::A => 1.0 - pi,
            Label::B => pi,
        };
    }
    Ok(SwitchMoments {
        mu_p: n - 2.0 * sum_p,
        s_n_sq,
        exp_nA,
        exp_nB: n - exp_nA,
    })
}

/// Draws realized labels `d` from intended labels `c`.
pub fn sample_switch(
    p: &SwitchProbs,
    c: &ClassLabels,
    seed: u64,
) -> Result<(ClassLabels, SwitchSummary)> {
    check_pair(p, c)?;
    let mut rng = Stream::new(seed).child(purpose::SWITCH).rng();
    Ok(sample_switch_with(p, c, &mut rng))
}

pub(crate) fn sample_switch_with(
    p: &SwitchProbs,
    c: &ClassLabels,
    rng: &mut StreamRng,
) -> (ClassLabels, SwitchSummary) {
    let mut summary = SwitchSummary::default();
    let d: Vec<Label> = p
        .as_slice()
        .iter()
        .zip(c.as_slice())
        .map(|(&pi, &ci)| {
            let di = if flips(pi, rng) { ci.opposite() } else { ci };
            summary.record(ci, di);
            di
        })
        .collect();
    (ClassLabels::new(d), summary)
}

/// One Bernoulli(p) draw. Always consumes exactly one uniform so streams stay
/// aligned across units regardless of p.
#[inline]
pub(crate) fn flips(p: f64, rng: &mut StreamRng) -> bool {
    rng.random::<f64>() < p
}

/// Gap n_S - n_D drawn directly, without materializing `d`.
pub(crate) fn sample_gap_with(p: &SwitchProbs, rng: &mut StreamRng) -> i64 {
    let n_d = p.as_slice().iter().filter(|&&pi| flips(pi, rng)).count() as i64;
    p.len() as i64 - 2 * n_d
}

/// (n_S - n_D - mu_p) / (2 s_n).
pub fn standardized_gap(s: &SwitchSummary, m: &SwitchMoments) -> Result<f64> {
    standardize(s.gap() as f64, m)
}

pub(crate) fn standardize(gap: f64, m: &SwitchMoments) -> Result<f64> {
    if !(m.s_n_sq > 0.0) {
        return Err(Error::DegenerateSwitching);
    }
    Ok((gap - m.mu_p) / (2.0 * libm::sqrt(m.s_n_sq)))
}
