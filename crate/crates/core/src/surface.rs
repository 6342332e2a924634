//! Power curves and surfaces over a Cartesian grid of design parameters.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::labels::{assign_labels_from, class_a_count, ClassLabels, SwitchProbs};
use crate::power::{
    estimate_power, estimate_power_from_probs, power_at, AssumptionFlag, TestConfig,
};
use crate::rng::{purpose, Stream};

/// Label draws averaged per grid point for graph sources.
pub const DEFAULT_LABEL_DRAWS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Axis {
    N,
    Delta,
    PA,
    SwitchProb,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::N => "n",
            Axis::Delta => "delta",
            Axis::PA => "p_a",
            Axis::SwitchProb => "switch_prob",
        }
    }
}

/// Cartesian product of axis values; the first axis varies slowest.
#[derive(Debug, Clone, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Grid {
    axes: Vec<(Axis, Vec<f64>)>,
}

impl Grid {
    pub fn new() -> Self {
        Grid::default()
    }

    pub fn axis(mut self, axis: Axis, values: Vec<f64>) -> Self {
        self.axes.push((axis, values));
        self
    }

    pub fn axes(&self) -> &[(Axis, Vec<f64>)] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        if self.axes.is_empty() {
            return 0;
        }
        self.axes.iter().map(|(_, v)| v.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Coordinates of the `index`-th point.
    pub fn point(&self, mut index: usize) -> Vec<(Axis, f64)> {
        let mut coords = Vec::with_capacity(self.axes.len());
        for (axis, values) in self.axes.iter().rev() {
            coords.push((*axis, values[index % values.len()]));
            index /= values.len();
        }
        coords.reverse();
        coords
    }
}

/// How n_S − n_D is obtained at a grid point without a graph.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum GapRule {
    Absolute(f64),
    /// gap = fraction · n.
    FractionOfN(f64),
}

#[derive(Debug, Clone, Copy)]
pub enum Source<'a> {
    /// Labels are drawn per point and p_i comes from neighborhoods.
    Graph(&'a Graph),
    /// Every unit switches with the same probability.
    UniformP,
    FixedGap(GapRule),
}

/// Values used for parameters that are not swept.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceBase {
    pub n: usize,
    pub p_a: f64,
    pub switch_prob: f64,
    pub label_draws: usize,
    pub config: TestConfig,
}

impl SurfaceBase {
    pub fn new(config: TestConfig) -> Self {
        SurfaceBase {
            n: 1000,
            p_a: 0.5,
            switch_prob: 0.0,
            label_draws: DEFAULT_LABEL_DRAWS,
            config,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SurfaceRow {
    pub point: Vec<(Axis, f64)>,
    pub beta: f64,
    pub assumption_flags: Vec<AssumptionFlag>,
}

/// A validated sweep whose points can be evaluated independently, in any
/// order, on any thread.
#[derive(Debug, Clone)]
pub struct SurfacePlan<'a> {
    grid: Grid,
    base: SurfaceBase,
    source: Source<'a>,
    stream: Stream,
}

impl<'a> SurfacePlan<'a> {
    pub fn new(grid: Grid, base: SurfaceBase, source: Source<'a>, seed: u64) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if matches!(source, Source::Graph(_)) {
            if grid.axes.iter().any(|(a, _)| *a == Axis::N) {
                return Err(invalid("n", "cannot sweep n over a fixed graph"));
            }
            if base.label_draws == 0 {
                return Err(invalid(
                    "label_draws",
                    "at least one label draw is required",
                ));
            }
        }
        for (axis, values) in &grid.axes {
            for &v in values {
                let ok = match axis {
                    Axis::N => v >= 2.0 && libm::trunc(v) == v,
                    Axis::Delta => v > 0.0 && v.is_finite(),
                    Axis::PA | Axis::SwitchProb => (0.0..=1.0).contains(&v),
                };
                if !ok {
                    return Err(invalid(
                        "grid",
                        alloc::format!("{} = {v} is out of range", axis.name()),
                    ));
                }
            }
        }
        Ok(SurfacePlan {
            grid,
            base,
            source,
            stream: Stream::new(seed).child(purpose::SURFACE),
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn evaluate(&self, index: usize) -> Result<SurfaceRow> {
        let point = self.grid.point(index);
        let mut n = self.base.n;
        let mut cfg = self.base.config;
        let mut p_a = self.base.p_a;
        let mut switch_prob = self.base.switch_prob;
        for &(axis, v) in &point {
            match axis {
                Axis::N => n = v as usize,
                Axis::Delta => cfg = cfg.with_delta(v),
                Axis::PA => p_a = v,
                Axis::SwitchProb => switch_prob = v,
            }
        }
        let mut flags = Vec::new();
        let beta = match self.source {
            Source::Graph(g) => {
                let stream = self.stream.child(index as u64);
                let draws = self.base.label_draws;
                let mut total = 0.0;
                for r in 0..draws {
                    let c = assign_labels_from(g.node_count(), p_a, stream.child(r as u64))?;
                    let est = estimate_power(g, &c, &cfg)?;
                    merge(&mut flags, &est.assumption_flags);
                    total += est.beta;
                }
                total / draws as f64
            }
            Source::UniformP => {
                // Only class counts matter when every p_i is equal.
                let c = ClassLabels::blocks(n, class_a_count(n, p_a));
                let p = SwitchProbs::uniform(n, switch_prob)?;
                let est = estimate_power_from_probs(&p, &c, &cfg)?;
                merge(&mut flags, &est.assumption_flags);
                est.beta
            }
            Source::FixedGap(rule) => {
                cfg.validate_h1()?;
                let gap = match rule {
                    GapRule::Absolute(g) => g,
                    GapRule::FractionOfN(f) => f * n as f64,
                };
                let n_a = class_a_count(n, p_a);
                if 2 * n_a != n {
                    flags.push(AssumptionFlag::UnbalancedClasses);
                }
                power_at(n, gap, n_a as f64, (n - n_a) as f64, &cfg, &mut flags)?
            }
        };
        flags.sort();
        Ok(SurfaceRow {
            point,
            beta,
            assumption_flags: flags,
        })
    }
}

fn merge(into: &mut Vec<AssumptionFlag>, from: &[AssumptionFlag]) {
    for f in from {
        if !into.contains(f) {
            into.push(*f);
        }
    }
}

/// Evaluates every grid point sequentially.
pub fn power_surface(
    grid: Grid,
    base: SurfaceBase,
    source: Source<'_>,
    seed: u64,
) -> Result<Vec<SurfaceRow>> {
    let plan = SurfacePlan::new(grid, base, source, seed)?;
    (0..plan.len()).map(|i| plan.evaluate(i)).collect()
}
