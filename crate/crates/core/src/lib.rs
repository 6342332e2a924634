//! Power of two-sample A/B tests when interference changes the treatment
//! some units actually receive.
//!
//! The crate is `no_std` (it needs `alloc`) and holds all of the numerics:
//!
//! * [`graph`]: interference networks, edge-list parsing, degree statistics
//!   and synthetic generators.
//! * [`labels`]: intended assignments and neighborhood switching
//!   probabilities.
//! * [`interference`]: the Bernoulli switching mechanism, its moments and the
//!   standardized gap.
//! * [`power`]: closed-form power under misspecified labels and the plug-in
//!   estimation procedure.
//! * [`oracle`]: Monte Carlo simulation of the whole experiment, used to
//!   check the closed forms.
//! * [`surface`]: grid sweeps for power curves and surfaces.
//!
//! Randomness is drawn from counter-keyed substreams ([`rng`]), so results
//! depend only on the master seed and never on evaluation order.

#![no_std]
// `!(x > 0.0)` is used on purpose: NaN must fail parameter checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod graph;
pub mod interference;
pub mod labels;
pub mod normal;
pub mod oracle;
pub mod power;
pub mod rng;
pub mod surface;

pub use error::{Error, Result};
pub use graph::{
    generate_graph, parse_edge_list, parse_edge_list_with, DegreeDistribution, DegreeMode,
    EdgeListOptions, Graph, GraphModel,
};
pub use interference::{
    sample_switch, standardized_gap, switch_moments, SwitchMoments, SwitchSummary,
};
pub use labels::{
    assign_labels, class_a_count, flip_random, neighborhood_switch_probs, ClassLabels, Label,
    SwitchProbs,
};
pub use normal::{normal_cdf, normal_quantile, normal_sf, z_critical};
pub use oracle::{
    clt_diagnostics, empirical_expected_power, empirical_power, empirical_type_one, simulate_trial,
    CltDiagnostics, MCEstimate,
};
pub use power::{
    estimate_power, estimate_power_from_probs, power_bernoulli, power_bernoulli_with, power_normal,
    AssumptionFlag, BernoulliForm, MeasurementModel, PowerEstimate, TestConfig,
};
pub use rng::Stream;
pub use surface::{
    power_surface, Axis, GapRule, Grid, Source, SurfaceBase, SurfacePlan, SurfaceRow,
};
