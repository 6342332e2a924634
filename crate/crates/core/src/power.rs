//! Closed-form power of the one-sided two-sample test when some units
//! received the opposite treatment, and the plug-in estimation procedure
//! for an observed interference network.
//!
//! Conventions: δ = μ_A − μ_B > 0, T = (x̄_A − x̄_B)/se with known
//! variances, reject when T > Z_α. The gap n_S − n_D counts units that kept
//! their intended label minus units that switched.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::interference::switch_moments;
use crate::labels::{neighborhood_switch_probs, ClassLabels, Label, SwitchProbs};
use crate::normal::{normal_sf, z_critical};

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "lowercase"))]
pub enum MeasurementModel {
    /// N(μ_k, σ²) outcomes with known σ.
    Normal { mu_a: f64, mu_b: f64, sigma: f64 },
    /// Bernoulli(μ_k) outcomes.
    Bernoulli { mu_a: f64, mu_b: f64 },
}

/// Which form of the first term of the Bernoulli power expression to use.
///
/// `Corrected` multiplies `√(n/2)·Z_α` by σ_{A,B}; this is the form under
/// which zero gap gives power α and the interference-free balanced design
/// gives the usual two-proportion power. `AsPrinted` divides by σ_{A,B}, as
/// the expression is commonly quoted; it exists only to reproduce those
/// numbers and is flagged whenever used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BernoulliForm {
    #[default]
    Corrected,
    AsPrinted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TestConfig {
    pub alpha: f64,
    pub model: MeasurementModel,
    #[cfg_attr(feature = "serde", serde(default))]
    pub bernoulli_form: BernoulliForm,
}

impl TestConfig {
    pub fn normal(alpha: f64, mu_a: f64, mu_b: f64, sigma: f64) -> Self {
        TestConfig {
            alpha,
            model: MeasurementModel::Normal { mu_a, mu_b, sigma },
            bernoulli_form: BernoulliForm::Corrected,
        }
    }

    pub fn bernoulli(alpha: f64, mu_a: f64, mu_b: f64) -> Self {
        TestConfig {
            alpha,
            model: MeasurementModel::Bernoulli { mu_a, mu_b },
            bernoulli_form: BernoulliForm::Corrected,
        }
    }

    pub fn mu_a(&self) -> f64 {
        match self.model {
            MeasurementModel::Normal { mu_a, .. } | MeasurementModel::Bernoulli { mu_a, .. } => {
                mu_a
            }
        }
    }

    pub fn mu_b(&self) -> f64 {
        match self.model {
            MeasurementModel::Normal { mu_b, .. } | MeasurementModel::Bernoulli { mu_b, .. } => {
                mu_b
            }
        }
    }

    /// δ = μ_A − μ_B.
    pub fn delta(&self) -> f64 {
        self.mu_a() - self.mu_b()
    }

    /// Same configuration with μ_A moved to μ_B + δ.
    pub fn with_delta(&self, delta: f64) -> Self {
        let mut out = *self;
        match &mut out.model {
            MeasurementModel::Normal { mu_a, mu_b, .. }
            | MeasurementModel::Bernoulli { mu_a, mu_b } => *mu_a = *mu_b + delta,
        }
        out
    }

    /// Same configuration under H0 (μ_A = μ_B).
    pub fn null(&self) -> Self {
        self.with_delta(0.0)
    }

    /// Checks α and the model parameters, without constraining δ.
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(invalid("alpha", "must lie in (0, 1)"));
        }
        match self.model {
            MeasurementModel::Normal { mu_a, mu_b, sigma } => {
                if !(mu_a.is_finite() && mu_b.is_finite()) {
                    return Err(invalid("mu", "means must be finite"));
                }
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(invalid("sigma", "must be positive"));
                }
            }
            MeasurementModel::Bernoulli { mu_a, mu_b } => {
                for mu in [mu_a, mu_b] {
                    if !(mu > 0.0 && mu < 1.0) {
                        return Err(Error::DegenerateVariance);
                    }
                }
            }
        }
        Ok(())
    }

    /// [`TestConfig::validate`] plus δ > 0.
    pub fn validate_h1(&self) -> Result<()> {
        self.validate()?;
        if !(self.delta() > 0.0) {
            return Err(invalid("delta", "the alternative requires mu_a > mu_b"));
        }
        Ok(())
    }
}

/// Caveats attached to a power value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum AssumptionFlag {
    /// The closed forms assume n_A = n_B; the intended labels are unbalanced.
    UnbalancedClasses,
    /// The Bernoulli power used the literal (divided) first term.
    BernoulliAsPrinted,
}

impl AssumptionFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            AssumptionFlag::UnbalancedClasses => "unbalanced-classes",
            AssumptionFlag::BernoulliAsPrinted => "bernoulli-as-printed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[allow(non_snake_case)]
pub struct PowerEstimate {
    pub beta: f64,
    pub n: usize,
    /// n_S − n_D, or its expectation μ_p.
    pub gap: f64,
    pub exp_nA: f64,
    pub exp_nB: f64,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub config: TestConfig,
    pub assumption_flags: Vec<AssumptionFlag>,
}

fn check_n_gap(n: usize, gap: f64) -> Result<()> {
    if n < 2 {
        return Err(invalid("n", "at least two units are required"));
    }
    if !(gap.abs() <= n as f64) {
        return Err(invalid("gap", "must satisfy -n <= gap <= n"));
    }
    Ok(())
}

/// Exact power under normal outcomes with balanced intended classes:
/// `1 − Φ(Z_α − gap·δ / (2σ√n))`.
pub fn power_normal(n: usize, gap: f64, delta: f64, sigma: f64, alpha: f64) -> Result<f64> {
    check_n_gap(n, gap)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(invalid("delta", "the alternative requires delta > 0"));
    }
    let z = z_critical(alpha)?;
    Ok(normal_sf(
        z - gap * delta / (2.0 * sigma * libm::sqrt(n as f64)),
    ))
}

/// Large-sample power under Bernoulli outcomes:
/// `1 − Φ(√(n/2)·Z_α·σ_{A,B} − gap·δ / (2√(ñ_A σ_A² + ñ_B σ_B²)))`
/// with `σ_{A,B}² = (σ_A² + σ_B²)/(ñ_A σ_A² + ñ_B σ_B²)`.
#[allow(non_snake_case)]
pub fn power_bernoulli(
    n: usize,
    gap: f64,
    nA_tilde: f64,
    nB_tilde: f64,
    mu_a: f64,
    mu_b: f64,
    alpha: f64,
) -> Result<f64> {
    power_bernoulli_with(
        n,
        gap,
        nA_tilde,
        nB_tilde,
        mu_a,
        mu_b,
        alpha,
        BernoulliForm::Corrected,
    )
}

#[allow(non_snake_case, clippy::too_many_arguments)]
pub fn power_bernoulli_with(
    n: usize,
    gap: f64,
    nA_tilde: f64,
    nB_tilde: f64,
    mu_a: f64,
    mu_b: f64,
    alpha: f64,
    form: BernoulliForm,
) -> Result<f64> {
    check_n_gap(n, gap)?;
    for mu in [mu_a, mu_b] {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::DegenerateVariance);
        }
    }
    if !(mu_a > mu_b) {
        return Err(invalid("delta", "the alternative requires mu_a > mu_b"));
    }
    if !(nA_tilde > 0.0 && nB_tilde > 0.0) {
        return Err(invalid("n_tilde", "realized class sizes must be positive"));
    }
    let nf = n as f64;
    if (nA_tilde + nB_tilde - nf).abs() > 1e-9 * nf {
        return Err(invalid("n_tilde", "realized class sizes must sum to n"));
    }
    let z = z_critical(alpha)?;
    let var_a = mu_a * (1.0 - mu_a);
    let var_b = mu_b * (1.0 - mu_b);
    let spread = nA_tilde * var_a + nB_tilde * var_b;
    let sigma_ab = libm::sqrt((var_a + var_b) / spread);
    let scale = libm::sqrt(nf / 2.0) * z;
    let first = match form {
        BernoulliForm::Corrected => scale * sigma_ab,
        BernoulliForm::AsPrinted => scale / sigma_ab,
    };
    let second = gap * (mu_a - mu_b) / (2.0 * libm::sqrt(spread));
    Ok(normal_sf(first - second))
}

/// Plug-in power for an observed network: switching probabilities from the
/// neighborhoods, then the closed form at gap = μ_p and ñ_k at their
/// expectations.
pub fn estimate_power(g: &Graph, c: &ClassLabels, cfg: &TestConfig) -> Result<PowerEstimate> {
    let p = neighborhood_switch_probs(g, c)?;
    estimate_power_from_probs(&p, c, cfg)
}

/// [`estimate_power`] for switching probabilities obtained some other way.
pub fn estimate_power_from_probs(
    p: &SwitchProbs,
    c: &ClassLabels,
    cfg: &TestConfig,
) -> Result<PowerEstimate> {
    cfg.validate_h1()?;
    let m = switch_moments(p, c)?;
    let n = p.len();
    let mut flags = Vec::new();
    if c.count(Label::A) * 2 != n {
        flags.push(AssumptionFlag::UnbalancedClasses);
    }
    let beta = power_at(n, m.mu_p, m.exp_nA, m.exp_nB, cfg, &mut flags)?;
    Ok(PowerEstimate {
        beta,
        n,
        gap: m.mu_p,
        exp_nA: m.exp_nA,
        exp_nB: m.exp_nB,
        config: *cfg,
        assumption_flags: flags,
    })
}

/// Dispatches to the closed form matching `cfg.model`.
#[allow(non_snake_case)]
pub(crate) fn power_at(
    n: usize,
    gap: f64,
    nA: f64,
    nB: f64,
    cfg: &TestConfig,
    flags: &mut Vec<AssumptionFlag>,
) -> Result<f64> {
    match cfg.model {
        MeasurementModel::Normal { mu_a, mu_b, sigma } => {
            power_normal(n, gap, mu_a - mu_b, sigma, cfg.alpha)
        }
        MeasurementModel::Bernoulli { mu_a, mu_b } => {
            if cfg.bernoulli_form == BernoulliForm::AsPrinted
                && !flags.contains(&AssumptionFlag::BernoulliAsPrinted)
            {
                flags.push(AssumptionFlag::BernoulliAsPrinted);
            }
            power_bernoulli_with(n, gap, nA, nB, mu_a, mu_b, cfg.alpha, cfg.bernoulli_form)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_graph;
    use crate::graph::GraphModel;
    use crate::labels::assign_labels;
    use crate::normal::normal_cdf;
    use alloc::vec;
    use proptest::prelude::*;
    use Label::{A, B};

    const Z05: f64 = 1.644_853_626_951_472_2;

    #[test]
    fn normal_no_interference_reference() {
        let beta = power_normal(100, 100.0, 1.0, 1.0, 0.05).unwrap();
        assert!((beta - 0.9996).abs() < 1e-4, "{beta}");
        // Textbook one-sided two-sample power.
        let textbook = 1.0 - normal_cdf(Z05 - 1.0 * 10.0 / 2.0);
        assert!((beta - textbook).abs() < 1e-15);
    }

    #[test]
    fn zero_gap_gives_alpha() {
        for alpha in [0.01, 0.05, 0.2] {
            let beta = power_normal(100, 0.0, 1.0, 1.0, alpha).unwrap();
            assert!((beta - alpha).abs() < 1e-15);
            let beta = power_bernoulli(100, 0.0, 37.0, 63.0, 0.7, 0.3, alpha).unwrap();
            assert!((beta - alpha).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_validation() {
        assert!(power_normal(100, 10.0, 0.0, 1.0, 0.05).is_err());
        assert!(power_normal(100, 10.0, 1.0, 0.0, 0.05).is_err());
        assert!(power_normal(100, 101.0, 1.0, 1.0, 0.05).is_err());
        assert!(power_normal(1, 1.0, 1.0, 1.0, 0.05).is_err());
        assert!(power_normal(100, 10.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn bernoulli_reference() {
        let beta = power_bernoulli(200, 200.0, 100.0, 100.0, 0.6, 0.4, 0.05).unwrap();
        assert!((beta - 0.893).abs() < 0.005, "{beta}");
        // Hand evaluation: σ² = 0.24, spread = 48, σ_AB = 0.1, first = Z_α.
        let hand = normal_sf(Z05 - 40.0 / (2.0 * 48f64.sqrt()));
        assert!((beta - hand).abs() < 1e-14);
    }

    #[test]
    fn bernoulli_balanced_reduces_to_two_proportion_power() {
        for (n, mu_a, mu_b) in [(200usize, 0.6, 0.4), (2000, 0.55, 0.45), (500, 0.3, 0.1)] {
            let h = n as f64 / 2.0;
            let beta = power_bernoulli(n, n as f64, h, h, mu_a, mu_b, 0.05).unwrap();
            let (va, vb) = (mu_a * (1.0 - mu_a), mu_b * (1.0 - mu_b));
            let se = (va / h + vb / h).sqrt();
            // Under H0 the statistic uses √(2(σ_A² + σ_B²)/n), which equals se
            // here, so the textbook power is Φ((δ − Z_α·se)/se).
            let textbook = normal_cdf((mu_a - mu_b - Z05 * se) / se);
            assert!((beta - textbook).abs() < 1e-12);
        }
    }

    #[test]
    fn bernoulli_small_effect_approaches_alpha() {
        let mut prev = 1.0;
        for k in 1..8 {
            let eps = 10f64.powi(-k);
            let beta = power_bernoulli(200, 200.0, 100.0, 100.0, 0.5 + eps, 0.5, 0.05).unwrap();
            assert!(beta < prev);
            prev = beta;
        }
        assert!((prev - 0.05).abs() < 1e-6);
    }

    #[test]
    fn bernoulli_as_printed_differs() {
        let corrected = power_bernoulli(200, 200.0, 100.0, 100.0, 0.6, 0.4, 0.05).unwrap();
        let printed = power_bernoulli_with(
            200,
            200.0,
            100.0,
            100.0,
            0.6,
            0.4,
            0.05,
            BernoulliForm::AsPrinted,
        )
        .unwrap();
        // The literal form scales Z_α by n/2 = 100 here.
        let hand = normal_sf(100.0 * Z05 - 40.0 / (2.0 * 48f64.sqrt()));
        assert!((printed - hand).abs() < 1e-15);
        assert!(printed < corrected);
    }

    #[test]
    fn bernoulli_validation() {
        assert_eq!(
            power_bernoulli(10, 0.0, 5.0, 5.0, 1.0, 0.5, 0.05),
            Err(Error::DegenerateVariance)
        );
        assert!(power_bernoulli(10, 0.0, 5.0, 5.0, 0.4, 0.5, 0.05).is_err());
        assert!(power_bernoulli(10, 0.0, 4.0, 5.0, 0.6, 0.5, 0.05).is_err());
        assert!(power_bernoulli(10, 0.0, 0.0, 10.0, 0.6, 0.5, 0.05).is_err());
    }

    #[test]
    fn estimate_on_empty_graph_is_standard_power() {
        let g = Graph::from_edges(100, false, []).unwrap();
        let c = assign_labels(100, 0.5, 1).unwrap();
        let cfg = TestConfig::normal(0.05, 1.0, 0.0, 1.0);
        let est = estimate_power(&g, &c, &cfg).unwrap();
        assert_eq!(est.gap, 100.0);
        assert_eq!(est.beta, power_normal(100, 100.0, 1.0, 1.0, 0.05).unwrap());
        assert!(est.assumption_flags.is_empty());
    }

    #[test]
    fn estimate_on_k2_and_triangle() {
        let cfg = TestConfig::normal(0.05, 1.0, 0.0, 1.0);
        let k2 = Graph::from_edges(2, false, [(0, 1)]).unwrap();
        let est = estimate_power(&k2, &vec![A, B].into(), &cfg).unwrap();
        assert_eq!(est.gap, -2.0);
        let hand = 1.0 - normal_cdf(Z05 + 2.0 / (2.0 * 2f64.sqrt()));
        assert!((est.beta - hand).abs() < 1e-14);
        assert!((est.beta - 0.0091).abs() < 1e-3);

        let tri = Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let est = estimate_power(&tri, &vec![A, B, B].into(), &cfg).unwrap();
        assert_eq!(est.gap, -1.0);
        let hand = 1.0 - normal_cdf(Z05 + 1.0 / (2.0 * 3f64.sqrt()));
        assert!((est.beta - hand).abs() < 1e-14);
        assert!((est.beta - 0.0268).abs() < 1e-3);
        assert_eq!(
            est.assumption_flags,
            vec![AssumptionFlag::UnbalancedClasses]
        );
    }

    #[test]
    fn estimate_bernoulli_uses_expected_class_sizes() {
        let p = SwitchProbs::new(vec![0.5, 0.0, 0.0, 0.0]).unwrap();
        let c: ClassLabels = vec![A, A, B, B].into();
        let cfg = TestConfig::bernoulli(0.05, 0.6, 0.4);
        let est = estimate_power_from_probs(&p, &c, &cfg).unwrap();
        assert_eq!((est.gap, est.exp_nA, est.exp_nB), (3.0, 1.5, 2.5));
        assert_eq!(
            est.beta,
            power_bernoulli(4, 3.0, 1.5, 2.5, 0.6, 0.4, 0.05).unwrap()
        );
    }

    #[test]
    fn estimate_rejects_null_config() {
        let g = Graph::from_edges(4, false, []).unwrap();
        let cfg = TestConfig::normal(0.05, 0.0, 0.0, 1.0);
        assert!(estimate_power(&g, &ClassLabels::blocks(4, 2), &cfg).is_err());
    }

    #[test]
    fn estimate_is_invariant_under_relabeling() {
        let g = generate_graph(GraphModel::PreferentialAttachment { n: 60, m: 2 }, 8).unwrap();
        let c = assign_labels(60, 0.4, 8).unwrap();
        // A fixed permutation of node indices.
        let perm: Vec<usize> = (0..60).map(|i| (i * 7 + 3) % 60).collect();
        let h = Graph::from_edges(
            60,
            false,
            g.edges().iter().map(|&(u, v)| (perm[u], perm[v])),
        )
        .unwrap();
        let mut relabeled = vec![A; 60];
        for i in 0..60 {
            relabeled[perm[i]] = c.get(i);
        }
        let cfg = TestConfig::normal(0.05, 0.5, 0.0, 1.0);
        let a = estimate_power(&g, &c, &cfg).unwrap();
        let b = estimate_power(&h, &relabeled.into(), &cfg).unwrap();
        assert!((a.beta - b.beta).abs() < 1e-12);
        assert!((a.gap - b.gap).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn power_increases_with_gap(n in 10usize..5000, frac in -0.9f64..0.9, delta in 0.01f64..1.0) {
            let gap = frac * n as f64;
            let h = 1e-3 * n as f64;
            let lo = power_normal(n, gap, delta, 1.0, 0.05).unwrap();
            let hi = power_normal(n, gap + h, delta, 1.0, 0.05).unwrap();
            prop_assert!(hi >= lo);
            prop_assert!((0.0..=1.0).contains(&lo));
            let na = n as f64 * 0.5;
            let lo = power_bernoulli(n, gap, na, na, 0.5 + delta / 2.1, 0.5 - delta / 2.1, 0.05).unwrap();
            let hi = power_bernoulli(n, gap + h, na, na, 0.5 + delta / 2.1, 0.5 - delta / 2.1, 0.05).unwrap();
            prop_assert!(hi >= lo);
        }

        #[test]
        fn power_increases_with_delta(n in 10usize..5000, frac in 0.01f64..1.0, delta in 0.01f64..1.0) {
            let gap = frac * n as f64;
            let lo = power_normal(n, gap, delta, 1.0, 0.05).unwrap();
            let hi = power_normal(n, gap, delta * 1.01, 1.0, 0.05).unwrap();
            prop_assert!(hi >= lo);
        }
    }
}
