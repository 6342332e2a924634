//! Intended class assignments and per-node switching probabilities.

use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::graph::Graph;
use crate::rng::{purpose, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Label {
    A,
    B,
}

impl Label {
    #[inline]
    pub fn opposite(self) -> Label {
        match self {
            Label::A => Label::B,
            Label::B => Label::A,
        }
    }

    pub fn from_char(c: char) -> Option<Label> {
        match c {
            'A' => Some(Label::A),
            'B' => Some(Label::B),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Label::A => 'A',
            Label::B => 'B',
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A label vector over `{A, B}`, used both for intended (`c`) and realized
/// (`d`) assignments.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct ClassLabels(Vec<Label>);

impl ClassLabels {
    pub fn new(labels: Vec<Label>) -> Self {
        ClassLabels(labels)
    }

    /// `n_a` A's followed by `n - n_a` B's.
    pub fn blocks(n: usize, n_a: usize) -> Self {
        ClassLabels(
            (0..n)
                .map(|i| if i < n_a { Label::A } else { Label::B })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Label] {
        &self.0
    }

    pub fn get(&self, i: usize) -> Label {
        self.0[i]
    }

    pub fn count(&self, label: Label) -> usize {
        self.0.iter().filter(|&&l| l == label).count()
    }

    pub fn complement(&self) -> Self {
        ClassLabels(self.0.iter().map(|l| l.opposite()).collect())
    }

    pub fn is_balanced(&self) -> bool {
        self.count(Label::A) * 2 == self.len()
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                found: self.len(),
            });
        }
        Ok(())
    }
}

impl From<Vec<Label>> for ClassLabels {
    fn from(v: Vec<Label>) -> Self {
        ClassLabels(v)
    }
}

/// Number of A labels for `n` units at fraction `p_a`, i.e. `ceil(n * p_a)`.
///
/// Products within 1e-9 of an integer are snapped first, so that for example
/// `10 * 0.3 = 3.0000000000000004` yields 3 rather than 4.
pub fn class_a_count(n: usize, p_a: f64) -> usize {
    let x = n as f64 * p_a;
    let r = libm::round(x);
    let k = if libm::fabs(x - r) <= 1e-9 * r.max(1.0) {
        r
    } else {
        libm::ceil(x)
    };
    (k as usize).min(n)
}

/// Assigns exactly `ceil(n * p_a)` A labels at uniformly random positions.
pub fn assign_labels(n: usize, p_a: f64, seed: u64) -> Result<ClassLabels> {
    assign_labels_from(n, p_a, Stream::new(seed).child(purpose::LABELS))
}

pub(crate) fn assign_labels_from(n: usize, p_a: f64, stream: Stream) -> Result<ClassLabels> {
    if n < 2 {
        return Err(invalid("n", "at least two units are required"));
    }
    if !(0.0..=1.0).contains(&p_a) {
        return Err(invalid("p_a", "must lie in [0, 1]"));
    }
    let k = class_a_count(n, p_a);
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = stream.rng();
    // The shuffled sample is the returned slice, which sits at the tail.
    let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(order.as_mut_slice(), &mut rng, k);
    let mut labels = alloc::vec![Label::B; n];
    for &i in chosen.iter() {
        labels[i] = Label::A;
    }
    Ok(ClassLabels(labels))
}

/// Copy of `c` with exactly `n_d` labels, at uniformly random positions,
/// replaced by their opposite.
pub fn flip_random(c: &ClassLabels, n_d: usize, seed: u64) -> Result<ClassLabels> {
    if n_d > c.len() {
        return Err(invalid(
            "n_d",
            "cannot flip more labels than there are units",
        ));
    }
    let mut order: Vec<usize> = (0..c.len()).collect();
    let mut rng = Stream::new(seed).child(purpose::SWITCH).rng();
    let (chosen, _) = rand::seq::SliceRandom::partial_shuffle(order.as_mut_slice(), &mut rng, n_d);
    let mut d = c.0.clone();
    for &i in chosen.iter() {
        d[i] = d[i].opposite();
    }
    Ok(ClassLabels(d))
}

/// Per-node probabilities of receiving the opposite treatment.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SwitchProbs(Vec<f64>);

impl SwitchProbs {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(invalid(
                "p",
                "every switching probability must lie in [0, 1]",
            ));
        }
        Ok(SwitchProbs(p))
    }

    pub fn uniform(n: usize, p: f64) -> Result<Self> {
        SwitchProbs::new(alloc::vec![p; n])
    }

    /// Independent Uniform(0, 1) probabilities.
    pub fn random_uniform(n: usize, seed: u64) -> Self {
        let mut rng = Stream::new(seed).child(purpose::SWITCH).rng();
        SwitchProbs((0..n).map(|_| rand::Rng::random::<f64>(&mut rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn mean(&self) -> f64 {
        if self.0.is_empty() {
            return 0.0;
        }
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }
}

/// Fraction of each node's neighbors whose intended label differs from its
/// own; isolated nodes get 0.
pub fn neighborhood_switch_probs(g: &Graph, c: &ClassLabels) -> Result<SwitchProbs> {
    c.check_len(g.node_count())?;
    let labels = c.as_slice();
    let p = (0..g.node_count())
        .map(|i| {
            let nbrs = g.neighbors_unchecked(i);
            if nbrs.is_empty() {
                return 0.0;
            }
            let own = labels[i];
            let opposite = nbrs.iter().filter(|&&u| labels[u] != own).count();
            opposite as f64 / nbrs.len() as f64
        })
        .collect();
    Ok(SwitchProbs(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_graph, GraphModel};
    use alloc::vec;
    use proptest::prelude::*;
    use Label::{A, B};

    #[test]
    fn ceil_rule() {
        assert_eq!(assign_labels(10, 0.3, 1).unwrap().count(A), 3);
        assert_eq!(assign_labels(4, 0.0, 1).unwrap().count(A), 0);
        assert_eq!(assign_labels(7, 0.5, 1).unwrap().count(A), 4);
        assert_eq!(assign_labels(3, 1.0, 1).unwrap().count(A), 3);
        assert_eq!(class_a_count(500, 0.3), 150);
        assert_eq!(class_a_count(500, 0.35), 175);
        assert_eq!(class_a_count(1000, 0.0011), 2);
    }

    #[test]
    fn count_is_seed_invariant_positions_are_not() {
        let a = assign_labels(4, 0.5, 1).unwrap();
        let b = assign_labels(4, 0.5, 2).unwrap();
        assert_eq!(a.count(A), 2);
        assert_eq!(b.count(A), 2);
        assert_eq!(a, assign_labels(4, 0.5, 1).unwrap());
        let positions: std::collections::HashSet<_> = (0..50)
            .map(|s| assign_labels(10, 0.5, s).unwrap())
            .collect();
        assert!(positions.len() > 10);
    }

    #[test]
    fn positions_are_uniform() {
        // Each index must be chosen with probability k/n; a biased sampler
        // would favor one end of the index range.
        let (n, seeds) = (10, 4000u64);
        let mut a_hits = [0u32; 10];
        let mut flip_hits = [0u32; 10];
        let base = ClassLabels::blocks(n, 0);
        for s in 0..seeds {
            let c = assign_labels(n, 0.3, s).unwrap();
            let d = flip_random(&base, 3, s).unwrap();
            for i in 0..n {
                a_hits[i] += (c.get(i) == A) as u32;
                flip_hits[i] += (d.get(i) == A) as u32;
            }
        }
        // sd of each frequency is about 0.0072; allow 5 sd.
        for hits in [a_hits, flip_hits] {
            for h in hits {
                assert!((h as f64 / seeds as f64 - 0.3).abs() < 0.036, "{hits:?}");
            }
        }
    }

    #[test]
    fn assign_rejects_bad_input() {
        assert!(assign_labels(1, 0.5, 0).is_err());
        assert!(assign_labels(10, 1.5, 0).is_err());
        assert!(assign_labels(10, -0.1, 0).is_err());
    }

    #[test]
    fn triangle_switch_probs() {
        let g = Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = neighborhood_switch_probs(&g, &vec![A, B, B].into()).unwrap();
        assert_eq!(p.as_slice(), &[1.0, 0.5, 0.5]);
    }

    #[test]
    fn uniform_labels_and_isolated_nodes_give_zero() {
        let g = generate_graph(
            GraphModel::ErdosRenyi {
                n: 30,
                edge_prob: 0.2,
            },
            4,
        )
        .unwrap();
        let p = neighborhood_switch_probs(&g, &ClassLabels::blocks(30, 30)).unwrap();
        assert!(p.as_slice().iter().all(|&x| x == 0.0));

        let empty = Graph::from_edges(5, false, []).unwrap();
        let c = assign_labels(5, 0.4, 9).unwrap();
        let p = neighborhood_switch_probs(&empty, &c).unwrap();
        assert_eq!(p.as_slice(), &[0.0; 5]);
    }

    #[test]
    fn directed_graph_uses_followed_accounts() {
        // 0 follows 1 and 2; nobody follows back.
        let g = Graph::from_edges(3, true, [(0, 1), (0, 2)]).unwrap();
        let p = neighborhood_switch_probs(&g, &vec![A, B, A].into()).unwrap();
        assert_eq!(p.as_slice(), &[0.5, 0.0, 0.0]);
    }

    #[test]
    fn length_mismatch() {
        let g = Graph::from_edges(3, false, [(0, 1)]).unwrap();
        assert_eq!(
            neighborhood_switch_probs(&g, &vec![A, B].into()),
            Err(Error::LengthMismatch {
                expected: 3,
                found: 2
            })
        );
    }

    #[test]
    fn flip_random_flips_exactly_n_d() {
        let c = assign_labels(50, 0.5, 1).unwrap();
        for k in [0, 1, 20, 50] {
            let d = flip_random(&c, k, 3).unwrap();
            let diff = c
                .as_slice()
                .iter()
                .zip(d.as_slice())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(diff, k);
        }
        assert!(flip_random(&c, 51, 3).is_err());
    }

    #[test]
    fn switch_probs_validated() {
        assert!(SwitchProbs::new(vec![0.0, 1.0, 0.5]).is_ok());
        assert!(SwitchProbs::new(vec![1.1]).is_err());
        assert!(SwitchProbs::new(vec![f64::NAN]).is_err());
    }

    proptest! {
        #[test]
        fn complement_leaves_probs_unchanged(seed in 0u64..1000, p_a in 0.0f64..1.0) {
            let g = generate_graph(GraphModel::ErdosRenyi { n: 40, edge_prob: 0.15 }, seed).unwrap();
            let c = assign_labels(40, p_a, seed).unwrap();
            prop_assert_eq!(
                neighborhood_switch_probs(&g, &c).unwrap(),
                neighborhood_switch_probs(&g, &c.complement()).unwrap()
            );
        }

        #[test]
        fn non_neighbor_relabeling_is_local(seed in 0u64..1000, node in 0usize..40, other in 0usize..40) {
            let g = generate_graph(GraphModel::ErdosRenyi { n: 40, edge_prob: 0.1 }, seed).unwrap();
            let c = assign_labels(40, 0.5, seed).unwrap();
            prop_assume!(node != other && !g.neighborhood(node).unwrap().contains(&other));
            let mut flipped = c.as_slice().to_vec();
            flipped[other] = flipped[other].opposite();
            let before = neighborhood_switch_probs(&g, &c).unwrap();
            let after = neighborhood_switch_probs(&g, &flipped.into()).unwrap();
            prop_assert_eq!(before.as_slice()[node], after.as_slice()[node]);
        }
    }
}
