//! Interference networks: edge-list ingestion, neighborhoods, degree
//! statistics and synthetic generators.
//!
//! Nodes are dense indices `0..n`. A directed edge `u -> v` reads "u follows
//! v"; the neighborhood of `u` is the set of accounts it follows, since that
//! is where the content it is exposed to comes from.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write as _;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::rng::{purpose, Stream};

/// An immutable simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    directed: bool,
    /// Sorted and deduplicated. Undirected edges are stored as `(min, max)`.
    edges: Vec<(usize, usize)>,
    /// Identifier each node had in the source file.
    ids: Vec<u64>,
    offsets: Vec<usize>,
    adjacency: Vec<usize>,
}

impl Graph {
    /// Builds a graph from raw pairs, dropping self-loops and duplicates.
    pub fn from_edges<I>(n: usize, directed: bool, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let ids = (0..n as u64).collect();
        Self::build(n, directed, edges, ids)
    }

    fn build<I>(n: usize, directed: bool, edges: I, ids: Vec<u64>) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        debug_assert_eq!(ids.len(), n);
        let mut list = Vec::new();
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(Error::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                continue;
            }
            list.push(if directed || u < v { (u, v) } else { (v, u) });
        }
        list.sort_unstable();
        list.dedup();

        let mut counts = vec![0usize; n + 1];
        for &(u, v) in &list {
            counts[u + 1] += 1;
            if !directed {
                counts[v + 1] += 1;
            }
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut adjacency = vec![0usize; offsets[n]];
        for &(u, v) in &list {
            adjacency[fill[u]] = v;
            fill[u] += 1;
            if !directed {
                adjacency[fill[v]] = u;
                fill[v] += 1;
            }
        }
        for i in 0..n {
            adjacency[offsets[i]..offsets[i + 1]].sort_unstable();
        }

        Ok(Graph {
            n,
            directed,
            edges: list,
            ids,
            offsets,
            adjacency,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Identifier node `i` carried in the source edge list.
    pub fn node_id(&self, i: usize) -> u64 {
        self.ids[i]
    }

    /// Adjacent nodes (undirected) or followed nodes (directed), sorted.
    pub fn neighborhood(&self, i: usize) -> Result<&[usize]> {
        if i >= self.n {
            return Err(Error::NodeOutOfRange { node: i, n: self.n });
        }
        Ok(self.neighbors_unchecked(i))
    }

    #[inline]
    pub(crate) fn neighbors_unchecked(&self, i: usize) -> &[usize] {
        &self.adjacency[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Degree (undirected) or out-degree (directed) of every node.
    pub fn out_degrees(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// In-degree of every node; equal to [`Graph::out_degrees`] when undirected.
    pub fn in_degrees(&self) -> Vec<usize> {
        if !self.directed {
            return self.out_degrees();
        }
        let mut deg = vec![0usize; self.n];
        for &(_, v) in &self.edges {
            deg[v] += 1;
        }
        deg
    }

    pub fn degree_distribution(&self, mode: DegreeMode) -> Result<DegreeDistribution> {
        let degrees = match (mode, self.directed) {
            (DegreeMode::Undirected, false) => self.out_degrees(),
            (DegreeMode::Out, true) => self.out_degrees(),
            (DegreeMode::In, true) => self.in_degrees(),
            _ => {
                return Err(Error::DegreeModeMismatch {
                    mode: mode.as_str(),
                    directed: self.directed,
                })
            }
        };
        Ok(DegreeDistribution::from_degrees(&degrees))
    }

    /// Serializes in the edge-list format understood by [`parse_edge_list`],
    /// using dense indices and a header recording `n` and directedness.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(16 * self.edges.len() + 64);
        out.push_str("# netpower edge list\n");
        let _ = writeln!(out, "# nodes: {}", self.n);
        let _ = writeln!(out, "# directed: {}", self.directed);
        for &(u, v) in &self.edges {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum DegreeMode {
    In,
    Out,
    Undirected,
}

impl DegreeMode {
    pub fn as_str(self) -> &'static str {
        match self {
            DegreeMode::In => "in",
            DegreeMode::Out => "out",
            DegreeMode::Undirected => "undirected",
        }
    }
}

/// Empirical degree distribution; degrees strictly increasing, zero-mass
/// degrees omitted.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DegreeDistribution {
    pub entries: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn from_degrees(degrees: &[usize]) -> Self {
        let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
        for &d in degrees {
            *counts.entry(d).or_default() += 1;
        }
        let n = degrees.len() as f64;
        DegreeDistribution {
            entries: counts.into_iter().map(|(d, c)| (d, c as f64 / n)).collect(),
        }
    }

    /// Least-squares slope of ln(probability) against ln(degree) over
    /// entries with degree at least `min_degree`. `None` with fewer than two
    /// such entries.
    pub fn log_log_slope(&self, min_degree: usize) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .entries
            .iter()
            .filter(|(d, _)| *d >= min_degree.max(1))
            .map(|&(d, p)| (libm::log(d as f64), libm::log(p)))
            .collect();
        if pts.len() < 2 {
            return None;
        }
        let k = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(sxy / sxx)
    }
}

/// Options for [`parse_edge_list_with`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeListOptions {
    /// Directedness. `None` defers to a `# directed:` header, else undirected.
    pub directed: Option<bool>,
    /// Explicit node count. Identifiers are then taken as dense indices
    /// `0..nodes` and nodes without edges become isolated nodes. A
    /// `# nodes:` header has the same effect.
    pub nodes: Option<usize>,
}

/// Parses a whitespace-separated edge list, one `u v` pair per line.
///
/// Lines beginning with `#` are comments, except the `# nodes: N` and
/// `# directed: BOOL` headers written by [`Graph::to_edge_list`]. Without a
/// node count, identifiers are compacted to `0..n` in order of first
/// appearance.
pub fn parse_edge_list(text: &str, directed: bool) -> Result<Graph> {
    parse_edge_list_with(
        text,
        EdgeListOptions {
            directed: Some(directed),
            nodes: None,
        },
    )
}

pub fn parse_edge_list_with(text: &str, opts: EdgeListOptions) -> Result<Graph> {
    let mut header_nodes = None;
    let mut header_directed = None;
    let mut pairs: Vec<(u64, u64)> = Vec::new();

    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(v) = comment.strip_prefix("nodes:") {
                header_nodes = Some(v.trim().parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid node count `{}`", v.trim()),
                })?);
            } else if let Some(v) = comment.strip_prefix("directed:") {
                header_directed = Some(v.trim().parse::<bool>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("invalid directedness `{}`", v.trim()),
                })?);
            }
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (Some(a), Some(b), None) = (tokens.next(), tokens.next(), tokens.next()) else {
            return Err(Error::Parse {
                line: lineno,
                message: format!(
                    "expected two node identifiers, found {}",
                    line.split_whitespace().count()
                ),
            });
        };
        let id = |t: &str| {
            t.parse::<u64>().map_err(|_| Error::Parse {
                line: lineno,
                message: format!("`{t}` is not a nonnegative integer node identifier"),
            })
        };
        pairs.push((id(a)?, id(b)?));
    }

    let directed = match (opts.directed, header_directed) {
        (Some(d), Some(h)) if d != h => {
            return Err(Error::Parse {
                line: 0,
                message: format!("header declares directed: {h} but directed = {d} was requested"),
            })
        }
        (Some(d), _) => d,
        (None, h) => h.unwrap_or(false),
    };

    if let Some(n) = opts.nodes.or(header_nodes) {
        if n == 0 && pairs.is_empty() {
            return Err(Error::EmptyInput);
        }
        let mut edges = Vec::with_capacity(pairs.len());
        for (u, v) in pairs {
            for id in [u, v] {
                if id >= n as u64 {
                    return Err(Error::NodeOutOfRange {
                        node: usize::try_from(id).unwrap_or(usize::MAX),
                        n,
                    });
                }
            }
            edges.push((u as usize, v as usize));
        }
        return Graph::from_edges(n, directed, edges);
    }

    if pairs.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut index: BTreeMap<u64, usize> = BTreeMap::new();
    let mut ids = Vec::new();
    let mut edges = Vec::with_capacity(pairs.len());
    for (u, v) in pairs {
        let mut compact = |id: u64| {
            *index.entry(id).or_insert_with(|| {
                ids.push(id);
                ids.len() - 1
            })
        };
        let cu = compact(u);
        let cv = compact(v);
        edges.push((cu, cv));
    }
    Graph::build(ids.len(), directed, edges, ids)
}

/// Random graph families used as stand-ins for observed networks.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "model", rename_all = "snake_case"))]
pub enum GraphModel {
    ErdosRenyi { n: usize, edge_prob: f64 },
    PreferentialAttachment { n: usize, m: usize },
}

/// Generates an undirected graph; identical seeds give identical graphs.
pub fn generate_graph(model: GraphModel, seed: u64) -> Result<Graph> {
    let mut rng = Stream::new(seed).child(purpose::GRAPH).rng();
    match model {
        GraphModel::ErdosRenyi { n, edge_prob } => {
            if n < 2 {
                return Err(invalid("n", "must be at least 2"));
            }
            if !(0.0..=1.0).contains(&edge_prob) {
                return Err(invalid("edge_prob", "must lie in [0, 1]"));
            }
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.random::<f64>() < edge_prob {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, false, edges)
        }
        GraphModel::PreferentialAttachment { n, m } => {
            if n < 2 {
                return Err(invalid("n", "must be at least 2"));
            }
            if m < 1 || m >= n {
                return Err(invalid("m", "must satisfy 1 <= m < n"));
            }
            let mut edges = Vec::with_capacity(m * n);
            // Each node appears once per incident edge, so a uniform pick
            // from the pool is a degree-proportional pick.
            let mut pool = Vec::with_capacity(2 * m * n);
            for u in 0..=m {
                for v in (u + 1)..=m {
                    edges.push((u, v));
                    pool.push(u);
                    pool.push(v);
                }
            }
            let mut chosen = Vec::with_capacity(m);
            for t in (m + 1)..n {
                chosen.clear();
                while chosen.len() < m {
                    let v = pool[rng.random_range(0..pool.len())];
                    if !chosen.contains(&v) {
                        chosen.push(v);
                    }
                }
                for &v in &chosen {
                    edges.push((v, t));
                    pool.push(v);
                    pool.push(t);
                }
            }
            Graph::from_edges(n, false, edges)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::from_edges(3, false, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn parses_path_graph() {
        let g = parse_edge_list("0 1\n1 2\n", false).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn drops_duplicates_and_self_loops() {
        let g = parse_edge_list("0 1\n1 0\n# c\n0 0\n", false).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);

        let d = parse_edge_list("0 1\n1 0\n0 1\n", true).unwrap();
        assert_eq!(d.edge_count(), 2);
    }

    #[test]
    fn compacts_in_first_appearance_order() {
        let g = parse_edge_list("# SNAP\n100 7\n7 42\n", false).unwrap();
        assert_eq!(g.node_count(), 3);
        assert_eq!([g.node_id(0), g.node_id(1), g.node_id(2)], [100, 7, 42]);
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_edge_list("0 1\n1 x\n", false) {
            Err(Error::Parse { line: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("0 1\n\n1 2 3\n", false) {
            Err(Error::Parse { line: 3, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        match parse_edge_list("-1 2\n", false) {
            Err(Error::Parse { line: 1, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(parse_edge_list("", false), Err(Error::EmptyInput));
        assert_eq!(
            parse_edge_list("# only a comment\n", false),
            Err(Error::EmptyInput)
        );
    }

    #[test]
    fn explicit_node_count_allows_isolated_nodes() {
        let g = parse_edge_list_with(
            "0 3\n",
            EdgeListOptions {
                directed: Some(false),
                nodes: Some(6),
            },
        )
        .unwrap();
        assert_eq!(g.node_count(), 6);
        assert!(g.neighborhood(5).unwrap().is_empty());

        let empty = parse_edge_list_with("# nodes: 10\n", EdgeListOptions::default()).unwrap();
        assert_eq!(empty.node_count(), 10);
        assert_eq!(empty.edge_count(), 0);

        let out = parse_edge_list_with(
            "0 9\n",
            EdgeListOptions {
                directed: None,
                nodes: Some(4),
            },
        );
        assert_eq!(out, Err(Error::NodeOutOfRange { node: 9, n: 4 }));
    }

    #[test]
    fn header_directedness_conflict_is_an_error() {
        let text = "# directed: true\n0 1\n";
        assert!(parse_edge_list_with(text, EdgeListOptions::default())
            .unwrap()
            .is_directed());
        assert!(matches!(
            parse_edge_list(text, false),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn neighborhoods() {
        assert_eq!(triangle().neighborhood(0).unwrap(), &[1, 2]);
        let d = Graph::from_edges(2, true, [(0, 1)]).unwrap();
        assert_eq!(d.neighborhood(0).unwrap(), &[1]);
        assert!(d.neighborhood(1).unwrap().is_empty());
        let star = Graph::from_edges(6, false, (1..6).map(|i| (0, i))).unwrap();
        assert_eq!(star.neighborhood(0).unwrap().len(), 5);
        assert_eq!(
            triangle().neighborhood(3),
            Err(Error::NodeOutOfRange { node: 3, n: 3 })
        );
    }

    #[test]
    fn degree_distributions() {
        let t = triangle()
            .degree_distribution(DegreeMode::Undirected)
            .unwrap();
        assert_eq!(t.entries, vec![(2, 1.0)]);
        let p = parse_edge_list("0 1\n1 2\n", false)
            .unwrap()
            .degree_distribution(DegreeMode::Undirected)
            .unwrap();
        assert_eq!(p.entries, vec![(1, 2.0 / 3.0), (2, 1.0 / 3.0)]);
        assert!(matches!(
            triangle().degree_distribution(DegreeMode::In),
            Err(Error::DegreeModeMismatch { .. })
        ));
        let d = Graph::from_edges(3, true, [(0, 1), (2, 1)]).unwrap();
        assert_eq!(
            d.degree_distribution(DegreeMode::In).unwrap().entries,
            vec![(0, 2.0 / 3.0), (2, 1.0 / 3.0)]
        );
        assert!(d.degree_distribution(DegreeMode::Undirected).is_err());
    }

    #[test]
    fn erdos_renyi_extremes() {
        let k5 = generate_graph(
            GraphModel::ErdosRenyi {
                n: 5,
                edge_prob: 1.0,
            },
            1,
        )
        .unwrap();
        assert_eq!(k5.edge_count(), 10);
        let empty = generate_graph(
            GraphModel::ErdosRenyi {
                n: 100,
                edge_prob: 0.0,
            },
            1,
        )
        .unwrap();
        assert_eq!(empty.edge_count(), 0);
        assert_eq!(empty.node_count(), 100);
    }

    #[test]
    fn preferential_attachment_edge_count() {
        let g = generate_graph(GraphModel::PreferentialAttachment { n: 100, m: 2 }, 3).unwrap();
        assert_eq!(g.edge_count(), 3 + 97 * 2);
        assert_eq!(g.node_count(), 100);
    }

    #[test]
    fn generator_parameter_validation() {
        let bad = [
            GraphModel::ErdosRenyi {
                n: 1,
                edge_prob: 0.5,
            },
            GraphModel::ErdosRenyi {
                n: 5,
                edge_prob: 1.5,
            },
            GraphModel::ErdosRenyi {
                n: 5,
                edge_prob: f64::NAN,
            },
            GraphModel::PreferentialAttachment { n: 5, m: 0 },
            GraphModel::PreferentialAttachment { n: 5, m: 5 },
        ];
        for model in bad {
            assert!(matches!(
                generate_graph(model, 0),
                Err(Error::InvalidParameter { .. })
            ));
        }
    }

    #[test]
    fn preferential_attachment_is_scale_free() {
        let g = generate_graph(GraphModel::PreferentialAttachment { n: 2000, m: 3 }, 11).unwrap();
        let dist = g.degree_distribution(DegreeMode::Undirected).unwrap();
        let slope = dist.log_log_slope(3).unwrap();
        assert!((-3.5..=-1.5).contains(&slope), "slope {slope}");
    }
}
