//! Attributed undirected simple graphs and the editing operations used by the
//! perturbation analyses.
//!
//! Features are stored row-major in a single buffer; every node carries a
//! vector of the same dimension `p >= 1`. Edges are unordered pairs kept in
//! canonical `(min, max)` form, sorted, without duplicates or self-loops.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct AttributedGraph {
    dim: usize,
    features: Vec<f64>,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

/// On-disk JSON shape: `{"features": [[...]], "edges": [[u, v], ...]}`.
/// `dim` is only needed for graphs without nodes.
#[derive(Serialize, Deserialize)]
struct GraphRepr {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    dim: Option<usize>,
    features: Vec<Vec<f64>>,
    #[serde(default)]
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRepr> for AttributedGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        let dim = match (repr.dim, repr.features.first()) {
            (Some(d), _) => d,
            (None, Some(f)) => f.len(),
            (None, None) => 1,
        };
        AttributedGraph::from_rows(dim, repr.features, repr.edges.iter().map(|e| (e[0], e[1])))
    }
}

impl From<AttributedGraph> for GraphRepr {
    fn from(g: AttributedGraph) -> Self {
        GraphRepr {
            dim: if g.node_count() == 0 { Some(g.dim) } else { None },
            features: (0..g.node_count()).map(|v| g.feature(v).to_vec()).collect(),
            edges: g.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

impl AttributedGraph {
    /// Builds a graph from per-node feature rows and an edge list.
    ///
    /// Repeated listings of the same unordered pair, in either direction,
    /// collapse into one edge. Self-loops and out-of-range endpoints are
    /// rejected.
    pub fn from_rows<I>(dim: usize, features: Vec<Vec<f64>>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut flat = Vec::with_capacity(features.len() * dim);
        for row in &features {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            flat.extend_from_slice(row);
        }
        Self::from_flat(dim, flat, edges)
    }

    pub fn from_flat<I>(dim: usize, features: Vec<f64>, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if dim == 0 {
            return Err(Error::InvalidArgument("feature dimension must be at least 1".into()));
        }
        if features.len() % dim != 0 {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: features.len() % dim,
            });
        }
        if let Some(x) = features.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite feature value {x}")));
        }
        let n = features.len() / dim;
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::NodeOutOfRange { index: w, nodes: n });
                }
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            set.insert((u.min(v), u.max(v)));
        }
        let edges: Vec<(usize, usize)> = set.into_iter().collect();
        let mut adjacency = vec![Vec::new(); n];
        for &(u, v) in &edges {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(AttributedGraph {
            dim,
            features,
            edges,
            adjacency,
        })
    }

    pub fn empty(dim: usize) -> Result<Self> {
        Self::from_flat(dim, Vec::new(), std::iter::empty())
    }

    /// Graph whose every node carries the scalar feature 1.
    pub fn unlabeled<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_flat(1, vec![1.0; n], edges)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn feature(&self, v: usize) -> &[f64] {
        &self.features[v * self.dim..(v + 1) * self.dim]
    }

    pub fn features(&self) -> &[f64] {
        &self.features
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Edges as sorted `(min, max)` pairs.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.node_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// True when some node feature is exactly the zero vector. Such graphs
    /// only get pseudometric guarantees: a zero-feature leaf is
    /// indistinguishable from a blank tree.
    pub fn has_zero_feature(&self) -> bool {
        (0..self.node_count()).any(|v| self.feature(v).iter().all(|&x| x == 0.0))
    }

    fn check_node(&self, v: usize) -> Result<()> {
        if v >= self.node_count() {
            return Err(Error::NodeOutOfRange {
                index: v,
                nodes: self.node_count(),
            });
        }
        Ok(())
    }

    /// Removes node `v` and its incident edges. Remaining nodes keep their
    /// relative order.
    pub fn drop_node(&self, v: usize) -> Result<Self> {
        self.check_node(v)?;
        let reindex = |w: usize| if w > v { w - 1 } else { w };
        let mut features = Vec::with_capacity(self.features.len() - self.dim);
        features.extend_from_slice(&self.features[..v * self.dim]);
        features.extend_from_slice(&self.features[(v + 1) * self.dim..]);
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| a != v && b != v)
            .map(|&(a, b)| (reindex(a), reindex(b)));
        Self::from_flat(self.dim, features, edges)
    }

    pub fn drop_edge(&self, u: usize, v: usize) -> Result<Self> {
        if !self.has_edge(u, v) {
            return Err(Error::EdgeAbsent(u, v));
        }
        let key = (u.min(v), u.max(v));
        let edges = self.edges.iter().copied().filter(|&e| e != key);
        Self::from_flat(self.dim, self.features.clone(), edges)
    }

    pub fn add_edge(&self, u: usize, v: usize) -> Result<Self> {
        let edges = self.edges.iter().copied().chain(std::iter::once((u, v)));
        Self::from_flat(self.dim, self.features.clone(), edges)
    }

    /// Replaces the feature of node `v`.
    pub fn perturb_feature(&self, v: usize, x_new: &[f64]) -> Result<Self> {
        self.check_node(v)?;
        if x_new.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x_new.len(),
            });
        }
        let mut g = self.clone();
        g.features[v * self.dim..(v + 1) * self.dim].copy_from_slice(x_new);
        if let Some(x) = x_new.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite feature value {x}")));
        }
        Ok(g)
    }

    /// Relabels nodes so that old node `i` becomes node `perm[i]`.
    pub fn permute_nodes(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        if perm.len() != n {
            return Err(Error::NotPermutation(format!(
                "length {} for a graph with {n} nodes",
                perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(Error::NotPermutation(format!("{perm:?}")));
            }
            seen[p] = true;
        }
        let mut features = vec![0.0; self.features.len()];
        for (old, &new) in perm.iter().enumerate() {
            features[new * self.dim..(new + 1) * self.dim].copy_from_slice(self.feature(old));
        }
        let edges = self.edges.iter().map(|&(a, b)| (perm[a], perm[b]));
        Self::from_flat(self.dim, features, edges)
    }

    /// Disjoint union; nodes of `other` are appended after those of `self`.
    pub fn disjoint_union(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        let offset = self.node_count();
        let mut features = self.features.clone();
        features.extend_from_slice(&other.features);
        let edges = self
            .edges
            .iter()
            .copied()
            .chain(other.edges.iter().map(|&(a, b)| (a + offset, b + offset)));
        Self::from_flat(self.dim, features, edges)
    }

    /// Scales every feature by `s`.
    pub fn scale_features(&self, s: f64) -> Result<Self> {
        let features = self.features.iter().map(|x| x * s).collect();
        Self::from_flat(self.dim, features, self.edges.iter().copied())
    }
}

/// Erdős–Rényi graph with features drawn uniformly from `[-1, 1]^p`.
/// Deterministic for a fixed seed.
pub fn random_graph(n: usize, edge_prob: f64, feature_dim: usize, seed: u64) -> Result<AttributedGraph> {
    if !(0.0..=1.0).contains(&edge_prob) {
        return Err(Error::InvalidArgument(format!("edge probability {edge_prob} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let features = (0..n * feature_dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < edge_prob {
                edges.push((u, v));
            }
        }
    }
    AttributedGraph::from_flat(feature_dim, features, edges)
}

/// Cycle graph on `n >= 3` nodes with unit scalar features.
pub fn cycle_graph(n: usize) -> Result<AttributedGraph> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("a cycle needs at least 3 nodes, got {n}")));
    }
    AttributedGraph::unlabeled(n, (0..n).map(|i| (i, (i + 1) % n)))
}

/// Path graph on `n` nodes with unit scalar features.
pub fn path_graph(n: usize) -> Result<AttributedGraph> {
    AttributedGraph::unlabeled(n, (1..n).map(|i| (i - 1, i)))
}

/// Labeled graph collection. Labels, when present, align with `graphs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDataset {
    pub name: String,
    pub graphs: Vec<AttributedGraph>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<i64>>,
}

impl GraphDataset {
    pub fn new(name: impl Into<String>, graphs: Vec<AttributedGraph>, labels: Option<Vec<i64>>) -> Result<Self> {
        let ds = GraphDataset {
            name: name.into(),
            graphs,
            labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(labels) = &self.labels {
            if labels.len() != self.graphs.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} labels for {} graphs",
                    labels.len(),
                    self.graphs.len()
                )));
            }
        }
        if let Some(first) = self.graphs.first() {
            if let Some(g) = self.graphs.iter().find(|g| g.dim() != first.dim()) {
                return Err(Error::DimensionMismatch {
                    expected: first.dim(),
                    found: g.dim(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    /// Shared feature dimension, or `None` for an empty dataset.
    pub fn dim(&self) -> Option<usize> {
        self.graphs.first().map(AttributedGraph::dim)
    }

    /// Identifiers used in matrix and report output: `<name>:<index>`.
    pub fn ids(&self) -> Vec<String> {
        (0..self.graphs.len()).map(|i| format!("{}:{i}", self.name)).collect()
    }

    /// Subset by index, keeping labels aligned.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self> {
        let graphs = indices
            .iter()
            .map(|&i| {
                self.graphs.get(i).cloned().ok_or(Error::InvalidArgument(format!(
                    "graph index {i} out of range for {} graphs",
                    self.graphs.len()
                )))
            })
            .collect::<Result<Vec<_>>>()?;
        let labels = self.labels.as_ref().map(|l| indices.iter().map(|&i| l[i]).collect());
        Self::new(name, graphs, labels)
    }

    /// Rescales each feature coordinate to zero mean and unit variance over
    /// all nodes of the dataset. Constant coordinates are only centered.
    pub fn standardized(&self) -> Result<Self> {
        let Some(dim) = self.dim() else {
            return Ok(self.clone());
        };
        let total: usize = self.graphs.iter().map(AttributedGraph::node_count).sum();
        if total == 0 {
            return Ok(self.clone());
        }
        let mut mean = vec![0.0; dim];
        for g in &self.graphs {
            for (i, x) in g.features().iter().enumerate() {
                mean[i % dim] += x;
            }
        }
        mean.iter_mut().for_each(|m| *m /= total as f64);
        let mut var = vec![0.0; dim];
        for g in &self.graphs {
            for (i, x) in g.features().iter().enumerate() {
                var[i % dim] += (x - mean[i % dim]).powi(2);
            }
        }
        let std: Vec<f64> = var
            .iter()
            .map(|v| {
                let s = (v / total as f64).sqrt();
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        let graphs = self
            .graphs
            .iter()
            .map(|g| {
                let features = g
                    .features()
                    .iter()
                    .enumerate()
                    .map(|(i, x)| (x - mean[i % dim]) / std[i % dim])
                    .collect();
                AttributedGraph::from_flat(dim, features, g.edges().iter().copied())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.name.clone(), graphs, self.labels.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge_graph() -> AttributedGraph {
        AttributedGraph::unlabeled(2, [(0, 1)]).unwrap()
    }

    fn triangle() -> AttributedGraph {
        cycle_graph(3).unwrap()
    }

    #[test]
    fn construction_rejects_bad_input() {
        assert!(matches!(
            AttributedGraph::unlabeled(2, [(0, 2)]),
            Err(Error::NodeOutOfRange { index: 2, nodes: 2 })
        ));
        assert!(matches!(AttributedGraph::unlabeled(2, [(1, 1)]), Err(Error::SelfLoop(1))));
        assert!(matches!(
            AttributedGraph::from_rows(2, vec![vec![1.0, 2.0], vec![1.0]], []),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn duplicate_listings_collapse() {
        let g = AttributedGraph::unlabeled(3, [(0, 1), (1, 0), (0, 1), (2, 1)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
        assert_eq!(g.neighbors(1), &[0, 2]);
    }

    #[test]
    fn drop_node_examples() {
        let single = AttributedGraph::unlabeled(1, []).unwrap();
        assert_eq!(single.drop_node(0).unwrap().node_count(), 0);

        let g = edge_graph().drop_node(1).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.edge_count(), 0);

        for v in 0..3 {
            let p = triangle().drop_node(v).unwrap();
            assert_eq!(p, path_graph(2).unwrap());
        }
        assert!(matches!(edge_graph().drop_node(2), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn drop_node_reindexes_in_order() {
        let g = AttributedGraph::from_rows(1, vec![vec![0.5], vec![1.5], vec![2.5], vec![3.5]], [(0, 1), (1, 2), (2, 3), (0, 3)])
            .unwrap();
        let h = g.drop_node(1).unwrap();
        assert_eq!(h.features(), &[0.5, 2.5, 3.5]);
        assert_eq!(h.edges(), &[(0, 2), (1, 2)]);
    }

    #[test]
    fn drop_edge_examples() {
        let g = edge_graph().drop_edge(1, 0).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 0);

        let p = triangle().drop_edge(0, 2).unwrap();
        assert_eq!(p, path_graph(3).unwrap());

        let c6 = cycle_graph(6).unwrap().drop_edge(5, 0).unwrap();
        assert_eq!(c6, path_graph(6).unwrap());

        assert!(matches!(p.drop_edge(0, 2), Err(Error::EdgeAbsent(0, 2))));
    }

    #[test]
    fn perturb_feature_examples() {
        let g = random_graph(5, 0.5, 2, 3).unwrap();
        let same = g.perturb_feature(2, g.feature(2)).unwrap();
        assert_eq!(same, g);

        let single = AttributedGraph::from_rows(1, vec![vec![3.0]], []).unwrap();
        assert_eq!(single.perturb_feature(0, &[1.0]).unwrap().feature(0), &[1.0]);

        let moved = g.perturb_feature(4, &[9.0, -9.0]).unwrap();
        assert_eq!(moved.perturb_feature(4, g.feature(4)).unwrap(), g);

        assert!(matches!(g.perturb_feature(0, &[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(g.perturb_feature(5, &[1.0, 1.0]), Err(Error::NodeOutOfRange { .. })));
    }

    #[test]
    fn permute_nodes_examples() {
        let g = random_graph(6, 0.4, 3, 11).unwrap();
        assert_eq!(g.permute_nodes(&[0, 1, 2, 3, 4, 5]).unwrap(), g);

        let e = AttributedGraph::from_rows(1, vec![vec![1.0], vec![2.0]], [(0, 1)]).unwrap();
        let swapped = e.permute_nodes(&[1, 0]).unwrap();
        assert_eq!(swapped.edges(), &[(0, 1)]);
        assert_eq!(swapped.features(), &[2.0, 1.0]);

        let perm = [3, 0, 5, 1, 4, 2];
        let mut inverse = [0; 6];
        for (i, &p) in perm.iter().enumerate() {
            inverse[p] = i;
        }
        assert_eq!(g.permute_nodes(&perm).unwrap().permute_nodes(&inverse).unwrap(), g);

        assert!(g.permute_nodes(&[0, 0, 1, 2, 3, 4]).is_err());
        assert!(g.permute_nodes(&[0, 1]).is_err());
    }

    #[test]
    fn random_graph_examples() {
        assert_eq!(random_graph(0, 0.5, 2, 1).unwrap().node_count(), 0);
        assert_eq!(random_graph(7, 0.0, 2, 1).unwrap().edge_count(), 0);
        let k4 = random_graph(4, 1.0, 2, 1).unwrap();
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(random_graph(9, 0.3, 2, 42).unwrap(), random_graph(9, 0.3, 2, 42).unwrap());
        assert!(random_graph(9, 0.3, 2, 42)
            .unwrap()
            .features()
            .iter()
            .all(|x| (-1.0..=1.0).contains(x)));
    }

    #[test]
    fn json_shape() {
        let g = AttributedGraph::from_rows(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]], [(0, 1)]).unwrap();
        let text = serde_json::to_string(&g).unwrap();
        assert_eq!(text, r#"{"features":[[1.0,0.0],[0.0,1.0]],"edges":[[0,1]]}"#);
        let back: AttributedGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);

        let empty = AttributedGraph::empty(3).unwrap();
        let back: AttributedGraph = serde_json::from_str(&serde_json::to_string(&empty).unwrap()).unwrap();
        assert_eq!(back, empty);

        assert!(serde_json::from_str::<AttributedGraph>(r#"{"features":[[1.0]],"edges":[[0,0]]}"#).is_err());
    }

    #[test]
    fn dataset_validation() {
        let g1 = AttributedGraph::unlabeled(2, [(0, 1)]).unwrap();
        let g2 = random_graph(3, 0.5, 2, 0).unwrap();
        assert!(GraphDataset::new("x", vec![g1.clone()], Some(vec![0, 1])).is_err());
        assert!(GraphDataset::new("x", vec![g1.clone(), g2], None).is_err());
        let ds = GraphDataset::new("x", vec![g1.clone(), g1], Some(vec![3, 4])).unwrap();
        assert_eq!(ds.subset("y", &[1]).unwrap().labels, Some(vec![4]));
    }

    #[test]
    fn standardization_centers_and_scales() {
        let g = AttributedGraph::from_rows(2, vec![vec![1.0, 5.0], vec![3.0, 5.0]], [(0, 1)]).unwrap();
        let ds = GraphDataset::new("s", vec![g], None).unwrap().standardized().unwrap();
        assert_eq!(ds.graphs[0].features(), &[-1.0, 0.0, 1.0, 0.0]);
    }
}
