//! Direct evaluation over explicitly materialized computation trees.
//!
//! Used as a reference for the table-based computation. Shares no solver code
//! with it: unit-mass matchings use a subset dynamic program and uniform
//! transport uses successive shortest paths on an integer-capacity network.

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::ot::Mode;

use super::schedule::TmdConfig;
use super::tables::{euclidean, norm};

const MAX_NODES: usize = 10;
const MAX_DEPTH: usize = 4;

/// Rooted tree with a feature at every node.
#[derive(Debug, Clone)]
pub struct ComputationTree {
    pub feature: Vec<f64>,
    pub children: Vec<ComputationTree>,
}

impl ComputationTree {
    /// Depth-`depth` unrolling of `g` at `v`: the children of a tree node are
    /// the graph neighbors of its node, one level shallower.
    pub fn unroll(g: &AttributedGraph, v: usize, depth: usize) -> Self {
        let children = if depth > 1 {
            g.neighbors(v).iter().map(|&u| ComputationTree::unroll(g, u, depth - 1)).collect()
        } else {
            Vec::new()
        };
        ComputationTree {
            feature: g.feature(v).to_vec(),
            children,
        }
    }

    /// Number of tree nodes on each level, root level first.
    pub fn level_widths(&self) -> Vec<usize> {
        let mut widths = Vec::new();
        let mut level = vec![self];
        while !level.is_empty() {
            widths.push(level.len());
            level = level.iter().flat_map(|t| t.children.iter()).collect();
        }
        widths
    }
}

/// `None` is the blank tree.
fn tree_dist(a: Option<&ComputationTree>, b: Option<&ComputationTree>, depth: usize, weights: &[f64], mode: Mode) -> f64 {
    let root = match (a, b) {
        (Some(a), Some(b)) => euclidean(&a.feature, &b.feature),
        (Some(t), None) | (None, Some(t)) => norm(&t.feature),
        (None, None) => 0.0,
    };
    if depth <= 1 {
        return root;
    }
    let empty: &[ComputationTree] = &[];
    let ca = a.map_or(empty, |t| &t.children[..]);
    let cb = b.map_or(empty, |t| &t.children[..]);
    let ot = multiset_ot(ca, cb, mode, |x, y| tree_dist(x, y, depth - 1, weights, mode));
    root + weights[depth - 2] * ot
}

/// OT between two multisets after blank augmentation.
fn multiset_ot<T>(xs: &[T], ys: &[T], mode: Mode, mut d: impl FnMut(Option<&T>, Option<&T>) -> f64) -> f64 {
    match mode {
        Mode::Sum => {
            let k = xs.len().max(ys.len());
            let cost: Vec<Vec<f64>> = (0..k).map(|i| (0..k).map(|j| d(xs.get(i), ys.get(j))).collect()).collect();
            subset_assignment(&cost)
        }
        Mode::Mean => {
            let rows: Vec<Option<&T>> = if xs.is_empty() { vec![None] } else { xs.iter().map(Some).collect() };
            let cols: Vec<Option<&T>> = if ys.is_empty() { vec![None] } else { ys.iter().map(Some).collect() };
            let cost: Vec<Vec<f64>> = rows.iter().map(|&x| cols.iter().map(|&y| d(x, y)).collect()).collect();
            uniform_transport(&cost)
        }
    }
}

/// Minimum-cost perfect matching by dynamic programming over column subsets.
fn subset_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    if n == 0 {
        return 0.0;
    }
    let mut best = vec![f64::INFINITY; 1 << n];
    best[0] = 0.0;
    for mask in 0usize..(1 << n) {
        let row = mask.count_ones() as usize;
        if row >= n || best[mask].is_infinite() {
            continue;
        }
        for j in 0..n {
            if mask & (1 << j) == 0 {
                let next = mask | (1 << j);
                let c = best[mask] + cost[row][j];
                if c < best[next] {
                    best[next] = c;
                }
            }
        }
    }
    best[(1 << n) - 1]
}

/// Transport between uniform distributions on the rows and columns.
/// Scaled to integers: each row supplies `n` units, each column demands `m`.
fn uniform_transport(cost: &[Vec<f64>]) -> f64 {
    let m = cost.len();
    let n = cost[0].len();
    // nodes: source, rows, cols, sink
    let (src, sink) = (0, m + n + 1);
    let mut graph = FlowNetwork::new(m + n + 2);
    for (i, row) in cost.iter().enumerate() {
        graph.add_edge(src, 1 + i, n as i64, 0.0);
        for (j, &c) in row.iter().enumerate() {
            graph.add_edge(1 + i, 1 + m + j, i64::MAX / 4, c);
        }
    }
    for j in 0..n {
        graph.add_edge(1 + m + j, sink, m as i64, 0.0);
    }
    graph.min_cost_flow(src, sink) / (m * n) as f64
}

struct FlowEdge {
    to: usize,
    cap: i64,
    cost: f64,
}

struct FlowNetwork {
    edges: Vec<FlowEdge>,
    out: Vec<Vec<usize>>,
}

impl FlowNetwork {
    fn new(nodes: usize) -> Self {
        FlowNetwork {
            edges: Vec::new(),
            out: vec![Vec::new(); nodes],
        }
    }

    fn add_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        self.out[from].push(self.edges.len());
        self.edges.push(FlowEdge { to, cap, cost });
        self.out[to].push(self.edges.len());
        self.edges.push(FlowEdge { to: from, cap: 0, cost: -cost });
    }

    /// Saturating flow of minimum cost; Bellman-Ford shortest paths.
    fn min_cost_flow(&mut self, src: usize, sink: usize) -> f64 {
        let nodes = self.out.len();
        let mut total = 0.0;
        loop {
            let mut dist = vec![f64::INFINITY; nodes];
            let mut via = vec![usize::MAX; nodes];
            dist[src] = 0.0;
            for _ in 0..nodes {
                let mut changed = false;
                for x in 0..nodes {
                    if dist[x].is_infinite() {
                        continue;
                    }
                    for &e in &self.out[x] {
                        let edge = &self.edges[e];
                        if edge.cap > 0 && dist[x] + edge.cost < dist[edge.to] - 1e-15 {
                            dist[edge.to] = dist[x] + edge.cost;
                            via[edge.to] = e;
                            changed = true;
                        }
                    }
                }
                if !changed {
                    break;
                }
            }
            if dist[sink].is_infinite() {
                return total;
            }
            let mut push = i64::MAX;
            let mut x = sink;
            while x != src {
                let e = via[x];
                push = push.min(self.edges[e].cap);
                x = self.edges[e ^ 1].to;
            }
            let mut x = sink;
            while x != src {
                let e = via[x];
                self.edges[e].cap -= push;
                self.edges[e ^ 1].cap += push;
                total += push as f64 * self.edges[e].cost;
                x = self.edges[e ^ 1].to;
            }
        }
    }
}

/// Reference evaluation of [`tmd`](super::tmd). Exponential in depth; limited
/// to graphs with at most 10 nodes and depth at most 4.
pub fn naive_tmd(ga: &AttributedGraph, gb: &AttributedGraph, cfg: &TmdConfig) -> Result<f64> {
    if ga.dim() != gb.dim() {
        return Err(Error::DimensionMismatch {
            expected: ga.dim(),
            found: gb.dim(),
        });
    }
    if ga.node_count() > MAX_NODES || gb.node_count() > MAX_NODES || cfg.depth > MAX_DEPTH {
        return Err(Error::SizeGuard(format!(
            "reference evaluation supports at most {MAX_NODES} nodes and depth {MAX_DEPTH}"
        )));
    }
    let weights = cfg.level_weights()?;
    let ta: Vec<ComputationTree> = (0..ga.node_count()).map(|v| ComputationTree::unroll(ga, v, cfg.depth)).collect();
    let tb: Vec<ComputationTree> = (0..gb.node_count()).map(|v| ComputationTree::unroll(gb, v, cfg.depth)).collect();
    if ta.is_empty() && tb.is_empty() {
        return Ok(0.0);
    }
    Ok(multiset_ot(&ta, &tb, cfg.mode, |x, y| tree_dist(x, y, cfg.depth, &weights, cfg.mode)))
}
