//! Level-by-level evaluation of tree distances between all node pairs of two
//! graphs. Level `k` holds the distance between the depth-`k` computation
//! trees rooted at every `(u, v)` pair, plus each tree's distance to the
//! blank tree.

use std::sync::atomic::{AtomicBool, Ordering};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::matrix::Matrix;
use crate::ot::{BlankOt, Mode};

use super::schedule::TmdConfig;

/// Tree distances at one depth. Index `n_a` (rows) or `n_b` (columns) is the
/// blank tree.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    depth: usize,
    dist: Matrix,
}

impl DistanceTable {
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Full `(n_a + 1) × (n_b + 1)` matrix including the blank row and column.
    pub fn matrix(&self) -> &Matrix {
        &self.dist
    }

    pub fn get(&self, u: usize, v: usize) -> f64 {
        self.dist.get(u, v)
    }

    pub fn blank_a(&self) -> usize {
        self.dist.rows() - 1
    }

    pub fn blank_b(&self) -> usize {
        self.dist.cols() - 1
    }

    /// Tree norms of graph A's nodes, i.e. the blank column.
    pub fn norms_a(&self) -> Vec<f64> {
        (0..self.blank_a()).map(|u| self.dist.get(u, self.blank_b())).collect()
    }

    pub fn norms_b(&self) -> Vec<f64> {
        (0..self.blank_b()).map(|v| self.dist.get(self.blank_a(), v)).collect()
    }
}

static ZERO_FEATURE_WARNED: AtomicBool = AtomicBool::new(false);

fn check_inputs(ga: &AttributedGraph, gb: &AttributedGraph) -> Result<()> {
    if ga.dim() != gb.dim() {
        return Err(Error::DimensionMismatch {
            expected: ga.dim(),
            found: gb.dim(),
        });
    }
    if (ga.has_zero_feature() || gb.has_zero_feature()) && !ZERO_FEATURE_WARNED.swap(true, Ordering::Relaxed) {
        log::warn!("a node feature equals the zero vector; such nodes are indistinguishable from blank trees");
    }
    Ok(())
}

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Tree norms `TD(T_v^k, T_0)` of every node for `k = 1 ..= depth`.
pub(crate) fn norm_levels(g: &AttributedGraph, weights: &[f64], depth: usize, mode: Mode) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let base: Vec<f64> = (0..n).map(|v| norm(g.feature(v))).collect();
    let mut levels = vec![base.clone()];
    for k in 2..=depth {
        let prev = &levels[k - 2];
        let w = weights[k - 2];
        let next = (0..n)
            .map(|v| {
                let nb = g.neighbors(v);
                let sum: f64 = nb.iter().map(|&u| prev[u]).sum();
                let child = match mode {
                    Mode::Sum => sum,
                    Mode::Mean if nb.is_empty() => 0.0,
                    Mode::Mean => sum / nb.len() as f64,
                };
                base[v] + w * child
            })
            .collect();
        levels.push(next);
    }
    levels
}

/// Working state for one pair of graphs.
struct PairDp<'a> {
    ga: &'a AttributedGraph,
    gb: &'a AttributedGraph,
    mode: Mode,
    base: Vec<f64>,
    ot: BlankOt,
    core: Vec<f64>,
    row_norms: Vec<f64>,
    col_norms: Vec<f64>,
}

impl<'a> PairDp<'a> {
    fn new(ga: &'a AttributedGraph, gb: &'a AttributedGraph, mode: Mode) -> Self {
        let (na, nb) = (ga.node_count(), gb.node_count());
        let mut base = Vec::with_capacity(na * nb);
        for u in 0..na {
            for v in 0..nb {
                base.push(euclidean(ga.feature(u), gb.feature(v)));
            }
        }
        PairDp {
            ga,
            gb,
            mode,
            base,
            ot: BlankOt::new(),
            core: Vec::new(),
            row_norms: Vec::new(),
            col_norms: Vec::new(),
        }
    }

    /// Next level from `prev` (row-major `n_a × n_b`) and the previous norms.
    fn step(&mut self, prev: &[f64], norms_a: &[f64], norms_b: &[f64], w: f64) -> Vec<f64> {
        let (na, nb) = (self.ga.node_count(), self.gb.node_count());
        let mut next = Vec::with_capacity(na * nb);
        for u in 0..na {
            let nu = self.ga.neighbors(u);
            self.row_norms.clear();
            self.row_norms.extend(nu.iter().map(|&i| norms_a[i]));
            for v in 0..nb {
                let nv = self.gb.neighbors(v);
                let root = self.base[u * nb + v];
                if nu.is_empty() && nv.is_empty() {
                    next.push(root);
                    continue;
                }
                self.core.clear();
                for &i in nu {
                    let row = &prev[i * nb..(i + 1) * nb];
                    self.core.extend(nv.iter().map(|&j| row[j]));
                }
                self.col_norms.clear();
                self.col_norms.extend(nv.iter().map(|&j| norms_b[j]));
                let ot = self.ot.cost(&self.core, nu.len(), nv.len(), &self.row_norms, &self.col_norms, self.mode);
                next.push(root + w * ot);
            }
        }
        next
    }

    /// All levels `1 ..= depth` as flat node-pair tables, with norms.
    fn run(&mut self, weights: &[f64], depth: usize, mut visit: impl FnMut(usize, &[f64], &[f64], &[f64])) {
        let norms_a = norm_levels(self.ga, weights, depth, self.mode);
        let norms_b = norm_levels(self.gb, weights, depth, self.mode);
        let mut cur = self.base.clone();
        visit(1, &cur, &norms_a[0], &norms_b[0]);
        for k in 2..=depth {
            cur = self.step(&cur, &norms_a[k - 2], &norms_b[k - 2], weights[k - 2]);
            visit(k, &cur, &norms_a[k - 1], &norms_b[k - 1]);
        }
    }

    fn graph_level(&mut self, table: &[f64], norms_a: &[f64], norms_b: &[f64]) -> f64 {
        let (na, nb) = (self.ga.node_count(), self.gb.node_count());
        self.ot.cost(table, na, nb, norms_a, norms_b, self.mode)
    }
}

/// Distance tables for depths `1 ..= cfg.depth`.
pub fn build_distance_tables(ga: &AttributedGraph, gb: &AttributedGraph, cfg: &TmdConfig) -> Result<Vec<DistanceTable>> {
    check_inputs(ga, gb)?;
    let weights = cfg.level_weights()?;
    let (na, nb) = (ga.node_count(), gb.node_count());
    let mut tables = Vec::with_capacity(cfg.depth);
    PairDp::new(ga, gb, cfg.mode).run(&weights, cfg.depth, |k, cur, norms_a, norms_b| {
        let dist = Matrix::from_fn(na + 1, nb + 1, |u, v| match (u < na, v < nb) {
            (true, true) => cur[u * nb + v],
            (true, false) => norms_a[u],
            (false, true) => norms_b[v],
            (false, false) => 0.0,
        });
        tables.push(DistanceTable { depth: k, dist });
    });
    Ok(tables)
}

/// Distance between the depth-`depth` computation trees of `u` in `ga` and
/// `v` in `gb`.
pub fn tree_distance(ga: &AttributedGraph, u: usize, gb: &AttributedGraph, v: usize, depth: usize, cfg: &TmdConfig) -> Result<f64> {
    for (g, x) in [(ga, u), (gb, v)] {
        if x >= g.node_count() {
            return Err(Error::NodeOutOfRange {
                index: x,
                nodes: g.node_count(),
            });
        }
    }
    let cfg = cfg.with_depth(depth)?;
    let tables = build_distance_tables(ga, gb, &cfg)?;
    Ok(tables[depth - 1].get(u, v))
}

/// Distance from the depth-`depth` computation tree of `v` to the blank tree.
pub fn tree_norm(g: &AttributedGraph, v: usize, depth: usize, cfg: &TmdConfig) -> Result<f64> {
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            index: v,
            nodes: g.node_count(),
        });
    }
    let cfg = cfg.with_depth(depth)?;
    let weights = cfg.level_weights()?;
    Ok(norm_levels(g, &weights, depth, cfg.mode)[depth - 1][v])
}

/// Tree Mover's Distance: transport between the blank-augmented multisets of
/// depth-`cfg.depth` computation trees.
pub fn tmd(ga: &AttributedGraph, gb: &AttributedGraph, cfg: &TmdConfig) -> Result<f64> {
    check_inputs(ga, gb)?;
    let weights = cfg.level_weights()?;
    if ga == gb {
        return Ok(0.0);
    }
    let mut dp = PairDp::new(ga, gb, cfg.mode);
    let mut last = None;
    dp.run(&weights, cfg.depth, |k, cur, norms_a, norms_b| {
        if k == cfg.depth {
            last = Some((cur.to_vec(), norms_a.to_vec(), norms_b.to_vec()));
        }
    });
    let (table, norms_a, norms_b) = last.expect("depth >= 1");
    Ok(dp.graph_level(&table, &norms_a, &norms_b))
}
