//! Closed-form upper bounds on the distance between a graph and a single-edit
//! modification of it: dropping a node, dropping an edge, or replacing a
//! node feature. Each bound is reported together with the exact distance.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::ot::Mode;
use crate::tree::{euclidean, norm_levels, tmd, TmdConfig};

/// Number of nodes on level `level` (root = 1) of the depth-`depth`
/// computation tree of `v`, i.e. the number of walks of length `level - 1`
/// starting at `v`. Saturates at `u64::MAX`.
pub fn tree_width(g: &AttributedGraph, v: usize, depth: usize, level: usize) -> Result<u64> {
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            index: v,
            nodes: g.node_count(),
        });
    }
    if level == 0 || level > depth {
        return Err(Error::InvalidArgument(format!("level {level} outside 1..={depth}")));
    }
    Ok(widths(g, v, depth)[level - 1])
}

/// Widths of all levels `1 ..= depth`.
fn widths(g: &AttributedGraph, v: usize, depth: usize) -> Vec<u64> {
    let n = g.node_count();
    let mut walks = vec![0u64; n];
    walks[v] = 1;
    let mut out = Vec::with_capacity(depth);
    for level in 1..=depth {
        out.push(walks.iter().fold(0u64, |acc, &c| acc.saturating_add(c)));
        if level < depth {
            walks = (0..n)
                .map(|u| g.neighbors(u).iter().fold(0u64, |acc, &x| acc.saturating_add(walks[x])))
                .collect();
        }
    }
    out
}

/// Coefficients `λ_1 .. λ_L` with `λ_1 = 1` and `λ_l = Π_{j=1}^{l-1} w(L - j)`:
/// the accumulated weight on level `l` of a depth-`L` tree.
pub fn lambdas(cfg: &TmdConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let depth = cfg.depth;
    let mut out = Vec::with_capacity(depth);
    out.push(1.0);
    for l in 2..=depth {
        let prev = out[l - 2];
        out.push(prev * cfg.weights.get(depth - (l - 1))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub bound: f64,
    pub exact_tmd: f64,
    /// `bound - exact_tmd`.
    pub gap: f64,
    /// Tree widths of each affected root, levels `1 ..= L`.
    pub widths: Vec<Vec<u64>>,
    pub lambdas: Vec<f64>,
}

fn require_sum(cfg: &TmdConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.mode != Mode::Sum {
        return Err(Error::Config("perturbation bounds hold for the unnormalized (sum) distance only".into()));
    }
    Ok(())
}

fn report(bound: f64, exact: f64, widths: Vec<Vec<u64>>, lambdas: Vec<f64>) -> Result<PerturbationReport> {
    if exact > bound + 1e-9 * bound.max(1.0) {
        return Err(Error::BoundViolation { exact, bound });
    }
    Ok(PerturbationReport {
        bound,
        exact_tmd: exact,
        gap: bound - exact,
        widths,
        lambdas,
    })
}

fn check_node(g: &AttributedGraph, v: usize) -> Result<()> {
    if v >= g.node_count() {
        return Err(Error::NodeOutOfRange {
            index: v,
            nodes: g.node_count(),
        });
    }
    Ok(())
}

/// Norms of `v`'s computation trees, indexed by depth - 1.
fn tree_norms_of(g: &AttributedGraph, v: usize, cfg: &TmdConfig) -> Result<Vec<f64>> {
    let weights = cfg.level_weights()?;
    Ok(norm_levels(g, &weights, cfg.depth, cfg.mode).into_iter().map(|level| level[v]).collect())
}

/// `Σ_{l=1}^{L} λ_l · Width_l(T_v^L) · TD(T_v^{L-l+1}, T_0)`.
pub fn node_drop_bound(g: &AttributedGraph, v: usize, cfg: &TmdConfig) -> Result<PerturbationReport> {
    require_sum(cfg)?;
    check_node(g, v)?;
    let lam = lambdas(cfg)?;
    let w = widths(g, v, cfg.depth);
    let norms = tree_norms_of(g, v, cfg)?;
    let depth = cfg.depth;
    let bound = (1..=depth).map(|l| lam[l - 1] * w[l - 1] as f64 * norms[depth - l]).sum();
    let exact = tmd(g, &g.drop_node(v)?, cfg)?;
    report(bound, exact, vec![w], lam)
}

/// `Σ_{l=1}^{L-1} λ_{l+1} · (Width_l(T_v^L) · TD(T_u^{L-l}, T_0) + Width_l(T_u^L) · TD(T_v^{L-l}, T_0))`.
pub fn edge_drop_bound(g: &AttributedGraph, u: usize, v: usize, cfg: &TmdConfig) -> Result<PerturbationReport> {
    require_sum(cfg)?;
    check_node(g, u)?;
    check_node(g, v)?;
    if !g.has_edge(u, v) {
        return Err(Error::EdgeAbsent(u, v));
    }
    let lam = lambdas(cfg)?;
    let depth = cfg.depth;
    let (wu, wv) = (widths(g, u, depth), widths(g, v, depth));
    let (nu, nv) = (tree_norms_of(g, u, cfg)?, tree_norms_of(g, v, cfg)?);
    let bound = (1..depth)
        .map(|l| lam[l] * (wv[l - 1] as f64 * nu[depth - l - 1] + wu[l - 1] as f64 * nv[depth - l - 1]))
        .sum();
    let exact = tmd(g, &g.drop_edge(u, v)?, cfg)?;
    report(bound, exact, vec![wu, wv], lam)
}

/// `Σ_{l=1}^{L} λ_l · Width_l(T_v^L) · ‖x_v - x'_v‖`.
pub fn node_perturbation_bound(g: &AttributedGraph, v: usize, x_new: &[f64], cfg: &TmdConfig) -> Result<PerturbationReport> {
    require_sum(cfg)?;
    check_node(g, v)?;
    if x_new.len() != g.dim() {
        return Err(Error::DimensionMismatch {
            expected: g.dim(),
            found: x_new.len(),
        });
    }
    let lam = lambdas(cfg)?;
    let w = widths(g, v, cfg.depth);
    let delta = euclidean(g.feature(v), x_new);
    let bound = lam.iter().zip(&w).map(|(l, &c)| l * c as f64 * delta).sum();
    let exact = tmd(g, &g.perturb_feature(v, x_new)?, cfg)?;
    report(bound, exact, vec![w], lam)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "edit", rename_all = "snake_case")]
pub enum Edit {
    DropNode { node: usize },
    DropEdge { u: usize, v: usize },
    Perturb { node: usize, feature: Vec<f64> },
}

impl Edit {
    pub fn apply(&self, g: &AttributedGraph) -> Result<AttributedGraph> {
        match self {
            Edit::DropNode { node } => g.drop_node(*node),
            Edit::DropEdge { u, v } => g.drop_edge(*u, *v),
            Edit::Perturb { node, feature } => g.perturb_feature(*node, feature),
        }
    }

    pub fn bound(&self, g: &AttributedGraph, cfg: &TmdConfig) -> Result<PerturbationReport> {
        match self {
            Edit::DropNode { node } => node_drop_bound(g, *node, cfg),
            Edit::DropEdge { u, v } => edge_drop_bound(g, *u, *v, cfg),
            Edit::Perturb { node, feature } => node_perturbation_bound(g, *node, feature, cfg),
        }
    }
}

/// Random single edit of `g`. Feature perturbations add uniform noise in
/// `[-scale, scale]` to each coordinate.
pub fn sample_edit<R: Rng>(g: &AttributedGraph, rng: &mut R, scale: f64) -> Option<Edit> {
    let n = g.node_count();
    if n == 0 {
        return None;
    }
    let kinds = if g.edge_count() > 0 { 3 } else { 2 };
    Some(match rng.gen_range(0..kinds) {
        0 => Edit::DropNode { node: rng.gen_range(0..n) },
        1 => {
            let node = rng.gen_range(0..n);
            let feature = g.feature(node).iter().map(|x| x + rng.gen_range(-scale..=scale)).collect();
            Edit::Perturb { node, feature }
        }
        _ => {
            let (u, v) = g.edges()[rng.gen_range(0..g.edge_count())];
            Edit::DropEdge { u, v }
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceReport {
    /// Sum of the single-edit bounds along the sequence.
    pub bound: f64,
    pub exact_tmd: f64,
    pub steps: Vec<PerturbationReport>,
}

/// Bound for several edits applied in order: by the triangle inequality the
/// distance to the final graph is at most the sum of the per-step bounds,
/// each evaluated on the intermediate graph it applies to.
pub fn edit_sequence_bound(g: &AttributedGraph, edits: &[Edit], cfg: &TmdConfig) -> Result<SequenceReport> {
    require_sum(cfg)?;
    let mut cur = g.clone();
    let mut steps = Vec::with_capacity(edits.len());
    for e in edits {
        steps.push(e.bound(&cur, cfg)?);
        cur = e.apply(&cur)?;
    }
    let bound: f64 = steps.iter().map(|s| s.bound).sum();
    let exact = tmd(g, &cur, cfg)?;
    if exact > bound + 1e-9 * bound.max(1.0) {
        return Err(Error::BoundViolation { exact, bound });
    }
    Ok(SequenceReport {
        bound,
        exact_tmd: exact,
        steps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle_graph;
    use crate::tree::{ComputationTree, WeightSchedule};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ones(depth: usize) -> TmdConfig {
        TmdConfig::new(depth, WeightSchedule::constant(1.0).unwrap(), Mode::Sum).unwrap()
    }

    fn edge() -> AttributedGraph {
        AttributedGraph::unlabeled(2, [(0, 1)]).unwrap()
    }

    #[test]
    fn width_examples() {
        let star = AttributedGraph::unlabeled(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert_eq!(tree_width(&star, 0, 3, 1).unwrap(), 1);
        assert_eq!(tree_width(&star, 0, 3, 2).unwrap(), 3);
        assert_eq!(tree_width(&star, 0, 3, 3).unwrap(), 3);
        let iso = AttributedGraph::unlabeled(1, []).unwrap();
        assert_eq!(tree_width(&iso, 0, 2, 2).unwrap(), 0);
        assert!(tree_width(&star, 0, 3, 4).is_err());
        assert!(tree_width(&star, 0, 3, 0).is_err());
    }

    #[test]
    fn widths_match_materialized_trees() {
        let g = crate::graph::random_graph(8, 0.4, 1, 11).unwrap();
        for v in 0..8 {
            let mut from_tree = ComputationTree::unroll(&g, v, 4).level_widths();
            from_tree.resize(4, 0);
            assert_eq!(widths(&g, v, 4), from_tree.iter().map(|&w| w as u64).collect::<Vec<_>>());
        }
    }

    #[test]
    fn lambdas_are_products_of_weights() {
        let cfg = TmdConfig::new(4, WeightSchedule::explicit(vec![2.0, 3.0, 5.0]).unwrap(), Mode::Sum).unwrap();
        // w(3), w(3) w(2), w(3) w(2) w(1)
        assert_eq!(lambdas(&cfg).unwrap(), vec![1.0, 5.0, 15.0, 30.0]);
        let cfg = TmdConfig::new(3, WeightSchedule::pascal(2, 1.0).unwrap(), Mode::Sum).unwrap();
        let w = WeightSchedule::pascal(2, 1.0).unwrap();
        assert_eq!(lambdas(&cfg).unwrap(), vec![1.0, w.get(2).unwrap(), w.get(2).unwrap() * w.get(1).unwrap()]);
    }

    #[test]
    fn node_drop_examples() {
        let x = AttributedGraph::from_rows(2, vec![vec![3.0, 4.0], vec![1.0, 1.0]], []).unwrap();
        for depth in 1..4 {
            let r = node_drop_bound(&x, 0, &ones(depth)).unwrap();
            assert_eq!(r.bound, 5.0);
            assert_eq!(r.exact_tmd, 5.0);
        }
        let r = node_drop_bound(&edge(), 1, &ones(2)).unwrap();
        assert_eq!(r.bound, 3.0);
        assert_eq!(r.exact_tmd, 3.0);

        let z = AttributedGraph::from_rows(1, vec![vec![0.0], vec![2.0]], []).unwrap();
        let r = node_drop_bound(&z, 0, &ones(3)).unwrap();
        assert_eq!((r.bound, r.exact_tmd), (0.0, 0.0));
        assert!(node_drop_bound(&z, 2, &ones(3)).is_err());
    }

    #[test]
    fn edge_drop_examples() {
        let r = edge_drop_bound(&edge(), 0, 1, &ones(2)).unwrap();
        assert_eq!(r.bound, 2.0);
        assert_eq!(r.exact_tmd, 2.0);
        let r = edge_drop_bound(&edge(), 0, 1, &ones(1)).unwrap();
        assert_eq!((r.bound, r.exact_tmd), (0.0, 0.0));
        let c6 = cycle_graph(6).unwrap();
        for (u, v) in c6.edges().to_vec() {
            let r = edge_drop_bound(&c6, u, v, &ones(3)).unwrap();
            assert!(r.exact_tmd <= r.bound);
        }
        assert!(matches!(edge_drop_bound(&c6, 0, 3, &ones(3)), Err(Error::EdgeAbsent(0, 3))));
    }

    #[test]
    fn perturbation_examples() {
        let g = edge();
        let r = node_perturbation_bound(&g, 0, &[1.0], &ones(2)).unwrap();
        assert_eq!((r.bound, r.exact_tmd), (0.0, 0.0));

        let s = AttributedGraph::from_rows(1, vec![vec![3.0]], []).unwrap();
        for depth in 1..4 {
            let r = node_perturbation_bound(&s, 0, &[1.0], &ones(depth)).unwrap();
            assert_eq!((r.bound, r.exact_tmd), (2.0, 2.0));
        }

        let r = node_perturbation_bound(&g, 0, &[1.25], &ones(2)).unwrap();
        assert_eq!(r.bound, 0.5);
        assert!(r.exact_tmd <= r.bound);
        assert!(node_perturbation_bound(&g, 0, &[1.0, 2.0], &ones(2)).is_err());
    }

    #[test]
    fn perturbation_bound_is_linear_in_displacement() {
        let g = crate::graph::random_graph(6, 0.5, 2, 5).unwrap();
        let x = g.feature(2).to_vec();
        let at = |t: f64| {
            let moved: Vec<f64> = x.iter().map(|a| a + t * 0.3).collect();
            node_perturbation_bound(&g, 2, &moved, &ones(3)).unwrap().bound
        };
        assert!((at(2.0) - 2.0 * at(1.0)).abs() < 1e-12);
        assert!((at(3.0) - 3.0 * at(1.0)).abs() < 1e-12);
    }

    #[test]
    fn mean_mode_is_rejected() {
        let cfg = TmdConfig::new(2, WeightSchedule::constant(1.0).unwrap(), Mode::Mean).unwrap();
        assert!(matches!(node_drop_bound(&edge(), 0, &cfg), Err(Error::Config(_))));
    }

    #[test]
    fn edit_sequences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = crate::graph::random_graph(7, 0.5, 2, 1).unwrap();
        let mut cur = g.clone();
        let mut edits = Vec::new();
        for _ in 0..3 {
            let e = sample_edit(&cur, &mut rng, 0.5).unwrap();
            cur = e.apply(&cur).unwrap();
            edits.push(e);
        }
        let r = edit_sequence_bound(&g, &edits, &ones(3)).unwrap();
        assert_eq!(r.steps.len(), 3);
        assert!(r.exact_tmd <= r.bound);
    }
}
