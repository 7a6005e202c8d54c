//! 1-WL color refinement run jointly on two graphs.

use std::collections::BTreeMap;

use crate::graph::AttributedGraph;

/// Colors of both graphs' nodes after each round, sharing one palette.
fn refine(ga: &AttributedGraph, gb: &AttributedGraph, rounds: usize, mut visit: impl FnMut(usize, &[u32], &[u32]) -> bool) {
    let graphs = [ga, gb];
    // initial colors: exact feature equality, compared by bit pattern
    let mut palette: BTreeMap<Vec<u64>, u32> = BTreeMap::new();
    let mut colors: Vec<Vec<u32>> = graphs
        .iter()
        .map(|g| {
            (0..g.node_count())
                .map(|v| {
                    let key: Vec<u64> = g.feature(v).iter().map(|x| (x + 0.0).to_bits()).collect();
                    let next = palette.len() as u32;
                    *palette.entry(key).or_insert(next)
                })
                .collect()
        })
        .collect();
    if visit(0, &colors[0], &colors[1]) {
        return;
    }
    for round in 1..=rounds {
        let mut signatures: BTreeMap<(u32, Vec<u32>), u32> = BTreeMap::new();
        let next: Vec<Vec<u32>> = graphs
            .iter()
            .zip(&colors)
            .map(|(g, c)| {
                (0..g.node_count())
                    .map(|v| {
                        let mut nb: Vec<u32> = g.neighbors(v).iter().map(|&u| c[u]).collect();
                        nb.sort_unstable();
                        let fresh = signatures.len() as u32;
                        *signatures.entry((c[v], nb)).or_insert(fresh)
                    })
                    .collect()
            })
            .collect();
        colors = next;
        if visit(round, &colors[0], &colors[1]) {
            return;
        }
    }
}

fn histogram(colors: &[u32]) -> Vec<u32> {
    let mut h = colors.to_vec();
    h.sort_unstable();
    h
}

/// First refinement round (0 = initial coloring) at which the color
/// histograms differ, looking at rounds `0 ..= iterations`.
pub fn wl_first_difference(ga: &AttributedGraph, gb: &AttributedGraph, iterations: usize) -> Option<usize> {
    let mut found = None;
    refine(ga, gb, iterations, |round, a, b| {
        if histogram(a) != histogram(b) {
            found = Some(round);
            true
        } else {
            false
        }
    });
    found
}

/// Whether 1-WL tells the graphs apart within `iterations` rounds.
pub fn wl_distinguishable(ga: &AttributedGraph, gb: &AttributedGraph, iterations: usize) -> bool {
    wl_first_difference(ga, gb, iterations).is_some()
}
