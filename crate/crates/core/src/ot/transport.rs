//! Transportation simplex (the network simplex specialised to the complete
//! bipartite graph) with Bland's rule for both the entering and the leaving
//! variable.
//!
//! The basis is a spanning tree on the `m + n` row/column nodes holding
//! exactly `m + n - 1` cells, some of which may carry zero flow.

use std::collections::VecDeque;

/// Optimal flow and its cost `Σ flow · cost`.
#[derive(Debug, Clone)]
pub(crate) struct TransportSolution {
    pub cost: f64,
    /// `(row, col, flow)` for basic cells with positive flow, row-major order.
    pub flows: Vec<(usize, usize, f64)>,
}

pub(crate) fn transportation_simplex(cost: &[f64], m: usize, n: usize, supply: &[f64], demand: &[f64]) -> TransportSolution {
    debug_assert_eq!(cost.len(), m * n);
    if m == 0 || n == 0 {
        return TransportSolution {
            cost: 0.0,
            flows: Vec::new(),
        };
    }
    let scale = cost.iter().fold(1.0f64, |a, &c| a.max(c.abs()));
    let tol = 1e-12 * scale;

    // North-west corner start; moving one index per step yields m + n - 1 cells.
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells: Vec<(usize, usize)> = Vec::with_capacity(m + n - 1);
    let mut flow: Vec<f64> = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0usize, 0usize);
    loop {
        let f = s[i].min(d[j]);
        cells.push((i, j));
        flow.push(f);
        s[i] -= f;
        d[j] -= f;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut basic = vec![usize::MAX; m * n];
    for (k, &(r, c)) in cells.iter().enumerate() {
        basic[r * n + c] = k;
    }

    let nodes = m + n;
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes];
    let mut u = vec![0.0; m];
    let mut v = vec![0.0; n];
    let mut known = vec![false; nodes];
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut queue = VecDeque::new();

    loop {
        for a in &mut adj {
            a.clear();
        }
        for (k, &(r, c)) in cells.iter().enumerate() {
            adj[r].push((m + c, k));
            adj[m + c].push((r, k));
        }

        // potentials: u_r + v_c = cost on basic cells
        known.iter_mut().for_each(|x| *x = false);
        known[0] = true;
        u[0] = 0.0;
        queue.clear();
        queue.push_back(0usize);
        while let Some(x) = queue.pop_front() {
            for &(y, k) in &adj[x] {
                if known[y] {
                    continue;
                }
                let (r, c) = cells[k];
                if y >= m {
                    v[c] = cost[r * n + c] - u[r];
                } else {
                    u[r] = cost[r * n + c] - v[c];
                }
                known[y] = true;
                queue.push_back(y);
            }
        }

        // Bland: first improving cell in row-major order
        let mut entering = None;
        'scan: for r in 0..m {
            for c in 0..n {
                if basic[r * n + c] != usize::MAX {
                    continue;
                }
                if cost[r * n + c] - u[r] - v[c] < -tol {
                    entering = Some((r, c));
                    break 'scan;
                }
            }
        }
        let Some((er, ec)) = entering else {
            break;
        };

        // tree path from the entering row to the entering column
        parent.iter_mut().for_each(|p| *p = None);
        known.iter_mut().for_each(|x| *x = false);
        known[er] = true;
        queue.clear();
        queue.push_back(er);
        while let Some(x) = queue.pop_front() {
            if x == m + ec {
                break;
            }
            for &(y, k) in &adj[x] {
                if !known[y] {
                    known[y] = true;
                    parent[y] = Some((x, k));
                    queue.push_back(y);
                }
            }
        }
        // walking back from the column, path cells alternate -, +, -, ...
        let mut minus = Vec::new();
        let mut plus = Vec::new();
        let mut node = m + ec;
        let mut sign_minus = true;
        while node != er {
            let (prev, k) = parent[node].expect("basis is a spanning tree");
            if sign_minus {
                minus.push(k);
            } else {
                plus.push(k);
            }
            sign_minus = !sign_minus;
            node = prev;
        }

        let theta = minus.iter().map(|&k| flow[k]).fold(f64::INFINITY, f64::min);
        let leaving = *minus
            .iter()
            .filter(|&&k| flow[k] == theta)
            .min_by_key(|&&k| cells[k])
            .expect("cycle has a decreasing cell");

        for &k in &plus {
            flow[k] += theta;
        }
        for &k in &minus {
            flow[k] -= theta;
        }
        let (lr, lc) = cells[leaving];
        basic[lr * n + lc] = usize::MAX;
        cells[leaving] = (er, ec);
        flow[leaving] = theta;
        basic[er * n + ec] = leaving;
    }

    let mut order: Vec<usize> = (0..cells.len()).collect();
    order.sort_by_key(|&k| cells[k]);
    let flows: Vec<(usize, usize, f64)> = order
        .into_iter()
        .filter(|&k| flow[k] > 0.0)
        .map(|k| (cells[k].0, cells[k].1, flow[k]))
        .collect();
    let total = flows.iter().map(|&(r, c, f)| f * cost[r * n + c]).sum();
    TransportSolution { cost: total, flows }
}
