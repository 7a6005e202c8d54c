//! Dense linear assignment by successive shortest augmenting paths with dual
//! potentials (Hungarian / Jonker–Volgenant family), O(n³).

/// Reusable buffers for repeated small solves.
#[derive(Debug, Default)]
pub(crate) struct AssignmentSolver {
    u: Vec<f64>,
    v: Vec<f64>,
    p: Vec<usize>,
    way: Vec<usize>,
    minv: Vec<f64>,
    used: Vec<bool>,
    assignment: Vec<usize>,
}

impl AssignmentSolver {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Minimum-cost perfect matching on the `n × n` row-major `cost`.
    /// Returns the cost summed in row order; the matching is left in
    /// `self.assignment()`.
    pub(crate) fn solve(&mut self, cost: &[f64], n: usize) -> f64 {
        debug_assert_eq!(cost.len(), n * n);
        self.assignment.clear();
        match n {
            0 => 0.0,
            1 => {
                self.assignment.push(0);
                cost[0]
            }
            2 => {
                let straight = cost[0] + cost[3];
                let crossed = cost[1] + cost[2];
                if crossed < straight {
                    self.assignment.extend([1, 0]);
                    crossed
                } else {
                    self.assignment.extend([0, 1]);
                    straight
                }
            }
            3 => self.solve_three(cost),
            _ => self.solve_general(cost, n),
        }
    }

    pub(crate) fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// Row potentials `u` and column potentials `v` from the last general solve,
    /// with `cost[i][j] - u[i] - v[j] >= 0` up to rounding and equality on the
    /// matching.
    pub(crate) fn duals(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        (self.u[1..=n].to_vec(), self.v[1..=n].to_vec())
    }

    fn solve_three(&mut self, c: &[f64]) -> f64 {
        // permutations in lexicographic order; strict improvement keeps the
        // lexicographically smallest optimum
        const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut best = f64::INFINITY;
        let mut arg = 0;
        for (k, p) in PERMS.iter().enumerate() {
            let s = c[p[0]] + c[3 + p[1]] + c[6 + p[2]];
            if s < best {
                best = s;
                arg = k;
            }
        }
        self.assignment.extend(PERMS[arg]);
        best
    }

    pub(crate) fn solve_general(&mut self, cost: &[f64], n: usize) -> f64 {
        let inf = f64::INFINITY;
        self.u.clear();
        self.u.resize(n + 1, 0.0);
        self.v.clear();
        self.v.resize(n + 1, 0.0);
        self.p.clear();
        self.p.resize(n + 1, 0);
        self.way.clear();
        self.way.resize(n + 1, 0);

        for i in 1..=n {
            self.p[0] = i;
            let mut j0 = 0usize;
            self.minv.clear();
            self.minv.resize(n + 1, inf);
            self.used.clear();
            self.used.resize(n + 1, false);
            loop {
                self.used[j0] = true;
                let i0 = self.p[j0];
                let row = &cost[(i0 - 1) * n..i0 * n];
                let mut delta = inf;
                let mut j1 = 0usize;
                for j in 1..=n {
                    if self.used[j] {
                        continue;
                    }
                    let cur = row[j - 1] - self.u[i0] - self.v[j];
                    if cur < self.minv[j] {
                        self.minv[j] = cur;
                        self.way[j] = j0;
                    }
                    if self.minv[j] < delta {
                        delta = self.minv[j];
                        j1 = j;
                    }
                }
                for j in 0..=n {
                    if self.used[j] {
                        self.u[self.p[j]] += delta;
                        self.v[j] -= delta;
                    } else {
                        self.minv[j] -= delta;
                    }
                }
                j0 = j1;
                if self.p[j0] == 0 {
                    break;
                }
            }
            loop {
                let j1 = self.way[j0];
                self.p[j0] = self.p[j1];
                j0 = j1;
                if j0 == 0 {
                    break;
                }
            }
        }

        self.assignment.clear();
        self.assignment.resize(n, 0);
        for j in 1..=n {
            self.assignment[self.p[j] - 1] = j - 1;
        }
        self.assignment.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum()
    }
}

/// Lexicographically smallest perfect matching among the optimal ones.
///
/// Every optimal matching uses only edges that are tight under optimal duals,
/// so the search is restricted to the tight subgraph: rows are fixed in order
/// to the smallest column that still admits a perfect completion.
pub(crate) fn lexicographic_optimum(cost: &[f64], n: usize) -> (f64, Vec<usize>) {
    let mut solver = AssignmentSolver::new();
    let reference = solver.solve_general(cost, n);
    let fallback = solver.assignment().to_vec();
    let (u, v) = solver.duals(n);
    let scale = cost.iter().fold(1.0f64, |m, &c| m.max(c.abs()));
    let tol = 1e-11 * scale * n as f64;
    let tight: Vec<bool> = (0..n * n)
        .map(|k| cost[k] - u[k / n] - v[k % n] <= tol)
        .collect();

    let mut chosen = vec![usize::MAX; n];
    let mut col_used = vec![false; n];
    for i in 0..n {
        let mut fixed = false;
        for c in 0..n {
            if col_used[c] || !tight[i * n + c] {
                continue;
            }
            col_used[c] = true;
            if has_perfect_completion(&tight, n, i + 1, &col_used) {
                chosen[i] = c;
                fixed = true;
                break;
            }
            col_used[c] = false;
        }
        if !fixed {
            return (reference, fallback);
        }
    }
    let total: f64 = chosen.iter().enumerate().map(|(i, &j)| cost[i * n + j]).sum();
    if total <= reference + tol {
        (total, chosen)
    } else {
        (reference, fallback)
    }
}

/// Whether rows `start..n` can be matched into the unused columns using
/// tight edges only (Kuhn's augmenting paths).
fn has_perfect_completion(tight: &[bool], n: usize, start: usize, col_used: &[bool]) -> bool {
    let mut match_col: Vec<Option<usize>> = vec![None; n];
    for row in start..n {
        let mut seen = vec![false; n];
        if !augment(tight, n, row, col_used, &mut seen, &mut match_col) {
            return false;
        }
    }
    true
}

fn augment(
    tight: &[bool],
    n: usize,
    row: usize,
    col_used: &[bool],
    seen: &mut [bool],
    match_col: &mut [Option<usize>],
) -> bool {
    for c in 0..n {
        if col_used[c] || seen[c] || !tight[row * n + c] {
            continue;
        }
        seen[c] = true;
        let free = match match_col[c] {
            None => true,
            Some(r) => augment(tight, n, r, col_used, seen, match_col),
        };
        if free {
            match_col[c] = Some(row);
            return true;
        }
    }
    false
}
