//! Exact optimal transport between finite multisets.
//!
//! * [`solve_assignment`]: unnormalized OT with all-ones marginals on equal
//!   sized multisets. The extreme points of that polytope are permutations, so
//!   this is a linear assignment problem.
//! * [`solve_transport`]: general discrete transport with arbitrary
//!   non-negative marginals of equal total mass.
//! * [`augmented_ot`]: OT between multisets of different sizes after padding
//!   the smaller one with blank objects whose costs are supplied as norms.

mod assignment;
mod transport;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

pub(crate) use assignment::AssignmentSolver;
use transport::transportation_simplex;

/// How multisets of different sizes are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Unnormalized OT: the smaller side is padded with blanks and every
    /// element carries unit mass.
    Sum,
    /// Normalized OT: Wasserstein distance between the uniform distributions
    /// on the two multisets. An empty multiset is replaced by a single blank.
    Mean,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(Mode::Sum),
            "mean" => Ok(Mode::Mean),
            other => Err(Error::Config(format!("unknown mode '{other}', expected sum or mean"))),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Sum => "sum",
            Mode::Mean => "mean",
        })
    }
}

/// Non-negative finite transport costs.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix(Matrix);

impl CostMatrix {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if let Some(bad) = matrix.as_slice().iter().find(|c| !c.is_finite() || **c < 0.0) {
            return Err(Error::InvalidCost(format!("entry {bad} is not a finite non-negative number")));
        }
        Ok(CostMatrix(matrix))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let matrix = Matrix::from_rows(rows).ok_or_else(|| Error::InvalidCost("ragged rows".into()))?;
        Self::new(matrix)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::new(Matrix::from_fn(rows, cols, f))
    }

    pub fn rows(&self) -> usize {
        self.0.rows()
    }

    pub fn cols(&self) -> usize {
        self.0.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coupling {
    /// Row `i` is sent entirely to column `perm[i]`.
    Permutation(Vec<usize>),
    /// Sparse `(row, col, mass)` entries in row-major order.
    Flow(Vec<(usize, usize, f64)>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub cost: f64,
    pub coupling: Coupling,
    /// Whether `cost` is per unit of mass rather than a total.
    pub normalized: bool,
}

/// Exact minimum-cost assignment. Among several optimal permutations the
/// lexicographically smallest one is returned.
pub fn solve_assignment(c: &CostMatrix) -> Result<TransportPlan> {
    let m = c.rows();
    if m != c.cols() {
        return Err(Error::InvalidCost(format!("assignment needs a square matrix, got {}x{}", m, c.cols())));
    }
    if m == 0 {
        return Err(Error::InvalidCost("assignment needs at least one row".into()));
    }
    let data = c.matrix().as_slice();
    let (cost, perm) = if m <= 3 {
        let mut solver = AssignmentSolver::new();
        let cost = solver.solve(data, m);
        (cost, solver.assignment().to_vec())
    } else {
        assignment::lexicographic_optimum(data, m)
    };
    Ok(TransportPlan {
        cost,
        coupling: Coupling::Permutation(perm),
        normalized: false,
    })
}

fn check_masses(name: &str, masses: &[f64], expected_len: usize) -> Result<f64> {
    if masses.len() != expected_len {
        return Err(Error::Mass(format!("{name} has {} entries, expected {expected_len}", masses.len())));
    }
    if let Some(bad) = masses.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Mass(format!("{name} contains invalid mass {bad}")));
    }
    Ok(masses.iter().sum())
}

/// Exact optimal transport for arbitrary marginals of equal total mass.
/// The returned cost is the total `⟨C, γ⟩`.
pub fn solve_transport(c: &CostMatrix, row_mass: &[f64], col_mass: &[f64]) -> Result<TransportPlan> {
    let total_rows = check_masses("row mass", row_mass, c.rows())?;
    let total_cols = check_masses("column mass", col_mass, c.cols())?;
    if (total_rows - total_cols).abs() > 1e-9 * total_rows.max(total_cols).max(1.0) {
        return Err(Error::Mass(format!("total masses differ: {total_rows} vs {total_cols}")));
    }
    let sol = transportation_simplex(c.matrix().as_slice(), c.rows(), c.cols(), row_mass, col_mass);
    Ok(TransportPlan {
        cost: sol.cost,
        coupling: Coupling::Flow(sol.flows),
        normalized: false,
    })
}

/// OT between a multiset of `m` row objects and `n` column objects after
/// blank augmentation. `row_norms[i]` is the cost of sending row object `i`
/// to a blank; blanks are free to match with each other.
///
/// With `normalized = false` the padded `max(m, n)` square problem is solved
/// exactly; the plan's permutation indexes the padded matrix, where indices
/// `>= m` (rows) or `>= n` (columns) denote blanks. With `normalized = true`
/// the cost is the Wasserstein distance between the uniform distributions on
/// the two multisets, an empty side counting as one blank.
pub fn augmented_ot(c_core: &CostMatrix, row_norms: &[f64], col_norms: &[f64], normalized: bool) -> Result<TransportPlan> {
    let (m, n) = (c_core.rows(), c_core.cols());
    if row_norms.len() != m || col_norms.len() != n {
        return Err(Error::InvalidArgument(format!(
            "norm lengths ({}, {}) do not match a {m}x{n} core",
            row_norms.len(),
            col_norms.len()
        )));
    }
    if let Some(bad) = row_norms.iter().chain(col_norms).find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidCost(format!("blank cost {bad} is not a finite non-negative number")));
    }
    if !normalized {
        let k = m.max(n);
        if k == 0 {
            return Ok(TransportPlan {
                cost: 0.0,
                coupling: Coupling::Permutation(Vec::new()),
                normalized: false,
            });
        }
        let padded = CostMatrix::from_fn(k, k, |i, j| match (i < m, j < n) {
            (true, true) => c_core.get(i, j),
            (true, false) => row_norms[i],
            (false, true) => col_norms[j],
            (false, false) => 0.0,
        })?;
        return solve_assignment(&padded);
    }

    let (cost, flows) = match (m, n) {
        (0, 0) => (0.0, Vec::new()),
        (0, _) => (mean(col_norms), col_norms.iter().enumerate().map(|(j, _)| (0, j, 1.0 / n as f64)).collect()),
        (_, 0) => (mean(row_norms), row_norms.iter().enumerate().map(|(i, _)| (i, 0, 1.0 / m as f64)).collect()),
        _ => {
            let sol = transportation_simplex(
                c_core.matrix().as_slice(),
                m,
                n,
                &vec![n as f64; m],
                &vec![m as f64; n],
            );
            let scale = (m * n) as f64;
            let flows = sol.flows.into_iter().map(|(i, j, f)| (i, j, f / scale)).collect();
            (sol.cost / scale, flows)
        }
    };
    Ok(TransportPlan {
        cost,
        coupling: Coupling::Flow(flows),
        normalized: true,
    })
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Cost-only blank-augmented OT for the distance recursion.
///
/// The problem is put into a canonical orientation before solving (fewer
/// rows than columns, or for square problems the lexicographically smaller
/// of `C` and `Cᵀ` by bit pattern), so that swapping the two multisets
/// returns a bit-identical value.
#[derive(Debug, Default)]
pub(crate) struct BlankOt {
    assignment: AssignmentSolver,
    buffer: Vec<f64>,
    supply: Vec<f64>,
    demand: Vec<f64>,
}

impl BlankOt {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// `core` is `m × n` row-major.
    pub(crate) fn cost(&mut self, core: &[f64], m: usize, n: usize, row_norms: &[f64], col_norms: &[f64], mode: Mode) -> f64 {
        debug_assert_eq!(core.len(), m * n);
        let transpose = m > n || (m == n && transpose_is_smaller(core, n));
        // rows <= cols from here on, so blanks only ever pad the rows
        let (m, n, col_norms) = if transpose { (n, m, row_norms) } else { (m, n, col_norms) };
        let at = |i: usize, j: usize| if transpose { core[j * m + i] } else { core[i * n + j] };
        match mode {
            Mode::Sum => {
                if m == 0 {
                    return col_norms.iter().sum();
                }
                self.buffer.clear();
                for i in 0..n {
                    for j in 0..n {
                        self.buffer.push(if i < m { at(i, j) } else { col_norms[j] });
                    }
                }
                self.assignment.solve(&self.buffer, n)
            }
            Mode::Mean => {
                if m == 0 {
                    return if n == 0 { 0.0 } else { mean(col_norms) };
                }
                self.buffer.clear();
                for i in 0..m {
                    for j in 0..n {
                        self.buffer.push(at(i, j));
                    }
                }
                if m == n {
                    return self.assignment.solve(&self.buffer, n) / n as f64;
                }
                self.supply.clear();
                self.supply.resize(m, n as f64);
                self.demand.clear();
                self.demand.resize(n, m as f64);
                let sol = transportation_simplex(&self.buffer, m, n, &self.supply, &self.demand);
                sol.cost / (m * n) as f64
            }
        }
    }
}

/// Whether `Cᵀ` precedes `C` in row-major lexicographic order of bit patterns.
fn transpose_is_smaller(core: &[f64], n: usize) -> bool {
    for i in 0..n {
        for j in 0..n {
            let a = core[i * n + j];
            let b = core[j * n + i];
            match b.total_cmp(&a) {
                std::cmp::Ordering::Less => return true,
                std::cmp::Ordering::Greater => return false,
                std::cmp::Ordering::Equal => {}
            }
        }
    }
    false
}

/// Cost-only transport between uniform distributions of `m` and `n` points,
/// in canonical orientation.
pub(crate) fn uniform_transport_cost(core: &Matrix) -> f64 {
    let (m, n) = (core.rows(), core.cols());
    if m == 0 || n == 0 {
        return 0.0;
    }
    let transpose = m > n || (m == n && transpose_is_smaller(core.as_slice(), n));
    let owned;
    let (data, m, n) = if transpose {
        owned = core.transpose();
        (owned.as_slice(), n, m)
    } else {
        (core.as_slice(), m, n)
    };
    let sol = transportation_simplex(data, m, n, &vec![n as f64; m], &vec![m as f64; n]);
    sol.cost / (m * n) as f64
}
