//! Consumers of precomputed distance matrices: nearest-neighbor
//! classification, k-medoids clustering and partition agreement scores.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Majority label among the `k` nearest training points. Ties between labels
/// go to the smaller summed distance, then to the smaller label.
pub fn knn_classify(dist_to_query: &[f64], labels: &[i64], k: usize) -> Result<i64> {
    if dist_to_query.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if dist_to_query.len() != labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} distances for {} labels",
            dist_to_query.len(),
            labels.len()
        )));
    }
    if k == 0 || k > labels.len() {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={}", labels.len())));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| dist_to_query[a].total_cmp(&dist_to_query[b]).then(a.cmp(&b)));
    let mut votes: BTreeMap<i64, (usize, f64)> = BTreeMap::new();
    for &i in &order[..k] {
        let e = votes.entry(labels[i]).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += dist_to_query[i];
    }
    // BTreeMap iterates labels in increasing order, so strict comparisons keep the smallest label
    let mut best: Option<(i64, usize, f64)> = None;
    for (&label, &(count, total)) in &votes {
        let better = match best {
            None => true,
            Some((_, c, t)) => count > c || (count == c && total < t),
        };
        if better {
            best = Some((label, count, total));
        }
    }
    Ok(best.expect("k >= 1").0)
}

/// Leave-one-out k-NN predictions on a square distance matrix.
pub fn knn_leave_one_out(d: &Matrix, labels: &[i64], k: usize) -> Result<Vec<i64>> {
    let n = d.rows();
    if !d.is_square() || n != labels.len() {
        return Err(Error::InvalidArgument("leave-one-out needs a square matrix matching the labels".into()));
    }
    if n < 2 {
        return Err(Error::InvalidArgument("leave-one-out needs at least two points".into()));
    }
    (0..n)
        .map(|i| {
            let (dist, lab): (Vec<f64>, Vec<i64>) =
                (0..n).filter(|&j| j != i).map(|j| (d.get(i, j), labels[j])).unzip();
            knn_classify(&dist, &lab, k)
        })
        .collect()
}

pub fn accuracy(truth: &[i64], predicted: &[i64]) -> Result<f64> {
    check_lengths(truth, predicted)?;
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    /// Cluster index (position in `medoids`) of every point.
    pub assignment: Vec<usize>,
    /// Point index of each cluster's medoid.
    pub medoids: Vec<usize>,
    /// Total distance of points to their medoids.
    pub cost: f64,
    /// Cost after every assignment step.
    pub history: Vec<f64>,
    pub iterations: usize,
}

/// Alternating k-medoids on a square distance matrix.
///
/// Starts from a seeded random point and adds the farthest remaining point
/// until there are `k` medoids, then alternates nearest-medoid assignment and
/// per-cluster medoid updates until the medoids stop changing or `max_iter`
/// rounds have run.
pub fn kmedoids(d: &Matrix, k: usize, seed: u64, max_iter: usize) -> Result<Clustering> {
    let n = d.rows();
    if !d.is_square() {
        return Err(Error::InvalidArgument("k-medoids needs a square matrix".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} outside 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| d.get(i, medoids[0])).collect();
    while medoids.len() < k {
        let mut pick = None;
        for i in 0..n {
            if medoids.contains(&i) {
                continue;
            }
            if pick.is_none_or(|p: usize| nearest[i] > nearest[p]) {
                pick = Some(i);
            }
        }
        let p = pick.expect("k <= n");
        medoids.push(p);
        for i in 0..n {
            nearest[i] = nearest[i].min(d.get(i, p));
        }
    }

    let assign = |medoids: &[usize]| -> (Vec<usize>, f64) {
        let mut cost = 0.0;
        let assignment = (0..n)
            .map(|i| {
                if let Some(c) = medoids.iter().position(|&m| m == i) {
                    return c;
                }
                let mut best = 0;
                for c in 1..medoids.len() {
                    if d.get(i, medoids[c]) < d.get(i, medoids[best]) {
                        best = c;
                    }
                }
                best
            })
            .collect::<Vec<_>>();
        for (i, &c) in assignment.iter().enumerate() {
            cost += d.get(i, medoids[c]);
        }
        (assignment, cost)
    };

    let (mut assignment, mut cost) = assign(&medoids);
    let mut history = vec![cost];
    let mut iterations = 0;
    while iterations < max_iter {
        iterations += 1;
        let mut changed = false;
        for c in 0..k {
            let members: Vec<usize> = (0..n).filter(|&i| assignment[i] == c).collect();
            let within = |m: usize| members.iter().map(|&i| d.get(i, m)).sum::<f64>();
            let mut best = medoids[c];
            let mut best_cost = within(best);
            for &m in &members {
                let t = within(m);
                if t < best_cost {
                    best = m;
                    best_cost = t;
                }
            }
            if best != medoids[c] {
                medoids[c] = best;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let (a, c) = assign(&medoids);
        if c > cost {
            return Err(Error::InvalidArgument(format!(
                "k-medoids objective increased from {cost} to {c}; the matrix is probably not a distance matrix"
            )));
        }
        assignment = a;
        cost = c;
        history.push(cost);
    }
    Ok(Clustering {
        assignment,
        medoids,
        cost,
        history,
        iterations,
    })
}

fn check_lengths<A, B>(a: &[A], b: &[B]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!("lengths differ: {} vs {}", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("empty labeling".into()));
    }
    Ok(())
}

struct Contingency {
    n: f64,
    joint: BTreeMap<(i64, i64), f64>,
    rows: BTreeMap<i64, f64>,
    cols: BTreeMap<i64, f64>,
}

impl Contingency {
    fn new(a: &[i64], b: &[i64]) -> Self {
        let mut c = Contingency {
            n: a.len() as f64,
            joint: BTreeMap::new(),
            rows: BTreeMap::new(),
            cols: BTreeMap::new(),
        };
        for (&x, &y) in a.iter().zip(b) {
            *c.joint.entry((x, y)).or_default() += 1.0;
            *c.rows.entry(x).or_default() += 1.0;
            *c.cols.entry(y).or_default() += 1.0;
        }
        c
    }

    fn entropy(counts: &BTreeMap<i64, f64>, n: f64) -> f64 {
        -counts.values().map(|&c| (c / n) * (c / n).ln()).sum::<f64>()
    }

    fn mutual_information(&self) -> f64 {
        self.joint
            .iter()
            .map(|(&(x, y), &c)| (c / self.n) * (c * self.n / (self.rows[&x] * self.cols[&y])).ln())
            .sum::<f64>()
            .max(0.0)
    }
}

/// Mutual information normalized by the arithmetic mean of the two
/// entropies (natural logarithm). Two single-cluster partitions score 1.
pub fn nmi(labels_true: &[i64], labels_pred: &[i64]) -> Result<f64> {
    check_lengths(labels_true, labels_pred)?;
    let c = Contingency::new(labels_true, labels_pred);
    let ht = Contingency::entropy(&c.rows, c.n);
    let hp = Contingency::entropy(&c.cols, c.n);
    if ht == 0.0 && hp == 0.0 {
        return Ok(1.0);
    }
    Ok((c.mutual_information() / ((ht + hp) / 2.0)).clamp(0.0, 1.0))
}

/// `1 - H(pred | true) / H(pred)`; 1 when all points share one cluster.
pub fn completeness_score(labels_true: &[i64], labels_pred: &[i64]) -> Result<f64> {
    check_lengths(labels_true, labels_pred)?;
    let c = Contingency::new(labels_true, labels_pred);
    let hp = Contingency::entropy(&c.cols, c.n);
    if hp == 0.0 {
        return Ok(1.0);
    }
    // H(pred | true) = H(pred) - I(true; pred)
    let conditional = (hp - c.mutual_information()).max(0.0);
    Ok((1.0 - conditional / hp).clamp(0.0, 1.0))
}
