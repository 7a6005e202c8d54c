//! Dataset-level computations: pairwise distance matrices, kernel export,
//! Wasserstein-1 distance between datasets and distribution-shift reports.

use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GraphDataset;
use crate::matrix::Matrix;
use crate::ot::uniform_transport_cost;
use crate::tree::{tmd, TmdConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub values: Matrix,
    pub row_ids: Vec<String>,
    pub col_ids: Vec<String>,
    pub config: Option<TmdConfig>,
}

impl DistanceMatrix {
    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values.get(i, j)
    }

    pub fn is_square(&self) -> bool {
        self.values.is_square()
    }

    /// CSV text: a `# config:{json}` line, then one comma-separated row per
    /// line. Values use the shortest representation that reads back exactly.
    pub fn to_csv(&self) -> Result<String> {
        let header = CsvHeader {
            config: self.config.clone(),
            row_ids: self.row_ids.clone(),
            col_ids: self.col_ids.clone(),
        };
        let mut out = format!("# config:{}\n", serde_json::to_string(&header)?);
        for i in 0..self.rows() {
            let row: Vec<String> = self.values.row(i).iter().map(|x| x.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        Ok(out)
    }

    pub fn from_csv(text: &str, source: &str) -> Result<Self> {
        let mut header = None;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(json) = rest.trim_start().strip_prefix("config:") {
                    let h: CsvHeader =
                        serde_json::from_str(json).map_err(|e| Error::parse(source, idx + 1, format!("bad header: {e}")))?;
                    header = Some(h);
                }
                continue;
            }
            let row = line
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::parse(source, idx + 1, format!("bad number '{t}'"))))
                .collect::<Result<Vec<_>>>()?;
            if let Some(first) = rows.first() {
                if first.len() != row.len() {
                    return Err(Error::parse(source, idx + 1, "ragged row"));
                }
            }
            rows.push(row);
        }
        let values = Matrix::from_rows(&rows).ok_or_else(|| Error::parse(source, 0, "ragged matrix"))?;
        let (config, row_ids, col_ids) = match header {
            Some(h) => (h.config, h.row_ids, h.col_ids),
            None => (None, Vec::new(), Vec::new()),
        };
        let row_ids = if row_ids.is_empty() { (0..values.rows()).map(|i| i.to_string()).collect() } else { row_ids };
        let col_ids = if col_ids.is_empty() { (0..values.cols()).map(|i| i.to_string()).collect() } else { col_ids };
        if row_ids.len() != values.rows() || col_ids.len() != values.cols() {
            return Err(Error::parse(source, 1, "header ids do not match the matrix shape"));
        }
        Ok(DistanceMatrix {
            values,
            row_ids,
            col_ids,
            config,
        })
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()?).map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        DistanceMatrix::from_csv(&text, &path.display().to_string())
    }
}

#[derive(Serialize, Deserialize)]
struct CsvHeader {
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    config: Option<TmdConfig>,
    #[serde(default)]
    row_ids: Vec<String>,
    #[serde(default)]
    col_ids: Vec<String>,
}

fn run_in_pool<T: Send>(threads: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Err(Error::InvalidArgument("thread count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(job))
}

fn check_dims(a: &GraphDataset, b: &GraphDataset) -> Result<()> {
    if let (Some(x), Some(y)) = (a.dim(), b.dim()) {
        if x != y {
            return Err(Error::DimensionMismatch { expected: x, found: y });
        }
    }
    Ok(())
}

/// Distances between every graph of `ds_a` and every graph of `ds_b`, one
/// pair per task on `threads` workers. When both arguments are the same
/// dataset only the upper triangle is computed. The result does not depend
/// on the thread count.
pub fn pairwise_tmd(ds_a: &GraphDataset, ds_b: &GraphDataset, cfg: &TmdConfig, threads: usize) -> Result<DistanceMatrix> {
    cfg.validate()?;
    check_dims(ds_a, ds_b)?;
    let same = std::ptr::eq(ds_a, ds_b) || ds_a == ds_b;
    let (n, m) = (ds_a.len(), ds_b.len());
    let pairs: Vec<(usize, usize)> = if same {
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        (0..n).flat_map(|i| (0..m).map(move |j| (i, j))).collect()
    };
    let values: Vec<Result<f64>> = run_in_pool(threads, || {
        pairs
            .par_iter()
            .map(|&(i, j)| tmd(&ds_a.graphs[i], &ds_b.graphs[j], cfg))
            .collect()
    })?;
    let mut matrix = Matrix::zeros(n, m);
    for (&(i, j), v) in pairs.iter().zip(values) {
        let v = v?;
        matrix.set(i, j, v);
        if same {
            matrix.set(j, i, v);
        }
    }
    Ok(DistanceMatrix {
        values: matrix,
        row_ids: ds_a.ids(),
        col_ids: ds_b.ids(),
        config: Some(cfg.clone()),
    })
}

/// `K_ij = exp(-gamma · D_ij)`.
pub fn gram_matrix(d: &DistanceMatrix, gamma: f64) -> Result<Matrix> {
    if !d.is_square() {
        return Err(Error::InvalidArgument(format!("kernel needs a square matrix, got {}x{}", d.rows(), d.cols())));
    }
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::InvalidArgument(format!("gamma must be positive, got {gamma}")));
    }
    Ok(d.values.map(|x| (-gamma * x).exp()))
}

/// Wasserstein-1 distance between the uniform distributions over the graphs
/// of two datasets, with the tree mover's distance as ground cost.
pub fn dataset_w1(ds_a: &GraphDataset, ds_b: &GraphDataset, cfg: &TmdConfig, threads: usize) -> Result<f64> {
    require_nonempty(ds_a)?;
    require_nonempty(ds_b)?;
    Ok(w1_from_matrix(&pairwise_tmd(ds_a, ds_b, cfg, threads)?))
}

/// Uniform-marginal transport cost for a precomputed distance matrix.
pub fn w1_from_matrix(d: &DistanceMatrix) -> f64 {
    uniform_transport_cost(&d.values)
}

fn require_nonempty(ds: &GraphDataset) -> Result<()> {
    if ds.is_empty() {
        return Err(Error::InvalidArgument(format!("dataset '{}' is empty", ds.name)));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEntry {
    pub test: String,
    pub w1: f64,
    /// `2 K · W1` when a Lipschitz constant `K` was supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub risk_gap: Option<f64>,
    /// Rescaled `w1` for plotting; see [`ShiftReport::normalize_display`].
    #[serde(skip_serializing_if = "Option::is_none")]
    pub display: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub train: String,
    pub config: TmdConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz_product: Option<f64>,
    /// Sorted by increasing `w1`.
    pub entries: Vec<ShiftEntry>,
}

impl ShiftReport {
    /// Sets `display = w1 · target_max / max(w1)`; stored `w1` values are
    /// left untouched.
    pub fn normalize_display(&mut self, target_max: f64) {
        let max = self.entries.iter().map(|e| e.w1).fold(0.0, f64::max);
        for e in &mut self.entries {
            e.display = Some(if max > 0.0 { e.w1 * target_max / max } else { 0.0 });
        }
    }
}

/// W1 distance from `train` to each test set, ranked by distance.
pub fn shift_report(
    train: &GraphDataset,
    tests: &[GraphDataset],
    cfg: &TmdConfig,
    lipschitz_product: Option<f64>,
    threads: usize,
) -> Result<ShiftReport> {
    require_nonempty(train)?;
    if tests.is_empty() {
        return Err(Error::InvalidArgument("no test datasets".into()));
    }
    let mut entries = Vec::with_capacity(tests.len());
    for t in tests {
        require_nonempty(t)?;
        let w1 = dataset_w1(train, t, cfg, threads)?;
        entries.push(ShiftEntry {
            test: t.name.clone(),
            w1,
            risk_gap: lipschitz_product.map(|k| 2.0 * k * w1),
            display: None,
        });
    }
    entries.sort_by(|a, b| a.w1.total_cmp(&b.w1));
    Ok(ShiftReport {
        train: train.name.clone(),
        config: cfg.clone(),
        lipschitz_product,
        entries,
    })
}

/// Splits a dataset into `bins` contiguous groups of near-equal size after a
/// stable sort by node count. Bin names are `<name>-bin<k>`, `k` from 1.
pub fn size_bins(ds: &GraphDataset, bins: usize) -> Result<Vec<GraphDataset>> {
    if bins == 0 || bins > ds.len() {
        return Err(Error::InvalidArgument(format!("cannot split {} graphs into {bins} bins", ds.len())));
    }
    let mut order: Vec<usize> = (0..ds.len()).collect();
    order.sort_by_key(|&i| ds.graphs[i].node_count());
    let (base, extra) = (ds.len() / bins, ds.len() % bins);
    let mut start = 0;
    (0..bins)
        .map(|b| {
            let size = base + usize::from(b < extra);
            let idx = &order[start..start + size];
            start += size;
            ds.subset(format!("{}-bin{}", ds.name, b + 1), idx)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_graph;
    use crate::ot::Mode;
    use crate::tree::WeightSchedule;

    fn cfg() -> TmdConfig {
        TmdConfig::new(3, WeightSchedule::constant(0.5).unwrap(), Mode::Sum).unwrap()
    }

    fn dataset(name: &str, n: usize, seed: u64) -> GraphDataset {
        let graphs = (0..n).map(|i| random_graph(3 + i % 4, 0.5, 2, seed + i as u64).unwrap()).collect();
        GraphDataset::new(name, graphs, None).unwrap()
    }

    #[test]
    fn self_matrix_is_symmetric_with_zero_diagonal() {
        let ds = dataset("a", 6, 1);
        let d = pairwise_tmd(&ds, &ds, &cfg(), 2).unwrap();
        for i in 0..6 {
            assert_eq!(d.get(i, i), 0.0);
            for j in 0..6 {
                assert_eq!(d.get(i, j), d.get(j, i));
                assert!(d.get(i, j) >= 0.0);
            }
        }
        assert_eq!(d.row_ids[0], "a:0");
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (a, b) = (dataset("a", 5, 1), dataset("b", 4, 9));
        let one = pairwise_tmd(&a, &b, &cfg(), 1).unwrap();
        let many = pairwise_tmd(&a, &b, &cfg(), 8).unwrap();
        assert_eq!(one.to_csv().unwrap(), many.to_csv().unwrap());
        assert!(pairwise_tmd(&a, &b, &cfg(), 0).is_err());
    }

    #[test]
    fn singleton_datasets() {
        let (a, b) = (dataset("a", 1, 3), dataset("b", 1, 4));
        let d = pairwise_tmd(&a, &b, &cfg(), 1).unwrap();
        let direct = tmd(&a.graphs[0], &b.graphs[0], &cfg()).unwrap();
        assert_eq!(d.get(0, 0), direct);
        assert_eq!(dataset_w1(&a, &b, &cfg(), 1).unwrap(), direct);
    }

    #[test]
    fn csv_round_trip() {
        let ds = dataset("a", 4, 2);
        let d = pairwise_tmd(&ds, &ds, &cfg(), 1).unwrap();
        let text = d.to_csv().unwrap();
        assert!(text.starts_with("# config:{"));
        assert_eq!(DistanceMatrix::from_csv(&text, "mem").unwrap(), d);

        let bare = DistanceMatrix::from_csv("0,1.5\n1.5,0\n", "mem").unwrap();
        assert_eq!(bare.config, None);
        assert_eq!(bare.get(0, 1), 1.5);
        assert!(DistanceMatrix::from_csv("0,1\n1\n", "mem").is_err());
        assert!(DistanceMatrix::from_csv("0,x\n", "mem").is_err());
    }

    #[test]
    fn gram_examples() {
        let zero = DistanceMatrix::from_csv("0,0\n0,0\n", "mem").unwrap();
        assert_eq!(gram_matrix(&zero, 1.0).unwrap().as_slice(), &[1.0; 4]);
        let d = DistanceMatrix::from_csv("0,10\n10,0\n", "mem").unwrap();
        let k = gram_matrix(&d, 0.1).unwrap();
        assert!((k.get(0, 1) - (-1f64).exp()).abs() < 1e-15);
        let k2 = gram_matrix(&d, 0.2).unwrap();
        assert!((k2.get(0, 1) - k.get(0, 1).powi(2)).abs() < 1e-15);
        assert_eq!(k.get(0, 0), 1.0);
        let rect = DistanceMatrix::from_csv("0,1\n", "mem").unwrap();
        assert!(gram_matrix(&rect, 1.0).is_err());
    }

    #[test]
    fn w1_identity_and_symmetry() {
        let (a, b) = (dataset("a", 3, 1), dataset("b", 5, 20));
        assert_eq!(dataset_w1(&a, &a, &cfg(), 1).unwrap(), 0.0);
        let ab = dataset_w1(&a, &b, &cfg(), 1).unwrap();
        let ba = dataset_w1(&b, &a, &cfg(), 1).unwrap();
        assert_eq!(ab.to_bits(), ba.to_bits());
    }

    #[test]
    fn shift_report_ranks_by_distance() {
        let train = dataset("train", 4, 1);
        let far = GraphDataset::new("far", (0..3).map(|i| random_graph(9, 0.8, 2, 50 + i).unwrap()).collect(), None).unwrap();
        let report = shift_report(&train, &[far, train.clone()], &cfg(), Some(2.0), 1).unwrap();
        assert_eq!(report.entries[0].test, "train");
        assert_eq!(report.entries[0].w1, 0.0);
        assert_eq!(report.entries[0].risk_gap, Some(0.0));
        assert_eq!(report.entries[1].risk_gap, Some(4.0 * report.entries[1].w1));
        let mut shown = report.clone();
        shown.normalize_display(10.0);
        assert_eq!(shown.entries[1].display, Some(10.0));
        assert_eq!(shown.entries[1].w1, report.entries[1].w1);
    }

    #[test]
    fn bins_are_sorted_by_size() {
        let ds = dataset("d", 10, 5);
        let bins = size_bins(&ds, 3).unwrap();
        assert_eq!(bins.iter().map(GraphDataset::len).collect::<Vec<_>>(), vec![4, 3, 3]);
        let max_first = bins[0].graphs.iter().map(|g| g.node_count()).max().unwrap();
        let min_last = bins[2].graphs.iter().map(|g| g.node_count()).min().unwrap();
        assert!(max_first <= min_last);
        assert!(size_bins(&ds, 11).is_err());
    }
}
