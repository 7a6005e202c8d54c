use std::path::PathBuf;

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use tmd_core::analysis::{gram_matrix, pairwise_tmd, shift_report, size_bins, DistanceMatrix};
use tmd_core::gnn::{empirical_lipschitz, gin_forward, lipschitz_check, pearson_r, random_gin, GinModel, LipschitzCheck};
use tmd_core::learn::{accuracy, completeness_score, kmedoids, knn_classify, knn_leave_one_out, nmi};
use tmd_core::perturb::{sample_edit, Edit, PerturbationReport};
use tmd_core::tree::{tmd, wl_first_difference};
use tmd_core::{GraphDataset, Mode, TmdConfig};

use crate::inputs::{emit, emit_json, load_dataset, load_graph, load_model, parse_mode, CliResult, DataArgs, Failure, TmdArgs};

#[derive(Args, Debug)]
pub struct DistArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Second dataset (directory or JSON); rows stay the first dataset
    #[arg(long)]
    pub data_b: Option<PathBuf>,
    /// Dataset name inside --data-b (defaults to --name)
    #[arg(long)]
    pub name_b: Option<String>,
    #[command(flatten)]
    pub tmd: TmdArgs,
    /// Worker threads
    #[arg(long, env = "TMD_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn dist(args: &DistArgs) -> CliResult<()> {
    let cfg = args.tmd.config()?;
    let a = args.data.load()?;
    let d = match &args.data_b {
        Some(path) => {
            let b = load_dataset(path, args.name_b.as_deref().or(args.data.name.as_deref()), args.data.standardize)?;
            pairwise_tmd(&a, &b, &cfg, args.threads)?
        }
        None => pairwise_tmd(&a, &a, &cfg, args.threads)?,
    };
    emit(args.out.as_deref(), &d.to_csv()?)
}

#[derive(Args, Debug)]
pub struct GramArgs {
    /// Distance matrix CSV written by `dist`
    #[arg(long)]
    pub matrix: PathBuf,
    /// Kernel bandwidth in exp(-gamma * d)
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn gram(args: &GramArgs) -> CliResult<()> {
    let d = DistanceMatrix::read_csv(&args.matrix)?;
    let k = DistanceMatrix {
        values: gram_matrix(&d, args.gamma)?,
        ..d
    };
    let text = format!("# gamma:{}\n{}", args.gamma, k.to_csv()?);
    emit(args.out.as_deref(), &text)
}

/// Matrix source shared by `knn` and `cluster`: a precomputed CSV or a
/// fresh computation on the loaded dataset.
#[derive(Args, Debug)]
pub struct MatrixSource {
    /// Precomputed distance matrix CSV; computed from --data when absent
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[command(flatten)]
    pub tmd: TmdArgs,
    #[arg(long, env = "TMD_THREADS", default_value_t = 1)]
    pub threads: usize,
}

impl MatrixSource {
    fn resolve(&self, rows: &GraphDataset, cols: &GraphDataset) -> CliResult<DistanceMatrix> {
        match &self.matrix {
            Some(path) => {
                let d = DistanceMatrix::read_csv(path)?;
                if d.rows() != rows.len() || d.cols() != cols.len() {
                    return Err(Failure::Config(format!(
                        "matrix is {}x{} but the datasets have {} and {} graphs",
                        d.rows(),
                        d.cols(),
                        rows.len(),
                        cols.len()
                    )));
                }
                Ok(d)
            }
            None => Ok(pairwise_tmd(rows, cols, &self.tmd.config()?, self.threads)?),
        }
    }
}

#[derive(Args, Debug)]
pub struct KnnArgs {
    /// Labeled training dataset
    #[command(flatten)]
    pub data: DataArgs,
    /// Test dataset; leave-one-out on --data when absent
    #[arg(long)]
    pub data_b: Option<PathBuf>,
    #[arg(long)]
    pub name_b: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[command(flatten)]
    pub source: MatrixSource,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct Prediction {
    id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<i64>,
    predicted: i64,
}

#[derive(Serialize)]
struct KnnReport {
    command: &'static str,
    config: Option<TmdConfig>,
    protocol: &'static str,
    k: usize,
    n_train: usize,
    n_test: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    accuracy: Option<f64>,
    /// Frequency of the most common training label.
    majority_rate: f64,
    predictions: Vec<Prediction>,
}

fn majority_rate(labels: &[i64]) -> f64 {
    let mut counts = std::collections::BTreeMap::new();
    for l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts.values().max().copied().unwrap_or(0) as f64 / labels.len().max(1) as f64
}

fn labels_of(ds: &GraphDataset) -> CliResult<&[i64]> {
    ds.labels
        .as_deref()
        .ok_or_else(|| Failure::Config(format!("dataset '{}' has no graph labels", ds.name)))
}

pub fn knn(args: &KnnArgs) -> CliResult<()> {
    let train = args.data.load()?;
    let train_labels = labels_of(&train)?;
    let report = match &args.data_b {
        None => {
            let d = args.source.resolve(&train, &train)?;
            let predicted = knn_leave_one_out(&d.values, train_labels, args.k)?;
            KnnReport {
                command: "knn",
                config: d.config.clone(),
                protocol: "leave-one-out",
                k: args.k,
                n_train: train.len(),
                n_test: train.len(),
                accuracy: Some(accuracy(train_labels, &predicted)?),
                majority_rate: majority_rate(train_labels),
                predictions: d
                    .row_ids
                    .iter()
                    .zip(train_labels)
                    .zip(&predicted)
                    .map(|((id, &l), &p)| Prediction {
                        id: id.clone(),
                        label: Some(l),
                        predicted: p,
                    })
                    .collect(),
            }
        }
        Some(path) => {
            let test = load_dataset(path, args.name_b.as_deref().or(args.data.name.as_deref()), args.data.standardize)?;
            let d = args.source.resolve(&test, &train)?;
            let predicted = (0..test.len())
                .map(|i| knn_classify(d.values.row(i), train_labels, args.k))
                .collect::<Result<Vec<_>, _>>()?;
            let acc = match &test.labels {
                Some(l) => Some(accuracy(l, &predicted)?),
                None => None,
            };
            KnnReport {
                command: "knn",
                config: d.config.clone(),
                protocol: "train-test",
                k: args.k,
                n_train: train.len(),
                n_test: test.len(),
                accuracy: acc,
                majority_rate: majority_rate(train_labels),
                predictions: d
                    .row_ids
                    .iter()
                    .enumerate()
                    .map(|(i, id)| Prediction {
                        id: id.clone(),
                        label: test.labels.as_ref().map(|l| l[i]),
                        predicted: predicted[i],
                    })
                    .collect(),
            }
        }
    };
    emit_json(args.out.as_deref(), &report)
}

#[derive(Args, Debug)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Number of clusters
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[command(flatten)]
    pub source: MatrixSource,
    /// CSV of `graph_id,cluster_id` rows
    #[arg(long)]
    pub assignments: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ClusterReport {
    command: &'static str,
    config: Option<TmdConfig>,
    k: usize,
    seed: u64,
    max_iter: usize,
    cost: f64,
    iterations: usize,
    history: Vec<f64>,
    medoids: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    nmi: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    completeness: Option<f64>,
}

pub fn cluster(args: &ClusterArgs) -> CliResult<()> {
    let ds = args.data.load()?;
    let d = args.source.resolve(&ds, &ds)?;
    let c = kmedoids(&d.values, args.k, args.seed, args.max_iter)?;
    let pred: Vec<i64> = c.assignment.iter().map(|&a| a as i64).collect();
    let (nmi_score, completeness) = match &ds.labels {
        Some(l) => (Some(nmi(l, &pred)?), Some(completeness_score(l, &pred)?)),
        None => (None, None),
    };
    if let Some(path) = &args.assignments {
        let mut csv = String::from("graph_id,cluster_id\n");
        for (id, a) in d.row_ids.iter().zip(&c.assignment) {
            csv.push_str(&format!("{id},{a}\n"));
        }
        emit(Some(path), &csv)?;
    }
    let report = ClusterReport {
        command: "cluster",
        config: d.config.clone(),
        k: args.k,
        seed: args.seed,
        max_iter: args.max_iter,
        cost: c.cost,
        iterations: c.iterations,
        history: c.history,
        medoids: c.medoids.iter().map(|&m| d.row_ids[m].clone()).collect(),
        nmi: nmi_score,
        completeness,
    };
    emit_json(args.out.as_deref(), &report)
}

#[derive(Args, Debug)]
pub struct ShiftArgs {
    /// Training dataset
    #[command(flatten)]
    pub data: DataArgs,
    /// Test set: a JSON dataset file or a dataset name inside the --data directory (repeatable)
    #[arg(long = "test")]
    pub tests: Vec<String>,
    /// Split --data by graph size; the smallest bin trains, the others are tests
    #[arg(long, conflicts_with = "tests")]
    pub bins: Option<usize>,
    /// Lipschitz constant of the model; adds 2·K·W1 risk gaps
    #[arg(long)]
    pub lipschitz: Option<f64>,
    /// Rescale the largest distance to this value in a `display` column
    #[arg(long)]
    pub display_max: Option<f64>,
    #[command(flatten)]
    pub tmd: TmdArgs,
    #[arg(long, env = "TMD_THREADS", default_value_t = 1)]
    pub threads: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn shift(args: &ShiftArgs) -> CliResult<()> {
    let cfg = args.tmd.config()?;
    let full = args.data.load()?;
    let (train, tests) = match args.bins {
        Some(b) => {
            let mut bins = size_bins(&full, b)?;
            let train = bins.remove(0);
            (train, bins)
        }
        None => {
            if args.tests.is_empty() {
                return Err(Failure::Parse("give at least one --test or --bins".into()));
            }
            let tests = args
                .tests
                .iter()
                .map(|t| {
                    let as_path = PathBuf::from(t);
                    if as_path.is_file() {
                        load_dataset(&as_path, None, args.data.standardize)
                    } else {
                        load_dataset(&args.data.data, Some(t), args.data.standardize)
                    }
                })
                .collect::<CliResult<Vec<_>>>()?;
            (full, tests)
        }
    };
    let mut report = shift_report(&train, &tests, &cfg, args.lipschitz, args.threads)?;
    if let Some(m) = args.display_max {
        report.normalize_display(m);
    }
    emit_json(args.out.as_deref(), &report)
}

#[derive(Args, Debug)]
pub struct LipschitzArgs {
    /// Model JSON; a seeded random model is used when absent
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Hidden width of the random model
    #[arg(long, default_value_t = 16)]
    pub hidden: usize,
    /// Message passing layers of the random model
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// Aggregation of the random model
    #[arg(long, default_value = "sum", value_parser = parse_mode)]
    pub aggregation: Mode,
    #[arg(long)]
    pub graph_a: Option<PathBuf>,
    #[arg(long)]
    pub graph_b: Option<PathBuf>,
    /// Dataset to sample graph pairs from instead of --graph-a/--graph-b
    #[arg(long, conflicts_with_all = ["graph_a", "graph_b"])]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    /// Number of sampled pairs with --data
    #[arg(long, default_value_t = 100)]
    pub pairs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct ModelSummary {
    layers: usize,
    epsilon: f64,
    aggregation: Mode,
    lipschitz: Vec<f64>,
    lipschitz_product: f64,
}

#[derive(Serialize)]
struct PairReport {
    command: &'static str,
    config: TmdConfig,
    model: ModelSummary,
    #[serde(flatten)]
    check: LipschitzCheck,
}

#[derive(Serialize)]
struct SampledPair {
    a: String,
    b: String,
    #[serde(flatten)]
    check: LipschitzCheck,
}

#[derive(Serialize)]
struct DatasetReport {
    command: &'static str,
    config: TmdConfig,
    model: ModelSummary,
    seed: u64,
    all_hold: bool,
    /// Largest `lhs / tmd` over the sampled pairs.
    empirical_lipschitz: Option<f64>,
    /// Correlation between output distance and tree mover's distance.
    pearson_r: Option<f64>,
    pairs: Vec<SampledPair>,
}

pub fn lipschitz(args: &LipschitzArgs) -> CliResult<()> {
    let (model, pair) = match (&args.graph_a, &args.graph_b, &args.data) {
        (Some(a), Some(b), None) => {
            let (ga, gb) = (load_graph(a)?, load_graph(b)?);
            (build_model(args, ga.dim())?, Some((ga, gb)))
        }
        (None, None, Some(path)) => {
            let ds = load_dataset(path, args.name.as_deref(), false)?;
            let dim = ds.dim().ok_or_else(|| Failure::Config("dataset has no graphs".into()))?;
            let model = build_model(args, dim)?;
            return lipschitz_dataset(args, &model, &ds);
        }
        _ => return Err(Failure::Parse("give --graph-a and --graph-b, or --data".into())),
    };
    let (ga, gb) = pair.expect("pair mode");
    let report = PairReport {
        command: "lipschitz",
        config: model.bound_config()?,
        model: summary(&model),
        check: lipschitz_check(&model, &ga, &gb)?,
    };
    emit_json(args.out.as_deref(), &report)
}

fn build_model(args: &LipschitzArgs, dim: usize) -> CliResult<GinModel> {
    let model = match &args.model {
        Some(path) => load_model(path)?,
        None => random_gin(dim, args.hidden, args.layers, args.seed, args.aggregation)?,
    };
    if model.input_dim() != dim {
        return Err(Failure::Config(format!(
            "model expects {}-dimensional features, graphs have {dim}",
            model.input_dim()
        )));
    }
    Ok(model)
}

fn summary(m: &GinModel) -> ModelSummary {
    ModelSummary {
        layers: m.depth(),
        epsilon: m.epsilon(),
        aggregation: m.aggregation(),
        lipschitz: m.lipschitz().to_vec(),
        lipschitz_product: m.lipschitz_product(),
    }
}

fn lipschitz_dataset(args: &LipschitzArgs, model: &GinModel, ds: &GraphDataset) -> CliResult<()> {
    if ds.len() < 2 {
        return Err(Failure::Config("need at least two graphs to sample pairs".into()));
    }
    let ids = ds.ids();
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut pairs = Vec::with_capacity(args.pairs);
    for _ in 0..args.pairs {
        let i = rng.gen_range(0..ds.len());
        let mut j = rng.gen_range(0..ds.len() - 1);
        if j >= i {
            j += 1;
        }
        pairs.push(SampledPair {
            a: ids[i].clone(),
            b: ids[j].clone(),
            check: lipschitz_check(model, &ds.graphs[i], &ds.graphs[j])?,
        });
    }
    let lhs: Vec<f64> = pairs.iter().map(|p| p.check.lhs).collect();
    let dist: Vec<f64> = pairs.iter().map(|p| p.check.tmd).collect();
    let report = DatasetReport {
        command: "lipschitz",
        config: model.bound_config()?,
        model: summary(model),
        seed: args.seed,
        all_hold: pairs.iter().all(|p| p.check.holds),
        empirical_lipschitz: empirical_lipschitz(&lhs, &dist).ok(),
        pearson_r: pearson_r(&lhs, &dist).ok(),
        pairs,
    };
    emit_json(args.out.as_deref(), &report)
}

#[derive(Args, Debug)]
pub struct PerturbArgs {
    /// Graph JSON to perturb
    #[arg(long, conflicts_with = "data")]
    pub graph: Option<PathBuf>,
    /// Dataset holding the graph, with --index
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub index: usize,
    /// A single edit as JSON, e.g. {"edit":"drop_node","node":0}
    #[arg(long, conflicts_with = "trials")]
    pub edit: Option<String>,
    /// Number of random single edits
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Half-width of the uniform feature noise of random edits
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
    /// Model JSON; adds the output change of each edit to the report
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub tmd: TmdArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct EditOutcome {
    edit: Edit,
    #[serde(flatten)]
    report: PerturbationReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    output_change: Option<f64>,
}

#[derive(Serialize)]
struct PerturbReport {
    command: &'static str,
    config: TmdConfig,
    seed: u64,
    scale: f64,
    edits: Vec<EditOutcome>,
}

pub fn perturb(args: &PerturbArgs) -> CliResult<()> {
    let cfg = args.tmd.config()?;
    let g = match (&args.graph, &args.data) {
        (Some(path), None) => load_graph(path)?,
        (None, Some(path)) => {
            let ds = load_dataset(path, args.name.as_deref(), false)?;
            ds.graphs
                .get(args.index)
                .cloned()
                .ok_or_else(|| Failure::Config(format!("index {} out of range for {} graphs", args.index, ds.len())))?
        }
        _ => return Err(Failure::Parse("give --graph or --data".into())),
    };
    let model = args.model.as_deref().map(load_model).transpose()?;
    let edits = match &args.edit {
        Some(json) => vec![serde_json::from_str::<Edit>(json).map_err(|e| Failure::Parse(format!("bad --edit: {e}")))?],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
            (0..args.trials)
                .map(|_| sample_edit(&g, &mut rng, args.scale))
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Failure::Config("cannot perturb an empty graph".into()))?
        }
    };
    let mut outcomes = Vec::with_capacity(edits.len());
    for edit in edits {
        let report = edit.bound(&g, &cfg)?;
        let output_change = match &model {
            Some(m) => {
                let (h0, h1) = (gin_forward(m, &g)?, gin_forward(m, &edit.apply(&g)?)?);
                Some(h0.iter().zip(&h1).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt())
            }
            None => None,
        };
        outcomes.push(EditOutcome {
            edit,
            report,
            output_change,
        });
    }
    let report = PerturbReport {
        command: "perturb",
        config: cfg,
        seed: args.seed,
        scale: args.scale,
        edits: outcomes,
    };
    emit_json(args.out.as_deref(), &report)
}

#[derive(Args, Debug)]
pub struct WlArgs {
    #[arg(long)]
    pub graph_a: PathBuf,
    #[arg(long)]
    pub graph_b: PathBuf,
    /// Refinement rounds
    #[arg(long, default_value_t = 3)]
    pub iterations: usize,
    /// Also report the sum-mode distance at depth iterations+1 under this schedule
    #[arg(long)]
    pub weights: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct WlReport {
    command: &'static str,
    iterations: usize,
    distinguishable: bool,
    /// First round at which the color histograms differ.
    iteration: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<TmdConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tmd: Option<f64>,
}

pub fn wl(args: &WlArgs) -> CliResult<()> {
    let (ga, gb) = (load_graph(&args.graph_a)?, load_graph(&args.graph_b)?);
    let iteration = wl_first_difference(&ga, &gb, args.iterations);
    let (config, distance) = match &args.weights {
        Some(w) => {
            let cfg = TmdConfig::new(args.iterations + 1, w.parse()?, Mode::Sum)?;
            let d = tmd(&ga, &gb, &cfg)?;
            (Some(cfg), Some(d))
        }
        None => (None, None),
    };
    let report = WlReport {
        command: "wl",
        iterations: args.iterations,
        distinguishable: iteration.is_some(),
        iteration,
        config,
        tmd: distance,
    };
    emit_json(args.out.as_deref(), &report)
}
