//! Message-passing networks with computable Lipschitz constants.
//!
//! Layer `l` maps node states as
//! `z_v <- relu(W_l (z_v + ε · AGG_{u ∈ N(v)} z_u) + b_l)`, where AGG is a sum
//! or a mean; the readout is `h = W_r · AGG_{v ∈ V} z_v + b_r`. Optionally the
//! neighbor term `ε · AGG` is replaced by a linear map `M_l · AGG`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::AttributedGraph;
use crate::ot::Mode;
use crate::tree::{tmd, TmdConfig, WeightSchedule};

/// Affine map `x -> W x + b` with `W` stored as rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseLayer {
    pub weight: Vec<Vec<f64>>,
    #[serde(default)]
    pub bias: Vec<f64>,
}

impl DenseLayer {
    pub fn new(weight: Vec<Vec<f64>>, bias: Vec<f64>) -> Result<Self> {
        let layer = DenseLayer { weight, bias };
        layer.validate()?;
        Ok(layer)
    }

    /// Linear map without bias.
    pub fn linear(weight: Vec<Vec<f64>>) -> Result<Self> {
        let out = weight.len();
        DenseLayer::new(weight, vec![0.0; out])
    }

    fn validate(&self) -> Result<()> {
        let cols = self.input_dim();
        if self.weight.is_empty() || cols == 0 {
            return Err(Error::Config("layer weight must be a non-empty matrix".into()));
        }
        if self.weight.iter().any(|r| r.len() != cols) {
            return Err(Error::Config("layer weight rows have different lengths".into()));
        }
        if self.bias.len() != self.weight.len() {
            return Err(Error::Config(format!(
                "bias has {} entries for {} outputs",
                self.bias.len(),
                self.weight.len()
            )));
        }
        if self.weight.iter().flatten().chain(&self.bias).any(|x| !x.is_finite()) {
            return Err(Error::Config("layer parameters must be finite".into()));
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.weight.first().map_or(0, Vec::len)
    }

    pub fn output_dim(&self) -> usize {
        self.weight.len()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.weight
            .iter()
            .zip(&self.bias)
            .map(|(row, b)| row.iter().zip(x).map(|(w, x)| w * x).sum::<f64>() + b)
            .collect()
    }

    fn apply_linear(&self, x: &[f64]) -> Vec<f64> {
        self.weight.iter().map(|row| row.iter().zip(x).map(|(w, x)| w * x).sum()).collect()
    }

    /// Largest singular value of the weight matrix.
    pub fn spectral_norm(&self) -> f64 {
        spectral_norm(&self.weight)
    }

    fn random<R: Rng>(rng: &mut R, input: usize, output: usize, with_bias: bool) -> Self {
        let weight = (0..output).map(|_| (0..input).map(|_| rng.gen_range(-1.0..=1.0)).collect()).collect();
        let bias = (0..output).map(|_| if with_bias { rng.gen_range(-1.0..=1.0) } else { 0.0 }).collect();
        DenseLayer { weight, bias }
    }
}

/// Largest singular value of a dense matrix by power iteration on `WᵀW`:
/// at least 50 iterations, then until the eigen-residual drops below
/// `1e-10 · σ²` (or 10 000 iterations).
pub fn spectral_norm(weight: &[Vec<f64>]) -> f64 {
    let cols = weight.first().map_or(0, Vec::len);
    if cols == 0 {
        return 0.0;
    }
    let gram = |v: &[f64]| -> Vec<f64> {
        let wv: Vec<f64> = weight.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect();
        (0..cols).map(|j| weight.iter().zip(&wv).map(|(r, y)| r[j] * y).sum()).collect()
    };
    let unit = |v: Vec<f64>| -> Option<Vec<f64>> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (n > 0.0).then(|| v.into_iter().map(|x| x / n).collect())
    };
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let Some(mut v) = unit((0..cols).map(|_| rng.gen_range(0.5..1.5)).collect()) else {
        return 0.0;
    };
    let mut lambda = 0.0;
    for iter in 0..10_000 {
        let g = gram(&v);
        lambda = v.iter().zip(&g).map(|(a, b)| a * b).sum::<f64>();
        let residual = g.iter().zip(&v).map(|(a, b)| (a - lambda * b).powi(2)).sum::<f64>().sqrt();
        if iter >= 50 && residual <= 1e-10 * lambda.abs().max(f64::MIN_POSITIVE) {
            break;
        }
        match unit(g) {
            Some(next) => v = next,
            None => return 0.0,
        }
    }
    lambda.max(0.0).sqrt()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelRepr {
    #[serde(default = "default_epsilon")]
    epsilon: f64,
    #[serde(default = "default_aggregation")]
    aggregation: Mode,
    layers: Vec<DenseLayer>,
    readout: DenseLayer,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    neighbor_maps: Option<Vec<DenseLayer>>,
}

fn default_epsilon() -> f64 {
    1.0
}

fn default_aggregation() -> Mode {
    Mode::Sum
}

/// Message-passing network with per-layer Lipschitz constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ModelRepr", into = "ModelRepr")]
pub struct GinModel {
    epsilon: f64,
    aggregation: Mode,
    layers: Vec<DenseLayer>,
    readout: DenseLayer,
    neighbor_maps: Option<Vec<DenseLayer>>,
    lipschitz: Vec<f64>,
    neighbor_lipschitz: Option<Vec<f64>>,
}

impl TryFrom<ModelRepr> for GinModel {
    type Error = Error;

    fn try_from(r: ModelRepr) -> Result<Self> {
        // an omitted bias means zero
        fn fill(mut l: DenseLayer) -> DenseLayer {
            if l.bias.is_empty() {
                l.bias = vec![0.0; l.weight.len()];
            }
            l
        }
        let layers = r.layers.into_iter().map(fill).collect();
        let maps = r.neighbor_maps.map(|m| m.into_iter().map(fill).collect());
        GinModel::new(layers, fill(r.readout), r.epsilon, r.aggregation, maps)
    }
}

impl From<GinModel> for ModelRepr {
    fn from(m: GinModel) -> Self {
        ModelRepr {
            epsilon: m.epsilon,
            aggregation: m.aggregation,
            layers: m.layers,
            readout: m.readout,
            neighbor_maps: m.neighbor_maps,
        }
    }
}

impl GinModel {
    pub fn new(
        layers: Vec<DenseLayer>,
        readout: DenseLayer,
        epsilon: f64,
        aggregation: Mode,
        neighbor_maps: Option<Vec<DenseLayer>>,
    ) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Config("model needs at least one message-passing layer".into()));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {epsilon}")));
        }
        for l in layers.iter().chain([&readout]) {
            l.validate()?;
        }
        for w in layers.windows(2) {
            if w[0].output_dim() != w[1].input_dim() {
                return Err(Error::Config(format!(
                    "layer output dimension {} does not match next input dimension {}",
                    w[0].output_dim(),
                    w[1].input_dim()
                )));
            }
        }
        let hidden = layers.last().map(DenseLayer::output_dim).unwrap_or(0);
        if readout.input_dim() != hidden {
            return Err(Error::Config(format!(
                "readout expects dimension {}, last layer produces {hidden}",
                readout.input_dim()
            )));
        }
        if let Some(maps) = &neighbor_maps {
            if maps.len() != layers.len() {
                return Err(Error::Config("one neighbor map per layer is required".into()));
            }
            for (m, l) in maps.iter().zip(&layers) {
                m.validate()?;
                if m.input_dim() != l.input_dim() || m.output_dim() != l.input_dim() {
                    return Err(Error::Config("neighbor maps must be square on the layer input".into()));
                }
                if m.bias.iter().any(|&b| b != 0.0) {
                    return Err(Error::Config("neighbor maps must be linear (zero bias)".into()));
                }
            }
        }
        let lipschitz = layers.iter().chain([&readout]).map(DenseLayer::spectral_norm).collect();
        let neighbor_lipschitz = neighbor_maps.as_ref().map(|m| m.iter().map(DenseLayer::spectral_norm).collect());
        Ok(GinModel {
            epsilon,
            aggregation,
            layers,
            readout,
            neighbor_maps,
            lipschitz,
            neighbor_lipschitz,
        })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn aggregation(&self) -> Mode {
        self.aggregation
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].input_dim()
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn readout(&self) -> &DenseLayer {
        &self.readout
    }

    /// Spectral norms of the `L` layers followed by the readout.
    pub fn lipschitz(&self) -> &[f64] {
        &self.lipschitz
    }

    pub fn neighbor_lipschitz(&self) -> Option<&[f64]> {
        self.neighbor_lipschitz.as_deref()
    }

    pub fn lipschitz_product(&self) -> f64 {
        self.lipschitz.iter().product()
    }

    /// Whether every hidden layer maps zero to zero.
    pub fn hidden_bias_free(&self) -> bool {
        self.layers.iter().all(|l| l.bias.iter().all(|&b| b == 0.0))
    }

    /// Weight schedule under which `‖h(G_a) - h(G_b)‖ <= Π K · TMD^{L+1}`.
    pub fn bound_schedule(&self) -> Result<WeightSchedule> {
        match &self.neighbor_lipschitz {
            Some(k) => WeightSchedule::layerwise(k.iter().map(|&x| x.max(f64::MIN_POSITIVE)).collect()),
            None => WeightSchedule::pascal(self.depth(), self.epsilon),
        }
    }

    /// Distance configuration matching [`GinModel::bound_schedule`].
    pub fn bound_config(&self) -> Result<TmdConfig> {
        TmdConfig::new(self.depth() + 1, self.bound_schedule()?, self.aggregation)
    }
}

/// Random model with weights uniform on `[-1, 1]`, zero hidden biases and a
/// random readout bias. Output dimension equals the hidden dimension.
pub fn random_gin(p: usize, d: usize, layers: usize, seed: u64, aggregation: Mode) -> Result<GinModel> {
    random_gin_with_output(p, d, d, layers, seed, aggregation)
}

pub fn random_gin_with_output(p: usize, d: usize, d_out: usize, layers: usize, seed: u64, aggregation: Mode) -> Result<GinModel> {
    if layers == 0 || p == 0 || d == 0 || d_out == 0 {
        return Err(Error::Config("dimensions and layer count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let hidden = (0..layers)
        .map(|l| DenseLayer::random(&mut rng, if l == 0 { p } else { d }, d, false))
        .collect();
    let readout = DenseLayer::random(&mut rng, d, d_out, true);
    GinModel::new(hidden, readout, 1.0, aggregation, None)
}

/// Sum of vectors in a canonical order (sorted by bit pattern), so that the
/// result depends only on the multiset of summands.
fn canonical_sum(mut vs: Vec<&[f64]>, dim: usize) -> Vec<f64> {
    vs.sort_by(|a, b| {
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut acc = vec![0.0; dim];
    for v in vs {
        for (a, x) in acc.iter_mut().zip(v) {
            *a += x;
        }
    }
    acc
}

fn aggregate(vs: Vec<&[f64]>, dim: usize, mode: Mode) -> Vec<f64> {
    let count = vs.len();
    let mut s = canonical_sum(vs, dim);
    if mode == Mode::Mean && count > 0 {
        s.iter_mut().for_each(|x| *x /= count as f64);
    }
    s
}

/// Graph-level output `h(G)`. Invariant under node relabeling, bit for bit.
pub fn gin_forward(m: &GinModel, g: &AttributedGraph) -> Result<Vec<f64>> {
    if g.dim() != m.input_dim() {
        return Err(Error::DimensionMismatch {
            expected: m.input_dim(),
            found: g.dim(),
        });
    }
    let n = g.node_count();
    let mut z: Vec<Vec<f64>> = (0..n).map(|v| g.feature(v).to_vec()).collect();
    let mut dim = g.dim();
    for (l, layer) in m.layers.iter().enumerate() {
        z = (0..n)
            .map(|v| {
                let agg = aggregate(g.neighbors(v).iter().map(|&u| z[u].as_slice()).collect(), dim, m.aggregation);
                let msg = match &m.neighbor_maps {
                    Some(maps) => maps[l].apply_linear(&agg),
                    None => agg.iter().map(|x| m.epsilon * x).collect(),
                };
                let pre: Vec<f64> = z[v].iter().zip(&msg).map(|(a, b)| a + b).collect();
                layer.apply(&pre).into_iter().map(|x| x.max(0.0)).collect()
            })
            .collect();
        dim = layer.output_dim();
    }
    let pooled = aggregate(z.iter().map(Vec::as_slice).collect(), dim, m.aggregation);
    Ok(m.readout.apply(&pooled))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    /// `‖h(G_a) - h(G_b)‖`.
    pub lhs: f64,
    /// `Π K · TMD`.
    pub rhs: f64,
    /// `lhs / rhs`; 0 when both vanish.
    pub ratio: f64,
    pub tmd: f64,
    pub lipschitz_product: f64,
    pub holds: bool,
}

/// Relative slack allowed when comparing the two sides.
pub const BOUND_TOLERANCE: f64 = 1e-7;

/// Checks the output-distance bound with the model's own schedule.
pub fn lipschitz_check(m: &GinModel, ga: &AttributedGraph, gb: &AttributedGraph) -> Result<LipschitzCheck> {
    lipschitz_check_with(m, ga, gb, &m.bound_config()?)
}

/// Same as [`lipschitz_check`] with an explicit distance configuration.
pub fn lipschitz_check_with(m: &GinModel, ga: &AttributedGraph, gb: &AttributedGraph, cfg: &TmdConfig) -> Result<LipschitzCheck> {
    if cfg.mode != m.aggregation {
        return Err(Error::Config(format!(
            "model aggregation {} requires distance mode {}, got {}",
            m.aggregation, m.aggregation, cfg.mode
        )));
    }
    if cfg.depth != m.depth() + 1 {
        return Err(Error::Config(format!(
            "a {}-layer model is bounded by depth-{} distances, got depth {}",
            m.depth(),
            m.depth() + 1,
            cfg.depth
        )));
    }
    if !m.hidden_bias_free() {
        return Err(Error::Config("the bound requires hidden layers without bias".into()));
    }
    let ha = gin_forward(m, ga)?;
    let hb = gin_forward(m, gb)?;
    let lhs = ha.iter().zip(&hb).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let d = tmd(ga, gb, cfg)?;
    let k = m.lipschitz_product();
    let rhs = k * d;
    let ratio = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(LipschitzCheck {
        lhs,
        rhs,
        ratio,
        tmd: d,
        lipschitz_product: k,
        holds: lhs <= rhs * (1.0 + BOUND_TOLERANCE) + 1e-12,
    })
}

/// `max_i h_i / t_i` over pairs with `t_i >= 1e-12`.
pub fn empirical_lipschitz(h_values: &[f64], tmd_values: &[f64]) -> Result<f64> {
    if h_values.len() != tmd_values.len() {
        return Err(Error::InvalidArgument(format!(
            "{} output distances for {} graph distances",
            h_values.len(),
            tmd_values.len()
        )));
    }
    h_values
        .iter()
        .zip(tmd_values)
        .filter(|(_, &t)| t >= 1e-12)
        .map(|(h, t)| h / t)
        .fold(None, |best: Option<f64>, r| Some(best.map_or(r, |b| b.max(r))))
        .ok_or_else(|| Error::InvalidArgument("no pair with positive distance".into()))
}

/// Sample Pearson correlation coefficient.
pub fn pearson_r(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!("lengths differ: {} vs {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::InvalidArgument("constant input".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{cycle_graph, random_graph};

    fn identity(d: usize) -> DenseLayer {
        DenseLayer::linear((0..d).map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()).unwrap()
    }

    #[test]
    fn random_models_are_reproducible() {
        let a = random_gin(3, 4, 2, 9, Mode::Sum).unwrap();
        let b = random_gin(3, 4, 2, 9, Mode::Sum).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, random_gin(3, 4, 2, 10, Mode::Sum).unwrap());
        assert_eq!(a.lipschitz().len(), 3);
        assert!(a.hidden_bias_free());
    }

    #[test]
    fn scalar_spectral_norm() {
        assert_eq!(DenseLayer::linear(vec![vec![2.0]]).unwrap().spectral_norm(), 2.0);
        assert_eq!(DenseLayer::linear(vec![vec![-3.0]]).unwrap().spectral_norm(), 3.0);
        assert_eq!(spectral_norm(&[vec![0.0, 0.0]]), 0.0);
        let diag = [vec![1.0, 0.0], vec![0.0, 5.0]];
        assert!((spectral_norm(&diag) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn identity_forward() {
        // single node, identity maps: h = x
        let m = GinModel::new(vec![identity(2)], identity(2), 1.0, Mode::Sum, None).unwrap();
        let x = AttributedGraph::from_rows(2, vec![vec![0.5, 2.0]], []).unwrap();
        assert_eq!(gin_forward(&m, &x).unwrap(), vec![0.5, 2.0]);

        // edge graph, one layer: z_a = x_a + x_b = z_b, h = 2 (x_a + x_b)
        let m = GinModel::new(vec![identity(1)], identity(1), 1.0, Mode::Sum, None).unwrap();
        let e = AttributedGraph::from_rows(1, vec![vec![0.25], vec![1.5]], [(0, 1)]).unwrap();
        assert_eq!(gin_forward(&m, &e).unwrap(), vec![3.5]);
    }

    #[test]
    fn empty_graph_reads_out_zero() {
        let m = random_gin(2, 3, 2, 1, Mode::Mean).unwrap();
        let h = gin_forward(&m, &AttributedGraph::empty(2).unwrap()).unwrap();
        assert_eq!(h, m.readout().bias);
    }

    #[test]
    fn forward_is_permutation_invariant_bitwise() {
        for seed in 0..20 {
            let g = random_graph(9, 0.4, 3, seed).unwrap();
            let perm: Vec<usize> = (0..9).map(|i| (i * 4 + seed as usize) % 9).collect();
            let h = g.permute_nodes(&perm).unwrap();
            for mode in [Mode::Sum, Mode::Mean] {
                let m = random_gin(3, 5, 3, seed, mode).unwrap();
                let (a, b) = (gin_forward(&m, &g).unwrap(), gin_forward(&m, &h).unwrap());
                assert_eq!(
                    a.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
                    b.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
                );
            }
        }
    }

    #[test]
    fn check_requires_matching_configuration() {
        let m = random_gin(1, 2, 2, 0, Mode::Sum).unwrap();
        let g = cycle_graph(4).unwrap();
        let mean = TmdConfig::new(3, WeightSchedule::pascal(2, 1.0).unwrap(), Mode::Mean).unwrap();
        assert!(matches!(lipschitz_check_with(&m, &g, &g, &mean), Err(Error::Config(_))));
        let shallow = TmdConfig::new(2, WeightSchedule::pascal(2, 1.0).unwrap(), Mode::Sum).unwrap();
        assert!(matches!(lipschitz_check_with(&m, &g, &g, &shallow), Err(Error::Config(_))));
    }

    #[test]
    fn identical_inputs_give_zero_sides() {
        let m = random_gin(1, 3, 2, 4, Mode::Sum).unwrap();
        let g = random_graph(6, 0.5, 1, 2).unwrap();
        let r = lipschitz_check(&m, &g, &g).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        assert!(r.holds);
        let h = g.permute_nodes(&[5, 4, 3, 2, 1, 0]).unwrap();
        let r = lipschitz_check(&m, &g, &h).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.rhs <= 1e-9);
    }

    #[test]
    fn model_json_round_trip() {
        let m = random_gin(2, 3, 2, 5, Mode::Mean).unwrap();
        let text = serde_json::to_string(&m).unwrap();
        assert!(text.contains("\"aggregation\":\"mean\""));
        let back: GinModel = serde_json::from_str(&text).unwrap();
        assert_eq!(back, m);
        let ragged = r#"{"layers":[{"weight":[[2.0]],"bias":[0.0,1.0]}],"readout":{"weight":[[1.0]]}}"#;
        assert!(serde_json::from_str::<GinModel>(ragged).is_err());
        let minimal = r#"{"layers":[{"weight":[[2.0]]}],"readout":{"weight":[[1.0]],"bias":[0.5]}}"#;
        let m: GinModel = serde_json::from_str(minimal).unwrap();
        assert_eq!(m.epsilon(), 1.0);
        assert_eq!(m.lipschitz(), &[2.0, 1.0]);
    }

    #[test]
    fn empirical_and_pearson() {
        assert_eq!(empirical_lipschitz(&[1.0, 4.0, 9.0], &[1.0, 2.0, 3.0]).unwrap(), 3.0);
        assert_eq!(empirical_lipschitz(&[0.0, 0.0], &[1.0, 2.0]).unwrap(), 0.0);
        let t = [0.5, 1.0, 2.0];
        let h: Vec<f64> = t.iter().map(|x| 0.7 * x).collect();
        assert!((empirical_lipschitz(&h, &t).unwrap() - 0.7).abs() < 1e-15);
        assert!(empirical_lipschitz(&[1.0], &[0.0]).is_err());
        assert!(empirical_lipschitz(&[1.0], &[]).is_err());

        assert!((pearson_r(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson_r(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson_r(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(pearson_r(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(pearson_r(&[1.0, 2.0], &[1.0]).is_err());
    }
}
