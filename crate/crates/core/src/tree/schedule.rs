use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ot::Mode;

/// Depth-indexed positive weights `w(l)`, `l >= 1`.
///
/// `w(d)` scales the transport between child multisets whose trees have
/// depth `d`, so a depth-`L` distance consumes `w(1) .. w(L - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum WeightSchedule {
    /// `w(l) = value` for every `l`.
    Constant { value: f64 },
    /// `w(l) = epsilon * C(depth, l - 1) / C(depth, l)` for `1 <= l <= depth`.
    Pascal { depth: usize, epsilon: f64 },
    /// Per-layer neighbor coefficients `c_1 .. c_L` of a message-passing
    /// network. `w(l) = e_{L-l+1} / e_{L-l}` where `e_k` is the k-th
    /// elementary symmetric polynomial of the coefficients. Equal
    /// coefficients reproduce the Pascal schedule.
    Layerwise { coefficients: Vec<f64> },
    /// `w(l) = weights[l - 1]`.
    Explicit { weights: Vec<f64> },
}

fn positive(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(Error::Config(format!("{name} must be a positive finite number, got {x}")))
    }
}

/// Elementary symmetric polynomials `e_0 .. e_n` of `xs`.
fn elementary_symmetric(xs: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; xs.len() + 1];
    e[0] = 1.0;
    for (i, &x) in xs.iter().enumerate() {
        for k in (1..=i + 1).rev() {
            e[k] += x * e[k - 1];
        }
    }
    e
}

impl WeightSchedule {
    pub fn constant(value: f64) -> Result<Self> {
        positive("constant weight", value)?;
        Ok(WeightSchedule::Constant { value })
    }

    pub fn pascal(depth: usize, epsilon: f64) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Config("pascal schedule needs depth >= 1".into()));
        }
        positive("epsilon", epsilon)?;
        Ok(WeightSchedule::Pascal { depth, epsilon })
    }

    pub fn layerwise(coefficients: Vec<f64>) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::Config("layerwise schedule needs at least one coefficient".into()));
        }
        for &c in &coefficients {
            positive("layer coefficient", c)?;
        }
        Ok(WeightSchedule::Layerwise { coefficients })
    }

    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        for &w in &weights {
            positive("weight", w)?;
        }
        Ok(WeightSchedule::Explicit { weights })
    }

    /// Largest level with a defined weight, `None` when unbounded.
    pub fn max_level(&self) -> Option<usize> {
        match self {
            WeightSchedule::Constant { .. } => None,
            WeightSchedule::Pascal { depth, .. } => Some(*depth),
            WeightSchedule::Layerwise { coefficients } => Some(coefficients.len()),
            WeightSchedule::Explicit { weights } => Some(weights.len()),
        }
    }

    pub fn get(&self, l: usize) -> Result<f64> {
        if l == 0 || self.max_level().is_some_and(|max| l > max) {
            return Err(Error::Config(format!(
                "weight w({l}) is undefined; schedule covers levels 1..={}",
                self.max_level().map_or("inf".to_string(), |m| m.to_string())
            )));
        }
        Ok(match self {
            WeightSchedule::Constant { value } => *value,
            WeightSchedule::Pascal { depth, epsilon } => epsilon * l as f64 / (depth - l + 1) as f64,
            WeightSchedule::Layerwise { coefficients } => {
                let n = coefficients.len();
                let e = elementary_symmetric(coefficients);
                e[n - l + 1] / e[n - l]
            }
            WeightSchedule::Explicit { weights } => weights[l - 1],
        })
    }

    /// `w(1) .. w(count)`.
    pub fn take(&self, count: usize) -> Result<Vec<f64>> {
        (1..=count).map(|l| self.get(l)).collect()
    }
}

impl std::str::FromStr for WeightSchedule {
    type Err = Error;

    /// `constant:C`, `pascal:L[,EPS]`, `layerwise:C1,C2,..` or `list:W1,W2,..`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').ok_or_else(|| Error::Config(format!("malformed weight schedule '{s}'")))?;
        let numbers = |args: &str| -> Result<Vec<f64>> {
            args.split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad number '{t}' in '{s}'"))))
                .collect()
        };
        match kind {
            "constant" => {
                let v = numbers(args)?;
                if v.len() != 1 {
                    return Err(Error::Config(format!("constant schedule takes one value, got '{args}'")));
                }
                WeightSchedule::constant(v[0])
            }
            "pascal" => {
                let mut parts = args.split(',');
                let depth = parts
                    .next()
                    .and_then(|t| t.trim().parse::<usize>().ok())
                    .ok_or_else(|| Error::Config(format!("bad pascal depth in '{s}'")))?;
                let epsilon = match parts.next() {
                    Some(t) => t.trim().parse::<f64>().map_err(|_| Error::Config(format!("bad epsilon in '{s}'")))?,
                    None => 1.0,
                };
                if parts.next().is_some() {
                    return Err(Error::Config(format!("pascal schedule takes L[,eps], got '{args}'")));
                }
                WeightSchedule::pascal(depth, epsilon)
            }
            "layerwise" => WeightSchedule::layerwise(numbers(args)?),
            "list" => WeightSchedule::explicit(numbers(args)?),
            other => Err(Error::Config(format!("unknown weight schedule '{other}'"))),
        }
    }
}

impl std::fmt::Display for WeightSchedule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let join = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            WeightSchedule::Constant { value } => write!(f, "constant:{value}"),
            WeightSchedule::Pascal { depth, epsilon } => write!(f, "pascal:{depth},{epsilon}"),
            WeightSchedule::Layerwise { coefficients } => write!(f, "layerwise:{}", join(coefficients)),
            WeightSchedule::Explicit { weights } => write!(f, "list:{}", join(weights)),
        }
    }
}

/// Depth, weights and transport mode of a distance computation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TmdConfig {
    pub depth: usize,
    pub weights: WeightSchedule,
    pub mode: Mode,
}

impl TmdConfig {
    pub fn new(depth: usize, weights: WeightSchedule, mode: Mode) -> Result<Self> {
        let cfg = TmdConfig { depth, weights, mode };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::Config("depth must be >= 1".into()));
        }
        self.weights.take(self.depth - 1).map(|_| ())
    }

    /// Same schedule and mode at another depth.
    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        TmdConfig::new(depth, self.weights.clone(), self.mode)
    }

    /// Weights `w(1) .. w(depth - 1)`.
    pub(crate) fn level_weights(&self) -> Result<Vec<f64>> {
        self.validate()?;
        self.weights.take(self.depth - 1)
    }
}
