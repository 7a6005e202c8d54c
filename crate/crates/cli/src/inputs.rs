use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use tmd_core::gnn::GinModel;
use tmd_core::io::{parse_tudataset_with, read_dataset_json, read_graph_json, TuOptions};
use tmd_core::{AttributedGraph, Error, GraphDataset, Mode, TmdConfig, WeightSchedule};

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    /// Malformed input or arguments (exit 1).
    Parse(String),
    /// Missing or unwritable files (exit 2).
    Io(String),
    /// Inconsistent configuration (exit 3).
    Config(String),
    /// A stability bound was exceeded (exit 4).
    Violation(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Io(_) => 2,
            Failure::Config(_) => 3,
            Failure::Violation(_) => 4,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Parse(m) => write!(f, "parse error: {m}"),
            Failure::Io(m) => write!(f, "{m}"),
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Violation(m) => write!(f, "{m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::Io { .. } => Failure::Io(msg),
            Error::Config(_) | Error::InvalidArgument(_) | Error::SizeGuard(_) => Failure::Config(msg),
            Error::BoundViolation { .. } => Failure::Violation(msg),
            _ => Failure::Parse(msg),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;

#[derive(Args, Debug, Clone)]
pub struct TmdArgs {
    /// Computation tree depth
    #[arg(long, default_value_t = 2)]
    pub depth: usize,
    /// Depth weights: constant:C, pascal:L[,eps], layerwise:K1,..,KL or list:w1,..
    #[arg(long, default_value = "constant:1")]
    pub weights: String,
    /// Transport between child multisets
    #[arg(long, default_value = "sum", value_parser = parse_mode)]
    pub mode: Mode,
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse::<Mode>().map_err(|e| e.to_string())
}

impl TmdArgs {
    pub fn config(&self) -> CliResult<TmdConfig> {
        let weights: WeightSchedule = self.weights.parse()?;
        if let WeightSchedule::Pascal { depth, .. } = weights {
            // pascal:L serves the depth-L distance or the depth-(L+1) one used by L-layer bounds
            if self.depth != depth && self.depth != depth + 1 {
                return Err(Failure::Config(format!(
                    "pascal schedule for {depth} layers does not match depth {}",
                    self.depth
                )));
            }
        }
        Ok(TmdConfig::new(self.depth, weights, self.mode)?)
    }
}

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// TUDataset directory or JSON dataset file
    #[arg(long)]
    pub data: PathBuf,
    /// Dataset name inside a TUDataset directory
    #[arg(long)]
    pub name: Option<String>,
    /// Standardize continuous node attributes after loading
    #[arg(long)]
    pub standardize: bool,
}

impl DataArgs {
    pub fn load(&self) -> CliResult<GraphDataset> {
        load_dataset(&self.data, self.name.as_deref(), self.standardize)
    }
}

pub fn load_dataset(path: &Path, name: Option<&str>, standardize: bool) -> CliResult<GraphDataset> {
    let ds = if path.is_file() || path.extension().is_some_and(|e| e == "json") {
        read_dataset_json(path)?
    } else {
        let name = name.ok_or_else(|| Failure::Parse(format!("--name is required for TUDataset directory {}", path.display())))?;
        parse_tudataset_with(path, name, TuOptions { standardize })?
    };
    if standardize && path.is_file() {
        return Ok(ds.standardized()?);
    }
    log::info!("loaded {} graphs from {}", ds.len(), path.display());
    Ok(ds)
}

pub fn load_graph(path: &Path) -> CliResult<AttributedGraph> {
    Ok(read_graph_json(path)?)
}

pub fn load_model(path: &Path) -> CliResult<GinModel> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Parse(format!("{}: {e}", path.display())))
}

/// Writes to `out`, or to stdout when absent.
pub fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json<T: serde::Serialize>(out: Option<&Path>, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Parse(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}
