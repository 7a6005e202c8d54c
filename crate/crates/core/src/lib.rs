//! Tree Mover's Distance between attributed graphs, and the stability
//! analyses built on it.

pub mod analysis;
pub mod error;
pub mod gnn;
pub mod graph;
pub mod io;
pub mod learn;
pub mod matrix;
pub mod ot;
pub mod perturb;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{AttributedGraph, GraphDataset};
pub use matrix::Matrix;
pub use ot::Mode;
pub use tree::{tmd, TmdConfig, WeightSchedule};
