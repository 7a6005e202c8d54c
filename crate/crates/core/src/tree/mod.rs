//! Computation trees, the recursive tree distance and the Tree Mover's
//! Distance between graphs.

mod naive;
mod schedule;
mod tables;
mod wl;

pub use naive::{naive_tmd, ComputationTree};
pub use schedule::{TmdConfig, WeightSchedule};
pub use tables::{build_distance_tables, tmd, tree_distance, tree_norm, DistanceTable};
pub use wl::{wl_distinguishable, wl_first_difference};

pub(crate) use tables::{euclidean, norm_levels};
