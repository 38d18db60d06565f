//! Road network what-if analysis: stochastic user equilibrium assignment,
//! a branching tree of modified network states with construction costs,
//! cross-state analytics, and TNTP / session file handling.

pub mod analytics;
pub mod assignment;
pub mod datasets;
pub mod error;
pub mod io;
pub mod network;
pub mod service;
pub mod tree;

pub use assignment::{solve_sue, AssignmentParams, AssignmentResult, RoadStatus};
pub use error::{Error, Result};
pub use network::{DemandTable, NodeId, OdPair, Projection, RoadId, RoadNetwork};
pub use tree::{CostParams, Modification, StateId, StateTree};
