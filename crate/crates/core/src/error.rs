use thiserror::Error;

use crate::network::{NodeId, OdPair, RoadId};
use crate::tree::StateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown road {0}")]
    UnknownRoad(RoadId),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),

    #[error("a road from {from} to {to} already exists")]
    DuplicateRoad { from: NodeId, to: NodeId },

    #[error("road id {0} is already in use")]
    DuplicateRoadId(RoadId),

    #[error("invalid {what}: {value}")]
    InvalidAttribute { what: &'static str, value: f64 },

    #[error("road endpoints must differ (node {0})")]
    SelfLoop(NodeId),

    #[error("coordinate ({x}, {y}) of node {node} is outside the longitude/latitude range")]
    InvalidCoordinate { node: NodeId, x: f64, y: f64 },

    #[error("network has no roads to derive default attributes from")]
    EmptyNetwork,

    #[error("invalid demand {od}: {reason}")]
    InvalidDemand { od: OdPair, reason: &'static str },

    #[error("unreachable OD pairs: {}", fmt_pairs(.0))]
    Unreachable(Vec<OdPair>),

    #[error("invalid parameter {name}: {reason}")]
    InvalidParams { name: &'static str, reason: String },

    #[error("{0} must not be empty")]
    EmptyInput(&'static str),

    #[error("unknown state {0}")]
    UnknownState(StateId),

    #[error("the root state cannot be deleted")]
    RootDeletion,

    #[error("unknown indicator {0:?}")]
    UnknownIndicator(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: {what}: header declares {declared}, found {parsed}")]
    CountMismatch {
        /// Line of the header tag.
        line: usize,
        what: &'static str,
        declared: f64,
        parsed: f64,
    },

    #[error("nodes without coordinates: {0:?}")]
    MissingCoordinates(Vec<NodeId>),

    #[error("unsupported session schema version {0}")]
    SchemaVersion(u64),

    #[error("broken reference: {0}")]
    Referential(String),

    #[error("replayed metric for state {state} is {replayed}, saved value is {saved}")]
    ReplayMismatch {
        state: StateId,
        saved: f64,
        replayed: f64,
    },

    #[error("malformed session document: {0}")]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn fmt_pairs(pairs: &[OdPair]) -> String {
    pairs
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}
