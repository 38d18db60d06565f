//! Built-in benchmark networks.

use crate::io::tntp::{load_network, parse_trips};
use crate::network::{DemandTable, Projection, RoadNetwork};

pub const BRAESS_NET: &str = include_str!("../data/braess_net.tntp");
pub const BRAESS_TRIPS: &str = include_str!("../data/braess_trips.tntp");
pub const BRAESS_NODES: &str = include_str!("../data/braess_node.tntp");

pub const SIOUX_FALLS_NET: &str = include_str!("../data/SiouxFalls_net.tntp");
pub const SIOUX_FALLS_TRIPS: &str = include_str!("../data/SiouxFalls_trips.tntp");
pub const SIOUX_FALLS_NODES: &str = include_str!("../data/SiouxFalls_node.tntp");

pub const NAMES: [&str; 2] = ["braess", "sioux-falls"];

#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: &'static str,
    pub network: RoadNetwork,
    pub demands: DemandTable,
}

fn load(
    name: &'static str,
    net: &str,
    trips: &str,
    nodes: &str,
    projection: Projection,
) -> Dataset {
    let network = load_network(net, Some(nodes), projection)
        .unwrap_or_else(|e| panic!("bundled {name} network is invalid: {e}"));
    let demands = parse_trips(trips)
        .unwrap_or_else(|e| panic!("bundled {name} trips are invalid: {e}"))
        .demands;
    Dataset {
        name,
        network,
        demands,
    }
}

/// Four intersections, five roads, 1000 trips from node 1 to node 4.
pub fn braess() -> Dataset {
    load("braess", BRAESS_NET, BRAESS_TRIPS, BRAESS_NODES, Projection::Planar)
}

/// The Sioux Falls benchmark: 24 intersections, 76 roads.
pub fn sioux_falls() -> Dataset {
    load(
        "sioux-falls",
        SIOUX_FALLS_NET,
        SIOUX_FALLS_TRIPS,
        SIOUX_FALLS_NODES,
        Projection::LonLat,
    )
}

pub fn by_name(name: &str) -> Option<Dataset> {
    match name {
        "braess" => Some(braess()),
        "sioux-falls" | "siouxfalls" | "sioux_falls" => Some(sioux_falls()),
        _ => None,
    }
}
