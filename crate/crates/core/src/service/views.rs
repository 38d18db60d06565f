//! JSON shapes returned by the HTTP API. Numeric fields carry their unit in
//! the name. Times follow the unit of the input files, which for the bundled
//! datasets is minutes.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::analytics::{CellStatus, HistogramBin, Indicator, RoadIndicators};
use crate::error::Result;
use crate::network::{NodeId, Projection, RoadId, RoadKind};
use crate::tree::{CostParams, Modification, StateId, StateTree};

#[derive(Debug, Clone, Serialize)]
pub struct StateSummary {
    pub id: StateId,
    pub parent: Option<StateId>,
    pub children: Vec<StateId>,
    pub modification: Option<Modification>,
    /// Icon key for the modification, `null` at the root.
    pub modification_kind: Option<&'static str>,
    pub created_roads: Vec<RoadId>,
    /// Total system travel time.
    pub metric_veh_min: f64,
    pub metric_delta_vs_initial: f64,
    pub metric_delta_vs_parent: f64,
    pub parent_applicable: bool,
    pub step_cost_currency: f64,
    pub cumulative_cost_currency: f64,
    pub cost_params: CostParams,
    pub converged: bool,
    pub iterations: usize,
    pub final_rel_gap: f64,
}

pub fn state_summary(tree: &StateTree, id: StateId) -> Result<StateSummary> {
    let node = tree.node(id)?;
    let deltas = tree.metric_deltas(id)?;
    Ok(StateSummary {
        id,
        parent: node.parent,
        children: node.children.clone(),
        modification: node.modification.clone(),
        modification_kind: node.modification.as_ref().map(Modification::kind_name),
        created_roads: node.created_roads.clone(),
        metric_veh_min: node.metric,
        metric_delta_vs_initial: deltas.vs_initial,
        metric_delta_vs_parent: deltas.vs_parent,
        parent_applicable: deltas.parent_applicable,
        step_cost_currency: node.step_cost,
        cumulative_cost_currency: node.cumulative_cost,
        cost_params: node.cost_params,
        converged: node.assignment.converged,
        iterations: node.assignment.iterations,
        final_rel_gap: node.assignment.final_rel_gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeView {
    pub root: StateId,
    pub next_state_id: StateId,
    pub states: Vec<StateSummary>,
}

pub fn tree_view(tree: &StateTree) -> Result<TreeView> {
    Ok(TreeView {
        root: tree.root(),
        next_state_id: tree.next_state_id(),
        states: tree
            .nodes()
            .map(|n| state_summary(tree, n.id))
            .collect::<Result<_>>()?,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct NodeView {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    /// Volume entering the node over all roads.
    pub through_volume_veh_per_hr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RoadView {
    pub id: RoadId,
    pub from: NodeId,
    pub to: NodeId,
    pub kind: RoadKind,
    pub capacity_veh_per_hr: f64,
    pub fftt_min: f64,
    pub length_km: f64,
    pub volume_veh_per_hr: f64,
    pub time_min: f64,
    /// Absent from the root state.
    pub new_road: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StateView {
    pub state: StateSummary,
    pub projection: Projection,
    pub nodes: Vec<NodeView>,
    pub roads: Vec<RoadView>,
}

pub fn state_view(tree: &StateTree, id: StateId) -> Result<StateView> {
    let node = tree.node(id)?;
    let root = &tree.root_node().network;
    let net = &node.network;
    let mut inflow: BTreeMap<NodeId, f64> = BTreeMap::new();
    let mut roads = Vec::with_capacity(net.road_count());
    for road in net.roads() {
        let status = node
            .assignment
            .status(road.id)
            .expect("assignment covers every road of its network");
        *inflow.entry(road.to).or_default() += status.actual_volume;
        roads.push(RoadView {
            id: road.id,
            from: road.from,
            to: road.to,
            kind: road.kind,
            capacity_veh_per_hr: road.capacity,
            fftt_min: road.fftt,
            length_km: net.road_length_km(road.id)?,
            volume_veh_per_hr: status.actual_volume,
            time_min: status.actual_time,
            new_road: root.road(road.id).is_none(),
        });
    }
    let nodes = net
        .nodes()
        .map(|n| NodeView {
            id: n.id,
            x: n.x,
            y: n.y,
            through_volume_veh_per_hr: inflow.get(&n.id).copied().unwrap_or(0.0),
        })
        .collect();
    Ok(StateView {
        state: state_summary(tree, id)?,
        projection: net.projection(),
        nodes,
        roads,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct OdNodeView {
    pub node: NodeId,
    pub originating_veh_per_hr: f64,
    pub terminating_veh_per_hr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OdView {
    pub state: StateId,
    pub road: RoadId,
    pub volume_veh_per_hr: f64,
    pub nodes: Vec<OdNodeView>,
}

pub fn od_view(tree: &StateTree, state: StateId, road: RoadId) -> Result<OdView> {
    let through = crate::analytics::od_through_road(tree, state, road)?;
    let volume = tree
        .node(state)?
        .assignment
        .status(road)
        .map_or(0.0, |s| s.actual_volume);
    Ok(OdView {
        state,
        road,
        volume_veh_per_hr: volume,
        nodes: through
            .into_iter()
            .map(|(node, t)| OdNodeView {
                node,
                originating_veh_per_hr: t.originating,
                terminating_veh_per_hr: t.terminating,
            })
            .collect(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CellView {
    pub road: RoadId,
    pub state: StateId,
    pub capacity_veh_per_hr: f64,
    pub volume_veh_per_hr: f64,
    pub fftt_min: f64,
    pub actual_time_min: f64,
    pub delta_time_vs_initial_min: Option<f64>,
    pub new_road: bool,
}

impl From<CellStatus> for CellView {
    fn from(c: CellStatus) -> Self {
        Self {
            road: c.road,
            state: c.state,
            capacity_veh_per_hr: c.capacity,
            volume_veh_per_hr: c.volume,
            fftt_min: c.fftt,
            actual_time_min: c.actual_time,
            delta_time_vs_initial_min: c.delta_time_vs_initial,
            new_road: c.new_road,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IndicatorsView {
    pub selected_states: Vec<StateId>,
    pub indicators: Vec<RoadIndicators>,
    pub histograms: BTreeMap<Indicator, Vec<HistogramBin>>,
    pub ordered_roads: Vec<RoadId>,
    /// Cells of every state in the tree for the ordered roads.
    pub cells: Vec<CellView>,
}
