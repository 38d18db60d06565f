//! Branching history of network states.
//!
//! The root holds the original network. Every modification applied to any
//! state adds a child holding the edited network, its fresh equilibrium, the
//! optimization metric (total system travel time), and the construction
//! cost. Deleting a state removes its whole subtree. State ids increase
//! monotonically and are never reused; so are ids of newly built roads, which
//! are allocated tree-wide so that rows align across branches.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::assignment::{solve_sue, total_system_travel_time, AssignmentParams, AssignmentResult};
use crate::error::{Error, Result};
use crate::network::{DemandTable, NewRoad, RoadId, RoadKind, RoadNetwork};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StateId(pub u64);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Road-level countermeasures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Modification {
    /// Expand or narrow a road.
    SetCapacity {
        road: RoadId,
        #[serde(alias = "capacity_veh_per_hr")]
        capacity: f64,
    },
    /// Improve or restrict a road.
    SetFftt {
        road: RoadId,
        #[serde(alias = "fftt_min")]
        fftt: f64,
    },
    CloseRoad { road: RoadId },
    BuildRoad(NewRoad),
}

impl Modification {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Modification::SetCapacity { .. } => "set_capacity",
            Modification::SetFftt { .. } => "set_fftt",
            Modification::CloseRoad { .. } => "close_road",
            Modification::BuildRoad(_) => "build_road",
        }
    }
}

/// Construction cost rates per kilometre.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostParams {
    /// Expansion or construction of surface roads.
    pub surface_per_km: f64,
    /// Construction of tunnels.
    pub tunnel_per_km: f64,
}

impl Default for CostParams {
    fn default() -> Self {
        Self {
            surface_per_km: 4_000_000.0,
            tunnel_per_km: 14_000_000.0,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("surface_per_km", self.surface_per_km),
            ("tunnel_per_km", self.tunnel_per_km),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams {
                    name,
                    reason: format!("must be positive, got {v}"),
                });
            }
        }
        Ok(())
    }

    fn rate(&self, kind: RoadKind) -> f64 {
        match kind {
            RoadKind::Surface => self.surface_per_km,
            RoadKind::Tunnel => self.tunnel_per_km,
        }
    }
}

#[derive(Debug, Clone)]
pub struct StateNode {
    pub id: StateId,
    pub parent: Option<StateId>,
    pub modification: Option<Modification>,
    /// Ids given to roads built by `modification`.
    pub created_roads: Vec<RoadId>,
    /// Rates the step cost was computed with.
    pub cost_params: CostParams,
    pub network: Arc<RoadNetwork>,
    pub assignment: Arc<AssignmentResult>,
    pub metric: f64,
    pub step_cost: f64,
    pub cumulative_cost: f64,
    pub children: Vec<StateId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricDeltas {
    /// `(initial - current) / initial`; positive is an improvement.
    pub vs_initial: f64,
    /// `(parent - current) / parent`; 0 at the root.
    pub vs_parent: f64,
    /// False at the root, where `vs_parent` has no meaning.
    pub parent_applicable: bool,
}

/// A computed but not yet inserted child state. Produced by
/// [`StateTree::prepare`] so the solve can run without holding a write lock.
#[derive(Debug, Clone)]
pub struct PendingChild {
    parent: StateId,
    modification: Modification,
    created_roads: Vec<RoadId>,
    cost_params: CostParams,
    network: Arc<RoadNetwork>,
    assignment: Arc<AssignmentResult>,
    metric: f64,
    step_cost: f64,
    road_ids_from: u32,
}

impl PendingChild {
    pub fn assignment(&self) -> &AssignmentResult {
        &self.assignment
    }
}

/// One entry of the modification log, enough to rebuild a state from its
/// parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogEntry {
    pub id: StateId,
    pub parent: StateId,
    pub modification: Modification,
    #[serde(default)]
    pub created_roads: Vec<RoadId>,
    pub cost_params: CostParams,
}

#[derive(Debug, Clone)]
pub struct StateTree {
    demands: Arc<DemandTable>,
    params: AssignmentParams,
    nodes: BTreeMap<StateId, StateNode>,
    root: StateId,
    next_state_id: u64,
    next_road_id: u32,
}

fn relative_change(before: f64, after: f64) -> f64 {
    if before == 0.0 {
        0.0
    } else {
        (before - after) / before
    }
}

impl StateTree {
    /// Creates a tree whose root is the equilibrium of `network`.
    pub fn create(
        network: RoadNetwork,
        demands: DemandTable,
        params: AssignmentParams,
    ) -> Result<Self> {
        let assignment = solve_sue(&network, &demands, &params)?;
        let metric = total_system_travel_time(&assignment);
        let root = StateId(0);
        let next_road_id = network.next_road_id().0;
        let node = StateNode {
            id: root,
            parent: None,
            modification: None,
            created_roads: Vec::new(),
            cost_params: CostParams::default(),
            network: Arc::new(network),
            assignment: Arc::new(assignment),
            metric,
            step_cost: 0.0,
            cumulative_cost: 0.0,
            children: Vec::new(),
        };
        Ok(Self {
            demands: Arc::new(demands),
            params,
            nodes: BTreeMap::from([(root, node)]),
            root,
            next_state_id: 1,
            next_road_id,
        })
    }

    pub fn root(&self) -> StateId {
        self.root
    }

    pub fn root_node(&self) -> &StateNode {
        &self.nodes[&self.root]
    }

    pub fn demands(&self) -> &DemandTable {
        &self.demands
    }

    pub fn params(&self) -> &AssignmentParams {
        &self.params
    }

    pub fn node(&self, id: StateId) -> Result<&StateNode> {
        self.nodes.get(&id).ok_or(Error::UnknownState(id))
    }

    pub fn contains(&self, id: StateId) -> bool {
        self.nodes.contains_key(&id)
    }

    /// States in id order.
    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &StateNode> + '_ {
        self.nodes.values()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn next_state_id(&self) -> StateId {
        StateId(self.next_state_id)
    }

    pub fn next_road_id(&self) -> RoadId {
        RoadId(self.next_road_id)
    }

    /// Ids from the root down to `id`, inclusive.
    pub fn lineage(&self, id: StateId) -> Result<Vec<StateId>> {
        let mut out = vec![id];
        let mut at = self.node(id)?;
        while let Some(p) = at.parent {
            out.push(p);
            at = self.node(p)?;
        }
        out.reverse();
        Ok(out)
    }

    /// Applies `modification` to `state`'s network, solves the equilibrium,
    /// and computes costs, without touching the tree.
    pub fn prepare(
        &self,
        state: StateId,
        modification: Modification,
        cost_params: &CostParams,
    ) -> Result<PendingChild> {
        self.prepare_with_road_ids(state, modification, cost_params, self.next_road_id)
    }

    fn prepare_with_road_ids(
        &self,
        state: StateId,
        modification: Modification,
        cost_params: &CostParams,
        first_road_id: u32,
    ) -> Result<PendingChild> {
        cost_params.validate()?;
        let parent = self.node(state)?;
        let net = &parent.network;
        let (network, created_roads, step_cost) = match &modification {
            Modification::SetCapacity { road, capacity } => {
                let old = net.road(*road).ok_or(Error::UnknownRoad(*road))?.capacity;
                let edited = net.set_capacity(*road, *capacity)?;
                let cost = if *capacity > old {
                    cost_params.surface_per_km * net.road_length_km(*road)?
                } else {
                    0.0
                };
                (edited, Vec::new(), cost)
            }
            Modification::SetFftt { road, fftt } => (net.set_fftt(*road, *fftt)?, Vec::new(), 0.0),
            Modification::CloseRoad { road } => (net.close_road(*road)?, Vec::new(), 0.0),
            Modification::BuildRoad(spec) => {
                let (edited, ids) = net.build_road_with_ids(spec, RoadId(first_road_id))?;
                let length = edited.road_length_km(ids[0])?;
                let cost = cost_params.rate(spec.kind) * length * ids.len() as f64;
                (edited, ids, cost)
            }
        };
        let assignment = solve_sue(&network, &self.demands, &self.params)?;
        let metric = total_system_travel_time(&assignment);
        Ok(PendingChild {
            parent: state,
            modification,
            created_roads,
            cost_params: *cost_params,
            network: Arc::new(network),
            assignment: Arc::new(assignment),
            metric,
            step_cost,
            road_ids_from: first_road_id,
        })
    }

    /// Inserts a prepared child. Fails if the parent has been deleted or the
    /// tree allocated road ids since the child was prepared.
    pub fn commit(&mut self, pending: PendingChild) -> Result<StateId> {
        let id = StateId(self.next_state_id);
        self.insert(id, pending)?;
        self.next_state_id += 1;
        Ok(id)
    }

    fn insert(&mut self, id: StateId, pending: PendingChild) -> Result<()> {
        if !pending.created_roads.is_empty() && pending.road_ids_from != self.next_road_id {
            return Err(Error::Referential(
                "road ids were allocated after this child was prepared".into(),
            ));
        }
        let parent = self
            .nodes
            .get_mut(&pending.parent)
            .ok_or(Error::UnknownState(pending.parent))?;
        parent.children.push(id);
        let cumulative_cost = parent.cumulative_cost + pending.step_cost;
        if let Some(last) = pending.created_roads.iter().max() {
            self.next_road_id = self.next_road_id.max(last.0 + 1);
        }
        self.nodes.insert(
            id,
            StateNode {
                id,
                parent: Some(pending.parent),
                modification: Some(pending.modification),
                created_roads: pending.created_roads,
                cost_params: pending.cost_params,
                network: pending.network,
                assignment: pending.assignment,
                metric: pending.metric,
                step_cost: pending.step_cost,
                cumulative_cost,
                children: Vec::new(),
            },
        );
        Ok(())
    }

    /// Adds a child of `state` and returns its id. Nothing is added if the
    /// modification is invalid or the equilibrium cannot be computed.
    pub fn apply_modification(
        &mut self,
        state: StateId,
        modification: Modification,
        cost_params: &CostParams,
    ) -> Result<StateId> {
        let pending = self.prepare(state, modification, cost_params)?;
        self.commit(pending)
    }

    /// Removes `state` and all its descendants. Returns the removed ids in
    /// ascending order.
    pub fn delete_state(&mut self, state: StateId) -> Result<Vec<StateId>> {
        let node = self.node(state)?;
        let Some(parent) = node.parent else {
            return Err(Error::RootDeletion);
        };
        let mut removed = Vec::new();
        let mut stack = vec![state];
        while let Some(id) = stack.pop() {
            if let Some(n) = self.nodes.remove(&id) {
                stack.extend(n.children);
                removed.push(id);
            }
        }
        if let Some(p) = self.nodes.get_mut(&parent) {
            p.children.retain(|c| *c != state);
        }
        removed.sort();
        Ok(removed)
    }

    pub fn metric_deltas(&self, state: StateId) -> Result<MetricDeltas> {
        let node = self.node(state)?;
        let initial = self.root_node().metric;
        let (vs_parent, parent_applicable) = match node.parent {
            Some(p) => (relative_change(self.node(p)?.metric, node.metric), true),
            None => (0.0, false),
        };
        Ok(MetricDeltas {
            vs_initial: relative_change(initial, node.metric),
            vs_parent,
            parent_applicable,
        })
    }

    /// Modification log of every non-root state, in id order.
    pub fn log(&self) -> Vec<LogEntry> {
        self.nodes
            .values()
            .filter_map(|n| {
                Some(LogEntry {
                    id: n.id,
                    parent: n.parent?,
                    modification: n.modification.clone()?,
                    created_roads: n.created_roads.clone(),
                    cost_params: n.cost_params,
                })
            })
            .collect()
    }

    /// Rebuilds a tree from its root inputs and modification log. Entries
    /// are applied in id order, reusing the recorded road ids.
    pub fn replay(
        network: RoadNetwork,
        demands: DemandTable,
        params: AssignmentParams,
        log: &[LogEntry],
        next_state_id: StateId,
        next_road_id: RoadId,
    ) -> Result<Self> {
        let mut tree = Self::create(network, demands, params)?;
        let mut entries: Vec<&LogEntry> = log.iter().collect();
        entries.sort_by_key(|e| e.id);
        for entry in entries {
            if entry.id == tree.root || tree.nodes.contains_key(&entry.id) {
                return Err(Error::Referential(format!("state {} appears twice", entry.id)));
            }
            if !tree.nodes.contains_key(&entry.parent) {
                return Err(Error::Referential(format!(
                    "state {} cites missing parent {}",
                    entry.id, entry.parent
                )));
            }
            let first_road = match (&entry.modification, entry.created_roads.first()) {
                (Modification::BuildRoad(_), Some(first)) => first.0,
                (Modification::BuildRoad(_), None) => {
                    return Err(Error::Referential(format!(
                        "state {} builds a road but records no road ids",
                        entry.id
                    )))
                }
                _ => tree.next_road_id,
            };
            let mut pending = tree.prepare_with_road_ids(
                entry.parent,
                entry.modification.clone(),
                &entry.cost_params,
                first_road,
            )?;
            if pending.created_roads != entry.created_roads {
                return Err(Error::Referential(format!(
                    "state {} recorded road ids {:?}, replay produced {:?}",
                    entry.id, entry.created_roads, pending.created_roads
                )));
            }
            pending.road_ids_from = tree.next_road_id;
            tree.insert(entry.id, pending)?;
            tree.next_state_id = tree.next_state_id.max(entry.id.0 + 1);
        }
        tree.next_state_id = tree.next_state_id.max(next_state_id.0);
        tree.next_road_id = tree.next_road_id.max(next_road_id.0);
        Ok(tree)
    }
}
