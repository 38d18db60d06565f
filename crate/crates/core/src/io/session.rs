//! Session documents: the root inputs plus the modification log, written as
//! canonical JSON so that saving a loaded session reproduces the same bytes.
//!
//! Canonical form: object keys sorted, floats with 17 significant digits,
//! no insignificant whitespace, one trailing newline.

use std::io;

use serde::{Deserialize, Serialize};
use serde_json::ser::Formatter;

use crate::assignment::AssignmentParams;
use crate::error::{Error, Result};
use crate::network::{DemandTable, Intersection, Projection, Road, RoadId, RoadNetwork};
use crate::tree::{CostParams, LogEntry, Modification, StateId, StateTree};

pub const SCHEMA_VERSION: u64 = 1;

/// Relative tolerance when comparing replayed metrics with saved ones.
const REPLAY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SessionDoc {
    schema_version: u64,
    assignment_params: AssignmentParams,
    cost_params: CostParams,
    demands: DemandTable,
    root_network: NetworkDoc,
    states: Vec<StateDoc>,
    next_state_id: StateId,
    next_road_id: RoadId,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    projection: Projection,
    nodes: Vec<Intersection>,
    roads: Vec<Road>,
    next_road_id: RoadId,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    id: StateId,
    parent: StateId,
    modification: Modification,
    #[serde(default)]
    created_roads: Vec<RoadId>,
    cost_params: CostParams,
    metric: f64,
    step_cost: f64,
    cumulative_cost: f64,
}

impl NetworkDoc {
    fn from_network(net: &RoadNetwork) -> Self {
        Self {
            projection: net.projection(),
            nodes: net.nodes().copied().collect(),
            roads: net.roads().cloned().collect(),
            next_road_id: net.next_road_id(),
        }
    }

    fn into_network(self) -> Result<RoadNetwork> {
        let mut net = RoadNetwork::new(self.projection);
        for node in self.nodes {
            net.add_node(node)?;
        }
        for road in self.roads {
            net.add_road(road)?;
        }
        net.reserve_road_ids(self.next_road_id);
        Ok(net)
    }
}

/// Writes floats as 17 significant digits so every value survives a round
/// trip through text unchanged.
struct CanonicalFormatter;

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }
}

fn to_canonical_json<T: Serialize>(value: &T) -> Result<String> {
    // Going through `Value` sorts object keys.
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

/// Serializes a session: the tree's root inputs and log, plus the cost
/// parameters currently in effect for new modifications.
pub fn save_session(tree: &StateTree, cost_params: &CostParams) -> Result<String> {
    let states = tree
        .log()
        .into_iter()
        .map(|entry| {
            let node = tree.node(entry.id)?;
            Ok(StateDoc {
                id: entry.id,
                parent: entry.parent,
                modification: entry.modification,
                created_roads: entry.created_roads,
                cost_params: entry.cost_params,
                metric: node.metric,
                step_cost: node.step_cost,
                cumulative_cost: node.cumulative_cost,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let doc = SessionDoc {
        schema_version: SCHEMA_VERSION,
        assignment_params: *tree.params(),
        cost_params: *cost_params,
        demands: tree.demands().clone(),
        root_network: NetworkDoc::from_network(&tree.root_node().network),
        states,
        next_state_id: tree.next_state_id(),
        next_road_id: tree.next_road_id(),
    };
    to_canonical_json(&doc)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REPLAY_TOLERANCE * a.abs().max(b.abs()).max(1.0)
}

/// Rebuilds a session by replaying its log. Every replayed metric must
/// match the saved one.
pub fn load_session(text: &str) -> Result<(StateTree, CostParams)> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    match value.get("schema_version").and_then(serde_json::Value::as_u64) {
        Some(SCHEMA_VERSION) => {}
        Some(other) => return Err(Error::SchemaVersion(other)),
        None => {
            return Err(Error::Referential(
                "schema_version is missing or not an integer".into(),
            ))
        }
    }
    let doc: SessionDoc = serde_json::from_value(value)?;
    doc.assignment_params.validate()?;
    doc.cost_params.validate()?;

    let mut seen = std::collections::BTreeSet::new();
    for s in &doc.states {
        if s.id == StateId(0) || !seen.insert(s.id) {
            return Err(Error::Referential(format!("state {} appears twice", s.id)));
        }
        if s.id >= doc.next_state_id {
            return Err(Error::Referential(format!(
                "state {} is not below next_state_id {}",
                s.id, doc.next_state_id
            )));
        }
    }
    for s in &doc.states {
        if s.parent != StateId(0) && !seen.contains(&s.parent) {
            return Err(Error::Referential(format!(
                "state {} cites missing parent {}",
                s.id, s.parent
            )));
        }
        if s.parent >= s.id {
            return Err(Error::Referential(format!(
                "state {} has parent {} that was not created before it",
                s.id, s.parent
            )));
        }
    }

    let log: Vec<LogEntry> = doc
        .states
        .iter()
        .map(|s| LogEntry {
            id: s.id,
            parent: s.parent,
            modification: s.modification.clone(),
            created_roads: s.created_roads.clone(),
            cost_params: s.cost_params,
        })
        .collect();
    let network = doc.root_network.into_network()?;
    let tree = StateTree::replay(
        network,
        doc.demands,
        doc.assignment_params,
        &log,
        doc.next_state_id,
        doc.next_road_id,
    )?;

    for s in &doc.states {
        let node = tree.node(s.id)?;
        if !close(node.metric, s.metric) {
            return Err(Error::ReplayMismatch {
                state: s.id,
                saved: s.metric,
                replayed: node.metric,
            });
        }
        if !close(node.step_cost, s.step_cost) || !close(node.cumulative_cost, s.cumulative_cost) {
            return Err(Error::Referential(format!(
                "state {} saved costs {}/{} disagree with replayed {}/{}",
                s.id, s.step_cost, s.cumulative_cost, node.step_cost, node.cumulative_cost
            )));
        }
    }
    Ok((tree, doc.cost_params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets;
    use crate::network::{NewRoad, NodeId, RoadKind};

    fn sample() -> (StateTree, CostParams) {
        let b = datasets::braess();
        let mut tree = StateTree::create(b.network, b.demands, AssignmentParams::default()).unwrap();
        let c = CostParams::default();
        let a = tree
            .apply_modification(tree.root(), Modification::CloseRoad { road: RoadId(3) }, &c)
            .unwrap();
        let tunnel = Modification::BuildRoad(NewRoad {
            from: NodeId(2),
            to: NodeId(3),
            two_way: true,
            kind: RoadKind::Tunnel,
            capacity: None,
            fftt: None,
        });
        let built = tree.apply_modification(a, tunnel, &c).unwrap();
        tree.apply_modification(
            tree.root(),
            Modification::SetCapacity {
                road: RoadId(2),
                capacity: 600.0,
            },
            &c,
        )
        .unwrap();
        // deleting the built branch leaves a gap in both id sequences
        tree.delete_state(built).unwrap();
        tree.apply_modification(
            a,
            Modification::SetFftt {
                road: RoadId(5),
                fftt: 4.5,
            },
            &c,
        )
        .unwrap();
        (tree, c)
    }

    #[test]
    fn float_format_round_trips() {
        for v in [0.1f64, 1.0 / 3.0, 1e-300, 123456789.123, -2.5e17, 0.0] {
            let s = to_canonical_json(&v).unwrap();
            let back: f64 = serde_json::from_str(s.trim_end()).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn canonical_shape() {
        let (tree, c) = sample();
        let text = save_session(&tree, &c).unwrap();
        assert!(text.ends_with("}\n"));
        assert_eq!(text.matches('\n').count(), 1);
        assert!(text.starts_with("{\"assignment_params\":"));
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (tree, c) = sample();
        let text = save_session(&tree, &c).unwrap();
        let (loaded, lc) = load_session(&text).unwrap();
        assert_eq!(lc, c);
        assert_eq!(loaded.len(), tree.len());
        assert_eq!(loaded.next_state_id(), tree.next_state_id());
        assert_eq!(loaded.next_road_id(), tree.next_road_id());
        assert_eq!(save_session(&loaded, &lc).unwrap(), text);
    }

    #[test]
    fn ids_are_not_reused_after_load() {
        let (tree, c) = sample();
        let (mut loaded, _) = load_session(&save_session(&tree, &c).unwrap()).unwrap();
        let next = loaded.next_road_id();
        assert_eq!(next, RoadId(8));
        let s = loaded
            .apply_modification(
                loaded.root(),
                Modification::BuildRoad(NewRoad {
                    from: NodeId(2),
                    to: NodeId(3),
                    two_way: false,
                    kind: RoadKind::Surface,
                    capacity: None,
                    fftt: None,
                }),
                &c,
            )
            .unwrap();
        assert_eq!(s, StateId(5));
        assert_eq!(loaded.node(s).unwrap().created_roads, vec![RoadId(8)]);
    }

    #[test]
    fn tunnel_build_survives_round_trip() {
        let b = datasets::braess();
        let mut tree = StateTree::create(b.network, b.demands, AssignmentParams::default()).unwrap();
        let c = CostParams::default();
        let tunnel = Modification::BuildRoad(NewRoad {
            from: NodeId(2),
            to: NodeId(3),
            two_way: false,
            kind: RoadKind::Tunnel,
            capacity: None,
            fftt: None,
        });
        let s = tree.apply_modification(tree.root(), tunnel.clone(), &c).unwrap();
        let text = save_session(&tree, &c).unwrap();
        let (loaded, _) = load_session(&text).unwrap();
        assert_eq!(loaded.node(s).unwrap().modification.as_ref(), Some(&tunnel));
        assert_eq!(loaded.node(s).unwrap().step_cost, tree.node(s).unwrap().step_cost);
    }

    fn tamper(f: impl FnOnce(&mut serde_json::Value)) -> Result<(StateTree, CostParams)> {
        let (tree, c) = sample();
        let mut v: serde_json::Value =
            serde_json::from_str(&save_session(&tree, &c).unwrap()).unwrap();
        f(&mut v);
        load_session(&v.to_string())
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            tamper(|v| v["schema_version"] = 2.into()),
            Err(Error::SchemaVersion(2))
        ));
        assert!(matches!(
            tamper(|v| v["states"][0]["parent"] = 42.into()),
            Err(Error::Referential(_))
        ));
        assert!(matches!(
            tamper(|v| {
                let first = v["states"][0].clone();
                v["states"].as_array_mut().unwrap().push(first);
            }),
            Err(Error::Referential(_))
        ));
        assert!(matches!(
            tamper(|v| v["states"][0]["metric"] = 1.0.into()),
            Err(Error::ReplayMismatch { .. })
        ));
        assert!(matches!(
            tamper(|v| v["states"][0]["modification"]["road"] = 99.into()),
            Err(Error::UnknownRoad(RoadId(99)))
        ));
        assert!(matches!(load_session("{"), Err(Error::Json(_))));
        assert!(matches!(
            tamper(|v| v["bogus"] = true.into()),
            Err(Error::Json(_))
        ));
    }
}
