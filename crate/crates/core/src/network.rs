//! Road network domain model.
//!
//! A [`RoadNetwork`] is a directed graph of intersections and roads. Networks
//! are treated as immutable snapshots once built: every edit (capacity, free
//! flow time, closure, construction) returns a new network and leaves the
//! receiver untouched. Road ids are stable across edits and never reused
//! within a lineage.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius used for great-circle lengths.
pub const EARTH_RADIUS_KM: f64 = 6371.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoadId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for RoadId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// How intersection coordinates are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Projection {
    /// `x` is longitude and `y` latitude, in degrees. Lengths are great-circle.
    LonLat,
    /// `x`/`y` are planar kilometres. Lengths are euclidean.
    #[default]
    Planar,
}

impl FromStr for Projection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lonlat" => Ok(Projection::LonLat),
            "planar" => Ok(Projection::Planar),
            other => Err(Error::InvalidParams {
                name: "projection",
                reason: format!("expected `lonlat` or `planar`, got {other:?}"),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intersection {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoadKind {
    #[default]
    Surface,
    Tunnel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Road {
    pub id: RoadId,
    pub from: NodeId,
    pub to: NodeId,
    /// Vehicles per unit time.
    pub capacity: f64,
    /// Free flow travel time.
    pub fftt: f64,
    /// Explicit length from an input file. Takes precedence over geometry.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_km: Option<f64>,
    #[serde(default)]
    pub kind: RoadKind,
}

/// Haversine distance between two lon/lat points in degrees.
pub fn haversine_km(lon1: f64, lat1: f64, lon2: f64, lat2: f64) -> f64 {
    let (phi1, phi2) = (lat1.to_radians(), lat2.to_radians());
    let dphi = (lat2 - lat1).to_radians();
    let dlambda = (lon2 - lon1).to_radians();
    let a = (dphi / 2.0).sin().powi(2) + phi1.cos() * phi2.cos() * (dlambda / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_KM * a.sqrt().atan2((1.0 - a).sqrt())
}

/// Parameters of a road to construct. Missing capacity / free flow time are
/// derived from the existing roads of the network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewRoad {
    pub from: NodeId,
    pub to: NodeId,
    #[serde(default)]
    pub two_way: bool,
    /// Serialized as `road_kind` so it can sit next to a `kind` tag.
    #[serde(default, rename = "road_kind")]
    pub kind: RoadKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fftt: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoadNetwork {
    projection: Projection,
    nodes: BTreeMap<NodeId, Intersection>,
    roads: BTreeMap<RoadId, Road>,
    by_pair: BTreeMap<(NodeId, NodeId), RoadId>,
    next_road_id: u32,
}

impl Default for RoadNetwork {
    fn default() -> Self {
        Self::new(Projection::default())
    }
}

fn check_positive(what: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidAttribute { what, value })
    }
}

fn check_position(projection: Projection, node: &Intersection) -> Result<()> {
    let ok = node.x.is_finite()
        && node.y.is_finite()
        && match projection {
            Projection::LonLat => (-180.0..=180.0).contains(&node.x) && (-90.0..=90.0).contains(&node.y),
            Projection::Planar => true,
        };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidCoordinate {
            node: node.id,
            x: node.x,
            y: node.y,
        })
    }
}

impl RoadNetwork {
    pub fn new(projection: Projection) -> Self {
        Self {
            projection,
            nodes: BTreeMap::new(),
            roads: BTreeMap::new(),
            by_pair: BTreeMap::new(),
            next_road_id: 1,
        }
    }

    pub fn add_node(&mut self, node: Intersection) -> Result<()> {
        check_position(self.projection, &node)?;
        if self.nodes.contains_key(&node.id) {
            return Err(Error::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id, node);
        Ok(())
    }

    pub fn add_road(&mut self, road: Road) -> Result<()> {
        for n in [road.from, road.to] {
            if !self.nodes.contains_key(&n) {
                return Err(Error::UnknownNode(n));
            }
        }
        if road.from == road.to {
            return Err(Error::SelfLoop(road.from));
        }
        check_positive("capacity", road.capacity)?;
        check_positive("free flow time", road.fftt)?;
        if let Some(len) = road.length_km {
            if !(len.is_finite() && len >= 0.0) {
                return Err(Error::InvalidAttribute {
                    what: "length",
                    value: len,
                });
            }
        }
        if self.roads.contains_key(&road.id) {
            return Err(Error::DuplicateRoadId(road.id));
        }
        if self.by_pair.contains_key(&(road.from, road.to)) {
            return Err(Error::DuplicateRoad {
                from: road.from,
                to: road.to,
            });
        }
        self.by_pair.insert((road.from, road.to), road.id);
        self.next_road_id = self.next_road_id.max(road.id.0 + 1);
        self.roads.insert(road.id, road);
        Ok(())
    }

    pub fn projection(&self) -> Projection {
        self.projection
    }

    pub fn nodes(&self) -> impl ExactSizeIterator<Item = &Intersection> + '_ {
        self.nodes.values()
    }

    pub fn roads(&self) -> impl ExactSizeIterator<Item = &Road> + '_ {
        self.roads.values()
    }

    pub fn node(&self, id: NodeId) -> Option<&Intersection> {
        self.nodes.get(&id)
    }

    pub fn road(&self, id: RoadId) -> Option<&Road> {
        self.roads.get(&id)
    }

    pub fn road_between(&self, from: NodeId, to: NodeId) -> Option<&Road> {
        self.by_pair.get(&(from, to)).and_then(|id| self.roads.get(id))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn road_count(&self) -> usize {
        self.roads.len()
    }

    /// Smallest id that has never been handed out in this network's lineage.
    pub fn next_road_id(&self) -> RoadId {
        RoadId(self.next_road_id)
    }

    pub(crate) fn reserve_road_ids(&mut self, next: RoadId) {
        self.next_road_id = self.next_road_id.max(next.0);
    }

    fn require_road(&self, id: RoadId) -> Result<&Road> {
        self.roads.get(&id).ok_or(Error::UnknownRoad(id))
    }

    fn require_node(&self, id: NodeId) -> Result<&Intersection> {
        self.nodes.get(&id).ok_or(Error::UnknownNode(id))
    }

    /// Distance between two nodes under the network's projection.
    pub fn distance_km(&self, a: NodeId, b: NodeId) -> Result<f64> {
        let (a, b) = (self.require_node(a)?, self.require_node(b)?);
        Ok(match self.projection {
            Projection::LonLat => haversine_km(a.x, a.y, b.x, b.y),
            Projection::Planar => (a.x - b.x).hypot(a.y - b.y),
        })
    }

    fn length_of(&self, road: &Road) -> Result<f64> {
        match road.length_km {
            Some(len) => Ok(len),
            None => self.distance_km(road.from, road.to),
        }
    }

    /// Length of a road in kilometres: the file-supplied value if present,
    /// otherwise the distance between its endpoints.
    pub fn road_length_km(&self, road: RoadId) -> Result<f64> {
        self.length_of(self.require_road(road)?)
    }

    /// Returns a copy with node positions replaced. Every node must have a
    /// coordinate.
    pub fn with_positions(
        &self,
        coords: &BTreeMap<NodeId, (f64, f64)>,
        projection: Projection,
    ) -> Result<RoadNetwork> {
        let missing: Vec<NodeId> = self
            .nodes
            .keys()
            .filter(|id| !coords.contains_key(id))
            .copied()
            .collect();
        if !missing.is_empty() {
            return Err(Error::MissingCoordinates(missing));
        }
        let mut out = self.clone();
        out.projection = projection;
        for node in out.nodes.values_mut() {
            let (x, y) = coords[&node.id];
            node.x = x;
            node.y = y;
            check_position(projection, node)?;
        }
        Ok(out)
    }

    /// Capacity edit (expand or narrow).
    pub fn set_capacity(&self, road: RoadId, capacity: f64) -> Result<RoadNetwork> {
        self.require_road(road)?;
        check_positive("capacity", capacity)?;
        let mut out = self.clone();
        out.roads.get_mut(&road).expect("checked").capacity = capacity;
        Ok(out)
    }

    /// Free flow time edit (improve or restrict).
    pub fn set_fftt(&self, road: RoadId, fftt: f64) -> Result<RoadNetwork> {
        self.require_road(road)?;
        check_positive("free flow time", fftt)?;
        let mut out = self.clone();
        out.roads.get_mut(&road).expect("checked").fftt = fftt;
        Ok(out)
    }

    /// Removes a road. Its endpoints stay in the network even if isolated.
    pub fn close_road(&self, road: RoadId) -> Result<RoadNetwork> {
        let r = self.require_road(road)?;
        let pair = (r.from, r.to);
        let mut out = self.clone();
        out.roads.remove(&road);
        out.by_pair.remove(&pair);
        Ok(out)
    }

    /// Default `(capacity, fftt)` for a new road of the given length: the mean
    /// capacity of existing roads, and a free flow time proportional to length
    /// at the network's mean time-per-length ratio.
    pub fn default_road_attributes(&self, length_km: f64) -> Result<(f64, f64)> {
        if self.roads.is_empty() {
            return Err(Error::EmptyNetwork);
        }
        let n = self.roads.len() as f64;
        let mut cap = 0.0;
        let mut fftt = 0.0;
        let mut len = 0.0;
        for road in self.roads.values() {
            cap += road.capacity;
            fftt += road.fftt;
            len += self.length_of(road)?;
        }
        let (mean_cap, mean_fftt, mean_len) = (cap / n, fftt / n, len / n);
        if mean_len <= 0.0 {
            return Err(Error::InvalidAttribute {
                what: "mean road length",
                value: mean_len,
            });
        }
        Ok((mean_cap, mean_fftt / mean_len * length_km))
    }

    /// Builds a road (two when `two_way`), allocating ids from
    /// [`next_road_id`](Self::next_road_id).
    pub fn build_road(&self, spec: &NewRoad) -> Result<(RoadNetwork, Vec<RoadId>)> {
        self.build_road_with_ids(spec, self.next_road_id())
    }

    /// Like [`build_road`](Self::build_road) but allocates ids starting at
    /// `first_id`, for callers that manage ids across several networks.
    pub fn build_road_with_ids(
        &self,
        spec: &NewRoad,
        first_id: RoadId,
    ) -> Result<(RoadNetwork, Vec<RoadId>)> {
        self.require_node(spec.from)?;
        self.require_node(spec.to)?;
        if spec.from == spec.to {
            return Err(Error::SelfLoop(spec.from));
        }
        let mut pairs = vec![(spec.from, spec.to)];
        if spec.two_way {
            pairs.push((spec.to, spec.from));
        }
        for &(from, to) in &pairs {
            if self.by_pair.contains_key(&(from, to)) {
                return Err(Error::DuplicateRoad { from, to });
            }
        }

        let length = self.distance_km(spec.from, spec.to)?;
        let (capacity, fftt) = match (spec.capacity, spec.fftt) {
            (Some(c), Some(t)) => (c, t),
            (c, t) => {
                let (dc, dt) = self.default_road_attributes(length)?;
                (c.unwrap_or(dc), t.unwrap_or(dt))
            }
        };

        let first = first_id.0.max(self.next_road_id);
        let mut out = self.clone();
        let mut ids = Vec::with_capacity(pairs.len());
        for (i, (from, to)) in pairs.into_iter().enumerate() {
            let id = RoadId(first + i as u32);
            out.add_road(Road {
                id,
                from,
                to,
                capacity,
                fftt,
                length_km: None,
                kind: spec.kind,
            })?;
            ids.push(id);
        }
        Ok((out, ids))
    }

    /// Structural equivalence ignoring road ids: same nodes, and the same
    /// roads by (from, to) with equal attributes and lengths.
    pub fn equivalent(&self, other: &RoadNetwork) -> bool {
        if self.nodes != other.nodes || self.by_pair.len() != other.by_pair.len() {
            return false;
        }
        self.by_pair.iter().all(|(pair, id)| {
            let a = &self.roads[id];
            let Some(b) = other.road_between(pair.0, pair.1) else {
                return false;
            };
            a.capacity == b.capacity
                && a.fftt == b.fftt
                && a.kind == b.kind
                && self.length_of(a).ok() == other.length_of(b).ok()
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OdPair {
    pub origin: NodeId,
    pub destination: NodeId,
}

impl OdPair {
    pub fn new(origin: NodeId, destination: NodeId) -> Self {
        Self {
            origin,
            destination,
        }
    }
}

impl fmt::Display for OdPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.origin, self.destination)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Demand {
    pub origin: NodeId,
    pub destination: NodeId,
    pub trips: f64,
}

/// Travel demand keyed by OD pair. Holds only positive entries.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Demand>", into = "Vec<Demand>")]
pub struct DemandTable {
    entries: BTreeMap<OdPair, f64>,
}

impl DemandTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry. Zero demand is skipped and reported as `Ok(false)`.
    pub fn insert(&mut self, od: OdPair, trips: f64) -> Result<bool> {
        if od.origin == od.destination {
            return Err(Error::InvalidDemand {
                od,
                reason: "origin equals destination",
            });
        }
        if !trips.is_finite() || trips < 0.0 {
            return Err(Error::InvalidDemand {
                od,
                reason: "trips must be a nonnegative number",
            });
        }
        if self.entries.contains_key(&od) {
            return Err(Error::InvalidDemand {
                od,
                reason: "duplicate OD pair",
            });
        }
        if trips == 0.0 {
            return Ok(false);
        }
        self.entries.insert(od, trips);
        Ok(true)
    }

    pub fn get(&self, od: &OdPair) -> Option<f64> {
        self.entries.get(od).copied()
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (OdPair, f64)> + '_ {
        self.entries.iter().map(|(od, t)| (*od, *t))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.entries.values().sum()
    }
}

impl TryFrom<Vec<Demand>> for DemandTable {
    type Error = Error;

    fn try_from(rows: Vec<Demand>) -> Result<Self> {
        let mut table = DemandTable::new();
        for d in rows {
            table.insert(OdPair::new(d.origin, d.destination), d.trips)?;
        }
        Ok(table)
    }
}

impl From<DemandTable> for Vec<Demand> {
    fn from(table: DemandTable) -> Self {
        table
            .entries
            .into_iter()
            .map(|(od, trips)| Demand {
                origin: od.origin,
                destination: od.destination,
                trips,
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: u32, x: f64, y: f64) -> Intersection {
        Intersection { id: NodeId(id), x, y }
    }

    fn road(id: u32, from: u32, to: u32, capacity: f64, fftt: f64, len: Option<f64>) -> Road {
        Road {
            id: RoadId(id),
            from: NodeId(from),
            to: NodeId(to),
            capacity,
            fftt,
            length_km: len,
            kind: RoadKind::Surface,
        }
    }

    /// Planar triangle; every road has fftt 10 and length 2 km.
    fn homogeneous() -> RoadNetwork {
        let mut net = RoadNetwork::new(Projection::Planar);
        net.add_node(node(1, 0.0, 0.0)).unwrap();
        net.add_node(node(2, 2.0, 0.0)).unwrap();
        net.add_node(node(3, 2.0, 3.0)).unwrap();
        net.add_node(node(4, 5.0, 3.0)).unwrap();
        net.add_road(road(1, 1, 2, 5000.0, 10.0, None)).unwrap();
        net.add_road(road(2, 2, 1, 5000.0, 10.0, None)).unwrap();
        net.add_road(road(3, 3, 4, 5000.0, 10.0, Some(2.0))).unwrap();
        net
    }

    #[test]
    fn haversine_zero_and_equator_degree() {
        assert_eq!(haversine_km(12.0, 45.0, 12.0, 45.0), 0.0);
        // 2*pi*R/360, evaluated by hand.
        let expected = 2.0 * std::f64::consts::PI * 6371.0 / 360.0;
        assert!((haversine_km(0.0, 0.0, 1.0, 0.0) - expected).abs() < 1e-9);
        assert!((expected - 111.19).abs() < 0.01);
    }

    #[test]
    fn explicit_length_takes_precedence() {
        let net = homogeneous();
        assert_eq!(net.road_length_km(RoadId(3)).unwrap(), 2.0);
        assert_eq!(net.road_length_km(RoadId(1)).unwrap(), 2.0);
        assert!(matches!(
            net.road_length_km(RoadId(9)),
            Err(Error::UnknownRoad(_))
        ));
    }

    #[test]
    fn set_capacity_is_pure() {
        let net = homogeneous();
        let before = net.clone();
        let wider = net.set_capacity(RoadId(1), 7500.0).unwrap();
        assert_eq!(net, before);
        assert_eq!(wider.road(RoadId(1)).unwrap().capacity, 7500.0);
        assert_eq!(net.set_capacity(RoadId(1), 5000.0).unwrap(), net);
        assert!(net.set_capacity(RoadId(1), 0.0).is_err());
        assert!(net.set_capacity(RoadId(42), 10.0).is_err());
    }

    #[test]
    fn set_fftt_validates() {
        let net = homogeneous();
        assert_eq!(net.set_fftt(RoadId(2), 10.0).unwrap(), net);
        assert!(net.set_fftt(RoadId(2), -1.0).is_err());
        assert_eq!(net.set_fftt(RoadId(2), 5.0).unwrap().road(RoadId(2)).unwrap().fftt, 5.0);
    }

    #[test]
    fn close_keeps_nodes() {
        let net = homogeneous();
        let closed = net.close_road(RoadId(3)).unwrap();
        assert_eq!(closed.road_count(), 2);
        assert_eq!(closed.node_count(), 4);
        assert!(closed.road_between(NodeId(3), NodeId(4)).is_none());
        assert!(net.close_road(RoadId(3)).unwrap().close_road(RoadId(3)).is_err());
    }

    #[test]
    fn build_road_defaults() {
        let net = homogeneous();
        // mean fftt / mean length = 10 / 2
        let len = net.distance_km(NodeId(2), NodeId(4)).unwrap();
        let (out, ids) = net
            .build_road(&NewRoad {
                from: NodeId(2),
                to: NodeId(4),
                two_way: false,
                kind: RoadKind::Surface,
                capacity: None,
                fftt: None,
            })
            .unwrap();
        let r = out.road(ids[0]).unwrap();
        assert_eq!(r.capacity, 5000.0);
        assert!((r.fftt - 5.0 * len).abs() < 1e-12);
        assert_eq!(ids, vec![RoadId(4)]);
    }

    #[test]
    fn build_road_three_km_gets_fftt_15() {
        let mut net = RoadNetwork::new(Projection::Planar);
        net.add_node(node(1, 0.0, 0.0)).unwrap();
        net.add_node(node(2, 2.0, 0.0)).unwrap();
        net.add_node(node(3, 0.0, 3.0)).unwrap();
        net.add_road(road(1, 1, 2, 5000.0, 10.0, None)).unwrap();
        let (out, ids) = net
            .build_road(&NewRoad {
                from: NodeId(1),
                to: NodeId(3),
                two_way: true,
                kind: RoadKind::Tunnel,
                capacity: None,
                fftt: None,
            })
            .unwrap();
        assert_eq!(ids.len(), 2);
        for id in ids {
            let r = out.road(id).unwrap();
            assert!((r.fftt - 15.0).abs() < 1e-12);
            assert_eq!(r.capacity, 5000.0);
            assert_eq!(r.kind, RoadKind::Tunnel);
        }
    }

    #[test]
    fn build_road_errors() {
        let net = homogeneous();
        let dup = NewRoad {
            from: NodeId(1),
            to: NodeId(2),
            two_way: false,
            kind: RoadKind::Surface,
            capacity: None,
            fftt: None,
        };
        assert!(matches!(net.build_road(&dup), Err(Error::DuplicateRoad { .. })));
        // Reverse direction exists only for 3->4.
        let rev = NewRoad {
            from: NodeId(4),
            to: NodeId(3),
            two_way: true,
            ..dup.clone()
        };
        assert!(matches!(net.build_road(&rev), Err(Error::DuplicateRoad { .. })));
        let unknown = NewRoad {
            from: NodeId(9),
            ..dup.clone()
        };
        assert!(matches!(net.build_road(&unknown), Err(Error::UnknownNode(_))));

        let mut empty = RoadNetwork::new(Projection::Planar);
        empty.add_node(node(1, 0.0, 0.0)).unwrap();
        empty.add_node(node(2, 1.0, 0.0)).unwrap();
        let spec = NewRoad {
            from: NodeId(1),
            to: NodeId(2),
            ..dup.clone()
        };
        assert!(matches!(empty.build_road(&spec), Err(Error::EmptyNetwork)));
        let explicit = NewRoad {
            capacity: Some(100.0),
            fftt: Some(1.0),
            ..spec
        };
        assert!(empty.build_road(&explicit).is_ok());
    }

    #[test]
    fn close_then_rebuild_is_equivalent() {
        let net = homogeneous();
        let closed = net.close_road(RoadId(1)).unwrap();
        let (rebuilt, ids) = closed
            .build_road(&NewRoad {
                from: NodeId(1),
                to: NodeId(2),
                two_way: false,
                kind: RoadKind::Surface,
                capacity: Some(5000.0),
                fftt: Some(10.0),
            })
            .unwrap();
        assert_ne!(ids[0], RoadId(1), "ids are never reused");
        assert!(rebuilt.equivalent(&net));
        assert!(!closed.equivalent(&net));
    }

    #[test]
    fn road_invariants_enforced() {
        let mut net = homogeneous();
        assert!(net.add_road(road(9, 1, 1, 1.0, 1.0, None)).is_err());
        assert!(net.add_road(road(9, 1, 7, 1.0, 1.0, None)).is_err());
        assert!(net.add_road(road(1, 1, 3, 1.0, 1.0, None)).is_err());
        assert!(net.add_road(road(9, 1, 3, 0.0, 1.0, None)).is_err());
        let mut geo = RoadNetwork::new(Projection::LonLat);
        assert!(geo.add_node(node(1, 200.0, 0.0)).is_err());
        assert!(geo.add_node(node(1, 0.0, -91.0)).is_err());
    }

    #[test]
    fn demand_table_rules() {
        let mut t = DemandTable::new();
        let od = OdPair::new(NodeId(1), NodeId(2));
        assert!(t.insert(od, 10.0).unwrap());
        assert!(t.insert(od, 5.0).is_err());
        assert!(!t.insert(OdPair::new(NodeId(2), NodeId(1)), 0.0).unwrap());
        assert!(t.insert(OdPair::new(NodeId(3), NodeId(3)), 1.0).is_err());
        assert!(t.insert(OdPair::new(NodeId(3), NodeId(4)), -1.0).is_err());
        assert_eq!(t.len(), 1);
        assert_eq!(t.total(), 10.0);
    }
}
