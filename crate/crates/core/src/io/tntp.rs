//! Readers and a writer for the TNTP benchmark text formats: network (link
//! table), trips (OD matrix), and node coordinates.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use log::warn;

use crate::assignment::{BPR_ALPHA, BPR_POWER};
use crate::error::{Error, Result};
use crate::network::{
    DemandTable, Intersection, NodeId, OdPair, Projection, Road, RoadId, RoadKind, RoadNetwork,
};

#[derive(Debug, Clone)]
pub struct NetworkFile {
    pub zones: Option<usize>,
    pub first_thru_node: Option<u32>,
    pub network: RoadNetwork,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct TripsFile {
    pub zones: Option<usize>,
    pub declared_total: Option<f64>,
    /// Off-diagonal OD entries present in the file, zero entries included.
    pub od_entries: usize,
    /// Sum of all entries in the file.
    pub file_total: f64,
    pub demands: DemandTable,
    pub warnings: Vec<String>,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: std::str::FromStr>(line: usize, what: &str, tok: &str) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what} {tok:?}")))
}

/// `<TAG> value` metadata line.
fn metadata(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix('<')?;
    let (tag, value) = rest.split_once('>')?;
    Some((tag.trim(), value.trim()))
}

fn is_skippable(line: &str) -> bool {
    line.is_empty() || line.starts_with('~')
}

struct Body<'a> {
    tags: BTreeMap<String, (usize, &'a str)>,
    rows: Vec<(usize, &'a str)>,
}

/// Splits a TNTP document into its metadata block and payload rows, dropping
/// comments and blank lines. Line numbers are 1-based.
fn split_document(text: &str) -> Result<Body<'_>> {
    let mut tags = BTreeMap::new();
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut ended = false;
    for (no, line) in lines.by_ref() {
        if is_skippable(line) {
            continue;
        }
        let Some((tag, value)) = metadata(line) else {
            return Err(parse_err(no, format!("expected a metadata line, got {line:?}")));
        };
        if tag == "END OF METADATA" {
            ended = true;
            break;
        }
        tags.insert(tag.to_string(), (no, value));
    }
    if !ended {
        return Err(parse_err(text.lines().count().max(1), "missing <END OF METADATA>"));
    }
    let rows = lines.filter(|(_, l)| !is_skippable(l)).collect();
    Ok(Body { tags, rows })
}

fn tag_num<T: std::str::FromStr>(body: &Body<'_>, tag: &str) -> Result<Option<T>> {
    match body.tags.get(tag) {
        None => Ok(None),
        Some((no, v)) => parse_num(*no, tag, v).map(Some),
    }
}

/// Parses a TNTP network file. Roads get ids `1..=m` in row order; nodes
/// `1..=n` are created with zero positions (attach coordinates with
/// [`RoadNetwork::with_positions`]).
pub fn parse_network(text: &str) -> Result<NetworkFile> {
    let body = split_document(text)?;
    let declared_nodes: Option<usize> = tag_num(&body, "NUMBER OF NODES")?;
    let declared_links: Option<usize> = tag_num(&body, "NUMBER OF LINKS")?;
    let zones = tag_num(&body, "NUMBER OF ZONES")?;
    let first_thru_node = tag_num(&body, "FIRST THRU NODE")?;

    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(body.rows.len());
    for &(no, line) in &body.rows {
        let line = line.trim_end_matches(';');
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() < 5 {
            return Err(parse_err(no, format!("expected at least 5 columns, got {}", cols.len())));
        }
        let from: u32 = parse_num(no, "init_node", cols[0])?;
        let to: u32 = parse_num(no, "term_node", cols[1])?;
        let capacity: f64 = parse_num(no, "capacity", cols[2])?;
        let length: f64 = parse_num(no, "length", cols[3])?;
        let fftt: f64 = parse_num(no, "free_flow_time", cols[4])?;
        if !(capacity.is_finite() && capacity > 0.0) {
            return Err(parse_err(no, format!("capacity must be positive, got {capacity}")));
        }
        if !(fftt.is_finite() && fftt > 0.0) {
            return Err(parse_err(no, format!("free flow time must be positive, got {fftt}")));
        }
        if !(length.is_finite() && length >= 0.0) {
            return Err(parse_err(no, format!("length must be nonnegative, got {length}")));
        }
        if let (Some(b), Some(power)) = (cols.get(5), cols.get(6)) {
            let b: f64 = parse_num(no, "b", b)?;
            let power: f64 = parse_num(no, "power", power)?;
            if b != BPR_ALPHA || power != f64::from(BPR_POWER) {
                let msg = format!(
                    "line {no}: BPR coefficients ({b}, {power}) ignored, using ({BPR_ALPHA}, {BPR_POWER})"
                );
                warn!("{msg}");
                warnings.push(msg);
            }
        }
        rows.push((no, from, to, capacity, length, fftt));
    }

    if let Some(declared) = declared_links {
        if declared != rows.len() {
            return Err(Error::CountMismatch {
                line: body.tags["NUMBER OF LINKS"].0,
                what: "NUMBER OF LINKS",
                declared: declared as f64,
                parsed: rows.len() as f64,
            });
        }
    }
    let max_node = rows.iter().map(|r| r.1.max(r.2)).max().unwrap_or(0) as usize;
    let node_count = match declared_nodes {
        Some(n) => {
            if let Some(&(no, ..)) = rows.iter().find(|r| r.1 as usize > n || r.2 as usize > n) {
                return Err(parse_err(no, format!("node id exceeds NUMBER OF NODES ({n})")));
            }
            n
        }
        None => max_node,
    };

    let mut network = RoadNetwork::new(Projection::Planar);
    for id in 1..=node_count as u32 {
        network.add_node(Intersection {
            id: NodeId(id),
            x: 0.0,
            y: 0.0,
        })?;
    }
    for (i, &(no, from, to, capacity, length, fftt)) in rows.iter().enumerate() {
        network
            .add_road(Road {
                id: RoadId(i as u32 + 1),
                from: NodeId(from),
                to: NodeId(to),
                capacity,
                fftt,
                length_km: Some(length),
                kind: RoadKind::Surface,
            })
            .map_err(|e| parse_err(no, e.to_string()))?;
    }

    Ok(NetworkFile {
        zones,
        first_thru_node,
        network,
        warnings,
    })
}

/// Writes a network in TNTP network layout. Lengths are written explicitly
/// (computed from geometry where the road has none).
pub fn serialize_network(network: &RoadNetwork) -> String {
    let mut out = String::new();
    let nodes = network.nodes().map(|n| n.id.0).max().unwrap_or(0);
    let _ = writeln!(out, "<NUMBER OF ZONES> {nodes}");
    let _ = writeln!(out, "<NUMBER OF NODES> {nodes}");
    let _ = writeln!(out, "<FIRST THRU NODE> 1");
    let _ = writeln!(out, "<NUMBER OF LINKS> {}", network.road_count());
    let _ = writeln!(out, "<END OF METADATA>");
    let _ = writeln!(out);
    let _ = writeln!(
        out,
        "~\tinit_node\tterm_node\tcapacity\tlength\tfree_flow_time\tb\tpower\tspeed\ttoll\tlink_type\t;"
    );
    for road in network.roads() {
        let length = network.road_length_km(road.id).unwrap_or(0.0);
        let _ = writeln!(
            out,
            "\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t0\t0\t1\t;",
            road.from, road.to, road.capacity, length, road.fftt, BPR_ALPHA, BPR_POWER
        );
    }
    out
}

/// Parses a TNTP trips file into a demand table. Zero entries are skipped;
/// positive self pairs are dropped with a warning.
pub fn parse_trips(text: &str) -> Result<TripsFile> {
    let body = split_document(text)?;
    let zones = tag_num(&body, "NUMBER OF ZONES")?;
    let declared_total: Option<f64> = tag_num(&body, "TOTAL OD FLOW")?;

    let mut demands = DemandTable::new();
    let mut warnings = Vec::new();
    let mut origin: Option<u32> = None;
    let mut od_entries = 0;
    let mut file_total = 0.0;

    for &(no, line) in &body.rows {
        if let Some(rest) = line.strip_prefix("Origin") {
            origin = Some(parse_num(no, "origin", rest.trim())?);
            continue;
        }
        let Some(o) = origin else {
            return Err(parse_err(no, "destination entries before any `Origin` line"));
        };
        for entry in line.split(';').map(str::trim).filter(|e| !e.is_empty()) {
            let (d, v) = entry
                .split_once(':')
                .ok_or_else(|| parse_err(no, format!("malformed entry {entry:?}")))?;
            let d: u32 = parse_num(no, "destination", d.trim())?;
            let v: f64 = parse_num(no, "demand", v.trim())?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(parse_err(no, format!("demand must be nonnegative, got {v}")));
            }
            file_total += v;
            if d == o {
                if v > 0.0 {
                    let msg = format!("line {no}: dropped self pair {o}->{o} with demand {v}");
                    warn!("{msg}");
                    warnings.push(msg);
                }
                continue;
            }
            od_entries += 1;
            demands
                .insert(OdPair::new(NodeId(o), NodeId(d)), v)
                .map_err(|e| parse_err(no, e.to_string()))?;
        }
    }

    if let Some(declared) = declared_total {
        if (file_total - declared).abs() > 1e-6 * declared.abs().max(1.0) {
            return Err(Error::CountMismatch {
                line: body.tags["TOTAL OD FLOW"].0,
                what: "TOTAL OD FLOW",
                declared,
                parsed: file_total,
            });
        }
    }

    Ok(TripsFile {
        zones,
        declared_total,
        od_entries,
        file_total,
        demands,
        warnings,
    })
}

/// Parses a node coordinate file of `node x y ;` rows. A leading header row
/// (non-numeric first column) is skipped.
pub fn parse_coords(text: &str) -> Result<BTreeMap<NodeId, (f64, f64)>> {
    let mut coords = BTreeMap::new();
    let mut first = true;
    for (i, line) in text.lines().enumerate() {
        let no = i + 1;
        let line = line.trim();
        if is_skippable(line) {
            continue;
        }
        let cols: Vec<&str> = line
            .trim_end_matches(';')
            .split_whitespace()
            .collect();
        let is_header = cols.first().is_some_and(|c| c.parse::<u32>().is_err());
        if std::mem::take(&mut first) && is_header {
            continue;
        }
        if cols.len() < 3 {
            return Err(parse_err(no, format!("expected `node x y`, got {line:?}")));
        }
        let id = NodeId(parse_num(no, "node", cols[0])?);
        let x: f64 = parse_num(no, "x", cols[1])?;
        let y: f64 = parse_num(no, "y", cols[2])?;
        if coords.insert(id, (x, y)).is_some() {
            return Err(Error::DuplicateNode(id));
        }
    }
    Ok(coords)
}

/// Parses a network file and, when given, attaches node coordinates.
pub fn load_network(
    network_text: &str,
    coords_text: Option<&str>,
    projection: Projection,
) -> Result<RoadNetwork> {
    let file = parse_network(network_text)?;
    match coords_text {
        Some(text) => file.network.with_positions(&parse_coords(text)?, projection),
        None => Ok(file.network),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL_NET: &str = "<NUMBER OF NODES> 3
<NUMBER OF LINKS> 3
<END OF METADATA>
~ init term cap len fftt b power speed toll type ;
1 2 100 1.5 2 0.15 4 0 0 1 ;
2 3 200 2.5 3 0.15 4 0 0 1 ;
3 1 300 3.5 4 1 2 0 0 1 ;
";

    #[test]
    fn parses_small_network() {
        let file = parse_network(SMALL_NET).unwrap();
        let net = &file.network;
        assert_eq!(net.node_count(), 3);
        assert_eq!(net.road_count(), 3);
        let r2 = net.road(RoadId(2)).unwrap();
        assert_eq!((r2.from, r2.to, r2.capacity, r2.fftt), (NodeId(2), NodeId(3), 200.0, 3.0));
        assert_eq!(net.road_length_km(RoadId(2)).unwrap(), 2.5);
        assert_eq!(file.warnings.len(), 1, "row 3 has non-default BPR columns");
    }

    #[test]
    fn link_count_mismatch() {
        let text = SMALL_NET.replace("<NUMBER OF LINKS> 3", "<NUMBER OF LINKS> 5");
        assert!(matches!(
            parse_network(&text),
            Err(Error::CountMismatch { declared, parsed, .. }) if declared == 5.0 && parsed == 3.0
        ));
    }

    #[test]
    fn zero_capacity_names_line() {
        let text = SMALL_NET.replace("2 3 200", "2 3 0");
        match parse_network(&text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_rows() {
        let text = SMALL_NET.replace("2 3 200 2.5 3", "2 3 abc 2.5 3");
        assert!(matches!(parse_network(&text), Err(Error::Parse { line: 6, .. })));
        let text = SMALL_NET.replace("<END OF METADATA>\n", "");
        assert!(matches!(parse_network(&text), Err(Error::Parse { .. })));
        let text = SMALL_NET.replace("3 1 300", "3 9 300");
        assert!(matches!(parse_network(&text), Err(Error::Parse { line: 7, .. })));
    }

    #[test]
    fn trips_basic() {
        let text = "<NUMBER OF ZONES> 3
<TOTAL OD FLOW> 60
<END OF METADATA>

Origin 1
    1 : 0.0;    2 : 10.0;    3 : 20.0;
Origin 2
    1 : 30.0;   3 : 0;
";
        let trips = parse_trips(text).unwrap();
        assert_eq!(trips.demands.len(), 3);
        assert_eq!(trips.od_entries, 4);
        assert_eq!(trips.demands.total(), 60.0);
        assert_eq!(trips.demands.get(&OdPair::new(NodeId(2), NodeId(1))), Some(30.0));
    }

    #[test]
    fn trips_only_zeros() {
        let text = "<TOTAL OD FLOW> 0\n<END OF METADATA>\nOrigin 1\n 2 : 0.0; 3 : 0.0;\n";
        let trips = parse_trips(text).unwrap();
        assert!(trips.demands.is_empty());
    }

    #[test]
    fn trips_self_pair_dropped() {
        let text = "<TOTAL OD FLOW> 15\n<END OF METADATA>\nOrigin 1\n 1 : 5.0; 2 : 10.0;\n";
        let trips = parse_trips(text).unwrap();
        assert_eq!(trips.demands.len(), 1);
        assert_eq!(trips.warnings.len(), 1);
    }

    #[test]
    fn trips_total_mismatch() {
        let text = "<TOTAL OD FLOW> 11\n<END OF METADATA>\nOrigin 1\n 2 : 10.0;\n";
        assert!(matches!(parse_trips(text), Err(Error::CountMismatch { .. })));
        let text = "<END OF METADATA>\n 2 : 10.0;\n";
        assert!(matches!(parse_trips(text), Err(Error::Parse { line: 2, .. })));
        let text = "<END OF METADATA>\nOrigin 1\n 2 = 10.0;\n";
        assert!(matches!(parse_trips(text), Err(Error::Parse { line: 3, .. })));
    }

    #[test]
    fn coords() {
        let text = "Node X Y ;\n1 0.5 1.5 ;\n2 -3 4 ;\n";
        let c = parse_coords(text).unwrap();
        assert_eq!(c[&NodeId(2)], (-3.0, 4.0));
        assert!(matches!(
            parse_coords("1 0 0 ;\n1 1 1 ;\n"),
            Err(Error::DuplicateNode(NodeId(1)))
        ));
        assert!(matches!(parse_coords("1 0 0 ;\n2 x 1 ;\n"), Err(Error::Parse { line: 2, .. })));

        let net = parse_network(SMALL_NET).unwrap().network;
        match net.with_positions(&c, Projection::Planar) {
            Err(Error::MissingCoordinates(m)) => assert_eq!(m, vec![NodeId(3)]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialize_round_trip() {
        let net = parse_network(SMALL_NET).unwrap().network;
        let again = parse_network(&serialize_network(&net)).unwrap().network;
        let tuples = |n: &RoadNetwork| {
            n.roads()
                .map(|r| (r.from, r.to, r.capacity, r.fftt, n.road_length_km(r.id).unwrap()))
                .collect::<Vec<_>>()
        };
        assert_eq!(tuples(&net), tuples(&again));
    }
}
