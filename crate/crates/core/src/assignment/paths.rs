//! Path set construction.
//!
//! Small networks (at most [`EXHAUSTIVE_NODE_LIMIT`] nodes) get every simple
//! path. Larger ones get the `k` shortest loopless paths by free flow time,
//! found with Yen's algorithm. Either way the result is sorted by free flow
//! time, ties broken by the road id sequence.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NodeId, OdPair, RoadId, RoadNetwork};

pub const EXHAUSTIVE_NODE_LIMIT: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub od: OdPair,
    pub roads: Vec<RoadId>,
    pub flow: f64,
    pub travel_time: f64,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Edge {
    /// Road index into [`Graph::road_ids`].
    pub road: usize,
    pub to: usize,
}

/// Index-based view of a network used by the path search and the solver.
#[derive(Debug)]
pub(crate) struct Graph {
    pub node_ids: Vec<NodeId>,
    pub node_index: BTreeMap<NodeId, usize>,
    pub road_ids: Vec<RoadId>,
    pub fftt: Vec<f64>,
    pub capacity: Vec<f64>,
    /// Head node of each road.
    pub head: Vec<usize>,
    pub out: Vec<Vec<Edge>>,
}

impl Graph {
    pub fn new(network: &RoadNetwork) -> Self {
        let node_ids: Vec<NodeId> = network.nodes().map(|n| n.id).collect();
        let node_index: BTreeMap<NodeId, usize> =
            node_ids.iter().enumerate().map(|(i, id)| (*id, i)).collect();
        let mut out = vec![Vec::new(); node_ids.len()];
        let mut road_ids = Vec::with_capacity(network.road_count());
        let mut fftt = Vec::with_capacity(network.road_count());
        let mut capacity = Vec::with_capacity(network.road_count());
        let mut head = Vec::with_capacity(network.road_count());
        // roads() iterates in id order, so adjacency lists are id-ordered too
        for (i, road) in network.roads().enumerate() {
            road_ids.push(road.id);
            fftt.push(road.fftt);
            capacity.push(road.capacity);
            head.push(node_index[&road.to]);
            out[node_index[&road.from]].push(Edge {
                road: i,
                to: node_index[&road.to],
            });
        }
        Self {
            node_ids,
            node_index,
            road_ids,
            fftt,
            capacity,
            head,
            out,
        }
    }

    fn cost(&self, edges: &[usize]) -> f64 {
        edges.iter().map(|&e| self.fftt[e]).sum()
    }

    fn road_seq(&self, edges: &[usize]) -> Vec<RoadId> {
        edges.iter().map(|&e| self.road_ids[e]).collect()
    }

    pub fn edge_head(&self, road: usize) -> usize {
        self.head[road]
    }
}

/// Candidate path ordered by (cost, road ids).
#[derive(Debug, Clone)]
struct Candidate {
    cost: f64,
    roads: Vec<RoadId>,
    edges: Vec<usize>,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then_with(|| self.roads.cmp(&other.roads))
    }
}

#[derive(Copy, Clone, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: usize,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then node index
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest path by free flow time avoiding banned nodes and edges. Returns
/// the edge (road index) sequence.
fn dijkstra(
    graph: &Graph,
    source: usize,
    target: usize,
    banned_nodes: &[bool],
    banned_edges: &HashSet<usize>,
) -> Option<Vec<usize>> {
    let n = graph.node_ids.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut heap = BinaryHeap::new();
    dist[source] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: source,
    });
    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if cost > dist[node] {
            continue;
        }
        if node == target {
            break;
        }
        for edge in &graph.out[node] {
            if banned_nodes[edge.to] || banned_edges.contains(&edge.road) {
                continue;
            }
            let next = cost + graph.fftt[edge.road];
            if next < dist[edge.to] {
                dist[edge.to] = next;
                pred[edge.to] = Some((node, edge.road));
                heap.push(HeapEntry {
                    cost: next,
                    node: edge.to,
                });
            }
        }
    }
    if !dist[target].is_finite() {
        return None;
    }
    let mut edges = Vec::new();
    let mut at = target;
    while at != source {
        let (prev, road) = pred[at]?;
        edges.push(road);
        at = prev;
    }
    edges.reverse();
    Some(edges)
}

fn candidate(graph: &Graph, edges: Vec<usize>) -> Candidate {
    Candidate {
        cost: graph.cost(&edges),
        roads: graph.road_seq(&edges),
        edges,
    }
}

/// Every simple path from `source` to `target`.
fn all_simple_paths(graph: &Graph, source: usize, target: usize) -> Vec<Candidate> {
    fn walk(
        graph: &Graph,
        at: usize,
        target: usize,
        visited: &mut Vec<bool>,
        stack: &mut Vec<usize>,
        found: &mut Vec<Candidate>,
    ) {
        if at == target {
            found.push(candidate(graph, stack.clone()));
            return;
        }
        visited[at] = true;
        for edge in &graph.out[at] {
            if !visited[edge.to] {
                stack.push(edge.road);
                walk(graph, edge.to, target, visited, stack, found);
                stack.pop();
            }
        }
        visited[at] = false;
    }

    let mut found = Vec::new();
    let mut visited = vec![false; graph.node_ids.len()];
    walk(graph, source, target, &mut visited, &mut Vec::new(), &mut found);
    found.sort();
    found
}

/// Yen's k shortest loopless paths.
fn yen(graph: &Graph, source: usize, target: usize, k: usize) -> Vec<Candidate> {
    let no_nodes = vec![false; graph.node_ids.len()];
    let Some(first) = dijkstra(graph, source, target, &no_nodes, &HashSet::new()) else {
        return Vec::new();
    };
    let mut accepted = vec![candidate(graph, first)];
    let mut pending: BTreeSet<Candidate> = BTreeSet::new();
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    seen.insert(accepted[0].edges.clone());

    while accepted.len() < k {
        let prev = accepted.last().expect("nonempty").edges.clone();
        let mut node = source;
        let mut nodes_on_root = Vec::with_capacity(prev.len());
        for i in 0..prev.len() {
            let root = &prev[..i];
            let banned_edges: HashSet<usize> = accepted
                .iter()
                .filter(|p| p.edges.len() > i && &p.edges[..i] == root)
                .map(|p| p.edges[i])
                .collect();
            let mut banned_nodes = no_nodes.clone();
            for &n in &nodes_on_root {
                banned_nodes[n] = true;
            }
            if let Some(spur) = dijkstra(graph, node, target, &banned_nodes, &banned_edges) {
                let mut edges = root.to_vec();
                edges.extend(spur);
                if seen.insert(edges.clone()) {
                    pending.insert(candidate(graph, edges));
                }
            }
            nodes_on_root.push(node);
            node = graph.edge_head(prev[i]);
        }
        match pending.pop_first() {
            Some(next) => accepted.push(next),
            None => break,
        }
    }
    accepted.sort();
    accepted
}

/// Road index sequences of the path set for one OD pair.
pub(crate) fn path_set(graph: &Graph, od: OdPair, k_paths: usize) -> Result<Vec<Vec<usize>>> {
    let source = *graph
        .node_index
        .get(&od.origin)
        .ok_or(Error::UnknownNode(od.origin))?;
    let target = *graph
        .node_index
        .get(&od.destination)
        .ok_or(Error::UnknownNode(od.destination))?;
    if source == target {
        return Err(Error::InvalidDemand {
            od,
            reason: "origin equals destination",
        });
    }
    let found = if graph.node_ids.len() <= EXHAUSTIVE_NODE_LIMIT {
        all_simple_paths(graph, source, target)
    } else {
        yen(graph, source, target, k_paths.max(1))
    };
    if found.is_empty() {
        return Err(Error::Unreachable(vec![od]));
    }
    Ok(found.into_iter().map(|c| c.edges).collect())
}

/// Candidate paths for an OD pair, ordered by free flow time. Each path's
/// `travel_time` is its free flow time and `flow` is zero.
pub fn enumerate_paths(network: &RoadNetwork, od: OdPair, k_paths: usize) -> Result<Vec<Path>> {
    if k_paths == 0 {
        return Err(Error::InvalidParams {
            name: "k_paths",
            reason: "must be at least 1".into(),
        });
    }
    let graph = Graph::new(network);
    Ok(path_set(&graph, od, k_paths)?
        .into_iter()
        .map(|edges| Path {
            od,
            travel_time: graph.cost(&edges),
            roads: graph.road_seq(&edges),
            flow: 0.0,
        })
        .collect())
}
