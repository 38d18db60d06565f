//! Cross-state comparisons: per-road indicators over a selection of states,
//! filtering and ranking, histograms, per-cell diffs against the initial
//! state, and attribution of a road's traffic to origin and destination
//! nodes.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{NodeId, RoadId};
use crate::tree::{StateId, StateTree};

pub const DEFAULT_HISTOGRAM_BINS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indicator {
    AvgFlow,
    AvgFlowCapRatio,
    AvgTime,
    AvgFfttTimeRatio,
    ScopeFlow,
    ScopeFlowCapRatio,
    ScopeTime,
    ScopeFfttTimeRatio,
}

impl Indicator {
    pub const ALL: [Indicator; 8] = [
        Indicator::AvgFlow,
        Indicator::AvgFlowCapRatio,
        Indicator::AvgTime,
        Indicator::AvgFfttTimeRatio,
        Indicator::ScopeFlow,
        Indicator::ScopeFlowCapRatio,
        Indicator::ScopeTime,
        Indicator::ScopeFfttTimeRatio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Indicator::AvgFlow => "avg_flow",
            Indicator::AvgFlowCapRatio => "avg_flow_cap_ratio",
            Indicator::AvgTime => "avg_time",
            Indicator::AvgFfttTimeRatio => "avg_fftt_time_ratio",
            Indicator::ScopeFlow => "scope_flow",
            Indicator::ScopeFlowCapRatio => "scope_flow_cap_ratio",
            Indicator::ScopeTime => "scope_time",
            Indicator::ScopeFfttTimeRatio => "scope_fftt_time_ratio",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Indicator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Indicator::ALL
            .into_iter()
            .find(|i| i.name() == s)
            .ok_or_else(|| Error::UnknownIndicator(s.to_string()))
    }
}

/// Means and ranges of a road's status over the selected states that
/// contain it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadIndicators {
    pub road: RoadId,
    /// Number of selected states in which the road exists.
    pub states_present: usize,
    pub avg_flow: f64,
    pub avg_flow_cap_ratio: f64,
    pub avg_time: f64,
    pub avg_fftt_time_ratio: f64,
    pub scope_flow: f64,
    pub scope_flow_cap_ratio: f64,
    pub scope_time: f64,
    pub scope_fftt_time_ratio: f64,
}

impl RoadIndicators {
    pub fn get(&self, indicator: Indicator) -> f64 {
        match indicator {
            Indicator::AvgFlow => self.avg_flow,
            Indicator::AvgFlowCapRatio => self.avg_flow_cap_ratio,
            Indicator::AvgTime => self.avg_time,
            Indicator::AvgFfttTimeRatio => self.avg_fftt_time_ratio,
            Indicator::ScopeFlow => self.scope_flow,
            Indicator::ScopeFlowCapRatio => self.scope_flow_cap_ratio,
            Indicator::ScopeTime => self.scope_time,
            Indicator::ScopeFfttTimeRatio => self.scope_fftt_time_ratio,
        }
    }
}

#[derive(Default)]
struct Stat {
    sum: f64,
    min: f64,
    max: f64,
}

impl Stat {
    fn push(&mut self, first: bool, v: f64) {
        if first {
            *self = Stat { sum: v, min: v, max: v };
        } else {
            self.sum += v;
            self.min = self.min.min(v);
            self.max = self.max.max(v);
        }
    }

    fn mean(&self, n: usize) -> f64 {
        self.sum / n as f64
    }

    fn scope(&self) -> f64 {
        self.max - self.min
    }
}

fn selection(tree: &StateTree, selected: &[StateId]) -> Result<BTreeSet<StateId>> {
    if selected.is_empty() {
        return Err(Error::EmptyInput("state selection"));
    }
    for id in selected {
        tree.node(*id)?;
    }
    Ok(selected.iter().copied().collect())
}

/// One entry per road present in at least one selected state, in road id
/// order.
pub fn compute_indicators(tree: &StateTree, selected: &[StateId]) -> Result<Vec<RoadIndicators>> {
    let states = selection(tree, selected)?;
    // flow, flow/cap, time, fftt/time
    let mut acc: BTreeMap<RoadId, (usize, [Stat; 4])> = BTreeMap::new();
    for id in &states {
        let node = tree.node(*id)?;
        for road in node.network.roads() {
            let status = node
                .assignment
                .status(road.id)
                .expect("assignment covers every road of its network");
            let values = [
                status.actual_volume,
                status.actual_volume / road.capacity,
                status.actual_time,
                road.fftt / status.actual_time,
            ];
            let (count, stats) = acc.entry(road.id).or_default();
            for (stat, v) in stats.iter_mut().zip(values) {
                stat.push(*count == 0, v);
            }
            *count += 1;
        }
    }
    Ok(acc
        .into_iter()
        .map(|(road, (n, [flow, ratio, time, fftt_ratio]))| RoadIndicators {
            road,
            states_present: n,
            avg_flow: flow.mean(n),
            avg_flow_cap_ratio: ratio.mean(n),
            avg_time: time.mean(n),
            avg_fftt_time_ratio: fftt_ratio.mean(n),
            scope_flow: flow.scope(),
            scope_flow_cap_ratio: ratio.scope(),
            scope_time: time.scope(),
            scope_fftt_time_ratio: fftt_ratio.scope(),
        })
        .collect())
}

/// Roads passing every inclusive `[lo, hi]` filter, ordered by `sort_key`
/// with ties broken by ascending road id.
pub fn filter_and_rank(
    indicators: &[RoadIndicators],
    filters: &BTreeMap<Indicator, (f64, f64)>,
    sort_key: Indicator,
    descending: bool,
) -> Result<Vec<RoadId>> {
    for (indicator, (lo, hi)) in filters {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::InvalidParams {
                name: "filter range",
                reason: format!("{indicator}: lower bound {lo} exceeds upper bound {hi}"),
            });
        }
    }
    let mut kept: Vec<&RoadIndicators> = indicators
        .iter()
        .filter(|ri| {
            filters.iter().all(|(ind, (lo, hi))| {
                let v = ri.get(*ind);
                *lo <= v && v <= *hi
            })
        })
        .collect();
    kept.sort_by(|a, b| {
        let (va, vb) = (a.get(sort_key), b.get(sort_key));
        let by_value = if descending {
            vb.total_cmp(&va)
        } else {
            va.total_cmp(&vb)
        };
        by_value.then(a.road.cmp(&b.road))
    });
    Ok(kept.into_iter().map(|ri| ri.road).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    /// Exclusive except for the last bin.
    pub hi: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`. All-equal input yields a single
/// bin.
pub fn histogram(values: &[f64], bin_count: usize) -> Result<Vec<HistogramBin>> {
    if values.is_empty() {
        return Err(Error::EmptyInput("histogram input"));
    }
    if bin_count == 0 {
        return Err(Error::InvalidParams {
            name: "bin_count",
            reason: "must be at least 1".into(),
        });
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidAttribute {
            what: "histogram value",
            value: *bad,
        });
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        return Ok(vec![HistogramBin {
            lo: min,
            hi: max,
            count: values.len(),
        }]);
    }
    let width = (max - min) / bin_count as f64;
    let mut bins: Vec<HistogramBin> = (0..bin_count)
        .map(|i| HistogramBin {
            lo: min + i as f64 * width,
            hi: if i + 1 == bin_count {
                max
            } else {
                min + (i + 1) as f64 * width
            },
            count: 0,
        })
        .collect();
    for &v in values {
        let mut i = (((v - min) / width) as usize).min(bin_count - 1);
        // keep bin membership consistent with the reported edges
        while i > 0 && v < bins[i].lo {
            i -= 1;
        }
        while i + 1 < bin_count && v >= bins[i + 1].lo {
            i += 1;
        }
        bins[i].count += 1;
    }
    Ok(bins)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct OdThrough {
    /// Flow on the road whose trips start at this node.
    pub originating: f64,
    /// Flow on the road whose trips end at this node.
    pub terminating: f64,
}

/// Attributes the equilibrium flow on `road` in `state` to the origin and
/// destination nodes of the paths that use it.
pub fn od_through_road(
    tree: &StateTree,
    state: StateId,
    road: RoadId,
) -> Result<BTreeMap<NodeId, OdThrough>> {
    let node = tree.node(state)?;
    if node.network.road(road).is_none() {
        return Err(Error::UnknownRoad(road));
    }
    let mut out: BTreeMap<NodeId, OdThrough> = BTreeMap::new();
    for od in &node.assignment.path_flows {
        for path in od.paths.iter().filter(|p| p.roads.contains(&road)) {
            out.entry(od.od.origin).or_default().originating += path.flow;
            out.entry(od.od.destination).or_default().terminating += path.flow;
        }
    }
    out.retain(|_, v| v.originating != 0.0 || v.terminating != 0.0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellStatus {
    pub road: RoadId,
    pub state: StateId,
    pub capacity: f64,
    pub volume: f64,
    pub fftt: f64,
    pub actual_time: f64,
    /// `time(initial) - time(state)`; positive is an improvement. `None` for
    /// roads absent from the initial state.
    pub delta_time_vs_initial: Option<f64>,
    pub new_road: bool,
}

/// One cell per (road, state) pair where the road exists, road-major.
pub fn cell_statuses(
    tree: &StateTree,
    states: &[StateId],
    roads: &[RoadId],
) -> Result<Vec<CellStatus>> {
    let nodes = states
        .iter()
        .map(|s| tree.node(*s))
        .collect::<Result<Vec<_>>>()?;
    let initial = tree.root_node();
    let mut cells = Vec::new();
    for &road in roads {
        let baseline = initial.assignment.status(road).map(|s| s.actual_time);
        let mut seen = baseline.is_some();
        for node in &nodes {
            let Some(r) = node.network.road(road) else {
                continue;
            };
            seen = true;
            let status = node
                .assignment
                .status(road)
                .expect("assignment covers every road of its network");
            cells.push(CellStatus {
                road,
                state: node.id,
                capacity: r.capacity,
                volume: status.actual_volume,
                fftt: r.fftt,
                actual_time: status.actual_time,
                delta_time_vs_initial: baseline.map(|t| t - status.actual_time),
                new_road: baseline.is_none(),
            });
        }
        if !seen {
            return Err(Error::UnknownRoad(road));
        }
    }
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::AssignmentParams;
    use crate::datasets;
    use crate::network::NewRoad;
    use crate::tree::{CostParams, Modification};
    use proptest::prelude::*;

    fn braess_with_children() -> (StateTree, StateId, StateId) {
        let b = datasets::braess();
        let mut tree = StateTree::create(b.network, b.demands, AssignmentParams::default()).unwrap();
        let c = CostParams::default();
        let closed = tree
            .apply_modification(tree.root(), Modification::CloseRoad { road: RoadId(3) }, &c)
            .unwrap();
        let built = tree
            .apply_modification(
                closed,
                Modification::BuildRoad(NewRoad {
                    from: NodeId(2),
                    to: NodeId(3),
                    two_way: false,
                    kind: Default::default(),
                    capacity: None,
                    fftt: None,
                }),
                &c,
            )
            .unwrap();
        (tree, closed, built)
    }

    fn ri(road: u32, flow: f64) -> RoadIndicators {
        RoadIndicators {
            road: RoadId(road),
            states_present: 1,
            avg_flow: flow,
            avg_flow_cap_ratio: flow / 100.0,
            avg_time: 1.0,
            avg_fftt_time_ratio: 1.0,
            scope_flow: 0.0,
            scope_flow_cap_ratio: 0.0,
            scope_time: 0.0,
            scope_fftt_time_ratio: 0.0,
        }
    }

    #[test]
    fn indicator_names_round_trip() {
        for i in Indicator::ALL {
            assert_eq!(i.name().parse::<Indicator>().unwrap(), i);
        }
        assert!(matches!("speed".parse::<Indicator>(), Err(Error::UnknownIndicator(_))));
    }

    #[test]
    fn single_state_degenerates() {
        let (tree, _, _) = braess_with_children();
        let root = tree.root_node();
        let ind = compute_indicators(&tree, &[tree.root()]).unwrap();
        assert_eq!(ind.len(), 5);
        for r in &ind {
            let s = root.assignment.status(r.road).unwrap();
            assert_eq!(r.avg_flow, s.actual_volume);
            assert_eq!(r.avg_time, s.actual_time);
            for scope in [r.scope_flow, r.scope_flow_cap_ratio, r.scope_time, r.scope_fftt_time_ratio] {
                assert_eq!(scope, 0.0);
            }
            assert!(r.avg_fftt_time_ratio > 0.0 && r.avg_fftt_time_ratio <= 1.0);
        }
    }

    #[test]
    fn absent_roads_use_present_states_only() {
        let (tree, closed, built) = braess_with_children();
        let ind = compute_indicators(&tree, &[tree.root(), closed, built]).unwrap();
        let road3 = ind.iter().find(|r| r.road == RoadId(3)).unwrap();
        assert_eq!(road3.states_present, 1);
        let road6 = ind.iter().find(|r| r.road == RoadId(6)).unwrap();
        assert_eq!(road6.states_present, 1);
        let road1 = ind.iter().find(|r| r.road == RoadId(1)).unwrap();
        assert_eq!(road1.states_present, 3);
        assert!(compute_indicators(&tree, &[]).is_err());
        assert!(compute_indicators(&tree, &[StateId(77)]).is_err());
    }

    #[test]
    fn mean_and_scope_of_two_values() {
        // flows {100, 300} -> mean 200, scope 200
        let mut s = Stat::default();
        s.push(true, 100.0);
        s.push(false, 300.0);
        assert_eq!(s.mean(2), 200.0);
        assert_eq!(s.scope(), 200.0);
    }

    #[test]
    fn rank_and_filter() {
        let inds = vec![ri(3, 50.0), ri(1, 50.0), ri(2, 80.0), ri(4, 0.0)];
        let all = filter_and_rank(&inds, &BTreeMap::new(), Indicator::AvgFlow, true).unwrap();
        assert_eq!(all, vec![RoadId(2), RoadId(1), RoadId(3), RoadId(4)]);
        let asc = filter_and_rank(&inds, &BTreeMap::new(), Indicator::AvgFlow, false).unwrap();
        assert_eq!(asc, vec![RoadId(4), RoadId(1), RoadId(3), RoadId(2)]);
        let zero = BTreeMap::from([(Indicator::AvgFlow, (0.0, 0.0))]);
        assert_eq!(filter_and_rank(&inds, &zero, Indicator::AvgFlow, true).unwrap(), vec![RoadId(4)]);
        let bad = BTreeMap::from([(Indicator::AvgFlow, (1.0, 0.0))]);
        assert!(filter_and_rank(&inds, &bad, Indicator::AvgFlow, true).is_err());
        let ratio = BTreeMap::from([(Indicator::AvgFlowCapRatio, (0.5, 0.8))]);
        assert_eq!(
            filter_and_rank(&inds, &ratio, Indicator::AvgFlow, false).unwrap(),
            vec![RoadId(1), RoadId(3), RoadId(2)]
        );
    }

    #[test]
    fn histogram_examples() {
        let h = histogram(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(h.len(), 2);
        assert_eq!((h[0].lo, h[0].hi, h[0].count), (1.0, 2.5, 2));
        assert_eq!((h[1].lo, h[1].hi, h[1].count), (2.5, 4.0, 2));
        let flat = histogram(&[7.0; 5], 20).unwrap();
        assert_eq!(flat.len(), 1);
        assert_eq!(flat[0].count, 5);
        assert!(histogram(&[], 3).is_err());
        assert!(histogram(&[1.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn histogram_counts_match_naive(values in prop::collection::vec(-1e3f64..1e3, 1..200), bins in 1usize..30) {
            let h = histogram(&values, bins).unwrap();
            prop_assert_eq!(h.iter().map(|b| b.count).sum::<usize>(), values.len());
            for (i, b) in h.iter().enumerate() {
                let last = i + 1 == h.len();
                let naive = values
                    .iter()
                    .filter(|&&v| b.lo <= v && (v < b.hi || (last && v <= b.hi)))
                    .count();
                prop_assert_eq!(naive, b.count);
            }
        }

        #[test]
        fn rank_is_subset_and_idempotent(flows in prop::collection::vec(0f64..100.0, 0..40), lo in 0f64..50.0, span in 0f64..60.0) {
            let inds: Vec<_> = flows.iter().enumerate().map(|(i, f)| ri(i as u32, *f)).collect();
            let filters = BTreeMap::from([(Indicator::AvgFlow, (lo, lo + span))]);
            let out = filter_and_rank(&inds, &filters, Indicator::AvgFlow, true).unwrap();
            let kept: Vec<_> = inds.iter().filter(|r| out.contains(&r.road)).copied().collect();
            prop_assert_eq!(kept.len(), out.len());
            let again = filter_and_rank(&kept, &BTreeMap::new(), Indicator::AvgFlow, true).unwrap();
            prop_assert_eq!(again, out);
        }
    }

    #[test]
    fn od_attribution_braess() {
        let (tree, _, _) = braess_with_children();
        let m = od_through_road(&tree, tree.root(), RoadId(2)).unwrap();
        assert_eq!(m.len(), 2);
        let vol = tree.root_node().assignment.status(RoadId(2)).unwrap().actual_volume;
        assert!((m[&NodeId(1)].originating - vol).abs() < 1e-9);
        assert!((m[&NodeId(4)].terminating - vol).abs() < 1e-9);
        assert_eq!(m[&NodeId(1)].terminating, 0.0);
        assert!(vol > 990.0);
        assert!(od_through_road(&tree, tree.root(), RoadId(9)).is_err());
    }

    #[test]
    fn od_attribution_unused_road() {
        let b = datasets::braess();
        let mut demands = crate::network::DemandTable::new();
        demands
            .insert(crate::network::OdPair::new(NodeId(3), NodeId(4)), 10.0)
            .unwrap();
        let tree = StateTree::create(b.network, demands, AssignmentParams::default()).unwrap();
        assert!(od_through_road(&tree, tree.root(), RoadId(1)).unwrap().is_empty());
    }

    #[test]
    fn cells() {
        let (tree, closed, built) = braess_with_children();
        let states = [tree.root(), closed, built];
        let roads = [RoadId(2), RoadId(3), RoadId(5), RoadId(6)];
        let cells = cell_statuses(&tree, &states, &roads).unwrap();
        // road 2: 3 states, road 3: root only, road 5: 3, road 6: built only
        assert_eq!(cells.len(), 8);
        for c in cells.iter().filter(|c| c.state == tree.root()) {
            assert_eq!(c.delta_time_vs_initial, Some(0.0));
        }
        for c in cells.iter().filter(|c| c.state == closed) {
            assert!(c.delta_time_vs_initial.unwrap() > 0.0, "road {} improves", c.road);
        }
        let new = cells.iter().find(|c| c.road == RoadId(6)).unwrap();
        assert!(new.new_road && new.delta_time_vs_initial.is_none());
        assert!(cell_statuses(&tree, &states, &[RoadId(99)]).is_err());
        assert!(cell_statuses(&tree, &[StateId(99)], &roads).is_err());
    }
}
