//! Self-regulated averaging for the logit stochastic user equilibrium.
//!
//! Path sets are fixed up front (see [`super::paths`]). Starting from a logit
//! loading at free flow times, each iteration computes link times from the
//! current path flows, reloads demand by the logit model to get auxiliary
//! path flows, and moves toward them by `1 / beta`. `beta` grows by the big
//! step when the auxiliary gap increased since the previous iteration and by
//! the small step otherwise. Iteration stops once the L1 gap between the
//! auxiliary and current link flows, relative to the current total, falls
//! below the tolerance.

use std::collections::BTreeMap;

use rayon::prelude::*;

use super::bpr::bpr;
use super::logit::logit_into;
use super::paths::{path_set, Graph, Path};
use super::{AssignmentParams, AssignmentResult, OdFlows, RoadStatus};
use crate::error::{Error, Result};
use crate::network::{DemandTable, OdPair, RoadId, RoadNetwork};

struct Problem {
    graph: Graph,
    ods: Vec<(OdPair, f64)>,
    /// Paths of OD `i` are `paths[offsets[i]..offsets[i + 1]]`.
    offsets: Vec<usize>,
    paths: Vec<Vec<usize>>,
}

impl Problem {
    fn build(network: &RoadNetwork, demands: &DemandTable, k_paths: usize) -> Result<Self> {
        let graph = Graph::new(network);
        let ods: Vec<(OdPair, f64)> = demands.iter().collect();
        for (od, _) in &ods {
            for node in [od.origin, od.destination] {
                if network.node(node).is_none() {
                    return Err(Error::UnknownNode(node));
                }
            }
        }
        let sets: Vec<Result<Vec<Vec<usize>>>> = ods
            .par_iter()
            .map(|(od, _)| path_set(&graph, *od, k_paths))
            .collect();

        let mut unreachable = Vec::new();
        let mut offsets = vec![0];
        let mut paths = Vec::new();
        for set in sets {
            match set {
                Ok(set) => paths.extend(set),
                Err(Error::Unreachable(pairs)) => unreachable.extend(pairs),
                Err(e) => return Err(e),
            }
            offsets.push(paths.len());
        }
        if !unreachable.is_empty() {
            return Err(Error::Unreachable(unreachable));
        }
        Ok(Self {
            graph,
            ods,
            offsets,
            paths,
        })
    }

    fn link_flows(&self, path_flows: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (path, &flow) in self.paths.iter().zip(path_flows) {
            for &e in path {
                out[e] += flow;
            }
        }
    }

    fn link_times(&self, link_flows: &[f64], out: &mut [f64]) {
        for (i, t) in out.iter_mut().enumerate() {
            *t = bpr(self.graph.fftt[i], self.graph.capacity[i], link_flows[i]);
        }
    }

    fn path_time(&self, path: usize, link_times: &[f64]) -> f64 {
        self.paths[path].iter().map(|&e| link_times[e]).sum()
    }

    /// Splits each OD's demand over its paths by the logit model.
    fn logit_load(&self, theta: f64, link_times: &[f64], out: &mut [f64]) {
        let mut times = Vec::new();
        let mut probs = Vec::new();
        for (i, &(_, demand)) in self.ods.iter().enumerate() {
            let range = self.offsets[i]..self.offsets[i + 1];
            times.clear();
            times.extend(range.clone().map(|p| self.path_time(p, link_times)));
            probs.resize(times.len(), 0.0);
            logit_into(&times, theta, &mut probs);
            for (slot, p) in out[range].iter_mut().zip(&probs) {
                *slot = demand * p;
            }
        }
    }
}

/// Read-only view of one solver iterate, passed to the observer of
/// [`solve_sue_traced`].
pub struct Iterate<'a> {
    problem: &'a Problem,
    pub iteration: usize,
    pub rel_gap: f64,
    path_flows: &'a [f64],
    link_flows: &'a [f64],
}

impl Iterate<'_> {
    pub fn od_count(&self) -> usize {
        self.problem.ods.len()
    }

    /// OD pair, demand, and current path flows of OD `i`.
    pub fn od(&self, i: usize) -> (OdPair, f64, &[f64]) {
        let (od, demand) = self.problem.ods[i];
        let range = self.problem.offsets[i]..self.problem.offsets[i + 1];
        (od, demand, &self.path_flows[range])
    }

    /// Roads of path `p` of OD `i`.
    pub fn path_roads(&self, i: usize, p: usize) -> Vec<RoadId> {
        let path = &self.problem.paths[self.problem.offsets[i] + p];
        path.iter().map(|&e| self.problem.graph.road_ids[e]).collect()
    }

    pub fn link_flows(&self) -> impl Iterator<Item = (RoadId, f64)> + '_ {
        self.problem
            .graph
            .road_ids
            .iter()
            .copied()
            .zip(self.link_flows.iter().copied())
    }
}

fn l1(a: &[f64]) -> f64 {
    a.iter().map(|x| x.abs()).sum()
}

fn l1_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Solves the logit stochastic user equilibrium.
///
/// Fails if a demanded OD pair is unreachable (all offenders are listed). If
/// the iteration budget runs out, the iterate with the smallest gap is
/// returned with `converged == false`.
pub fn solve_sue(
    network: &RoadNetwork,
    demands: &DemandTable,
    params: &AssignmentParams,
) -> Result<AssignmentResult> {
    solve_sue_traced(network, demands, params, |_| {})
}

/// [`solve_sue`] with an observer called once per iteration with the
/// current (pre-step) iterate.
pub fn solve_sue_traced(
    network: &RoadNetwork,
    demands: &DemandTable,
    params: &AssignmentParams,
    mut observe: impl FnMut(&Iterate<'_>),
) -> Result<AssignmentResult> {
    params.validate()?;
    let problem = Problem::build(network, demands, params.k_paths)?;
    let n_links = problem.graph.road_ids.len();
    let n_paths = problem.paths.len();

    let mut link_flows = vec![0.0; n_links];
    let mut link_times = vec![0.0; n_links];
    let mut aux_links = vec![0.0; n_links];
    let mut aux = vec![0.0; n_paths];

    // iteration 0: logit loading at free flow times
    let mut flows = vec![0.0; n_paths];
    problem.logit_load(params.theta, &problem.graph.fftt, &mut flows);

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut beta = 1.0;
    let mut prev_gap: Option<f64> = None;
    let mut iterations = 0;
    let mut converged = problem.ods.is_empty();
    let mut rel_gap = 0.0;

    while !converged && iterations < params.max_iters {
        iterations += 1;
        problem.link_flows(&flows, &mut link_flows);
        problem.link_times(&link_flows, &mut link_times);
        problem.logit_load(params.theta, &link_times, &mut aux);
        problem.link_flows(&aux, &mut aux_links);

        let gap = l1_diff(&aux_links, &link_flows);
        rel_gap = gap / l1(&link_flows).max(1.0);
        observe(&Iterate {
            problem: &problem,
            iteration: iterations,
            rel_gap,
            path_flows: &flows,
            link_flows: &link_flows,
        });

        if rel_gap < params.rel_gap_tol {
            converged = true;
            break;
        }
        if best.as_ref().is_none_or(|(g, _)| rel_gap < *g) {
            best = Some((rel_gap, flows.clone()));
        }
        if let Some(prev) = prev_gap {
            beta += if gap > prev {
                params.sra_big_step
            } else {
                params.sra_small_step
            };
        }
        prev_gap = Some(gap);
        let step = 1.0 / beta;
        for (x, y) in flows.iter_mut().zip(&aux) {
            *x += step * (y - *x);
        }
    }

    if !converged {
        if let Some((gap, best_flows)) = best {
            rel_gap = gap;
            flows = best_flows;
        }
    }

    problem.link_flows(&flows, &mut link_flows);
    problem.link_times(&link_flows, &mut link_times);

    let statuses: BTreeMap<RoadId, RoadStatus> = problem
        .graph
        .road_ids
        .iter()
        .enumerate()
        .map(|(i, &road)| {
            (
                road,
                RoadStatus {
                    road,
                    actual_volume: link_flows[i],
                    actual_time: link_times[i],
                },
            )
        })
        .collect();

    let path_flows = problem
        .ods
        .iter()
        .enumerate()
        .map(|(i, &(od, demand))| OdFlows {
            od,
            demand,
            paths: (problem.offsets[i]..problem.offsets[i + 1])
                .map(|p| Path {
                    od,
                    roads: problem.paths[p]
                        .iter()
                        .map(|&e| problem.graph.road_ids[e])
                        .collect(),
                    flow: flows[p],
                    travel_time: problem.path_time(p, &link_times),
                })
                .collect(),
        })
        .collect();

    Ok(AssignmentResult {
        statuses,
        path_flows,
        iterations,
        converged,
        final_rel_gap: rel_gap,
    })
}
