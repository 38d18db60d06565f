//! Stochastic user equilibrium traffic assignment.

mod bpr;
mod logit;
mod paths;
mod sue;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{OdPair, RoadId};

pub use bpr::{bpr_time, BPR_ALPHA, BPR_POWER};
pub use logit::logit_split;
pub use paths::{enumerate_paths, Path, EXHAUSTIVE_NODE_LIMIT};
pub use sue::{solve_sue, solve_sue_traced, Iterate};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AssignmentParams {
    /// Logit dispersion.
    pub theta: f64,
    pub k_paths: usize,
    pub max_iters: usize,
    pub rel_gap_tol: f64,
    /// Added to the averaging denominator when the gap grows.
    pub sra_big_step: f64,
    /// Added to the averaging denominator when the gap shrinks.
    pub sra_small_step: f64,
}

impl Default for AssignmentParams {
    fn default() -> Self {
        Self {
            theta: 0.3,
            k_paths: 8,
            max_iters: 1000,
            rel_gap_tol: 1e-4,
            sra_big_step: 2.0,
            sra_small_step: 0.1,
        }
    }
}

impl AssignmentParams {
    pub fn validate(&self) -> Result<()> {
        let positive = |name: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams {
                    name,
                    reason: format!("must be positive, got {v}"),
                })
            }
        };
        positive("theta", self.theta)?;
        positive("rel_gap_tol", self.rel_gap_tol)?;
        positive("sra_big_step", self.sra_big_step)?;
        positive("sra_small_step", self.sra_small_step)?;
        if self.k_paths == 0 {
            return Err(Error::InvalidParams {
                name: "k_paths",
                reason: "must be at least 1".into(),
            });
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidParams {
                name: "max_iters",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadStatus {
    pub road: RoadId,
    pub actual_volume: f64,
    pub actual_time: f64,
}

/// Equilibrium path flows for one OD pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OdFlows {
    pub od: OdPair,
    pub demand: f64,
    pub paths: Vec<Path>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssignmentResult {
    pub statuses: BTreeMap<RoadId, RoadStatus>,
    pub path_flows: Vec<OdFlows>,
    pub iterations: usize,
    pub converged: bool,
    pub final_rel_gap: f64,
}

impl AssignmentResult {
    pub fn status(&self, road: RoadId) -> Option<&RoadStatus> {
        self.statuses.get(&road)
    }

    pub fn od_flows(&self, od: OdPair) -> Option<&OdFlows> {
        self.path_flows.iter().find(|f| f.od == od)
    }
}

/// Sum over roads of volume times travel time.
pub fn total_system_travel_time(result: &AssignmentResult) -> f64 {
    result
        .statuses
        .values()
        .map(|s| s.actual_volume * s.actual_time)
        .sum()
}
