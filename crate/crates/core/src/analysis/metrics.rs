use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::TmasGraph;
use crate::network::Network;
use crate::semantics::{explore, zone_explore, ExploreOptions};

pub const CSV_HEADER: &str = "config,states,transitions,time_ms";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metrics {
    /// Discrete states, or non-subsumed symbolic states in timed mode.
    pub states: usize,
    pub transitions: usize,
    pub peak_frontier: usize,
    pub wall_ms: u128,
}

impl Metrics {
    pub fn csv_row(&self, config: &str) -> String {
        format!("{config},{},{},{}", self.states, self.transitions, self.wall_ms)
    }
}

/// Size of the reachable state space of `mg`.
pub fn metrics(mg: &TmasGraph, timed: bool, opts: ExploreOptions) -> Result<Metrics> {
    let net = Network::from_mas(mg)?;
    metrics_net(&net, timed, opts)
}

pub fn metrics_net(net: &Network, timed: bool, opts: ExploreOptions) -> Result<Metrics> {
    let start = Instant::now();
    let (states, transitions, peak_frontier) = if timed {
        let (g, _) = zone_explore(net, opts, |_| Ok(false))?;
        (g.symbolic_states(), g.transitions, g.peak_frontier)
    } else {
        let (s, _) = explore(net, opts, |_| Ok(false))?;
        (s.len(), s.transitions, s.peak_frontier)
    };
    Ok(Metrics {
        states,
        transitions,
        peak_frontier,
        wall_ms: start.elapsed().as_millis(),
    })
}
