use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::metrics::Metrics;
use super::prop::Prop;
use crate::error::Result;
use crate::model::{Evaluation, TmasGraph};
use crate::network::{Move, Network};
use crate::semantics::{explore, zone_explore, ExploreOptions};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceStep {
    /// Move that led here; absent for the initial state.
    pub via: Option<String>,
    pub locations: Vec<String>,
    pub evaluation: Evaluation,
    pub zone: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "trace", rename_all = "lowercase")]
pub enum Verdict {
    Sat,
    Cex(Vec<TraceStep>),
}

impl Verdict {
    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckReport {
    pub property: String,
    pub timed: bool,
    pub verdict: Verdict,
    pub metrics: Metrics,
}

fn step(net: &Network, s: &[i64], via: Option<Move>, zone: Option<String>) -> TraceStep {
    TraceStep {
        via: via.map(|m| net.describe_move(&m)),
        locations: net.location_names(s),
        evaluation: net.evaluation(s),
        zone,
    }
}

/// Checks `A G prop`. Breadth-first search returns a shortest violating
/// path. With `timed`, the zone graph is explored and each step carries
/// its zone.
pub fn check_ag(mg: &TmasGraph, prop: &Prop, timed: bool, opts: ExploreOptions) -> Result<CheckReport> {
    let net = Network::from_mas(mg)?;
    check_ag_net(&net, prop, timed, opts)
}

pub fn check_ag_net(
    net: &Network,
    prop: &Prop,
    timed: bool,
    opts: ExploreOptions,
) -> Result<CheckReport> {
    let p = prop.compile(net)?;
    let start = Instant::now();
    let bad = |s: &[i64]| p.eval(net, s).map(|ok| !ok);
    let (verdict, states, transitions, peak_frontier) = if timed {
        let (g, hit) = zone_explore(net, opts, bad)?;
        let verdict = match hit {
            None => Verdict::Sat,
            Some(n) => Verdict::Cex(
                g.path_to(n)
                    .into_iter()
                    .map(|(k, m)| {
                        let node = &g.nodes[k];
                        step(net, &g.keys[node.key], m, Some(node.zone.describe(&net.clocks)))
                    })
                    .collect(),
            ),
        };
        (verdict, g.symbolic_states(), g.transitions, g.peak_frontier)
    } else {
        let (space, hit) = explore(net, opts, bad)?;
        let verdict = match hit {
            None => Verdict::Sat,
            Some(n) => Verdict::Cex(
                space
                    .path_to(n)
                    .into_iter()
                    .map(|(k, m)| step(net, space.state(k), m, None))
                    .collect(),
            ),
        };
        (verdict, space.len(), space.transitions, space.peak_frontier)
    };
    Ok(CheckReport {
        property: prop.to_string(),
        timed,
        verdict,
        metrics: Metrics {
            states,
            transitions,
            peak_frontier,
            wall_ms: start.elapsed().as_millis(),
        },
    })
}
