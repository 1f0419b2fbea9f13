use indexmap::IndexSet;

use super::dbm::Dbm;
use super::discrete::ExploreOptions;
use crate::error::{Error, Result};
use crate::model::{Lit, TimedAgentGraph};
use crate::network::{Move, Network, State};

#[derive(Debug, Clone)]
pub struct ZoneNode {
    /// Index of the discrete part `(locations, η)` in [`ZoneGraph::keys`].
    pub key: usize,
    pub zone: Dbm,
    pub parent: Option<(usize, Move)>,
}

/// Symbolic states reached by forward zone exploration.
#[derive(Debug, Clone)]
pub struct ZoneGraph {
    pub keys: IndexSet<State>,
    pub nodes: Vec<ZoneNode>,
    /// Non-subsumed nodes per key.
    pub passed: Vec<Vec<usize>>,
    pub transitions: usize,
    pub peak_frontier: usize,
}

impl ZoneGraph {
    /// Number of symbolic states kept after inclusion subsumption.
    pub fn symbolic_states(&self) -> usize {
        self.passed.iter().map(Vec::len).sum()
    }

    /// Node indices from the initial node to `i`, each with the move that
    /// entered it.
    pub fn path_to(&self, i: usize) -> Vec<(usize, Option<Move>)> {
        let mut out = Vec::new();
        let mut cur = i;
        while let Some((p, m)) = self.nodes[cur].parent {
            out.push((cur, Some(m)));
            cur = p;
        }
        out.push((cur, None));
        out.reverse();
        out
    }
}

/// Forward zone-graph exploration with max-constant extrapolation and
/// inclusion subsumption. Stops at the first node whose discrete part
/// satisfies `stop`.
pub fn zone_explore(
    net: &Network,
    opts: ExploreOptions,
    mut stop: impl FnMut(&[Lit]) -> Result<bool>,
) -> Result<(ZoneGraph, Option<usize>)> {
    if net.has_diagonal {
        return Err(Error::DiagonalConstraint(
            "zone exploration supports diagonal-free models only".into(),
        ));
    }
    let k = net.max_constant;
    let nclocks = net.clocks.len();
    let mut g = ZoneGraph {
        keys: IndexSet::new(),
        nodes: Vec::new(),
        passed: Vec::new(),
        transitions: 0,
        peak_frontier: 0,
    };
    let init = net.initial_state();
    let mut z = Dbm::zero(nclocks);
    let inv = net.invariant(&init);
    z.intersect(&inv);
    if z.is_empty() {
        return Ok((g, None));
    }
    z.up();
    z.intersect(&inv);
    z.extrapolate(k);
    let hit = stop(&init)?;
    g.keys.insert(init);
    g.passed.push(vec![0]);
    g.nodes.push(ZoneNode {
        key: 0,
        zone: z,
        parent: None,
    });
    if hit {
        return Ok((g, Some(0)));
    }
    let mut waiting = std::collections::VecDeque::from([0usize]);
    let mut moves = Vec::new();
    while let Some(n) = waiting.pop_front() {
        let key = g.nodes[n].key;
        if !g.passed[key].contains(&n) {
            continue;
        }
        let state = g.keys[key].clone();
        moves.clear();
        net.enabled_moves(&state, &mut moves)?;
        for m in &moves {
            let mut z = g.nodes[n].zone.clone();
            for e in net.move_edges(m) {
                z.intersect(&e.clock_guard);
            }
            if z.is_empty() {
                continue;
            }
            let t = net.apply_move(&state, m)?;
            for e in net.move_edges(m) {
                for &x in &e.resets {
                    z.reset(x);
                }
            }
            let inv = net.invariant(&t);
            z.intersect(&inv);
            if z.is_empty() {
                continue;
            }
            z.up();
            z.intersect(&inv);
            z.extrapolate(k);
            g.transitions += 1;

            let (tk, fresh) = g.keys.insert_full(t);
            if fresh {
                g.passed.push(Vec::new());
            }
            let live = &g.passed[tk];
            if live.iter().any(|&o| z.is_subset(&g.nodes[o].zone)) {
                continue;
            }
            let id = g.nodes.len();
            let nodes = &g.nodes;
            g.passed[tk].retain(|&o| !nodes[o].zone.is_subset(&z));
            g.passed[tk].push(id);
            g.nodes.push(ZoneNode {
                key: tk,
                zone: z,
                parent: Some((n, *m)),
            });
            if g.nodes.len() > opts.budget {
                return Err(Error::StateBudgetExceeded(opts.budget));
            }
            if fresh && stop(&g.keys[tk])? {
                return Ok((g, Some(id)));
            }
            waiting.push_back(id);
        }
        g.peak_frontier = g.peak_frontier.max(waiting.len());
    }
    Ok((g, None))
}

/// Zone graph of a single (combined) graph.
pub fn zone_reach(g: &TimedAgentGraph, opts: ExploreOptions) -> Result<ZoneGraph> {
    let net = Network::from_graph(g)?;
    Ok(zone_explore(&net, opts, |_| Ok(false))?.0)
}
