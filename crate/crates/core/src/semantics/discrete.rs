use std::collections::VecDeque;

use indexmap::IndexSet;

use crate::error::{Error, Result};
use crate::model::{Lit, TimedAgentGraph};
use crate::network::{default_budget, Move, Network, State};

#[derive(Debug, Clone, Copy)]
pub struct ExploreOptions {
    pub budget: usize,
    /// Record the deduplicated successor lists.
    pub keep_edges: bool,
}

impl Default for ExploreOptions {
    fn default() -> Self {
        ExploreOptions {
            budget: default_budget(),
            keep_edges: false,
        }
    }
}

impl ExploreOptions {
    pub fn with_edges(mut self) -> Self {
        self.keep_edges = true;
        self
    }

    pub fn budget(mut self, budget: usize) -> Self {
        self.budget = budget;
        self
    }
}

/// Reachable part of the discrete model in breadth-first order.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub states: IndexSet<State>,
    pub parents: Vec<Option<(usize, Move)>>,
    /// Present when exploration kept edges.
    pub succ: Option<Vec<Vec<usize>>>,
    pub transitions: usize,
    pub peak_frontier: usize,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, i: usize) -> &[Lit] {
        &self.states[i]
    }

    /// State indices from the initial state to `i`, each with the move
    /// that entered it.
    pub fn path_to(&self, i: usize) -> Vec<(usize, Option<Move>)> {
        let mut out = Vec::new();
        let mut cur = i;
        while let Some((p, m)) = self.parents[cur] {
            out.push((cur, Some(m)));
            cur = p;
        }
        out.push((cur, None));
        out.reverse();
        out
    }
}

/// Breadth-first exploration of the discrete model of `net`, ignoring all
/// timing. Stops at the first state for which `stop` returns true and
/// returns its index.
pub fn explore(
    net: &Network,
    opts: ExploreOptions,
    mut stop: impl FnMut(&[Lit]) -> Result<bool>,
) -> Result<(StateSpace, Option<usize>)> {
    let mut space = StateSpace {
        states: IndexSet::new(),
        parents: Vec::new(),
        succ: opts.keep_edges.then(Vec::new),
        transitions: 0,
        peak_frontier: 1,
    };
    let init = net.initial_state();
    let hit = stop(&init)?;
    space.states.insert(init);
    space.parents.push(None);
    if hit {
        return Ok((space, Some(0)));
    }
    let mut head = 0;
    let mut buf = Vec::new();
    while head < space.states.len() {
        let cur = head;
        head += 1;
        buf.clear();
        net.successors(&space.states[cur], &mut buf)?;
        space.transitions += buf.len();
        let mut targets = Vec::with_capacity(buf.len());
        for (m, t) in buf.drain(..) {
            let (idx, fresh) = space.states.insert_full(t);
            if fresh {
                if space.states.len() > opts.budget {
                    return Err(Error::StateBudgetExceeded(opts.budget));
                }
                space.parents.push(Some((cur, m)));
                if stop(&space.states[idx])? {
                    return Ok((space, Some(idx)));
                }
            }
            targets.push(idx);
        }
        if let Some(succ) = &mut space.succ {
            targets.sort_unstable();
            targets.dedup();
            succ.push(targets);
        }
        space.peak_frontier = space.peak_frontier.max(space.states.len() - head);
    }
    Ok((space, None))
}

/// Full reachable discrete state space of a single graph.
pub fn discrete_model(g: &TimedAgentGraph, opts: ExploreOptions) -> Result<StateSpace> {
    let net = Network::from_graph(g)?;
    Ok(explore(&net, opts, |_| Ok(false))?.0)
}

/// Shortest path lengths from the initial state, by state index.
pub fn distances(space: &StateSpace) -> Vec<usize> {
    let succ = space
        .succ
        .as_ref()
        .expect("distances need a state space with edges");
    let mut dist = vec![usize::MAX; space.len()];
    let mut q = VecDeque::from([0usize]);
    dist[0] = 0;
    while let Some(s) = q.pop_front() {
        for &t in &succ[s] {
            if dist[t] == usize::MAX {
                dist[t] = dist[s] + 1;
                q.push_back(t);
            }
        }
    }
    dist
}
