//! Synchronous product of a TMAS graph and the time-insensitive variant.

use std::collections::{BTreeMap, BTreeSet};

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    map_name, ClockConstraint, Condition, Edge, SyncLabel, TimedAgentGraph, TmasGraph,
    VariableDecl,
};
use crate::network::tuple_name;

/// Above this many tuple locations `combine` refuses to materialize the
/// product; use [`crate::network::Network::from_mas`] instead.
pub const EAGER_PRODUCT_LIMIT: u128 = 100_000;

/// Origin of a product edge: `(agent, edge index)` for each participant,
/// emitter first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance(pub Vec<(usize, usize)>);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CombinedGraph {
    pub graph: TimedAgentGraph,
    /// Agent location indices of every product location.
    pub tuples: Vec<Vec<usize>>,
    pub provenance: Vec<Provenance>,
}

impl CombinedGraph {
    pub fn tuple_of(&self, location: &str) -> Option<&[usize]> {
        self.graph
            .location_index(location)
            .map(|i| self.tuples[i].as_slice())
    }
}

pub fn product_size(mg: &TmasGraph) -> u128 {
    mg.agents
        .iter()
        .try_fold(1u128, |acc, a| acc.checked_mul(a.locations.len() as u128))
        .unwrap_or(u128::MAX)
}

/// Builds the combined graph: tuple locations, qualified variables and
/// clocks, interleaved "−" edges and fused `ch!`/`ch?` pairs.
pub fn combine(mg: &TmasGraph) -> Result<CombinedGraph> {
    mg.validate()?;
    let size = product_size(mg);
    if size > EAGER_PRODUCT_LIMIT {
        return Err(Error::ProductTooLarge(size));
    }
    crate::network::Network::from_mas(mg)?;
    let n = mg.agents.len();
    let q = |i: usize| move |name: &str| mg.qualify(i, name);

    let mut variables: Vec<VariableDecl> = mg.shared.clone();
    let mut clocks = Vec::new();
    let mut inits = Vec::new();
    for (i, a) in mg.agents.iter().enumerate() {
        for v in &a.variables {
            if !mg.is_shared(&v.name) {
                variables.push(VariableDecl::new(
                    map_name(&v.name, &q(i)),
                    v.domain.clone(),
                    v.initial,
                ));
            }
        }
        clocks.extend(a.clocks.iter().map(|c| q(i)(c)));
        inits.push(a.initial_condition.rename(&q(i)));
    }

    let mut tuples: Vec<Vec<usize>> = vec![Vec::new()];
    for a in &mg.agents {
        tuples = tuples
            .into_iter()
            .flat_map(|t| {
                (0..a.locations.len()).map(move |l| {
                    let mut t = t.clone();
                    t.push(l);
                    t
                })
            })
            .collect();
    }
    let name_of = |t: &[usize]| {
        let parts: Vec<&str> = t
            .iter()
            .enumerate()
            .map(|(i, &l)| mg.agents[i].locations[l].as_str())
            .collect();
        tuple_name(&parts)
    };
    let locations: Vec<String> = tuples.iter().map(|t| name_of(t)).collect();
    let initial: Vec<usize> = mg
        .agents
        .iter()
        .map(|a| a.location_index(&a.initial_location).unwrap())
        .collect();

    let mut invariants = BTreeMap::new();
    for (t, name) in tuples.iter().zip(&locations) {
        let mut cc = ClockConstraint::top();
        for (i, &l) in t.iter().enumerate() {
            let a = &mg.agents[i];
            cc = cc.and(&a.invariant(&a.locations[l]).rename(&q(i)));
        }
        if !cc.is_top() {
            invariants.insert(name.clone(), cc);
        }
    }

    let lift = |i: usize, e: &Edge| -> Edge {
        Edge {
            source: String::new(),
            target: String::new(),
            guard: e.guard.rename(&q(i)),
            clock_guard: e.clock_guard.rename(&q(i)),
            sync: SyncLabel::None,
            action: e.action.rename(&q(i)),
            resets: e.resets.iter().map(|x| q(i)(x)).collect(),
        }
    };

    let mut edges = Vec::new();
    let mut provenance = Vec::new();
    let mut unmatched: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut matched: BTreeSet<(usize, usize)> = BTreeSet::new();
    for t in &tuples {
        let src = name_of(t);
        for i in 0..n {
            let a = &mg.agents[i];
            for (ei, e) in a.edges.iter().enumerate() {
                if e.source != a.locations[t[i]] {
                    continue;
                }
                match &e.sync {
                    SyncLabel::None => {
                        let mut u = t.clone();
                        u[i] = a.location_index(&e.target).unwrap();
                        let mut out = lift(i, e);
                        out.source = src.clone();
                        out.target = name_of(&u);
                        edges.push(out);
                        provenance.push(Provenance(vec![(i, ei)]));
                    }
                    SyncLabel::Emit(ch) => {
                        unmatched.insert((i, ei));
                        for j in (0..n).filter(|&j| j != i) {
                            let b = &mg.agents[j];
                            for (fj, f) in b.edges.iter().enumerate() {
                                if f.source != b.locations[t[j]]
                                    || f.sync != SyncLabel::Receive(ch.clone())
                                {
                                    continue;
                                }
                                matched.insert((i, ei));
                                matched.insert((j, fj));
                                let mut u = t.clone();
                                u[i] = a.location_index(&e.target).unwrap();
                                u[j] = b.location_index(&f.target).unwrap();
                                let le = lift(i, e);
                                let lf = lift(j, f);
                                edges.push(Edge {
                                    source: src.clone(),
                                    target: name_of(&u),
                                    guard: Condition::and([le.guard, lf.guard]),
                                    clock_guard: le.clock_guard.and(&lf.clock_guard),
                                    sync: SyncLabel::None,
                                    action: lf.action.after(&le.action),
                                    resets: le.resets.union(&lf.resets).cloned().collect(),
                                });
                                provenance.push(Provenance(vec![(i, ei), (j, fj)]));
                            }
                        }
                    }
                    SyncLabel::Receive(_) => {
                        unmatched.insert((i, ei));
                    }
                }
            }
        }
    }
    for (i, e) in unmatched.difference(&matched) {
        let a = &mg.agents[*i];
        let edge = &a.edges[*e];
        warn!(
            "{}: edge {} -> {} labelled {} has no partner and is dropped",
            a.name, edge.source, edge.target, edge.sync
        );
    }

    let graph = TimedAgentGraph {
        name: mg
            .agents
            .iter()
            .map(|a| a.name.as_str())
            .collect::<Vec<_>>()
            .join("||"),
        variables,
        initial_location: name_of(&initial),
        locations,
        initial_condition: Condition::and(inits),
        channels: BTreeSet::new(),
        clocks,
        invariants,
        edges,
    };
    Ok(CombinedGraph {
        graph,
        tuples,
        provenance,
    })
}

/// `G↓`: clocks, clock guards, resets and invariants removed.
pub fn strip_clocks(g: &TimedAgentGraph) -> TimedAgentGraph {
    let mut out = g.clone();
    out.clocks.clear();
    out.invariants.clear();
    for e in &mut out.edges {
        e.clock_guard = ClockConstraint::top();
        e.resets.clear();
    }
    out
}

pub fn strip_clocks_mas(mg: &TmasGraph) -> TmasGraph {
    TmasGraph {
        shared: mg.shared.clone(),
        agents: mg.agents.iter().map(strip_clocks).collect(),
    }
}
