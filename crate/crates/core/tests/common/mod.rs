//! Independent oracles shared by the integration suites. They work on the
//! name-based model only and never touch the compiled network.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Rational64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tmas_core::model::{ClockValuation, Evaluation, SyncLabel, TimedAgentGraph, TmasGraph};
use tmas_core::random::{random_mas, Bounds};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random single-agent graph with one or two clocks.
pub fn clocked_graph(seed: u64, max_constant: i64) -> TimedAgentGraph {
    let mut r = rng(seed);
    loop {
        let mg = random_mas(&mut r, &Bounds::clocked(max_constant)).unwrap();
        let g = mg.agents.into_iter().next().unwrap();
        if !g.clocks.is_empty() {
            return g;
        }
    }
}

/// Explicit-state reachability with time advancing in steps of `1/denom`
/// and clock values capped at `cmax + 1`. Returns the reachable locations.
/// Only "−" edges are allowed.
pub fn digitized_locations(g: &TimedAgentGraph, denom: i64) -> BTreeSet<String> {
    assert!(g.edges.iter().all(|e| e.sync == SyncLabel::None));
    let cap = (g.max_clock_constant() + 1) * denom;
    let val = |ticks: &[i64]| {
        ClockValuation(
            g.clocks
                .iter()
                .zip(ticks)
                .map(|(c, &t)| (c.clone(), Rational64::new(t, denom)))
                .collect(),
        )
    };
    let inv_ok = |l: &str, ticks: &[i64]| g.invariant(l).eval(&val(ticks)).unwrap();
    type Node = (String, Evaluation, Vec<i64>);
    let start: Node = (
        g.initial_location.clone(),
        g.initial_evaluation().unwrap(),
        vec![0; g.clocks.len()],
    );
    let mut seen = BTreeSet::new();
    let mut queue = VecDeque::new();
    if inv_ok(&start.0, &start.2) {
        seen.insert(start.clone());
        queue.push_back(start);
    }
    while let Some((l, eta, ticks)) = queue.pop_front() {
        let mut next: Vec<Node> = Vec::new();
        let delayed: Vec<i64> = ticks.iter().map(|&t| (t + 1).min(cap)).collect();
        if inv_ok(&l, &delayed) {
            next.push((l.clone(), eta.clone(), delayed));
        }
        for e in g.edges.iter().filter(|e| e.source == l) {
            if !e.guard.eval(&eta).unwrap() || !e.clock_guard.eval(&val(&ticks)).unwrap() {
                continue;
            }
            let Ok(eta2) = g.apply_effect(&e.action, &eta) else {
                continue;
            };
            let reset: Vec<i64> = g
                .clocks
                .iter()
                .zip(&ticks)
                .map(|(c, &t)| if e.resets.contains(c) { 0 } else { t })
                .collect();
            if inv_ok(&e.target, &reset) {
                next.push((e.target.clone(), eta2, reset));
            }
        }
        for n in next {
            if seen.insert(n.clone()) {
                queue.push_back(n);
            }
        }
    }
    seen.into_iter().map(|(l, _, _)| l).collect()
}

/// Reachable `(location tuple, evaluation)` pairs of the untimed product,
/// computed directly from the agent graphs with qualified names.
pub fn naive_untimed_reach(mg: &TmasGraph) -> BTreeSet<(Vec<String>, Evaluation)> {
    let n = mg.agents.len();
    let q = |i: usize, name: &str| mg.qualify(i, name);
    let mut eta = Evaluation::new();
    for (i, g) in mg.agents.iter().enumerate() {
        for (k, v) in g.initial_evaluation().unwrap().iter() {
            eta.set(q(i, k), *v);
        }
    }
    let local = |i: usize, eta: &Evaluation| {
        let mut out = Evaluation::new();
        for v in &mg.agents[i].variables {
            out.set(v.name.clone(), eta.get(&q(i, &v.name)).unwrap());
        }
        out
    };
    let write_back = |i: usize, eta: &Evaluation, loc: &Evaluation| {
        let mut out = eta.clone();
        for (k, v) in loc.iter() {
            out.set(q(i, k), *v);
        }
        out
    };
    let start = (
        mg.agents.iter().map(|g| g.initial_location.clone()).collect::<Vec<_>>(),
        eta,
    );
    let mut seen = BTreeSet::from([start.clone()]);
    let mut queue = VecDeque::from([start]);
    while let Some((locs, eta)) = queue.pop_front() {
        let mut next = Vec::new();
        for i in 0..n {
            let gi = &mg.agents[i];
            for e in gi.edges.iter().filter(|e| e.source == locs[i]) {
                let li = local(i, &eta);
                if !e.guard.eval(&li).unwrap() {
                    continue;
                }
                match &e.sync {
                    SyncLabel::None => {
                        if let Ok(after) = gi.apply_effect(&e.action, &li) {
                            let mut l2 = locs.clone();
                            l2[i] = e.target.clone();
                            next.push((l2, write_back(i, &eta, &after)));
                        }
                    }
                    SyncLabel::Emit(ch) => {
                        for j in (0..n).filter(|&j| j != i) {
                            let gj = &mg.agents[j];
                            for r in gj.edges.iter().filter(|r| {
                                r.source == locs[j] && r.sync == SyncLabel::Receive(ch.clone())
                            }) {
                                // both guards on the pre-state
                                if !r.guard.eval(&local(j, &eta)).unwrap() {
                                    continue;
                                }
                                let Ok(a1) = gi.apply_effect(&e.action, &li) else { continue };
                                let mid = write_back(i, &eta, &a1);
                                let Ok(a2) = gj.apply_effect(&r.action, &local(j, &mid)) else {
                                    continue;
                                };
                                let mut l2 = locs.clone();
                                l2[i] = e.target.clone();
                                l2[j] = r.target.clone();
                                next.push((l2, write_back(j, &mid, &a2)));
                            }
                        }
                    }
                    SyncLabel::Receive(_) => {}
                }
            }
        }
        for s in next {
            if seen.insert(s.clone()) {
                queue.push_back(s);
            }
        }
    }
    seen
}

/// Edge count of the product predicted from the composition rules: an
/// unsynchronised edge once per tuple of the other agents' locations, a
/// matched `ch!`/`ch?` pair once per tuple of the remaining agents.
pub fn predicted_product_edges(mg: &TmasGraph) -> usize {
    let sizes: Vec<usize> = mg.agents.iter().map(|g| g.locations.len()).collect();
    let others = |skip: &[usize]| -> usize {
        sizes
            .iter()
            .enumerate()
            .filter(|(k, _)| !skip.contains(k))
            .map(|(_, s)| *s)
            .product()
    };
    let mut total = 0;
    for (i, g) in mg.agents.iter().enumerate() {
        for e in &g.edges {
            match &e.sync {
                SyncLabel::None => total += others(&[i]),
                SyncLabel::Emit(ch) => {
                    for (j, h) in mg.agents.iter().enumerate().filter(|(j, _)| *j != i) {
                        let matches = h
                            .edges
                            .iter()
                            .filter(|r| r.sync == SyncLabel::Receive(ch.clone()))
                            .count();
                        total += matches * others(&[i, j]);
                    }
                }
                SyncLabel::Receive(_) => {}
            }
        }
    }
    total
}

/// Reachable `(location, evaluation)` pairs of a single graph per
/// location, projected onto `vars`.
pub fn project(
    reach: &BTreeSet<(Vec<String>, Evaluation)>,
    vars: &[String],
) -> BTreeMap<Vec<String>, BTreeSet<Vec<i64>>> {
    let mut out: BTreeMap<Vec<String>, BTreeSet<Vec<i64>>> = BTreeMap::new();
    for (l, eta) in reach {
        let vals = vars.iter().map(|v| eta.get(v).unwrap()).collect();
        out.entry(l.clone()).or_default().insert(vals);
    }
    out
}
