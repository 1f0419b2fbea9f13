use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::prop::{CProp, Prop};
use crate::error::Result;
use crate::model::{Lit, TmasGraph};
use crate::network::Network;
use crate::semantics::{explore, ExploreOptions, StateSpace};

/// Finite transition system with state 0 initial and interned labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledSystem {
    pub succ: Vec<Vec<usize>>,
    pub labels: Vec<u32>,
}

impl LabeledSystem {
    pub fn len(&self) -> usize {
        self.succ.len()
    }

    pub fn is_empty(&self) -> bool {
        self.succ.is_empty()
    }

    fn preds(&self) -> Vec<Vec<usize>> {
        let mut p = vec![Vec::new(); self.len()];
        for (s, ts) in self.succ.iter().enumerate() {
            for &t in ts {
                p[t].push(s);
            }
        }
        for v in &mut p {
            v.sort_unstable();
            v.dedup();
        }
        p
    }
}

/// What a state exposes to the simulation check.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    /// Every agent's current location.
    pub locations: bool,
    /// Exact values of these (global) variables.
    pub values: Vec<String>,
    /// Truth values of these propositions.
    pub props: Vec<Prop>,
}

impl Observation {
    /// Locations and every variable of `mg` not in `hidden`.
    pub fn frame(mg: &TmasGraph, hidden: &std::collections::BTreeSet<String>) -> Result<Self> {
        let net = Network::from_mas(mg)?;
        Ok(Observation {
            locations: true,
            values: net
                .vars
                .iter()
                .map(|d| d.name.clone())
                .filter(|n| !hidden.contains(n))
                .collect(),
            props: Vec::new(),
        })
    }
}

/// Interns labels so that systems labelled with the same interner can be
/// compared.
#[derive(Debug, Default)]
pub struct LabelInterner {
    ids: HashMap<Vec<Lit>, u32>,
    names: HashMap<String, Lit>,
}

impl LabelInterner {
    fn name(&mut self, n: &str) -> Lit {
        let k = self.names.len() as Lit;
        *self.names.entry(n.to_string()).or_insert(k)
    }

    fn id(&mut self, key: Vec<Lit>) -> u32 {
        let k = self.ids.len() as u32;
        *self.ids.entry(key).or_insert(k)
    }
}

/// Explores `net` (timing ignored) and labels every state by `obs`.
pub fn labeled_system(
    net: &Network,
    obs: &Observation,
    interner: &mut LabelInterner,
    opts: ExploreOptions,
) -> Result<(LabeledSystem, StateSpace)> {
    let (space, _) = explore(net, opts.with_edges(), |_| Ok(false))?;
    let idx: Vec<usize> = obs
        .values
        .iter()
        .map(|v| {
            net.var_index
                .get(v)
                .copied()
                .ok_or_else(|| crate::Error::UndeclaredVariable(v.clone()))
        })
        .collect::<Result<_>>()?;
    let props: Vec<CProp> = obs
        .props
        .iter()
        .map(|p| p.compile(net))
        .collect::<Result<_>>()?;
    let n = net.agent_count();
    let mut labels = Vec::with_capacity(space.len());
    for s in &space.states {
        let mut key = Vec::new();
        if obs.locations {
            for name in net.location_names(s) {
                key.push(interner.name(&name));
            }
        }
        key.extend(idx.iter().map(|&i| s[n + i]));
        for p in &props {
            key.push(p.eval(net, s)? as Lit);
        }
        labels.push(interner.id(key));
    }
    let sys = LabeledSystem {
        succ: space.succ.clone().unwrap_or_default(),
        labels,
    };
    Ok((sys, space))
}

/// A simulation relation as a dense `n1 × n2` bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Simulation {
    pub n1: usize,
    pub n2: usize,
    rel: Vec<bool>,
}

impl Simulation {
    pub fn contains(&self, s1: usize, s2: usize) -> bool {
        self.rel[s1 * self.n2 + s2]
    }

    pub fn len(&self) -> usize {
        self.rel.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rel
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(k, _)| (k / self.n2, k % self.n2))
    }

    /// Checks the two simulation clauses for every pair.
    pub fn is_simulation(&self, m1: &LabeledSystem, m2: &LabeledSystem) -> bool {
        self.pairs().all(|(s1, s2)| {
            m1.labels[s1] == m2.labels[s2]
                && m1.succ[s1]
                    .iter()
                    .all(|&t1| m2.succ[s2].iter().any(|&t2| self.contains(t1, t2)))
        })
    }

    /// Relational composition `self ; other`.
    pub fn compose(&self, other: &Simulation) -> Simulation {
        let mut rel = vec![false; self.n1 * other.n2];
        for (a, b) in self.pairs() {
            for c in 0..other.n2 {
                if other.contains(b, c) {
                    rel[a * other.n2 + c] = true;
                }
            }
        }
        Simulation {
            n1: self.n1,
            n2: other.n2,
            rel,
        }
    }
}

/// Greatest relation `R` with equal labels on related pairs and every
/// move of `s1` matched by a move of `s2` into `R`. `None` when the
/// initial states are not related.
pub fn greatest_simulation(m1: &LabeledSystem, m2: &LabeledSystem) -> Option<Simulation> {
    let (n1, n2) = (m1.len(), m2.len());
    if n1 == 0 || n2 == 0 {
        return None;
    }
    let at = |a: usize, b: usize| a * n2 + b;
    let mut rel = vec![false; n1 * n2];
    for a in 0..n1 {
        for b in 0..n2 {
            rel[at(a, b)] = m1.labels[a] == m2.labels[b];
        }
    }
    let pred1 = m1.preds();
    let pred2 = m2.preds();
    // count[t1][s2] = |{t2 ∈ succ(s2) : (t1, t2) ∈ R}|
    let mut count = vec![0u32; n1 * n2];
    for t1 in 0..n1 {
        for t2 in 0..n2 {
            if rel[at(t1, t2)] {
                for &s2 in &pred2[t2] {
                    count[at(t1, s2)] += 1;
                }
            }
        }
    }
    let mut work = Vec::new();
    for s1 in 0..n1 {
        for s2 in 0..n2 {
            if rel[at(s1, s2)] && m1.succ[s1].iter().any(|&t1| count[at(t1, s2)] == 0) {
                rel[at(s1, s2)] = false;
                work.push((s1, s2));
            }
        }
    }
    while let Some((t1, t2)) = work.pop() {
        for &s2 in &pred2[t2] {
            let c = &mut count[at(t1, s2)];
            *c -= 1;
            if *c == 0 {
                for &s1 in &pred1[t1] {
                    if rel[at(s1, s2)] {
                        rel[at(s1, s2)] = false;
                        work.push((s1, s2));
                    }
                }
            }
        }
    }
    rel[0].then_some(Simulation { n1, n2, rel })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimReport {
    pub exists: bool,
    pub concrete_states: usize,
    pub abstract_states: usize,
    pub related_pairs: usize,
}

/// Explores both models and searches for a simulation of `m1` by `m2`.
pub fn simulation_between(
    m1: &TmasGraph,
    m2: &TmasGraph,
    obs: &Observation,
    opts: ExploreOptions,
) -> Result<(SimReport, Option<Simulation>)> {
    let mut interner = LabelInterner::default();
    let (s1, _) = labeled_system(&Network::from_mas(m1)?, obs, &mut interner, opts)?;
    let (s2, _) = labeled_system(&Network::from_mas(m2)?, obs, &mut interner, opts)?;
    let sim = greatest_simulation(&s1, &s2);
    Ok((
        SimReport {
            exists: sim.is_some(),
            concrete_states: s1.len(),
            abstract_states: s2.len(),
            related_pairs: sim.as_ref().map_or(0, Simulation::len),
        },
        sim,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys(succ: &[&[usize]], labels: &[u32]) -> LabeledSystem {
        LabeledSystem {
            succ: succ.iter().map(|s| s.to_vec()).collect(),
            labels: labels.to_vec(),
        }
    }

    #[test]
    fn identity_is_contained() {
        let m = sys(&[&[1, 2], &[0], &[]], &[0, 1, 1]);
        let r = greatest_simulation(&m, &m).unwrap();
        for s in 0..3 {
            assert!(r.contains(s, s));
        }
        assert!(r.is_simulation(&m, &m));
    }

    #[test]
    fn missing_transition_breaks_simulation() {
        let m1 = sys(&[&[1], &[]], &[0, 1]);
        let m2 = sys(&[&[], &[]], &[0, 1]);
        assert!(greatest_simulation(&m1, &m2).is_none());
        assert!(greatest_simulation(&m2, &m1).is_some());
    }

    #[test]
    fn branching_is_matched_by_merged_state() {
        // a -> b1 -> c, a -> b2 ; simulated by a -> b -> c
        let m1 = sys(&[&[1, 2], &[3], &[], &[]], &[0, 1, 1, 2]);
        let m2 = sys(&[&[1], &[2], &[]], &[0, 1, 2]);
        let r = greatest_simulation(&m1, &m2).unwrap();
        assert!(r.contains(2, 1) && r.is_simulation(&m1, &m2));
        assert!(!r.contains(3, 1));
    }
}
