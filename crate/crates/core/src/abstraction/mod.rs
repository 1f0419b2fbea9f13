//! Scope-aware replacement of agent variables by abstract ones, driven by
//! local-domain over-approximations.

mod spec_json;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::compose::{strip_clocks, strip_clocks_mas};
use crate::error::{Error, Result};
use crate::localdomain::{
    over_approx_local_domain, over_approx_mas, project_local_domain, OverApproxOptions,
};
use crate::model::{
    for_each_product, Action, Condition, Edge, Evaluation, Lit, TimedAgentGraph, TmasGraph,
    VariableDecl,
};
use crate::semantics::LocalDomain;

/// How the removed variables `W` are summarised in the fresh variables `Z`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mapping {
    /// `Z = ∅`.
    Remove,
    /// Extensional table from `W`-values to `Z`-values.
    Table {
        z: Vec<VariableDecl>,
        table: BTreeMap<Vec<Lit>, Vec<Lit>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MappingFunction {
    /// Removed variables; array names are expanded on validation.
    pub w: Vec<String>,
    pub mapping: Mapping,
}

impl MappingFunction {
    pub fn remove<S: Into<String>>(w: impl IntoIterator<Item = S>) -> Self {
        MappingFunction {
            w: w.into_iter().map(Into::into).collect(),
            mapping: Mapping::Remove,
        }
    }

    pub fn z(&self) -> &[VariableDecl] {
        match &self.mapping {
            Mapping::Remove => &[],
            Mapping::Table { z, .. } => z,
        }
    }

    /// `f(η|W)` for values listed in `w` order.
    pub fn apply(&self, w_vals: &[Lit]) -> Result<Vec<Lit>> {
        match &self.mapping {
            Mapping::Remove => Ok(Vec::new()),
            Mapping::Table { table, .. } => table.get(w_vals).cloned().ok_or_else(|| {
                Error::InvalidAbstraction(format!("mapping undefined on {w_vals:?}"))
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    All,
    Locations(BTreeSet<String>),
}

impl Scope {
    pub fn contains(&self, location: &str) -> bool {
        match self {
            Scope::All => true,
            Scope::Locations(s) => s.contains(location),
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, Scope::Locations(s) if s.is_empty())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionEntry {
    pub agent: String,
    pub scope: Scope,
    pub f: MappingFunction,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbstractionSpec {
    pub entries: Vec<AbstractionEntry>,
}

impl AbstractionSpec {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Removed variables of every entry, qualified as in the combined graph.
    pub fn removed(&self, mg: &TmasGraph) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for e in &self.entries {
            if let Some(i) = mg.agent_index(&e.agent) {
                for v in &e.f.w {
                    for x in mg.agents[i].expand_name(v) {
                        out.insert(mg.qualify(i, &x));
                    }
                }
            }
        }
        out
    }

    /// Checks the entries against `mg` and expands array names in `W`.
    pub fn resolve(&self, mg: &TmasGraph) -> Result<AbstractionSpec> {
        let bad = |m: String| Error::InvalidAbstraction(m);
        let mut fresh: HashSet<(String, String)> = HashSet::new();
        let mut entries = Vec::new();
        for e in &self.entries {
            let i = mg
                .agent_index(&e.agent)
                .ok_or_else(|| bad(format!("unknown agent `{}`", e.agent)))?;
            let g = &mg.agents[i];
            let mut w = Vec::new();
            for v in &e.f.w {
                let names = g.expand_name(v);
                if names.is_empty() {
                    return Err(Error::UndeclaredVariable(v.clone()));
                }
                for n in names {
                    if mg.is_shared(&n) {
                        return Err(bad(format!(
                            "`{n}` is shared; only agent-local variables can be abstracted"
                        )));
                    }
                    if !w.contains(&n) {
                        w.push(n);
                    }
                }
            }
            if let Scope::Locations(s) = &e.scope {
                for l in s {
                    if g.location_index(l).is_none() {
                        return Err(Error::UndeclaredLocation(l.clone()));
                    }
                }
            }
            for z in e.f.z() {
                if g.variable(&z.name).is_some() || mg.is_shared(&z.name) {
                    return Err(bad(format!("`{}` is already declared", z.name)));
                }
                if !fresh.insert((e.agent.clone(), z.name.clone())) {
                    return Err(bad(format!("`{}` introduced twice", z.name)));
                }
                if z.domain.is_empty() {
                    return Err(bad(format!("empty domain for `{}`", z.name)));
                }
            }
            let f = MappingFunction {
                w: w.clone(),
                mapping: e.f.mapping.clone(),
            };
            if let Mapping::Table { z, table } = &e.f.mapping {
                if e.f.w != w {
                    return Err(bad(
                        "a mapping table must list scalar source variables".into(),
                    ));
                }
                let doms: Vec<Vec<Lit>> = w
                    .iter()
                    .map(|n| g.domain_of(n).unwrap().values())
                    .collect();
                let mut err = None;
                for_each_product(&doms, |p| {
                    match table.get(p) {
                        None => err = Some(format!("mapping undefined on {p:?}")),
                        Some(zs) if zs.len() != z.len() => {
                            err = Some(format!("mapping of {p:?} has the wrong arity"))
                        }
                        Some(zs) => {
                            if let Some((d, v)) =
                                z.iter().zip(zs).find(|(d, v)| !d.domain.contains(**v))
                            {
                                err = Some(format!("{} outside the domain of `{}`", v, d.name));
                            }
                        }
                    }
                    err.is_none()
                });
                if let Some(m) = err {
                    return Err(bad(m));
                }
            }
            entries.push(AbstractionEntry {
                agent: e.agent.clone(),
                scope: e.scope.clone(),
                f,
            });
        }
        Ok(AbstractionSpec { entries })
    }
}

/// Abstract graph with, for each edge, the indices of the input edges it
/// was generated from.
#[derive(Debug, Clone)]
pub struct AbstractAgent {
    pub graph: TimedAgentGraph,
    pub provenance: Vec<Vec<usize>>,
}

/// Rewrites one agent graph for a single `(f, Sc)` pair. `d` must bind the
/// variables of `f.w` (in any order) and have an entry for every source
/// location of an edge touching the scope.
pub fn abstract_agent(
    g: &TimedAgentGraph,
    d: &LocalDomain,
    f: &MappingFunction,
    scope: &Scope,
) -> Result<AbstractAgent> {
    let d = d.restrict(&f.w)?;
    let eta0 = g.initial_evaluation()?;
    let w0: Vec<Lit> = f.w.iter().map(|v| eta0.lookup(v)).collect::<Result<_>>()?;
    let z0 = f.apply(&w0)?;
    let z = f.z();

    let mut out = g.clone();
    let z_init: Evaluation = z
        .iter()
        .zip(&z0)
        .map(|(decl, v)| (decl.name.clone(), *v))
        .collect();
    for (decl, v) in z.iter().zip(&z0) {
        out.variables
            .push(VariableDecl::new(decl.name.clone(), decl.domain.clone(), *v));
    }
    if !z.is_empty() {
        out.initial_condition = Condition::and([
            g.initial_condition.clone(),
            Condition::from_evaluation(&z_init),
        ]);
    }
    let w_init: Evaluation = f.w.iter().cloned().zip(w0.iter().copied()).collect();

    let mut edges: IndexMap<Edge, Vec<usize>> = IndexMap::new();
    for (k, e) in g.edges.iter().enumerate() {
        let src_in = scope.contains(&e.source);
        let dst_in = scope.contains(&e.target);
        if !src_in && !dst_in {
            edges.entry(e.clone()).or_default().push(k);
            continue;
        }
        let set = d
            .get(&e.source)
            .ok_or_else(|| Error::MissingDomain(e.source.clone()))?;
        for vals in set {
            let eta = d.evaluation(vals);
            let mut action = e.action.clone();
            if src_in {
                action = action.after(&Action::assign_all(&eta));
                action = action.after(&Action::assign_all(&z_init));
            }
            if dst_in {
                let fz: Evaluation = z
                    .iter()
                    .map(|decl| decl.name.clone())
                    .zip(f.apply(vals)?)
                    .collect();
                action = Action::assign_all(&fz).after(&action);
                action = Action::assign_all(&w_init).after(&action);
            }
            let edge = Edge {
                source: e.source.clone(),
                target: e.target.clone(),
                guard: e.guard.substitute(&eta),
                clock_guard: e.clock_guard.clone(),
                sync: e.sync.clone(),
                action,
                resets: e.resets.clone(),
            };
            edges.entry(edge).or_default().push(k);
        }
    }
    let (edges, provenance) = edges.into_iter().unzip();
    out.edges = edges;
    Ok(AbstractAgent {
        graph: out,
        provenance,
    })
}

/// Drops edges whose guard no evaluation over the declared domains
/// satisfies. Guards over more than 10^6 evaluations are kept. Returns the
/// indices of the kept edges.
pub fn prune_dead_edges(g: &TimedAgentGraph) -> (TimedAgentGraph, Vec<usize>) {
    let mut cache: BTreeMap<String, bool> = BTreeMap::new();
    let mut kept = Vec::new();
    for (k, e) in g.edges.iter().enumerate() {
        let key = e.guard.to_string();
        let live = *cache
            .entry(key)
            .or_insert_with(|| satisfiable(g, &e.guard));
        if live {
            kept.push(k);
        }
    }
    let mut out = g.clone();
    out.edges = kept.iter().map(|&k| g.edges[k].clone()).collect();
    (out, kept)
}

fn satisfiable(g: &TimedAgentGraph, c: &Condition) -> bool {
    match c {
        Condition::True => return true,
        Condition::False => return false,
        _ => {}
    }
    let names: Vec<String> = g.resolve_vars(&c.vars()).into_iter().collect();
    let doms: Vec<Vec<Lit>> = names
        .iter()
        .map(|n| g.domain_of(n).unwrap().values())
        .collect();
    let size = doms
        .iter()
        .try_fold(1u128, |a, d| a.checked_mul(d.len() as u128))
        .unwrap_or(u128::MAX);
    if size > 1_000_000 {
        return true;
    }
    let mut env = g.declared_initials();
    let mut found = false;
    for_each_product(&doms, |p| {
        for (n, v) in names.iter().zip(p) {
            env.set(n.clone(), *v);
        }
        found = c.eval(&env).unwrap_or(true);
        !found
    });
    found
}

#[derive(Debug, Clone, Copy, Default)]
pub struct AbstractOptions {
    pub local: OverApproxOptions,
    pub prune: bool,
}

#[derive(Debug, Clone)]
pub struct AbstractMas {
    pub mg: TmasGraph,
    /// Per agent, per abstract edge: indices of the originating edges.
    pub provenance: Vec<Vec<Vec<usize>>>,
    /// Local domain used by each entry, over the agent's own names.
    pub domains: Vec<LocalDomain>,
}

/// Local domains of every entry's `W`, projected onto the entry's agent
/// and expressed in agent-local names.
pub fn entry_domains(
    mg: &TmasGraph,
    spec: &AbstractionSpec,
    opts: OverApproxOptions,
) -> Result<Vec<LocalDomain>> {
    if spec.entries.is_empty() {
        return Ok(Vec::new());
    }
    let index: Vec<usize> = spec
        .entries
        .iter()
        .map(|e| mg.agent_index(&e.agent).unwrap())
        .collect();
    let unqualify = |i: usize| {
        let prefix = format!("{}.", mg.agents[i].name);
        move |v: &str| v.strip_prefix(&prefix).unwrap_or(v).to_string()
    };
    if opts.coarse {
        let mut per_agent: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (e, &i) in spec.entries.iter().zip(&index) {
            let w = per_agent.entry(i).or_default();
            for v in &e.f.w {
                if !w.contains(v) {
                    w.push(v.clone());
                }
            }
        }
        let mut joint = BTreeMap::new();
        for (i, w) in per_agent {
            let g = strip_clocks(&mg.agents[i]);
            joint.insert(i, over_approx_local_domain(&g, &w, opts)?.domain);
        }
        return spec
            .entries
            .iter()
            .zip(&index)
            .map(|(e, i)| joint[i].restrict(&e.f.w))
            .collect();
    }
    let mut w_all: Vec<String> = Vec::new();
    for (e, &i) in spec.entries.iter().zip(&index) {
        for v in &e.f.w {
            let q = mg.qualify(i, v);
            if !w_all.contains(&q) {
                w_all.push(q);
            }
        }
    }
    let (r, combined) = over_approx_mas(&strip_clocks_mas(mg), &w_all, opts)?;
    let mut out = Vec::new();
    for (e, &i) in spec.entries.iter().zip(&index) {
        let qualified: Vec<String> = e.f.w.iter().map(|v| mg.qualify(i, v)).collect();
        let d = project_local_domain(&r.domain.restrict(&qualified)?, &combined, mg, i)?;
        out.push(d.relabel(|l| l.to_string(), unqualify(i)));
    }
    Ok(out)
}

/// Abstraction of a TMAS graph: local domains on the time-insensitive
/// product (or per agent with `coarse`), then each entry applied to its
/// agent in declaration order.
pub fn abstract_mas(
    mg: &TmasGraph,
    spec: &AbstractionSpec,
    opts: AbstractOptions,
) -> Result<AbstractMas> {
    mg.validate()?;
    let spec = spec.resolve(mg)?;
    let domains = entry_domains(mg, &spec, opts.local)?;
    abstract_with_domains(mg, &spec, &domains, opts.prune)
}

/// Applies already computed (or user supplied) local domains, one per entry.
pub fn abstract_with_domains(
    mg: &TmasGraph,
    spec: &AbstractionSpec,
    domains: &[LocalDomain],
    prune: bool,
) -> Result<AbstractMas> {
    if domains.len() != spec.entries.len() {
        return Err(Error::InvalidAbstraction(
            "one local domain per entry is required".into(),
        ));
    }
    let mut agents = mg.agents.clone();
    let mut provenance: Vec<Vec<Vec<usize>>> = mg
        .agents
        .iter()
        .map(|a| (0..a.edges.len()).map(|k| vec![k]).collect())
        .collect();
    for (e, d) in spec.entries.iter().zip(domains) {
        let i = mg
            .agent_index(&e.agent)
            .ok_or_else(|| Error::InvalidAbstraction(format!("unknown agent `{}`", e.agent)))?;
        let r = abstract_agent(&agents[i], d, &e.f, &e.scope)?;
        provenance[i] = r
            .provenance
            .iter()
            .map(|from| {
                let mut o: Vec<usize> = from
                    .iter()
                    .flat_map(|&k| provenance[i][k].iter().copied())
                    .collect();
                o.sort_unstable();
                o.dedup();
                o
            })
            .collect();
        agents[i] = r.graph;
    }
    if prune {
        for (i, a) in agents.iter_mut().enumerate() {
            let (g, kept) = prune_dead_edges(a);
            provenance[i] = kept.iter().map(|&k| provenance[i][k].clone()).collect();
            *a = g;
        }
    }
    let out = TmasGraph {
        shared: mg.shared.clone(),
        agents,
    };
    out.validate()?;
    Ok(AbstractMas {
        mg: out,
        provenance,
        domains: domains.to_vec(),
    })
}

/// Checks that abstraction left the timing untouched: same agents,
/// locations, clocks and invariants, and every abstract edge carries the
/// endpoints, clock guard, resets and synchronisation of its origin edges.
/// Without provenance any concrete edge with the same frame is accepted.
pub fn clock_frame_check(
    concrete: &TmasGraph,
    abs: &TmasGraph,
    provenance: Option<&[Vec<Vec<usize>>]>,
) -> std::result::Result<(), String> {
    if concrete.agents.len() != abs.agents.len() {
        return Err("agent count differs".into());
    }
    for (i, (c, a)) in concrete.agents.iter().zip(&abs.agents).enumerate() {
        if c.name != a.name {
            return Err(format!("agent {i} is `{}` vs `{}`", c.name, a.name));
        }
        if c.locations != a.locations || c.initial_location != a.initial_location {
            return Err(format!("{}: locations differ", c.name));
        }
        if c.clocks != a.clocks {
            return Err(format!("{}: clocks differ", c.name));
        }
        if c.invariants != a.invariants {
            return Err(format!("{}: invariants differ", c.name));
        }
        let same = |x: &Edge, y: &Edge| {
            x.source == y.source
                && x.target == y.target
                && x.clock_guard == y.clock_guard
                && x.resets == y.resets
                && x.sync == y.sync
        };
        for (k, e) in a.edges.iter().enumerate() {
            let ok = match provenance {
                Some(p) => {
                    let from = p.get(i).and_then(|v| v.get(k)).ok_or_else(|| {
                        format!("{}: no provenance for edge {k}", c.name)
                    })?;
                    !from.is_empty()
                        && from
                            .iter()
                            .all(|&o| c.edges.get(o).is_some_and(|ce| same(ce, e)))
                }
                None => c.edges.iter().any(|ce| same(ce, e)),
            };
            if !ok {
                return Err(format!(
                    "{}: edge {} -> {} changes the clock frame",
                    c.name, e.source, e.target
                ));
            }
        }
    }
    Ok(())
}
