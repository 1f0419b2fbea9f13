//! Seeded generators for small systems, abstraction specs and properties.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::Rng;

use crate::abstraction::{AbstractionEntry, AbstractionSpec, MappingFunction, Scope};
use crate::analysis::Prop;
use crate::error::Result;
use crate::model::{
    Action, Assign, BinOp, ClockAtom, ClockConstraint, ClockRel, CmpOp, Condition, Domain, Edge,
    Expr, SyncLabel, TimedAgentGraph, TmasGraph, VariableDecl,
};

/// Size limits of generated systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub max_agents: usize,
    pub max_locations: usize,
    /// Shared and local together.
    pub max_vars: usize,
    pub max_domain: usize,
    pub max_clocks: usize,
    pub max_constant: i64,
    pub max_edges: usize,
    pub sync: bool,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            max_agents: 3,
            max_locations: 4,
            max_vars: 3,
            max_domain: 3,
            max_clocks: 2,
            max_constant: 3,
            max_edges: 5,
            sync: true,
        }
    }
}

impl Bounds {
    /// Single agent with one or two clocks, for zone-graph checks.
    pub fn clocked(max_constant: i64) -> Self {
        Bounds {
            max_agents: 1,
            max_locations: 4,
            max_vars: 1,
            max_domain: 2,
            max_clocks: 2,
            max_constant,
            max_edges: 6,
            sync: false,
        }
    }
}

const RELS: [ClockRel; 5] = [ClockRel::Lt, ClockRel::Le, ClockRel::Eq, ClockRel::Ge, ClockRel::Gt];
const CMPS: [CmpOp; 6] = [CmpOp::Lt, CmpOp::Le, CmpOp::Eq, CmpOp::Ne, CmpOp::Ge, CmpOp::Gt];

fn var_atom(rng: &mut impl Rng, vars: &[&VariableDecl]) -> Condition {
    let v = vars[rng.gen_range(0..vars.len())];
    let k = rng.gen_range(0..v.domain.len() as i64);
    Condition::cmp(*CMPS.choose(rng).unwrap(), Expr::var(&v.name), Expr::Lit(k))
}

fn guard(rng: &mut impl Rng, vars: &[&VariableDecl]) -> Condition {
    if vars.is_empty() || rng.gen_bool(0.5) {
        return Condition::True;
    }
    if rng.gen_bool(0.25) {
        Condition::And(vec![var_atom(rng, vars), var_atom(rng, vars)])
    } else {
        var_atom(rng, vars)
    }
}

/// `v := k` or `v := (w + c) % |dom(v)|`.
fn action(rng: &mut impl Rng, vars: &[&VariableDecl]) -> Action {
    if vars.is_empty() {
        return Action::tau();
    }
    let n = rng.gen_range(0..=2);
    Action(
        (0..n)
            .map(|_| {
                let v = vars[rng.gen_range(0..vars.len())];
                let size = v.domain.len() as i64;
                let value = if rng.gen_bool(0.5) {
                    Expr::Lit(rng.gen_range(0..size))
                } else {
                    let w = vars[rng.gen_range(0..vars.len())];
                    let sum = Expr::bin(BinOp::Add, Expr::var(&w.name), Expr::Lit(rng.gen_range(0..size)));
                    Expr::bin(BinOp::Mod, sum, Expr::Lit(size))
                };
                Assign::new(v.name.clone(), value)
            })
            .collect(),
    )
}

fn clock_guard(rng: &mut impl Rng, clocks: &[String], max_constant: i64) -> ClockConstraint {
    if clocks.is_empty() || rng.gen_bool(0.4) {
        return ClockConstraint::top();
    }
    let x = clocks.choose(rng).unwrap();
    ClockConstraint::atom(ClockAtom::simple(
        x.clone(),
        *RELS.choose(rng).unwrap(),
        rng.gen_range(0..=max_constant),
    ))
}

/// Random well-formed system within `b`. Variables use domains `0..n-1`;
/// every channel has a single emitting agent.
pub fn random_mas(rng: &mut impl Rng, b: &Bounds) -> Result<TmasGraph> {
    let n_agents = rng.gen_range(1..=b.max_agents.max(1));
    let n_vars = rng.gen_range(1..=b.max_vars.max(1));
    let mut shared = Vec::new();
    let mut locals: Vec<Vec<VariableDecl>> = vec![Vec::new(); n_agents];
    for k in 0..n_vars {
        let size = rng.gen_range(2..=b.max_domain.max(2)) as i64;
        let d = VariableDecl::new(format!("v{k}"), Domain::range(0, size - 1), rng.gen_range(0..size));
        if n_agents > 1 && rng.gen_bool(0.35) {
            shared.push(d);
        } else {
            locals[rng.gen_range(0..n_agents)].push(d);
        }
    }
    let mut clocks: Vec<Vec<String>> = vec![Vec::new(); n_agents];
    for k in 0..rng.gen_range(0..=b.max_clocks) {
        clocks[rng.gen_range(0..n_agents)].push(format!("x{k}"));
    }
    // channel name -> emitting agent
    let mut channels = BTreeMap::new();
    if b.sync && n_agents > 1 {
        for k in 0..rng.gen_range(1..=2) {
            channels.insert(format!("c{k}"), rng.gen_range(0..n_agents));
        }
    }
    let mut agents = Vec::new();
    for i in 0..n_agents {
        let n_locs = rng.gen_range(1..=b.max_locations.max(1));
        let locs: Vec<String> = (0..n_locs).map(|k| format!("l{k}")).collect();
        let mut g = TimedAgentGraph::new(format!("A{i}"), "l0");
        locs.iter().skip(1).for_each(|l| g.add_location(l.clone()));
        locals[i].iter().cloned().for_each(|d| g.add_var(d));
        g.clocks = clocks[i].clone();
        let visible: Vec<&VariableDecl> = shared.iter().chain(locals[i].iter()).collect();
        for l in &locs {
            if !g.clocks.is_empty() && rng.gen_bool(0.3) {
                let x = g.clocks.choose(rng).unwrap().clone();
                let rel = if rng.gen_bool(0.5) { ClockRel::Le } else { ClockRel::Lt };
                let atom = ClockAtom::simple(x, rel, rng.gen_range(1..=b.max_constant.max(1)));
                g.invariants.insert(l.clone(), ClockConstraint::atom(atom));
            }
        }
        // a tree from l0 first, so that every location has an incoming path
        let n_edges = rng.gen_range(n_locs.max(2) - 1..=b.max_edges.max(n_locs - 1).max(1));
        for k in 0..n_edges {
            let (src, dst) = if k + 1 < n_locs {
                (&locs[rng.gen_range(0..=k)], &locs[k + 1])
            } else {
                (locs.choose(rng).unwrap(), locs.choose(rng).unwrap())
            };
            let mut e = Edge::new(src.clone(), dst.clone());
            e.guard = guard(rng, &visible);
            e.clock_guard = clock_guard(rng, &g.clocks, b.max_constant);
            e.action = action(rng, &visible);
            e.resets = g.clocks.iter().filter(|_| rng.gen_bool(0.3)).cloned().collect();
            if !channels.is_empty() && rng.gen_bool(0.3) {
                let names: Vec<&String> = channels.keys().collect();
                let ch = (*names.choose(rng).unwrap()).clone();
                e.sync = if channels[&ch] == i {
                    SyncLabel::Emit(ch.clone())
                } else {
                    SyncLabel::Receive(ch.clone())
                };
                g.channels.insert(ch);
            }
            g.edges.push(e);
        }
        agents.push(g);
    }
    let mg = TmasGraph::new(shared, agents)?;
    mg.validate()?;
    Ok(mg)
}

/// Removal of one or two local variables, each entry with scope `All` or
/// a random non-empty location subset. `None` when no agent owns a local
/// variable.
pub fn random_spec(rng: &mut impl Rng, mg: &TmasGraph) -> Option<AbstractionSpec> {
    let candidates: Vec<(usize, String)> = (0..mg.agents.len())
        .flat_map(|i| mg.local_variables(i).into_iter().map(move |v| (i, v.name.clone())))
        .collect();
    if candidates.is_empty() {
        return None;
    }
    let k = rng.gen_range(1..=candidates.len().min(2));
    let mut chosen: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for (i, v) in candidates.choose_multiple(rng, k) {
        chosen.entry(*i).or_default().push(v.clone());
    }
    let entries = chosen
        .into_iter()
        .map(|(i, w)| {
            let g = &mg.agents[i];
            let scope = if rng.gen_bool(0.5) {
                Scope::All
            } else {
                let n = rng.gen_range(1..=g.locations.len());
                Scope::Locations(g.locations.choose_multiple(rng, n).cloned().collect())
            };
            AbstractionEntry {
                agent: g.name.clone(),
                scope,
                f: MappingFunction::remove(w),
            }
        })
        .collect();
    Some(AbstractionSpec { entries })
}

/// Qualified variables of `mg` minus `hidden`, with their declarations.
fn observable(mg: &TmasGraph, hidden: &BTreeSet<String>) -> Vec<VariableDecl> {
    let mut out: BTreeMap<String, VariableDecl> = BTreeMap::new();
    for (i, g) in mg.agents.iter().enumerate() {
        for v in &g.variables {
            let q = mg.qualify(i, &v.name);
            if !hidden.contains(&q) {
                out.entry(q.clone())
                    .or_insert_with(|| VariableDecl::new(q, v.domain.clone(), v.initial));
            }
        }
    }
    out.into_values().collect()
}

fn prop_leaf(rng: &mut impl Rng, mg: &TmasGraph, vars: &[VariableDecl]) -> Prop {
    if vars.is_empty() || rng.gen_bool(0.3) {
        let g = mg.agents.choose(rng).unwrap();
        return Prop::at(g.name.clone(), g.locations.choose(rng).unwrap().clone());
    }
    let refs: Vec<&VariableDecl> = vars.iter().collect();
    Prop::Atom(var_atom(rng, &refs))
}

fn prop_tree(rng: &mut impl Rng, mg: &TmasGraph, vars: &[VariableDecl], depth: usize) -> Prop {
    if depth == 0 || rng.gen_bool(0.4) {
        return prop_leaf(rng, mg, vars);
    }
    match rng.gen_range(0..3) {
        0 => Prop::not(prop_tree(rng, mg, vars, depth - 1)),
        1 => Prop::And(vec![prop_tree(rng, mg, vars, depth - 1), prop_tree(rng, mg, vars, depth - 1)]),
        _ => Prop::Or(vec![prop_tree(rng, mg, vars, depth - 1), prop_tree(rng, mg, vars, depth - 1)]),
    }
}

/// State property over the locations and the variables not in `hidden`
/// (qualified names).
pub fn random_prop(rng: &mut impl Rng, mg: &TmasGraph, hidden: &BTreeSet<String>) -> Prop {
    let vars = observable(mg, hidden);
    prop_tree(rng, mg, &vars, 2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_systems_respect_bounds() {
        let b = Bounds::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let mg = random_mas(&mut rng, &b).unwrap();
            assert!(mg.agents.len() <= b.max_agents);
            let vars: BTreeSet<String> = (0..mg.agents.len())
                .flat_map(|i| mg.agents[i].variables.iter().map(move |v| (i, v)))
                .map(|(i, v)| mg.qualify(i, &v.name))
                .collect();
            assert!(vars.len() <= b.max_vars);
            for g in &mg.agents {
                assert!(g.locations.len() <= b.max_locations);
                assert!(g.variables.iter().all(|v| v.domain.len() <= b.max_domain));
                assert!(g.max_clock_constant() <= b.max_constant);
            }
            assert!(mg.agents.iter().map(|g| g.clocks.len()).sum::<usize>() <= b.max_clocks);
        }
    }

    #[test]
    fn specs_remove_only_local_variables() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let mg = random_mas(&mut rng, &Bounds::default()).unwrap();
            if let Some(spec) = random_spec(&mut rng, &mg) {
                let removed = spec.removed(&mg);
                assert!((1..=2).contains(&removed.len()));
                assert!(spec.resolve(&mg).is_ok());
                let p = random_prop(&mut rng, &mg, &removed);
                assert!(p.vars().is_disjoint(&removed));
            }
        }
    }

    #[test]
    fn same_seed_same_system() {
        let a = random_mas(&mut ChaCha8Rng::seed_from_u64(3), &Bounds::default()).unwrap();
        let b = random_mas(&mut ChaCha8Rng::seed_from_u64(3), &Bounds::default()).unwrap();
        assert_eq!(a, b);
    }
}
