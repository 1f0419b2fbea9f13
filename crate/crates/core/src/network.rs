//! Index-based compiled form of a TMAS graph, used by every explorer.
//!
//! A [`Network`] owns the global variable vector (shared variables keep
//! their names, agent-local ones are prefixed with the agent name), the
//! compiled edges of every agent, and the successor function of the
//! synchronous product. States are flat vectors: one location index per
//! agent followed by one literal per variable.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::{
    split_element, Action, BinOp, ClockConstraint, ClockRel, CmpOp, Condition, Domain,
    Evaluation, Expr, LValue, Lit, SyncLabel, TimedAgentGraph, TmasGraph, VariableDecl,
};

/// Default cap on explored states; `TMAS_BUDGET` overrides it.
pub const DEFAULT_BUDGET: usize = 10_000_000;

pub fn default_budget() -> usize {
    std::env::var("TMAS_BUDGET")
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_BUDGET)
}

/// Name of a product location.
pub fn tuple_name<S: AsRef<str>>(parts: &[S]) -> String {
    if parts.len() == 1 {
        return parts[0].as_ref().to_string();
    }
    let inner: Vec<&str> = parts.iter().map(|p| p.as_ref()).collect();
    format!("({})", inner.join(","))
}

#[derive(Debug, Clone)]
pub struct ArrayMap {
    pub name: String,
    lo: Lit,
    slots: Vec<Option<usize>>,
}

impl ArrayMap {
    fn slot(&self, i: Lit) -> Result<usize> {
        i.checked_sub(self.lo)
            .and_then(|k| usize::try_from(k).ok())
            .and_then(|k| self.slots.get(k).copied().flatten())
            .ok_or_else(|| Error::IndexOutOfRange {
                array: self.name.clone(),
                index: i,
            })
    }

    pub fn elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.slots.iter().flatten().copied()
    }
}

#[derive(Debug, Clone)]
pub enum CExpr {
    Lit(Lit),
    Var(usize),
    Index(Arc<ArrayMap>, Box<CExpr>),
    Neg(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
}

impl CExpr {
    pub fn eval(&self, v: &[Lit]) -> Result<Lit> {
        match self {
            CExpr::Lit(k) => Ok(*k),
            CExpr::Var(i) => Ok(v[*i]),
            CExpr::Index(a, e) => Ok(v[a.slot(e.eval(v)?)?]),
            CExpr::Neg(e) => e.eval(v)?.checked_neg().ok_or(Error::ArithmeticOverflow),
            CExpr::Bin(op, a, b) => op.apply(a.eval(v)?, b.eval(v)?),
        }
    }

    fn reads(&self, out: &mut Vec<usize>) {
        match self {
            CExpr::Lit(_) => {}
            CExpr::Var(i) => out.push(*i),
            CExpr::Index(a, e) => {
                out.extend(a.elements());
                e.reads(out);
            }
            CExpr::Neg(e) => e.reads(out),
            CExpr::Bin(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
        }
    }
}

#[derive(Debug, Clone)]
pub enum CCond {
    True,
    False,
    Cmp(CmpOp, CExpr, CExpr),
    Not(Box<CCond>),
    And(Vec<CCond>),
    Or(Vec<CCond>),
}

impl CCond {
    pub fn eval(&self, v: &[Lit]) -> Result<bool> {
        match self {
            CCond::True => Ok(true),
            CCond::False => Ok(false),
            CCond::Cmp(op, a, b) => Ok(op.holds(a.eval(v)?, b.eval(v)?)),
            CCond::Not(c) => Ok(!c.eval(v)?),
            CCond::And(cs) => {
                for c in cs {
                    if !c.eval(v)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            CCond::Or(cs) => {
                for c in cs {
                    if c.eval(v)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn reads(&self, out: &mut Vec<usize>) {
        match self {
            CCond::True | CCond::False => {}
            CCond::Cmp(_, a, b) => {
                a.reads(out);
                b.reads(out);
            }
            CCond::Not(c) => c.reads(out),
            CCond::And(cs) | CCond::Or(cs) => cs.iter().for_each(|c| c.reads(out)),
        }
    }
}

#[derive(Debug, Clone)]
pub enum CTarget {
    Var(usize),
    Index(Arc<ArrayMap>, CExpr),
}

#[derive(Debug, Clone, Default)]
pub struct CAction(pub Vec<(CTarget, CExpr)>);

impl CAction {
    /// Runs the assignments in place on the variable part `v`.
    pub fn apply(&self, v: &mut [Lit], vars: &[VariableDecl]) -> Result<()> {
        for (t, e) in &self.0 {
            let slot = match t {
                CTarget::Var(i) => *i,
                CTarget::Index(a, idx) => a.slot(idx.eval(v)?)?,
            };
            let value = e.eval(v)?;
            if !vars[slot].domain.contains(value) {
                return Err(Error::DomainOverflow {
                    var: vars[slot].name.clone(),
                    value,
                });
            }
            v[slot] = value;
        }
        Ok(())
    }

    pub fn reads(&self, out: &mut Vec<usize>) {
        for (t, e) in &self.0 {
            e.reads(out);
            if let CTarget::Index(_, idx) = t {
                idx.reads(out);
            }
        }
    }

    pub fn is_tau(&self) -> bool {
        self.0.is_empty()
    }
}

/// Clock atom over clock indices; index 0 is the reference clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CClockAtom {
    pub x: usize,
    pub y: usize,
    pub rel: ClockRel,
    pub bound: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CSync {
    None,
    Emit(usize),
    Receive(usize),
}

#[derive(Debug, Clone)]
pub struct CEdge {
    pub source: usize,
    pub target: usize,
    pub guard: CCond,
    pub clock_guard: Vec<CClockAtom>,
    pub sync: CSync,
    pub action: CAction,
    /// Clock indices (1-based).
    pub resets: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct AgentNet {
    pub name: String,
    pub locations: Vec<String>,
    pub initial: usize,
    pub invariants: Vec<Vec<CClockAtom>>,
    pub edges: Vec<CEdge>,
    /// Outgoing edge indices per location.
    pub out: Vec<Vec<usize>>,
}

/// A transition of the product: one interleaved edge, or an emitter edge
/// fused with a receiver edge of another agent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Move {
    pub agent: usize,
    pub edge: usize,
    pub partner: Option<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct Network {
    pub agents: Vec<AgentNet>,
    pub vars: Vec<VariableDecl>,
    pub var_index: HashMap<String, usize>,
    arrays: HashMap<String, Arc<ArrayMap>>,
    /// Clock names; clock `i` has DBM index `i + 1`.
    pub clocks: Vec<String>,
    pub channels: Vec<String>,
    pub max_constant: i64,
    pub has_diagonal: bool,
    initial_vars: Vec<Lit>,
}

/// Read-only view of a product state.
pub type State = Box<[Lit]>;

impl Network {
    /// Compiles a TMAS graph; non-shared names are prefixed `Agent.`.
    pub fn from_mas(mg: &TmasGraph) -> Result<Self> {
        mg.validate()?;
        let qualify: Vec<Box<dyn Fn(&str) -> String + '_>> = (0..mg.agents.len())
            .map(|i| Box::new(move |n: &str| mg.qualify(i, n)) as Box<dyn Fn(&str) -> String>)
            .collect();
        Network::build(&mg.agents, &qualify)
    }

    /// Compiles a single graph as a one-agent network with bare names.
    pub fn from_graph(g: &TimedAgentGraph) -> Result<Self> {
        g.validate()?;
        let ident: Vec<Box<dyn Fn(&str) -> String>> = vec![Box::new(|n: &str| n.to_string())];
        Network::build(std::slice::from_ref(g), &ident)
    }

    fn build(agents: &[TimedAgentGraph], names: &[Box<dyn Fn(&str) -> String + '_>]) -> Result<Self> {
        let mut vars: Vec<VariableDecl> = Vec::new();
        let mut var_index = HashMap::new();
        let mut initial_vars = Vec::new();
        for (g, q) in agents.iter().zip(names) {
            let eta0 = g.initial_evaluation()?;
            for v in &g.variables {
                let name = q(&v.name);
                let init = eta0.lookup(&v.name)?;
                match var_index.get(&name) {
                    Some(&i) => {
                        if initial_vars[i] != init {
                            return Err(Error::IllFormed(format!(
                                "agents disagree on the initial value of `{name}`"
                            )));
                        }
                    }
                    None => {
                        var_index.insert(name.clone(), vars.len());
                        vars.push(VariableDecl::new(name, v.domain.clone(), init));
                        initial_vars.push(init);
                    }
                }
            }
        }
        let mut grouped: BTreeMap<String, BTreeMap<Lit, usize>> = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            if let Some((base, k)) = split_element(&v.name) {
                grouped.entry(base.to_string()).or_default().insert(k, i);
            }
        }
        let arrays = grouped
            .into_iter()
            .map(|(base, elems)| {
                let lo = *elems.keys().next().unwrap();
                let hi = *elems.keys().last().unwrap();
                let mut slots = vec![None; (hi - lo + 1) as usize];
                for (k, i) in elems {
                    slots[(k - lo) as usize] = Some(i);
                }
                let map = ArrayMap {
                    name: base.clone(),
                    lo,
                    slots,
                };
                (base, Arc::new(map))
            })
            .collect();

        let mut net = Network {
            agents: Vec::new(),
            vars,
            var_index,
            arrays,
            clocks: Vec::new(),
            channels: Vec::new(),
            max_constant: 0,
            has_diagonal: false,
            initial_vars,
        };
        let mut clock_index: HashMap<String, usize> = HashMap::new();
        let mut chan_index: HashMap<String, usize> = HashMap::new();
        for (g, q) in agents.iter().zip(names) {
            for c in &g.clocks {
                let name = q(c);
                if clock_index.contains_key(&name) {
                    return Err(Error::IllFormed(format!("duplicate clock `{name}`")));
                }
                clock_index.insert(name.clone(), net.clocks.len() + 1);
                net.clocks.push(name);
            }
            for ch in &g.channels {
                if !chan_index.contains_key(ch) {
                    chan_index.insert(ch.clone(), net.channels.len());
                    net.channels.push(ch.clone());
                }
            }
        }
        for (g, q) in agents.iter().zip(names) {
            let loc_index: HashMap<&str, usize> = g
                .locations
                .iter()
                .enumerate()
                .map(|(i, l)| (l.as_str(), i))
                .collect();
            let cc = |c: &ClockConstraint, net: &mut Network| -> Result<Vec<CClockAtom>> {
                let mut out = Vec::new();
                for a in &c.0 {
                    let x = clock_index[&q(&a.clock)];
                    let y = match &a.minus {
                        Some(y) => {
                            net.has_diagonal = true;
                            clock_index[&q(y)]
                        }
                        None => 0,
                    };
                    net.max_constant = net.max_constant.max(a.bound);
                    out.push(CClockAtom {
                        x,
                        y,
                        rel: a.rel,
                        bound: a.bound,
                    });
                }
                Ok(out)
            };
            let mut invariants = Vec::new();
            for l in &g.locations {
                invariants.push(cc(&g.invariant(l), &mut net)?);
            }
            let mut edges = Vec::new();
            let mut out = vec![Vec::new(); g.locations.len()];
            for e in &g.edges {
                let source = loc_index[e.source.as_str()];
                let ce = CEdge {
                    source,
                    target: loc_index[e.target.as_str()],
                    guard: net.compile_cond(&e.guard, q)?,
                    clock_guard: cc(&e.clock_guard, &mut net)?,
                    sync: match &e.sync {
                        SyncLabel::None => CSync::None,
                        SyncLabel::Emit(c) => CSync::Emit(chan_index[c]),
                        SyncLabel::Receive(c) => CSync::Receive(chan_index[c]),
                    },
                    action: net.compile_action(&e.action, q)?,
                    resets: e.resets.iter().map(|x| clock_index[&q(x)]).collect(),
                };
                out[source].push(edges.len());
                edges.push(ce);
            }
            net.agents.push(AgentNet {
                name: g.name.clone(),
                locations: g.locations.clone(),
                initial: loc_index[g.initial_location.as_str()],
                invariants,
                edges,
                out,
            });
        }
        net.check_channel_arity()?;
        Ok(net)
    }

    fn check_channel_arity(&self) -> Result<()> {
        for (c, name) in self.channels.iter().enumerate() {
            let users = |want: fn(CSync) -> Option<usize>| {
                self.agents
                    .iter()
                    .filter(|a| a.edges.iter().any(|e| want(e.sync) == Some(c)))
                    .count()
            };
            let emitters = users(|s| match s {
                CSync::Emit(c) => Some(c),
                _ => None,
            });
            let receivers = users(|s| match s {
                CSync::Receive(c) => Some(c),
                _ => None,
            });
            if emitters >= 2 && receivers >= 2 {
                return Err(Error::ChannelArityViolation(name.clone()));
            }
        }
        Ok(())
    }

    /// Compiles an expression written in the global (qualified) namespace.
    pub fn compile_expr(&self, e: &Expr) -> Result<CExpr> {
        self.compile_expr_with(e, &|n: &str| n.to_string())
    }

    pub fn compile_cond(&self, c: &Condition, q: &dyn Fn(&str) -> String) -> Result<CCond> {
        Ok(match c {
            Condition::True => CCond::True,
            Condition::False => CCond::False,
            Condition::Cmp(op, a, b) => CCond::Cmp(
                *op,
                self.compile_expr_with(a, q)?,
                self.compile_expr_with(b, q)?,
            ),
            Condition::Not(c) => CCond::Not(Box::new(self.compile_cond(c, q)?)),
            Condition::And(cs) => CCond::And(
                cs.iter()
                    .map(|c| self.compile_cond(c, q))
                    .collect::<Result<_>>()?,
            ),
            Condition::Or(cs) => CCond::Or(
                cs.iter()
                    .map(|c| self.compile_cond(c, q))
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn scalar(&self, name: &str) -> Result<usize> {
        if let Some(&i) = self.var_index.get(name) {
            return Ok(i);
        }
        Err(match split_element(name) {
            Some((base, index)) if self.arrays.contains_key(base) => Error::IndexOutOfRange {
                array: base.to_string(),
                index,
            },
            _ => Error::UndeclaredVariable(name.to_string()),
        })
    }

    fn array(&self, base: &str) -> Result<Arc<ArrayMap>> {
        self.arrays
            .get(base)
            .cloned()
            .ok_or_else(|| Error::UndeclaredVariable(base.to_string()))
    }

    fn compile_expr_with(&self, e: &Expr, q: &dyn Fn(&str) -> String) -> Result<CExpr> {
        Ok(match e {
            Expr::Lit(k) => CExpr::Lit(*k),
            Expr::Var(n) => CExpr::Var(self.scalar(&q(n))?),
            Expr::Index(base, idx) => {
                let idx = self.compile_expr_with(idx, q)?;
                let arr = self.array(&q(base))?;
                match idx {
                    CExpr::Lit(k) => CExpr::Var(arr.slot(k)?),
                    idx => CExpr::Index(arr, Box::new(idx)),
                }
            }
            Expr::Neg(a) => CExpr::Neg(Box::new(self.compile_expr_with(a, q)?)),
            Expr::Bin(op, a, b) => CExpr::Bin(
                *op,
                Box::new(self.compile_expr_with(a, q)?),
                Box::new(self.compile_expr_with(b, q)?),
            ),
        })
    }

    fn compile_action(&self, a: &Action, q: &dyn Fn(&str) -> String) -> Result<CAction> {
        let mut out = Vec::new();
        for s in &a.0 {
            let target = match &s.target {
                LValue::Var(n) => CTarget::Var(self.scalar(&q(n))?),
                LValue::Index(base, idx) => {
                    let arr = self.array(&q(base))?;
                    match self.compile_expr_with(idx, q)? {
                        CExpr::Lit(k) => CTarget::Var(arr.slot(k)?),
                        idx => CTarget::Index(arr, idx),
                    }
                }
            };
            out.push((target, self.compile_expr_with(&s.value, q)?));
        }
        Ok(CAction(out))
    }

    pub fn agent_count(&self) -> usize {
        self.agents.len()
    }

    pub fn domain(&self, var: usize) -> &Domain {
        &self.vars[var].domain
    }

    pub fn initial_state(&self) -> State {
        let mut s: Vec<Lit> = self.agents.iter().map(|a| a.initial as Lit).collect();
        s.extend(&self.initial_vars);
        s.into_boxed_slice()
    }

    /// Variable part of a state.
    pub fn values<'a>(&self, s: &'a [Lit]) -> &'a [Lit] {
        &s[self.agents.len()..]
    }

    pub fn location(&self, s: &[Lit], agent: usize) -> usize {
        s[agent] as usize
    }

    pub fn location_name(&self, s: &[Lit]) -> String {
        let parts: Vec<&str> = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| a.locations[s[i] as usize].as_str())
            .collect();
        tuple_name(&parts)
    }

    pub fn location_names(&self, s: &[Lit]) -> Vec<String> {
        self.agents
            .iter()
            .enumerate()
            .map(|(i, a)| a.locations[s[i] as usize].clone())
            .collect()
    }

    pub fn evaluation(&self, s: &[Lit]) -> Evaluation {
        self.vars
            .iter()
            .zip(self.values(s))
            .map(|(d, v)| (d.name.clone(), *v))
            .collect()
    }

    /// Every discrete move from `s` whose data guards hold. Clock guards
    /// and invariants are not looked at.
    pub fn enabled_moves(&self, s: &[Lit], out: &mut Vec<Move>) -> Result<()> {
        let n = self.agents.len();
        let vals = &s[n..];
        for (i, a) in self.agents.iter().enumerate() {
            for &ei in &a.out[s[i] as usize] {
                let e = &a.edges[ei];
                match e.sync {
                    CSync::None => {
                        if e.guard.eval(vals)? {
                            out.push(Move {
                                agent: i,
                                edge: ei,
                                partner: None,
                            });
                        }
                    }
                    CSync::Emit(c) => {
                        if !e.guard.eval(vals)? {
                            continue;
                        }
                        for (j, b) in self.agents.iter().enumerate() {
                            if j == i {
                                continue;
                            }
                            for &fj in &b.out[s[j] as usize] {
                                let f = &b.edges[fj];
                                if f.sync == CSync::Receive(c) && f.guard.eval(vals)? {
                                    out.push(Move {
                                        agent: i,
                                        edge: ei,
                                        partner: Some((j, fj)),
                                    });
                                }
                            }
                        }
                    }
                    CSync::Receive(_) => {}
                }
            }
        }
        Ok(())
    }

    /// Target state of a move: emitter action first, then the receiver's.
    pub fn apply_move(&self, s: &[Lit], m: &Move) -> Result<State> {
        let n = self.agents.len();
        let mut t = s.to_vec();
        for (agent, e) in self.move_parts(m) {
            e.action.apply(&mut t[n..], &self.vars)?;
            t[agent] = e.target as Lit;
        }
        Ok(t.into_boxed_slice())
    }

    /// Every enabled discrete move with its successor state.
    pub fn successors(&self, s: &[Lit], out: &mut Vec<(Move, State)>) -> Result<()> {
        let mut moves = Vec::new();
        self.enabled_moves(s, &mut moves)?;
        for m in moves {
            let t = self.apply_move(s, &m)?;
            out.push((m, t));
        }
        Ok(())
    }

    fn move_parts(&self, m: &Move) -> impl Iterator<Item = (usize, &CEdge)> {
        let first = (m.agent, &self.agents[m.agent].edges[m.edge]);
        let second = m.partner.map(|(j, f)| (j, &self.agents[j].edges[f]));
        std::iter::once(first).chain(second)
    }

    /// Edges taking part in a move.
    pub fn move_edges(&self, m: &Move) -> impl Iterator<Item = &CEdge> {
        self.move_parts(m).map(|(_, e)| e)
    }

    /// Conjunction of the location invariants of `s`.
    pub fn invariant(&self, s: &[Lit]) -> Vec<CClockAtom> {
        self.agents
            .iter()
            .enumerate()
            .flat_map(|(i, a)| a.invariants[s[i] as usize].iter().copied())
            .collect()
    }

    pub fn describe_move(&self, m: &Move) -> String {
        let a = &self.agents[m.agent];
        let e = &a.edges[m.edge];
        let mut s = format!(
            "{}: {} -> {}",
            a.name, a.locations[e.source], a.locations[e.target]
        );
        if let Some((j, f)) = m.partner {
            let b = &self.agents[j];
            let f = &b.edges[f];
            s.push_str(&format!(
                " | {}: {} -> {} on {}",
                b.name,
                b.locations[f.source],
                b.locations[f.target],
                match e.sync {
                    CSync::Emit(c) => self.channels[c].as_str(),
                    _ => "?",
                }
            ));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Assign, Edge};

    fn counter(name: &str, chan: Option<SyncLabel>) -> TimedAgentGraph {
        let mut g = TimedAgentGraph::new(name, "l0");
        g.add_var(VariableDecl::new("v", Domain::range(0, 2), 0));
        let mut e = Edge::new("l0", "l0").action(Action(vec![Assign::new(
            "v",
            Expr::bin(
                BinOp::Mod,
                Expr::bin(BinOp::Add, Expr::var("v"), Expr::Lit(1)),
                Expr::Lit(3),
            ),
        )]));
        if let Some(s) = chan {
            g.channels.insert(s.channel().unwrap().to_string());
            e = e.sync(s);
        }
        g.edges.push(e);
        g
    }

    #[test]
    fn interleaving_and_fusion() {
        let mg = TmasGraph::new(
            vec![],
            vec![
                counter("A", Some(SyncLabel::Emit("c".into()))),
                counter("B", Some(SyncLabel::Receive("c".into()))),
            ],
        )
        .unwrap();
        let net = Network::from_mas(&mg).unwrap();
        assert_eq!(net.vars[0].name, "A.v");
        let mut out = Vec::new();
        net.successors(&net.initial_state(), &mut out).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(net.values(&out[0].1), &[1, 1]);
    }

    #[test]
    fn dynamic_index_out_of_range() {
        let mut g = TimedAgentGraph::new("G", "l0");
        for d in VariableDecl::array("t", 2, Domain::range(0, 1), 0) {
            g.add_var(d);
        }
        g.add_var(VariableDecl::new("i", Domain::range(0, 3), 3));
        g.edges.push(Edge::new("l0", "l0").action(Action(vec![crate::model::Assign {
            target: LValue::Index("t".into(), Expr::var("i")),
            value: Expr::Lit(1),
        }])));
        let net = Network::from_graph(&g).unwrap();
        let mut out = Vec::new();
        assert_eq!(
            net.successors(&net.initial_state(), &mut out),
            Err(Error::IndexOutOfRange {
                array: "t".into(),
                index: 3
            })
        );
    }

    #[test]
    fn arity_violation() {
        let mk = |n: &str, s: SyncLabel| {
            let mut g = TimedAgentGraph::new(n, "l0");
            g.channels.insert("c".into());
            g.edges.push(Edge::new("l0", "l0").sync(s));
            g
        };
        let mg = TmasGraph::new(
            vec![],
            vec![
                mk("A", SyncLabel::Emit("c".into())),
                mk("B", SyncLabel::Emit("c".into())),
                mk("C", SyncLabel::Receive("c".into())),
                mk("D", SyncLabel::Receive("c".into())),
            ],
        )
        .unwrap();
        assert_eq!(
            Network::from_mas(&mg).err(),
            Some(Error::ChannelArityViolation("c".into()))
        );
    }
}
