use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::clock::ClockConstraint;
use super::domain::{for_each_product, split_element, Domain, Evaluation, Lit, VariableDecl};
use super::expr::{Action, CmpOp, Condition, Expr, LValue, VarSet};
use crate::error::{Error, Result};

/// Product of domains above which the initial condition must be a
/// syntactic conjunction of equalities.
pub const INITIAL_ENUMERATION_LIMIT: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SyncLabel {
    None,
    Emit(String),
    Receive(String),
}

impl SyncLabel {
    pub fn channel(&self) -> Option<&str> {
        match self {
            SyncLabel::None => None,
            SyncLabel::Emit(c) | SyncLabel::Receive(c) => Some(c),
        }
    }

    pub fn complement(&self) -> SyncLabel {
        match self {
            SyncLabel::None => SyncLabel::None,
            SyncLabel::Emit(c) => SyncLabel::Receive(c.clone()),
            SyncLabel::Receive(c) => SyncLabel::Emit(c.clone()),
        }
    }
}

impl fmt::Display for SyncLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SyncLabel::None => write!(f, "-"),
            SyncLabel::Emit(c) => write!(f, "{c}!"),
            SyncLabel::Receive(c) => write!(f, "{c}?"),
        }
    }
}

/// `source --guard, clock_guard, sync, action, resets--> target`
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub guard: Condition,
    pub clock_guard: ClockConstraint,
    pub sync: SyncLabel,
    pub action: Action,
    pub resets: BTreeSet<String>,
}

impl Edge {
    /// Edge with every label component at its default (⊤, ⊤, −, τ, ∅).
    pub fn new(source: impl Into<String>, target: impl Into<String>) -> Self {
        Edge {
            source: source.into(),
            target: target.into(),
            guard: Condition::True,
            clock_guard: ClockConstraint::top(),
            sync: SyncLabel::None,
            action: Action::tau(),
            resets: BTreeSet::new(),
        }
    }

    pub fn guard(mut self, g: Condition) -> Self {
        self.guard = g;
        self
    }

    pub fn clock(mut self, cc: ClockConstraint) -> Self {
        self.clock_guard = cc;
        self
    }

    pub fn sync(mut self, s: SyncLabel) -> Self {
        self.sync = s;
        self
    }

    pub fn action(mut self, a: Action) -> Self {
        self.action = a;
        self
    }

    pub fn reset<I: IntoIterator<Item = S>, S: Into<String>>(mut self, clocks: I) -> Self {
        self.resets = clocks.into_iter().map(Into::into).collect();
        self
    }

    pub fn is_self_loop(&self) -> bool {
        self.source == self.target
    }
}

/// Timed agent graph: variables, locations, initial location and
/// condition, channels, clocks, location invariants, and labelled edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimedAgentGraph {
    pub name: String,
    pub variables: Vec<VariableDecl>,
    pub locations: Vec<String>,
    pub initial_location: String,
    pub initial_condition: Condition,
    pub channels: BTreeSet<String>,
    pub clocks: Vec<String>,
    /// Missing entries are ⊤.
    pub invariants: BTreeMap<String, ClockConstraint>,
    pub edges: Vec<Edge>,
}

impl TimedAgentGraph {
    /// Graph with a single location and nothing else.
    pub fn new(name: impl Into<String>, initial_location: impl Into<String>) -> Self {
        let l0 = initial_location.into();
        TimedAgentGraph {
            name: name.into(),
            variables: Vec::new(),
            locations: vec![l0.clone()],
            initial_location: l0,
            initial_condition: Condition::True,
            channels: BTreeSet::new(),
            clocks: Vec::new(),
            invariants: BTreeMap::new(),
            edges: Vec::new(),
        }
    }

    /// Adds a variable and pins it in the initial condition.
    pub fn add_var(&mut self, decl: VariableDecl) {
        self.initial_condition = Condition::and([
            self.initial_condition.clone(),
            Condition::var_eq(decl.name.clone(), decl.initial),
        ]);
        self.variables.push(decl);
    }

    pub fn add_location(&mut self, name: impl Into<String>) {
        let name = name.into();
        if !self.locations.contains(&name) {
            self.locations.push(name);
        }
    }

    pub fn invariant(&self, location: &str) -> ClockConstraint {
        self.invariants.get(location).cloned().unwrap_or_default()
    }

    pub fn location_index(&self, name: &str) -> Option<usize> {
        self.locations.iter().position(|l| l == name)
    }

    pub fn variable(&self, name: &str) -> Option<&VariableDecl> {
        self.variables.iter().find(|v| v.name == name)
    }

    pub fn domain_of(&self, name: &str) -> Option<&Domain> {
        self.variable(name).map(|v| &v.domain)
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// Declared initial value of every variable.
    pub fn declared_initials(&self) -> Evaluation {
        self.variables
            .iter()
            .map(|v| (v.name.clone(), v.initial))
            .collect()
    }

    /// Element names of array `base`, or `[base]` for a scalar.
    pub fn expand_name(&self, base: &str) -> Vec<String> {
        if self.variable(base).is_some() {
            return vec![base.to_string()];
        }
        self.variables
            .iter()
            .filter(|v| v.array_part().is_some_and(|(b, _)| b == base))
            .map(|v| v.name.clone())
            .collect()
    }

    /// Declared variables a `VarSet` may refer to.
    pub fn resolve_vars(&self, set: &VarSet) -> BTreeSet<String> {
        self.variables
            .iter()
            .filter(|v| set.mentions(&v.name))
            .map(|v| v.name.clone())
            .collect()
    }

    pub fn apply_effect(&self, action: &Action, eval: &Evaluation) -> Result<Evaluation> {
        action.apply(eval, |n| self.domain_of(n))
    }

    pub fn has_clocks(&self) -> bool {
        !self.clocks.is_empty()
    }

    pub fn max_clock_constant(&self) -> i64 {
        let inv = self.invariants.values().map(|cc| cc.max_constant());
        let grd = self.edges.iter().map(|e| e.clock_guard.max_constant());
        inv.chain(grd).max().unwrap_or(0)
    }

    /// The unique evaluation satisfying the initial condition.
    pub fn initial_evaluation(&self) -> Result<Evaluation> {
        initial_evaluation(self)
    }

    /// Structural well-formedness.
    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for v in &self.variables {
            if !names.insert(v.name.as_str()) {
                return Err(ill(format!("{}: duplicate variable `{}`", self.name, v.name)));
            }
            if v.domain.is_empty() {
                return Err(ill(format!("{}: empty domain for `{}`", self.name, v.name)));
            }
            if !v.domain.contains(v.initial) {
                return Err(Error::DomainOverflow {
                    var: v.name.clone(),
                    value: v.initial,
                });
            }
        }
        for c in &self.clocks {
            if !names.insert(c.as_str()) {
                return Err(ill(format!("{}: duplicate name `{c}`", self.name)));
            }
        }
        let locs: HashSet<&str> = self.locations.iter().map(String::as_str).collect();
        if locs.len() != self.locations.len() {
            return Err(ill(format!("{}: duplicate location", self.name)));
        }
        if !locs.contains(self.initial_location.as_str()) {
            return Err(Error::UndeclaredLocation(self.initial_location.clone()));
        }
        let clocks: HashSet<&str> = self.clocks.iter().map(String::as_str).collect();
        let check_cc = |cc: &ClockConstraint| -> Result<()> {
            for a in &cc.0 {
                if a.bound < 0 {
                    return Err(ill(format!("negative clock bound in `{a}`")));
                }
            }
            for c in cc.clocks() {
                if !clocks.contains(c.as_str()) {
                    return Err(Error::UndeclaredClock(c));
                }
            }
            Ok(())
        };
        for (l, cc) in &self.invariants {
            if !locs.contains(l.as_str()) {
                return Err(Error::UndeclaredLocation(l.clone()));
            }
            check_cc(cc)?;
        }
        self.check_vars(&self.initial_condition.vars())?;
        for e in &self.edges {
            for l in [&e.source, &e.target] {
                if !locs.contains(l.as_str()) {
                    return Err(Error::UndeclaredLocation(l.clone()));
                }
            }
            self.check_vars(&e.guard.vars())?;
            self.check_vars(&e.action.reads())?;
            self.check_vars(&e.action.writes())?;
            check_cc(&e.clock_guard)?;
            for x in &e.resets {
                if !clocks.contains(x.as_str()) {
                    return Err(Error::UndeclaredClock(x.clone()));
                }
            }
            if let Some(ch) = e.sync.channel() {
                if !self.channels.contains(ch) {
                    return Err(Error::UndeclaredChannel(ch.to_string()));
                }
            }
        }
        let eta0 = self.initial_evaluation()?;
        for v in &self.variables {
            if eta0.get(&v.name) != Some(v.initial) {
                return Err(ill(format!(
                    "{}: declared initial value of `{}` disagrees with the initial condition",
                    self.name, v.name
                )));
            }
        }
        Ok(())
    }

    fn check_vars(&self, set: &VarSet) -> Result<()> {
        for s in &set.scalars {
            if self.variable(s).is_none() {
                return Err(match split_element(s) {
                    Some((base, index)) if !self.expand_name(base).is_empty() => {
                        Error::IndexOutOfRange {
                            array: base.to_string(),
                            index,
                        }
                    }
                    _ => Error::UndeclaredVariable(s.clone()),
                });
            }
        }
        for a in &set.arrays {
            if self.expand_name(a).is_empty() {
                return Err(Error::UndeclaredVariable(a.clone()));
            }
        }
        Ok(())
    }
}

fn ill(msg: String) -> Error {
    Error::IllFormed(msg)
}

/// Finds the unique evaluation of `g.variables` satisfying the initial
/// condition. Only variables mentioned in the condition are enumerated;
/// an unmentioned variable is determined only if its domain is a singleton.
pub fn initial_evaluation(g: &TimedAgentGraph) -> Result<Evaluation> {
    let mentioned = g.resolve_vars(&g.initial_condition.vars());
    let mut fixed = Evaluation::new();
    for v in &g.variables {
        if !mentioned.contains(&v.name) {
            if v.domain.len() == 1 {
                fixed.set(v.name.clone(), v.domain.min().unwrap());
            } else {
                return Err(Error::AmbiguousInitial(g.name.clone()));
            }
        }
    }
    let free: Vec<&VariableDecl> = g
        .variables
        .iter()
        .filter(|v| mentioned.contains(&v.name))
        .collect();
    let size = free
        .iter()
        .try_fold(1u128, |acc, v| acc.checked_mul(v.domain.len() as u128))
        .unwrap_or(u128::MAX);
    if size > INITIAL_ENUMERATION_LIMIT || is_equality_conjunction(&g.initial_condition) {
        return syntactic_initial(g, fixed, &free);
    }
    let domains: Vec<Vec<Lit>> = free.iter().map(|v| v.domain.values()).collect();
    let mut found: Option<Evaluation> = None;
    let mut outcome = Ok(());
    for_each_product(&domains, |point| {
        let mut eta = fixed.clone();
        for (v, x) in free.iter().zip(point) {
            eta.set(v.name.clone(), *x);
        }
        match g.initial_condition.eval(&eta) {
            Ok(true) => {
                if found.is_some() {
                    outcome = Err(Error::AmbiguousInitial(g.name.clone()));
                    return false;
                }
                found = Some(eta);
            }
            Ok(false) => {}
            Err(e) => {
                outcome = Err(e);
                return false;
            }
        }
        true
    });
    outcome?;
    found.ok_or_else(|| Error::NoInitialEvaluation(g.name.clone()))
}

fn equality_atom(c: &Condition) -> Option<(String, Lit)> {
    match c {
        Condition::Cmp(CmpOp::Eq, Expr::Var(n), Expr::Lit(k))
        | Condition::Cmp(CmpOp::Eq, Expr::Lit(k), Expr::Var(n)) => Some((n.clone(), *k)),
        _ => None,
    }
}

fn is_equality_conjunction(c: &Condition) -> bool {
    match c {
        Condition::And(cs) => cs.iter().all(|a| equality_atom(a).is_some()),
        other => equality_atom(other).is_some(),
    }
}

fn syntactic_initial(
    g: &TimedAgentGraph,
    mut fixed: Evaluation,
    free: &[&VariableDecl],
) -> Result<Evaluation> {
    let atoms = match &g.initial_condition {
        Condition::And(cs) => cs.clone(),
        other => vec![other.clone()],
    };
    for atom in atoms {
        let Some((n, k)) = equality_atom(&atom) else {
            return Err(ill(format!(
                "{}: initial condition over a large domain must be a conjunction of equalities",
                g.name
            )));
        };
        match fixed.get(&n) {
            Some(old) if old != k => return Err(Error::NoInitialEvaluation(g.name.clone())),
            _ => fixed.set(n, k),
        }
    }
    for v in free {
        match fixed.get(&v.name) {
            None => return Err(Error::AmbiguousInitial(g.name.clone())),
            Some(k) if !v.domain.contains(k) => {
                return Err(Error::NoInitialEvaluation(g.name.clone()))
            }
            _ => {}
        }
    }
    Ok(fixed)
}

/// Multiset of agent graphs with a distinguished set of shared variables.
///
/// Every agent carries the declarations of all shared variables, so each
/// agent graph is self-contained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TmasGraph {
    pub shared: Vec<VariableDecl>,
    pub agents: Vec<TimedAgentGraph>,
}

impl TmasGraph {
    /// Normalizes shared declarations into every agent: a shared variable
    /// already declared by an agent must match exactly; missing ones are
    /// added and pinned in the agent's initial condition.
    pub fn new(shared: Vec<VariableDecl>, mut agents: Vec<TimedAgentGraph>) -> Result<Self> {
        for g in &mut agents {
            let mut vars: Vec<VariableDecl> = Vec::with_capacity(g.variables.len() + shared.len());
            let mentioned = g.initial_condition.vars();
            let mut pins = Vec::new();
            for s in &shared {
                match g.variable(&s.name) {
                    Some(d) if d != s => {
                        return Err(ill(format!(
                            "shared variable `{}` declared differently in `{}`",
                            s.name, g.name
                        )))
                    }
                    _ => {}
                }
                if !mentioned.mentions(&s.name) {
                    pins.push(Condition::var_eq(s.name.clone(), s.initial));
                }
                vars.push(s.clone());
            }
            let shared_names: HashSet<&str> = shared.iter().map(|s| s.name.as_str()).collect();
            vars.extend(
                g.variables
                    .iter()
                    .filter(|v| !shared_names.contains(v.name.as_str()))
                    .cloned(),
            );
            g.variables = vars;
            if !pins.is_empty() {
                g.initial_condition =
                    Condition::and(std::iter::once(g.initial_condition.clone()).chain(pins));
            }
        }
        Ok(TmasGraph { shared, agents })
    }

    pub fn single(agent: TimedAgentGraph) -> Self {
        TmasGraph {
            shared: Vec::new(),
            agents: vec![agent],
        }
    }

    pub fn is_shared(&self, name: &str) -> bool {
        self.shared.iter().any(|s| s.name == name)
    }

    pub fn agent(&self, name: &str) -> Option<&TimedAgentGraph> {
        self.agents.iter().find(|a| a.name == name)
    }

    pub fn agent_index(&self, name: &str) -> Option<usize> {
        self.agents.iter().position(|a| a.name == name)
    }

    /// Variables of agent `i` that are not shared.
    pub fn local_variables(&self, i: usize) -> Vec<&VariableDecl> {
        self.agents[i]
            .variables
            .iter()
            .filter(|v| !self.is_shared(&v.name))
            .collect()
    }

    /// Name of an agent-level identifier in the combined graph: shared
    /// variables keep their name, everything else is prefixed `Agent.`.
    pub fn qualify(&self, agent: usize, name: &str) -> String {
        let base = split_element(name).map(|(b, _)| b).unwrap_or(name);
        let shared = self
            .shared
            .iter()
            .any(|s| s.name == name || split_element(&s.name).is_some_and(|(b, _)| b == base));
        if shared {
            name.to_string()
        } else {
            format!("{}.{}", self.agents[agent].name, name)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = HashSet::new();
        for g in &self.agents {
            if !names.insert(g.name.as_str()) {
                return Err(ill(format!("duplicate agent name `{}`", g.name)));
            }
            if g.name.contains('.') {
                return Err(ill(format!("agent name `{}` must not contain `.`", g.name)));
            }
            g.validate()?;
        }
        let shared: HashMap<&str, &VariableDecl> =
            self.shared.iter().map(|s| (s.name.as_str(), s)).collect();
        for g in &self.agents {
            for v in &g.variables {
                if let Some(s) = shared.get(v.name.as_str()) {
                    if *s != v {
                        return Err(ill(format!(
                            "shared variable `{}` declared differently in `{}`",
                            v.name, g.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Total number of action-edge slots, for diagnostics.
    pub fn edge_count(&self) -> usize {
        self.agents.iter().map(|a| a.edges.len()).sum()
    }
}

/// Variables written by an edge; used by lints and the abstraction checks.
pub fn written_vars(g: &TimedAgentGraph, e: &Edge) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for a in &e.action.0 {
        match &a.target {
            LValue::Var(n) => {
                out.insert(n.clone());
            }
            LValue::Index(base, _) => out.extend(g.expand_name(base)),
        }
    }
    out
}
