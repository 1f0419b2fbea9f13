//! Voting-with-coercion benchmark: voters, an election authority and a
//! coercer, parameterised by voter and candidate counts.
//!
//! Voter `Vi` registers for a modality (1 postal, 2 e-vote, 3 paper),
//! casts a vote (`1..NC` a candidate, `0` invalid) or abstains (`-1`), then
//! meets the coercer once: it shows its receipt or refuses, and is punished
//! or rewarded. With re-voting, a voter may cast again after meeting the
//! coercer. When the election closes at 11, the coercer punishes every
//! voter it has not met.
//!
//! The election authority `EA` owns the global clock `t` and accepts
//! registrations and casts only inside the window of the modality.

use serde::{Deserialize, Serialize};

use crate::abstraction::{AbstractionEntry, AbstractionSpec, MappingFunction, Scope};
use crate::analysis::Prop;
use crate::error::{Error, Result};
use crate::model::{
    Action, Assign, BinOp, ClockAtom, ClockConstraint, ClockRel, CmpOp, Condition, Domain, Edge,
    Expr, LValue, Lit, SyncLabel, TimedAgentGraph, TmasGraph, VariableDecl,
};

/// Election closing time.
pub const CLOSE: i64 = 11;

/// Registration and casting window of each modality, indexed by `mode - 1`.
pub const WINDOWS: [(i64, i64); 3] = [(1, 7), (6, 9), (10, 11)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoercerType {
    /// Punishes only a receipt matching `disobey`, or a refusal.
    Type1,
    /// Punishes unless the receipt matches `obey`.
    Type2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VotingConfig {
    pub nv: usize,
    pub nc: usize,
    pub revote: bool,
    pub ctype: CoercerType,
    pub obey: Lit,
    pub disobey: Lit,
}

impl VotingConfig {
    /// Forced abstention: punish anyone who took part.
    pub fn faa(nv: usize, nc: usize, revote: bool) -> Self {
        VotingConfig {
            nv,
            nc,
            revote,
            ctype: CoercerType::Type2,
            obey: -1,
            disobey: -1,
        }
    }

    /// Forced participation: punish anyone who abstained.
    pub fn fpa(nv: usize, nc: usize, revote: bool) -> Self {
        VotingConfig {
            nv,
            nc,
            revote,
            ctype: CoercerType::Type1,
            obey: -1,
            disobey: -1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.nv == 0 {
            return bad("at least one voter is required".into());
        }
        if self.nc == 0 {
            return bad("at least one candidate is required".into());
        }
        let nc = self.nc as Lit;
        for (name, v) in [("OBEY", self.obey), ("DISOBEY", self.disobey)] {
            if !(-1..=nc).contains(&v) {
                return bad(format!("{name} must lie in -1..={nc}, got {v}"));
            }
        }
        Ok(())
    }
}

fn lit(k: Lit) -> Expr {
    Expr::Lit(k)
}

fn var(n: &str) -> Expr {
    Expr::var(n)
}

fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
    Expr::bin(op, a, b)
}

fn eq(n: &str, k: Lit) -> Condition {
    Condition::var_eq(n, k)
}

fn set(n: &str, e: Expr) -> Assign {
    Assign::new(n, e)
}

fn window(lo: i64, hi: i64) -> ClockConstraint {
    ClockConstraint(vec![
        ClockAtom::simple("t", ClockRel::Ge, lo),
        ClockAtom::simple("t", ClockRel::Le, hi),
    ])
}

fn emit(c: impl Into<String>) -> SyncLabel {
    SyncLabel::Emit(c.into())
}

fn recv(c: impl Into<String>) -> SyncLabel {
    SyncLabel::Receive(c.into())
}

fn voter_name(i: usize) -> String {
    format!("V{i}")
}

fn voter(cfg: &VotingConfig, i: usize) -> TimedAgentGraph {
    let nc = cfg.nc as Lit;
    let mut g = TimedAgentGraph::new(voter_name(i), "idle");
    for l in ["registered", "decided", "coerced", "done"] {
        g.add_location(l);
    }
    g.add_var(VariableDecl::new("mode", Domain::range(0, 3), 0));
    g.add_var(VariableDecl::new("vote", Domain::range(-1, nc), -1));
    g.add_var(VariableDecl::new("p", Domain::boolean(), 0));
    g.add_var(VariableDecl::new("np", Domain::boolean(), 0));
    let (show, refuse, punish, reward, cpunish) = (
        format!("show{i}"),
        format!("refuse{i}"),
        format!("punish{i}"),
        format!("reward{i}"),
        format!("cpunish{i}"),
    );
    for m in 1..=3 {
        g.channels.insert(format!("reg{m}"));
        g.channels.insert(format!("cast{m}"));
    }
    for c in [&show, &refuse, &punish, &reward, &cpunish] {
        g.channels.insert(c.clone());
    }

    for m in 1..=3 {
        g.edges.push(
            Edge::new("idle", "registered")
                .sync(emit(format!("reg{m}")))
                .action(Action(vec![set("mode", lit(m))])),
        );
    }
    g.edges.push(Edge::new("idle", "decided"));
    g.edges.push(Edge::new("registered", "decided"));
    let cast = |from: &str, to: &str, m: Lit, k: Lit| {
        Edge::new(from, to)
            .guard(eq("mode", m))
            .sync(emit(format!("cast{m}")))
            .action(Action(vec![
                set("prev", var("vote")),
                set("vote", lit(k)),
                set("sh", lit(k)),
            ]))
    };
    for m in 1..=3 {
        for k in 0..=nc {
            g.edges.push(cast("registered", "decided", m, k));
        }
    }
    g.edges.push(
        Edge::new("decided", "coerced")
            .sync(emit(show))
            .action(Action(vec![set("sh", var("vote"))])),
    );
    g.edges
        .push(Edge::new("decided", "coerced").sync(emit(refuse)));
    g.edges.push(
        Edge::new("coerced", "done")
            .sync(recv(punish))
            .action(Action(vec![set("p", lit(1))])),
    );
    g.edges.push(
        Edge::new("coerced", "done")
            .sync(recv(reward))
            .action(Action(vec![set("np", lit(1))])),
    );
    for l in ["idle", "registered", "decided"] {
        g.edges.push(
            Edge::new(l, "done")
                .sync(recv(cpunish.clone()))
                .action(Action(vec![set("p", lit(1))])),
        );
    }
    if cfg.revote {
        for m in 1..=3 {
            for k in 0..=nc {
                g.edges.push(cast("done", "done", m, k));
            }
        }
    }
    g
}

fn authority(cfg: &VotingConfig) -> TimedAgentGraph {
    let nv = cfg.nv as Lit;
    let mut g = TimedAgentGraph::new("EA", "open");
    g.add_location("closed");
    g.clocks.push("t".into());
    for d in VariableDecl::array("tally", cfg.nc + 1, Domain::range(0, nv), 0) {
        g.add_var(d);
    }
    g.add_var(VariableDecl::new("freq", Domain::range(0, nv), 0));
    g.invariants.insert(
        "open".into(),
        ClockConstraint::atom(ClockAtom::simple("t", ClockRel::Le, CLOSE)),
    );
    g.channels.insert("close".into());
    // previous vote: index max(prev, 0), decrement only for a candidate
    let old = bin(BinOp::Max, var("prev"), lit(0));
    let new = var("sh");
    let record = Action(vec![
        Assign {
            target: LValue::Index("tally".into(), old.clone()),
            value: bin(
                BinOp::Max,
                bin(
                    BinOp::Sub,
                    Expr::Index("tally".into(), Box::new(old.clone())),
                    bin(BinOp::Min, old, lit(1)),
                ),
                lit(0),
            ),
        },
        Assign {
            target: LValue::Index("tally".into(), new.clone()),
            value: bin(
                BinOp::Min,
                bin(
                    BinOp::Add,
                    Expr::Index("tally".into(), Box::new(new.clone())),
                    bin(BinOp::Min, new, lit(1)),
                ),
                lit(nv),
            ),
        },
        set(
            "freq",
            bin(
                BinOp::Min,
                bin(
                    BinOp::Add,
                    var("freq"),
                    bin(BinOp::Max, Expr::Neg(Box::new(var("prev"))), lit(0)),
                ),
                lit(nv),
            ),
        ),
    ]);
    for (m, (lo, hi)) in (1..=3).zip(WINDOWS) {
        g.channels.insert(format!("reg{m}"));
        g.channels.insert(format!("cast{m}"));
        g.edges.push(
            Edge::new("open", "open")
                .clock(window(lo, hi))
                .sync(recv(format!("reg{m}"))),
        );
        g.edges.push(
            Edge::new("open", "open")
                .clock(window(lo, hi))
                .sync(recv(format!("cast{m}")))
                .action(record.clone()),
        );
    }
    g.edges.push(
        Edge::new("open", "closed")
            .clock(ClockConstraint::atom(ClockAtom::simple("t", ClockRel::Ge, CLOSE)))
            .sync(emit("close")),
    );
    g
}

/// Receipt value recorded for a refusal.
const REFUSED: Lit = -2;

fn coercer(cfg: &VotingConfig) -> TimedAgentGraph {
    let nc = cfg.nc as Lit;
    let mut g = TimedAgentGraph::new("C", "wait");
    g.add_var(VariableDecl::new("rc", Domain::range(REFUSED, nc), REFUSED));
    g.channels.insert("close".into());
    for i in 1..=cfg.nv {
        g.add_location(format!("judge{i}"));
    }
    g.add_location("punishing");
    let punished = |c: &Condition| match cfg.ctype {
        CoercerType::Type1 => Condition::or([eq("rc", cfg.disobey), eq("rc", REFUSED)]),
        CoercerType::Type2 => Condition::not(c.clone()),
    };
    let obeyed = eq("rc", cfg.obey);
    let punish_guard = punished(&obeyed);
    let reward_guard = Condition::not(punish_guard.clone());
    for i in 1..=cfg.nv {
        let met = format!("met{i}");
        let judge = format!("judge{i}");
        g.add_var(VariableDecl::new(met.clone(), Domain::boolean(), 0));
        for c in ["show", "refuse", "punish", "reward", "cpunish"] {
            g.channels.insert(format!("{c}{i}"));
        }
        g.edges.push(
            Edge::new("wait", judge.clone())
                .guard(eq(&met, 0))
                .sync(recv(format!("show{i}")))
                .action(Action(vec![set(&met, lit(1)), set("rc", var("sh"))])),
        );
        g.edges.push(
            Edge::new("wait", judge.clone())
                .guard(eq(&met, 0))
                .sync(recv(format!("refuse{i}")))
                .action(Action(vec![set(&met, lit(1)), set("rc", lit(REFUSED))])),
        );
        g.edges.push(
            Edge::new(judge.clone(), "wait")
                .guard(punish_guard.clone())
                .sync(emit(format!("punish{i}")))
                .action(Action(vec![set("rc", lit(REFUSED))])),
        );
        g.edges.push(
            Edge::new(judge, "wait")
                .guard(reward_guard.clone())
                .sync(emit(format!("reward{i}")))
                .action(Action(vec![set("rc", lit(REFUSED))])),
        );
        g.edges.push(
            Edge::new("punishing", "punishing")
                .guard(eq(&met, 0))
                .sync(emit(format!("cpunish{i}")))
                .action(Action(vec![set(&met, lit(1))])),
        );
    }
    g.edges
        .push(Edge::new("wait", "punishing").sync(recv("close")));
    g
}

/// Builds the voting TMAS graph for `cfg`.
pub fn generate(cfg: &VotingConfig) -> Result<TmasGraph> {
    cfg.validate()?;
    let nc = cfg.nc as Lit;
    let shared = vec![
        VariableDecl::new("sh", Domain::range(-1, nc), -1),
        VariableDecl::new("prev", Domain::range(-1, nc), -1),
    ];
    let mut agents: Vec<TimedAgentGraph> = (1..=cfg.nv).map(|i| voter(cfg, i)).collect();
    agents.push(authority(cfg));
    agents.push(coercer(cfg));
    let mg = TmasGraph::new(shared, agents)?;
    mg.validate()?;
    Ok(mg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    /// Avoiding punishment requires obeying.
    Phi1,
    /// Avoiding punishment requires not disobeying.
    Phi2,
}

/// Safety body for the first voter.
pub fn property(cfg: &VotingConfig, which: Property) -> Prop {
    let np = Condition::var_eq("V1.np", 1);
    let vote = var("V1.vote");
    let body = match which {
        Property::Phi1 => Condition::cmp(CmpOp::Eq, vote, lit(cfg.obey)),
        Property::Phi2 => Condition::cmp(CmpOp::Ne, vote, lit(cfg.disobey)),
    };
    Prop::Atom(Condition::implies(np, body))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Preset {
    A1,
    A2,
    A3,
}

/// Removal presets: `A1` drops the authority's tally and frequency, `A2`
/// also every voter's modality, `A3` also the vote and punishment flags of
/// all voters but the first.
pub fn abstraction_preset(cfg: &VotingConfig, which: Preset) -> AbstractionSpec {
    let entry = |agent: String, vars: &[&str]| AbstractionEntry {
        agent,
        scope: Scope::All,
        f: MappingFunction::remove(vars.iter().copied()),
    };
    let mut entries = vec![entry("EA".into(), &["tally", "freq"])];
    if which != Preset::A1 {
        for i in 1..=cfg.nv {
            entries.push(entry(voter_name(i), &["mode"]));
        }
    }
    if which == Preset::A3 {
        for i in 2..=cfg.nv {
            entries.push(entry(voter_name(i), &["vote", "p", "np"]));
        }
    }
    AbstractionSpec { entries }
}
