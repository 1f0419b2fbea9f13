use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Condition, Lit};
use crate::network::{CCond, Network};

/// State formula over variables (global, qualified names) and location
/// atoms `Agent@loc`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Prop {
    True,
    False,
    Atom(Condition),
    /// The agent may be omitted when exactly one agent has the location.
    At {
        agent: Option<String>,
        location: String,
    },
    Not(Box<Prop>),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    pub fn at(agent: impl Into<String>, location: impl Into<String>) -> Self {
        Prop::At {
            agent: Some(agent.into()),
            location: location.into(),
        }
    }

    pub fn not(p: Prop) -> Self {
        Prop::Not(Box::new(p))
    }

    pub fn implies(a: Prop, b: Prop) -> Self {
        Prop::Or(vec![Prop::not(a), b])
    }

    /// Variables read, array bases included as written.
    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<String>) {
        match self {
            Prop::Atom(c) => {
                let v = c.vars();
                out.extend(v.scalars);
                out.extend(v.arrays);
            }
            Prop::Not(p) => p.collect(out),
            Prop::And(ps) | Prop::Or(ps) => ps.iter().for_each(|p| p.collect(out)),
            _ => {}
        }
    }

    pub fn compile(&self, net: &Network) -> Result<CProp> {
        Ok(match self {
            Prop::True => CProp::Cond(CCond::True),
            Prop::False => CProp::Cond(CCond::False),
            Prop::Atom(c) => CProp::Cond(net.compile_cond(c, &|n: &str| n.to_string())?),
            Prop::At { agent, location } => {
                let holders: Vec<(usize, usize)> = net
                    .agents
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| agent.as_ref().is_none_or(|n| &a.name == n))
                    .filter_map(|(i, a)| {
                        a.locations.iter().position(|l| l == location).map(|k| (i, k))
                    })
                    .collect();
                match holders.as_slice() {
                    [(i, k)] => CProp::At(*i, *k),
                    [] => return Err(Error::UndeclaredLocation(self.to_string())),
                    _ => {
                        return Err(Error::IllFormed(format!(
                            "location atom `{self}` is ambiguous; name the agent"
                        )))
                    }
                }
            }
            Prop::Not(p) => CProp::Not(Box::new(p.compile(net)?)),
            Prop::And(ps) => CProp::And(ps.iter().map(|p| p.compile(net)).collect::<Result<_>>()?),
            Prop::Or(ps) => CProp::Or(ps.iter().map(|p| p.compile(net)).collect::<Result<_>>()?),
        })
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, ps: &[Prop], sep: &str, prec: u8| {
            if outer > prec {
                write!(f, "(")?;
            }
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                p.fmt_prec(f, prec + 1)?;
            }
            if outer > prec {
                write!(f, ")")?;
            }
            Ok(())
        };
        match self {
            Prop::True => write!(f, "true"),
            Prop::False => write!(f, "false"),
            Prop::Atom(c) if outer > 0 => write!(f, "({c})"),
            Prop::Atom(c) => write!(f, "{c}"),
            Prop::At {
                agent: Some(a),
                location,
            } => write!(f, "{a}@{location}"),
            Prop::At {
                agent: None,
                location,
            } => write!(f, "@{location}"),
            Prop::Not(p) => {
                write!(f, "!")?;
                p.fmt_prec(f, 3)
            }
            Prop::And(ps) if ps.is_empty() => write!(f, "true"),
            Prop::Or(ps) if ps.is_empty() => write!(f, "false"),
            Prop::And(ps) => join(f, ps, "&&", 1),
            Prop::Or(ps) => join(f, ps, "||", 0),
        }
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

impl From<Condition> for Prop {
    fn from(c: Condition) -> Self {
        match c {
            Condition::True => Prop::True,
            Condition::False => Prop::False,
            c => Prop::Atom(c),
        }
    }
}

/// Property compiled against a [`Network`].
#[derive(Debug, Clone)]
pub enum CProp {
    Cond(CCond),
    At(usize, usize),
    Not(Box<CProp>),
    And(Vec<CProp>),
    Or(Vec<CProp>),
}

impl CProp {
    /// Evaluates on a full state (locations then values).
    pub fn eval(&self, net: &Network, s: &[Lit]) -> Result<bool> {
        Ok(match self {
            CProp::Cond(c) => c.eval(net.values(s))?,
            CProp::At(i, k) => net.location(s, *i) == *k,
            CProp::Not(p) => !p.eval(net, s)?,
            CProp::And(ps) => {
                for p in ps {
                    if !p.eval(net, s)? {
                        return Ok(false);
                    }
                }
                true
            }
            CProp::Or(ps) => {
                for p in ps {
                    if p.eval(net, s)? {
                        return Ok(true);
                    }
                }
                false
            }
        })
    }
}
