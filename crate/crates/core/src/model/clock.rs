use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relation symbol allowed in clock constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClockRel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl ClockRel {
    pub fn holds(self, a: Rational64, b: Rational64) -> bool {
        match self {
            ClockRel::Lt => a < b,
            ClockRel::Le => a <= b,
            ClockRel::Eq => a == b,
            ClockRel::Ge => a >= b,
            ClockRel::Gt => a > b,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            ClockRel::Lt => "<",
            ClockRel::Le => "<=",
            ClockRel::Eq => "==",
            ClockRel::Ge => ">=",
            ClockRel::Gt => ">",
        }
    }
}

/// `clock ~ bound` or, with `minus`, `clock - minus ~ bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClockAtom {
    pub clock: String,
    pub minus: Option<String>,
    pub rel: ClockRel,
    pub bound: i64,
}

impl ClockAtom {
    pub fn simple(clock: impl Into<String>, rel: ClockRel, bound: i64) -> Self {
        ClockAtom {
            clock: clock.into(),
            minus: None,
            rel,
            bound,
        }
    }

    pub fn diagonal(x: impl Into<String>, y: impl Into<String>, rel: ClockRel, bound: i64) -> Self {
        ClockAtom {
            clock: x.into(),
            minus: Some(y.into()),
            rel,
            bound,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        self.minus.is_some()
    }

    pub fn holds(&self, v: &ClockValuation) -> Result<bool> {
        let mut lhs = v.get(&self.clock)?;
        if let Some(y) = &self.minus {
            lhs -= v.get(y)?;
        }
        Ok(self.rel.holds(lhs, Rational64::from_integer(self.bound)))
    }
}

impl fmt::Display for ClockAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.minus {
            Some(y) => write!(f, "{} - {y} {} {}", self.clock, self.rel.symbol(), self.bound),
            None => write!(f, "{} {} {}", self.clock, self.rel.symbol(), self.bound),
        }
    }
}

/// Conjunction of clock atoms; the empty conjunction is ⊤.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClockConstraint(pub Vec<ClockAtom>);

impl ClockConstraint {
    pub fn top() -> Self {
        ClockConstraint(Vec::new())
    }

    pub fn is_top(&self) -> bool {
        self.0.is_empty()
    }

    pub fn atom(a: ClockAtom) -> Self {
        ClockConstraint(vec![a])
    }

    pub fn and(&self, other: &ClockConstraint) -> ClockConstraint {
        let mut v = self.0.clone();
        v.extend(other.0.iter().cloned());
        ClockConstraint(v)
    }

    pub fn eval(&self, v: &ClockValuation) -> Result<bool> {
        for a in &self.0 {
            if !a.holds(v)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn clocks(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        for a in &self.0 {
            out.insert(a.clock.clone());
            if let Some(y) = &a.minus {
                out.insert(y.clone());
            }
        }
        out
    }

    pub fn max_constant(&self) -> i64 {
        self.0.iter().map(|a| a.bound.abs()).max().unwrap_or(0)
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> ClockConstraint {
        ClockConstraint(
            self.0
                .iter()
                .map(|a| ClockAtom {
                    clock: f(&a.clock),
                    minus: a.minus.as_deref().map(f),
                    rel: a.rel,
                    bound: a.bound,
                })
                .collect(),
        )
    }
}

impl fmt::Display for ClockConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "true");
        }
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, " && ")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// Total map from clock names to non-negative exact rationals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ClockValuation(pub BTreeMap<String, Rational64>);

impl ClockValuation {
    /// Every clock at zero.
    pub fn zero<'a>(clocks: impl IntoIterator<Item = &'a String>) -> Self {
        ClockValuation(
            clocks
                .into_iter()
                .map(|c| (c.clone(), Rational64::from_integer(0)))
                .collect(),
        )
    }

    pub fn get(&self, clock: &str) -> Result<Rational64> {
        self.0
            .get(clock)
            .copied()
            .ok_or_else(|| Error::UndeclaredClock(clock.to_string()))
    }

    /// `υ + δ`
    pub fn delay(&self, delta: Rational64) -> Result<Self> {
        if delta < Rational64::from_integer(0) {
            return Err(Error::NegativeDelay);
        }
        Ok(ClockValuation(
            self.0.iter().map(|(k, v)| (k.clone(), v + delta)).collect(),
        ))
    }

    /// `υ[X=0]`
    pub fn reset<'a>(&self, clocks: impl IntoIterator<Item = &'a String>) -> Result<Self> {
        let mut out = self.clone();
        for c in clocks {
            match out.0.get_mut(c) {
                Some(v) => *v = Rational64::from_integer(0),
                None => return Err(Error::UndeclaredClock(c.clone())),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    fn val(pairs: &[(&str, Rational64)]) -> ClockValuation {
        ClockValuation(pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect())
    }

    #[test]
    fn top_holds_everywhere() {
        assert!(ClockConstraint::top().eval(&val(&[("x", r(3, 2))])).unwrap());
    }

    #[test]
    fn closed_bound_boundary() {
        let cc = ClockConstraint::atom(ClockAtom::simple("x", ClockRel::Le, 7));
        assert!(cc.eval(&val(&[("x", r(7, 1))])).unwrap());
        assert!(!cc.eval(&val(&[("x", r(15, 2))])).unwrap());
    }

    #[test]
    fn diagonal_atom() {
        let cc = ClockConstraint::atom(ClockAtom::diagonal("x", "y", ClockRel::Lt, 3));
        assert!(cc.eval(&val(&[("x", r(5, 1)), ("y", r(5, 2))])).unwrap());
    }

    #[test]
    fn undeclared_clock() {
        let cc = ClockConstraint::atom(ClockAtom::simple("z", ClockRel::Le, 1));
        assert_eq!(
            cc.eval(&val(&[("x", r(0, 1))])),
            Err(Error::UndeclaredClock("z".into()))
        );
    }

    #[test]
    fn delay_and_reset() {
        let v = val(&[("x", r(1, 1)), ("y", r(2, 1))]);
        assert_eq!(v.delay(r(0, 1)).unwrap(), v);
        assert_eq!(v.reset(&[]).unwrap(), v);
        let out = v.delay(r(3, 2)).unwrap().reset(&["x".to_string()]).unwrap();
        assert_eq!(out, val(&[("x", r(0, 1)), ("y", r(7, 2))]));
        assert_eq!(v.delay(r(-1, 2)), Err(Error::NegativeDelay));
    }
}
