//! Integer expressions, conditions over discrete variables, and actions.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::domain::{element_name, split_element, Domain, Evaluation, Lit};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Min,
    Max,
}

impl BinOp {
    pub fn apply(self, a: Lit, b: Lit) -> Result<Lit> {
        let r = match self {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
            BinOp::Div => {
                if b == 0 {
                    return Err(Error::DivisionByZero);
                }
                a.checked_div(b)
            }
            BinOp::Mod => {
                if b == 0 {
                    return Err(Error::DivisionByZero);
                }
                a.checked_rem(b)
            }
            BinOp::Min => Some(a.min(b)),
            BinOp::Max => Some(a.max(b)),
        };
        r.ok_or(Error::ArithmeticOverflow)
    }

    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Min => "min",
            BinOp::Max => "max",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div | BinOp::Mod => 2,
            BinOp::Min | BinOp::Max => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CmpOp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl CmpOp {
    pub fn holds<T: PartialOrd>(self, a: T, b: T) -> bool {
        match self {
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Ge => a >= b,
            CmpOp::Gt => a > b,
        }
    }

    pub fn negate(self) -> CmpOp {
        match self {
            CmpOp::Lt => CmpOp::Ge,
            CmpOp::Le => CmpOp::Gt,
            CmpOp::Eq => CmpOp::Ne,
            CmpOp::Ne => CmpOp::Eq,
            CmpOp::Ge => CmpOp::Lt,
            CmpOp::Gt => CmpOp::Le,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Ge => ">=",
            CmpOp::Gt => ">",
        }
    }
}

/// Integer expression over discrete variables.
///
/// `Var` holds a scalar name (array elements appear as `a[3]`); `Index`
/// is an array access whose index is evaluated at run time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Expr {
    Lit(Lit),
    Var(String),
    Index(String, Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

/// Name lookup used by the name-based evaluators.
pub trait Env {
    fn value(&self, name: &str) -> Result<Lit>;
}

impl Env for Evaluation {
    fn value(&self, name: &str) -> Result<Lit> {
        self.lookup(name)
    }
}

/// Variables read by an expression or condition. Array reads whose index
/// is not a literal are recorded by base name in `arrays`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VarSet {
    pub scalars: BTreeSet<String>,
    pub arrays: BTreeSet<String>,
}

impl VarSet {
    /// True when `name` (a scalar or array element) may be read.
    pub fn mentions(&self, name: &str) -> bool {
        self.scalars.contains(name)
            || split_element(name).is_some_and(|(base, _)| self.arrays.contains(base))
    }

    pub fn is_empty(&self) -> bool {
        self.scalars.is_empty() && self.arrays.is_empty()
    }

    pub fn extend(&mut self, other: VarSet) {
        self.scalars.extend(other.scalars);
        self.arrays.extend(other.arrays);
    }
}

/// Applies `f` to the base part of a (possibly array-element) name.
pub fn map_name(name: &str, f: &impl Fn(&str) -> String) -> String {
    match split_element(name) {
        Some((base, i)) => element_name(&f(base), i),
        None => f(name),
    }
}

impl Expr {
    pub fn var(name: impl Into<String>) -> Self {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eval(&self, env: &impl Env) -> Result<Lit> {
        match self {
            Expr::Lit(v) => Ok(*v),
            Expr::Var(n) => env.value(n),
            Expr::Index(base, idx) => {
                let i = idx.eval(env)?;
                env.value(&element_name(base, i))
            }
            Expr::Neg(e) => e.eval(env)?.checked_neg().ok_or(Error::ArithmeticOverflow),
            Expr::Bin(op, a, b) => op.apply(a.eval(env)?, b.eval(env)?),
        }
    }

    /// Literal value when the expression contains no variables.
    pub fn constant(&self) -> Option<Lit> {
        match self {
            Expr::Lit(v) => Some(*v),
            Expr::Var(_) | Expr::Index(..) => None,
            Expr::Neg(e) => e.constant()?.checked_neg(),
            Expr::Bin(op, a, b) => op.apply(a.constant()?, b.constant()?).ok(),
        }
    }

    pub fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Expr::Lit(_) => {}
            Expr::Var(n) => {
                out.scalars.insert(n.clone());
            }
            Expr::Index(base, idx) => {
                match idx.constant() {
                    Some(i) => {
                        out.scalars.insert(element_name(base, i));
                    }
                    None => {
                        out.arrays.insert(base.clone());
                    }
                }
                idx.collect_vars(out);
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::default();
        self.collect_vars(&mut out);
        out
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Expr {
        match self {
            Expr::Lit(v) => Expr::Lit(*v),
            Expr::Var(n) => Expr::Var(map_name(n, f)),
            Expr::Index(base, idx) => Expr::Index(f(base), Box::new(idx.rename(f))),
            Expr::Neg(e) => Expr::Neg(Box::new(e.rename(f))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.rename(f), b.rename(f)),
        }
    }

    /// Replaces every variable bound in `k` by its literal and folds
    /// constants. Array accesses with a non-literal index are left as is.
    pub fn substitute(&self, k: &Evaluation) -> Expr {
        let out = match self {
            Expr::Lit(v) => Expr::Lit(*v),
            Expr::Var(n) => match k.get(n) {
                Some(v) => Expr::Lit(v),
                None => Expr::Var(n.clone()),
            },
            Expr::Index(base, idx) => {
                let idx = idx.substitute(k);
                match idx.constant() {
                    Some(i) => {
                        let name = element_name(base, i);
                        match k.get(&name) {
                            Some(v) => Expr::Lit(v),
                            None => Expr::Index(base.clone(), Box::new(Expr::Lit(i))),
                        }
                    }
                    None => Expr::Index(base.clone(), Box::new(idx)),
                }
            }
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(k))),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(k), b.substitute(k)),
        };
        match out.constant() {
            Some(v) => Expr::Lit(v),
            None => out,
        }
    }

    /// First array access (pre-order) whose base has an element bound in
    /// `k` but whose index is not a literal.
    fn pending_index(&self, k: &Evaluation) -> Option<(String, Expr)> {
        match self {
            Expr::Lit(_) | Expr::Var(_) => None,
            Expr::Index(base, idx) => {
                if let Some(found) = idx.pending_index(k) {
                    return Some(found);
                }
                let touches = k
                    .iter()
                    .any(|(n, _)| split_element(n).is_some_and(|(b, _)| b == base));
                (idx.constant().is_none() && touches).then(|| (base.clone(), (**idx).clone()))
            }
            Expr::Neg(e) => e.pending_index(k),
            Expr::Bin(_, a, b) => a.pending_index(k).or_else(|| b.pending_index(k)),
        }
    }

    /// Replaces array accesses `base[idx]` (structurally equal index) by
    /// the fixed element `base[i]`.
    fn pin_index(&self, base: &str, idx: &Expr, i: Lit) -> Expr {
        match self {
            Expr::Index(b, e) if b == base && **e == *idx => Expr::Var(element_name(base, i)),
            Expr::Index(b, e) => Expr::Index(b.clone(), Box::new(e.pin_index(base, idx, i))),
            Expr::Neg(e) => Expr::Neg(Box::new(e.pin_index(base, idx, i))),
            Expr::Bin(op, a, b) => {
                Expr::bin(*op, a.pin_index(base, idx, i), b.pin_index(base, idx, i))
            }
            other => other.clone(),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        match self {
            Expr::Lit(v) if *v < 0 && outer > 0 => write!(f, "({v})"),
            Expr::Lit(v) => write!(f, "{v}"),
            Expr::Var(n) => write!(f, "{n}"),
            Expr::Index(base, idx) => write!(f, "{base}[{idx}]"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 3)
            }
            Expr::Bin(op @ (BinOp::Min | BinOp::Max), a, b) => {
                write!(f, "{}({a}, {b})", op.symbol())
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                if p < outer {
                    write!(f, "(")?;
                }
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                // left-associative: the right operand binds tighter
                b.fmt_prec(f, p + 1)?;
                if p < outer {
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Boolean combination of comparisons between integer expressions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Condition {
    True,
    False,
    Cmp(CmpOp, Expr, Expr),
    Not(Box<Condition>),
    And(Vec<Condition>),
    Or(Vec<Condition>),
}

impl Condition {
    pub fn cmp(op: CmpOp, a: Expr, b: Expr) -> Self {
        Condition::Cmp(op, a, b)
    }

    /// `name == value`
    pub fn var_eq(name: impl Into<String>, value: Lit) -> Self {
        Condition::Cmp(CmpOp::Eq, Expr::Var(name.into()), Expr::Lit(value))
    }

    pub fn not(c: Condition) -> Self {
        Condition::Not(Box::new(c))
    }

    pub fn implies(a: Condition, b: Condition) -> Self {
        Condition::Or(vec![Condition::not(a), b])
    }

    /// Conjunction that drops `True` operands and flattens nested `And`s.
    pub fn and(parts: impl IntoIterator<Item = Condition>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Condition::True => {}
                Condition::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Condition::True,
            1 => out.pop().unwrap(),
            _ => Condition::And(out),
        }
    }

    pub fn or(parts: impl IntoIterator<Item = Condition>) -> Self {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Condition::False => {}
                Condition::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        match out.len() {
            0 => Condition::False,
            1 => out.pop().unwrap(),
            _ => Condition::Or(out),
        }
    }

    /// Conjunction of `v == k` for every binding of `eval`.
    pub fn from_evaluation(eval: &Evaluation) -> Self {
        Condition::and(eval.iter().map(|(n, v)| Condition::var_eq(n.clone(), *v)))
    }

    pub fn eval(&self, env: &impl Env) -> Result<bool> {
        match self {
            Condition::True => Ok(true),
            Condition::False => Ok(false),
            Condition::Cmp(op, a, b) => Ok(op.holds(a.eval(env)?, b.eval(env)?)),
            Condition::Not(c) => Ok(!c.eval(env)?),
            Condition::And(cs) => {
                for c in cs {
                    if !c.eval(env)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Condition::Or(cs) => {
                for c in cs {
                    if c.eval(env)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
        }
    }

    pub fn collect_vars(&self, out: &mut VarSet) {
        match self {
            Condition::True | Condition::False => {}
            Condition::Cmp(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Condition::Not(c) => c.collect_vars(out),
            Condition::And(cs) | Condition::Or(cs) => cs.iter().for_each(|c| c.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> VarSet {
        let mut out = VarSet::default();
        self.collect_vars(&mut out);
        out
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::False => Condition::False,
            Condition::Cmp(op, a, b) => Condition::Cmp(*op, a.rename(f), b.rename(f)),
            Condition::Not(c) => Condition::not(c.rename(f)),
            Condition::And(cs) => Condition::And(cs.iter().map(|c| c.rename(f)).collect()),
            Condition::Or(cs) => Condition::Or(cs.iter().map(|c| c.rename(f)).collect()),
        }
    }

    /// `g[V=K]`: every variable bound in `k` is replaced by its literal and
    /// the result is constant-folded. An array access with a non-literal
    /// index into an array that has bound elements is case-split over the
    /// index, so the result never mentions a bound variable.
    pub fn substitute(&self, k: &Evaluation) -> Condition {
        match self {
            Condition::True => Condition::True,
            Condition::False => Condition::False,
            Condition::Cmp(op, a, b) => {
                let a = a.substitute(k);
                let b = b.substitute(k);
                if let Some((base, idx)) = a.pending_index(k).or_else(|| b.pending_index(k)) {
                    let indices: Vec<Lit> = k
                        .iter()
                        .filter_map(|(n, _)| split_element(n).filter(|(b, _)| *b == base))
                        .map(|(_, i)| i)
                        .collect();
                    let cases = indices.into_iter().map(|i| {
                        let guard = Condition::Cmp(CmpOp::Eq, idx.clone(), Expr::Lit(i));
                        let body = Condition::Cmp(
                            *op,
                            a.pin_index(&base, &idx, i),
                            b.pin_index(&base, &idx, i),
                        );
                        Condition::and([guard, body]).substitute(k)
                    });
                    return Condition::or(cases);
                }
                match (a.constant(), b.constant()) {
                    (Some(x), Some(y)) => {
                        if op.holds(x, y) {
                            Condition::True
                        } else {
                            Condition::False
                        }
                    }
                    _ => Condition::Cmp(*op, a, b),
                }
            }
            Condition::Not(c) => match c.substitute(k) {
                Condition::True => Condition::False,
                Condition::False => Condition::True,
                other => Condition::not(other),
            },
            Condition::And(cs) => {
                let parts: Vec<_> = cs.iter().map(|c| c.substitute(k)).collect();
                if parts.contains(&Condition::False) {
                    Condition::False
                } else {
                    Condition::and(parts)
                }
            }
            Condition::Or(cs) => {
                let parts: Vec<_> = cs.iter().map(|c| c.substitute(k)).collect();
                if parts.contains(&Condition::True) {
                    Condition::True
                } else {
                    Condition::or(parts)
                }
            }
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, outer: u8) -> fmt::Result {
        let join = |f: &mut fmt::Formatter<'_>, cs: &[Condition], sep: &str, p: u8| {
            if p < outer {
                write!(f, "(")?;
            }
            for (i, c) in cs.iter().enumerate() {
                if i > 0 {
                    write!(f, " {sep} ")?;
                }
                c.fmt_prec(f, p + 1)?;
            }
            if p < outer {
                write!(f, ")")?;
            }
            Ok(())
        };
        match self {
            Condition::True => write!(f, "true"),
            Condition::False => write!(f, "false"),
            Condition::Cmp(op, a, b) if outer >= 3 => write!(f, "({a} {} {b})", op.symbol()),
            Condition::Cmp(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
            Condition::Not(c) => {
                write!(f, "!")?;
                c.fmt_prec(f, 3)
            }
            Condition::And(cs) if cs.is_empty() => write!(f, "true"),
            Condition::Or(cs) if cs.is_empty() => write!(f, "false"),
            Condition::And(cs) => join(f, cs, "&&", 1),
            Condition::Or(cs) => join(f, cs, "||", 0),
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Assignment target.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

impl LValue {
    pub fn resolve(&self, env: &impl Env) -> Result<String> {
        match self {
            LValue::Var(n) => Ok(n.clone()),
            LValue::Index(base, idx) => Ok(element_name(base, idx.eval(env)?)),
        }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LValue::Var(n) => write!(f, "{n}"),
            LValue::Index(b, i) => write!(f, "{b}[{i}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Assign {
    pub target: LValue,
    pub value: Expr,
}

impl Assign {
    pub fn new(name: impl Into<String>, value: Expr) -> Self {
        Assign {
            target: LValue::Var(name.into()),
            value,
        }
    }
}

/// Sequence of assignments executed left to right. The empty sequence is τ.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action(pub Vec<Assign>);

impl Action {
    pub fn tau() -> Self {
        Action(Vec::new())
    }

    pub fn is_tau(&self) -> bool {
        self.0.is_empty()
    }

    /// Action that first runs `first` and then `self`.
    pub fn after(&self, first: &Action) -> Action {
        let mut v = first.0.clone();
        v.extend(self.0.iter().cloned());
        Action(v)
    }

    /// Assignments `v := k` for every binding of `eval`.
    pub fn assign_all(eval: &Evaluation) -> Action {
        Action(
            eval.iter()
                .map(|(n, v)| Assign::new(n.clone(), Expr::Lit(*v)))
                .collect(),
        )
    }

    /// Executes the assignments on `eval`. `domain` supplies the declared
    /// domain of a target variable.
    pub fn apply<'d>(
        &self,
        eval: &Evaluation,
        domain: impl Fn(&str) -> Option<&'d Domain>,
    ) -> Result<Evaluation> {
        let mut out = eval.clone();
        for a in &self.0 {
            let name = a.target.resolve(&out)?;
            let value = a.value.eval(&out)?;
            match (out.get(&name), domain(&name)) {
                (Some(_), Some(d)) if d.contains(value) => out.set(name, value),
                (Some(_), Some(_)) => return Err(Error::DomainOverflow { var: name, value }),
                _ => {
                    return Err(match split_element(&name) {
                        Some((base, index)) if domain(&element_name(base, 0)).is_some() => {
                            Error::IndexOutOfRange {
                                array: base.to_string(),
                                index,
                            }
                        }
                        _ => Error::UndeclaredVariable(name),
                    })
                }
            }
        }
        Ok(out)
    }

    /// Variables read by the right-hand sides and index expressions.
    pub fn reads(&self) -> VarSet {
        let mut out = VarSet::default();
        for a in &self.0 {
            a.value.collect_vars(&mut out);
            if let LValue::Index(_, idx) = &a.target {
                idx.collect_vars(&mut out);
            }
        }
        out
    }

    /// Variables possibly written.
    pub fn writes(&self) -> VarSet {
        let mut out = VarSet::default();
        for a in &self.0 {
            match &a.target {
                LValue::Var(n) => {
                    out.scalars.insert(n.clone());
                }
                LValue::Index(base, idx) => match idx.constant() {
                    Some(i) => {
                        out.scalars.insert(element_name(base, i));
                    }
                    None => {
                        out.arrays.insert(base.clone());
                    }
                },
            }
        }
        out
    }

    pub fn rename(&self, f: &impl Fn(&str) -> String) -> Action {
        Action(
            self.0
                .iter()
                .map(|a| Assign {
                    target: match &a.target {
                        LValue::Var(n) => LValue::Var(map_name(n, f)),
                        LValue::Index(b, i) => LValue::Index(f(b), i.rename(f)),
                    },
                    value: a.value.rename(f),
                })
                .collect(),
        )
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{} := {}", a.target, a.value)?;
        }
        Ok(())
    }
}
