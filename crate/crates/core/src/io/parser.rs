use std::collections::BTreeSet;

use super::lexer::{tokenize, Tok, Token};
use crate::analysis::{Observation, Prop};
use crate::error::{Error, Result};
use crate::model::{
    element_name, Action, Assign, BinOp, ClockAtom, ClockConstraint, ClockRel, CmpOp, Condition,
    Domain, Edge, Expr, LValue, Lit, SyncLabel, TimedAgentGraph, TmasGraph, VariableDecl,
};

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    /// Instance index replacing `$` in identifiers.
    instance: Option<usize>,
}

fn cmp_op(s: &str) -> Option<CmpOp> {
    Some(match s {
        "<" => CmpOp::Lt,
        "<=" => CmpOp::Le,
        "==" | "=" => CmpOp::Eq,
        "!=" => CmpOp::Ne,
        ">=" => CmpOp::Ge,
        ">" => CmpOp::Gt,
        _ => return None,
    })
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: tokenize(text)?,
            pos: 0,
            instance: None,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Syntax {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn is_word(&self, w: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == w)
    }

    fn expect_word(&mut self, w: &str) -> Result<()> {
        if self.is_word(w) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected `{w}`, found {}", self.describe()))
        }
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(match self.instance {
                    Some(i) => s.replace('$', &i.to_string()),
                    None => s,
                })
            }
            _ => self.err(format!("expected a name, found {}", self.describe())),
        }
    }

    fn int(&mut self) -> Result<Lit> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.err(format!("expected an integer, found {}", self.describe())),
        }
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn end_of_statement(&mut self) -> Result<()> {
        match self.peek() {
            Tok::Newline => {
                self.bump();
                Ok(())
            }
            Tok::Eof => Ok(()),
            Tok::Sym("}") => Ok(()),
            _ => self.err(format!("expected end of line, found {}", self.describe())),
        }
    }

    fn names(&mut self) -> Result<Vec<String>> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    // ---- expressions ----

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") => BinOp::Mod,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_sym("-") {
            return Ok(match self.unary()? {
                Expr::Lit(v) => Expr::Lit(-v),
                e => Expr::Neg(Box::new(e)),
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Lit(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(w) if (w == "min" || w == "max") && *self.peek_at(1) == Tok::Sym("(") => {
                self.bump();
                self.bump();
                let a = self.expr()?;
                self.expect_sym(",")?;
                let b = self.expr()?;
                self.expect_sym(")")?;
                let op = if w == "min" { BinOp::Min } else { BinOp::Max };
                Ok(Expr::bin(op, a, b))
            }
            Tok::Ident(_) => {
                let name = self.ident()?;
                if self.eat_sym("[") {
                    let idx = self.expr()?;
                    self.expect_sym("]")?;
                    return Ok(match idx {
                        Expr::Lit(k) => Expr::Var(element_name(&name, k)),
                        idx => Expr::Index(name, Box::new(idx)),
                    });
                }
                Ok(Expr::Var(name))
            }
            _ => self.err(format!("expected an expression, found {}", self.describe())),
        }
    }

    // ---- propositions and conditions ----

    fn prop(&mut self) -> Result<Prop> {
        let lhs = self.disj()?;
        if self.eat_sym("=>") {
            let rhs = self.prop()?;
            return Ok(Prop::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disj(&mut self) -> Result<Prop> {
        let mut parts = vec![self.conj()?];
        while self.eat_sym("||") {
            parts.push(self.conj()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Prop::Or(parts)
        })
    }

    fn conj(&mut self) -> Result<Prop> {
        let mut parts = vec![self.negation()?];
        while self.eat_sym("&&") {
            parts.push(self.negation()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Prop::And(parts)
        })
    }

    fn negation(&mut self) -> Result<Prop> {
        if self.eat_sym("!") {
            return Ok(Prop::not(self.negation()?));
        }
        self.primary()
    }

    fn comparison(&mut self) -> Result<Prop> {
        let a = self.expr()?;
        let op = match self.peek() {
            Tok::Sym(s) => cmp_op(s),
            _ => None,
        };
        let Some(op) = op else {
            return self.err(format!("expected a comparison, found {}", self.describe()));
        };
        self.bump();
        let b = self.expr()?;
        Ok(Prop::Atom(Condition::Cmp(op, a, b)))
    }

    fn primary(&mut self) -> Result<Prop> {
        if self.is_word("true") {
            self.bump();
            return Ok(Prop::True);
        }
        if self.is_word("false") {
            self.bump();
            return Ok(Prop::False);
        }
        if self.eat_sym("@") {
            return Ok(Prop::At {
                agent: None,
                location: self.ident()?,
            });
        }
        if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Sym("@") {
            let agent = self.ident()?;
            self.bump();
            return Ok(Prop::At {
                agent: Some(agent),
                location: self.ident()?,
            });
        }
        if self.is_sym("(") {
            let save = self.pos;
            if let Ok(p) = self.comparison() {
                return Ok(p);
            }
            self.pos = save;
            self.bump();
            let p = self.prop()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        self.comparison()
    }

    fn condition(&mut self) -> Result<Condition> {
        let at = self.pos;
        let p = self.prop()?;
        to_condition(&p).ok_or_else(|| {
            let t = &self.toks[at];
            Error::Syntax {
                line: t.line,
                column: t.column,
                message: "location atoms are only allowed in properties".into(),
            }
        })
    }

    fn clock_constraint(&mut self) -> Result<ClockConstraint> {
        if self.is_word("true") {
            self.bump();
            return Ok(ClockConstraint::top());
        }
        let mut atoms = vec![self.clock_atom()?];
        while self.eat_sym("&&") {
            atoms.push(self.clock_atom()?);
        }
        Ok(ClockConstraint(atoms))
    }

    fn clock_atom(&mut self) -> Result<ClockAtom> {
        let x = self.ident()?;
        let minus = if self.eat_sym("-") {
            Some(self.ident()?)
        } else {
            None
        };
        let rel = match self.peek() {
            Tok::Sym("<") => ClockRel::Lt,
            Tok::Sym("<=") => ClockRel::Le,
            Tok::Sym("==") | Tok::Sym("=") => ClockRel::Eq,
            Tok::Sym(">=") => ClockRel::Ge,
            Tok::Sym(">") => ClockRel::Gt,
            _ => return self.err(format!("expected a clock relation, found {}", self.describe())),
        };
        self.bump();
        let bound = self.int()?;
        Ok(ClockAtom {
            clock: x,
            minus,
            rel,
            bound,
        })
    }

    fn action(&mut self) -> Result<Action> {
        let mut out = vec![self.assign()?];
        while self.eat_sym(";") {
            out.push(self.assign()?);
        }
        Ok(Action(out))
    }

    fn assign(&mut self) -> Result<Assign> {
        let name = self.ident()?;
        let target = if self.eat_sym("[") {
            let idx = self.expr()?;
            self.expect_sym("]")?;
            match idx {
                Expr::Lit(k) => LValue::Var(element_name(&name, k)),
                idx => LValue::Index(name, idx),
            }
        } else {
            LValue::Var(name)
        };
        self.expect_sym(":=")?;
        Ok(Assign {
            target,
            value: self.expr()?,
        })
    }

    // ---- declarations ----

    fn domain(&mut self) -> Result<Domain> {
        if self.eat_sym("{") {
            let mut vals = vec![self.int()?];
            while self.eat_sym(",") {
                vals.push(self.int()?);
            }
            self.expect_sym("}")?;
            return Ok(Domain::list(vals));
        }
        let lo = self.int()?;
        self.expect_sym("..")?;
        let hi = self.int()?;
        if hi < lo {
            return self.err(format!("empty range {lo}..{hi}"));
        }
        Ok(Domain::range(lo, hi))
    }

    /// `var name[N]? : domain = init | [init, ...]`
    fn var_decl(&mut self) -> Result<Vec<VariableDecl>> {
        self.expect_word("var")?;
        let name = self.ident()?;
        let len = if self.eat_sym("[") {
            let n = self.int()?;
            self.expect_sym("]")?;
            if n <= 0 {
                return self.err("array length must be positive");
            }
            Some(n as usize)
        } else {
            None
        };
        self.expect_sym(":")?;
        let domain = self.domain()?;
        self.expect_sym("=")?;
        let inits = if self.eat_sym("[") {
            let mut v = vec![self.int()?];
            while self.eat_sym(",") {
                v.push(self.int()?);
            }
            self.expect_sym("]")?;
            v
        } else {
            vec![self.int()?]
        };
        self.end_of_statement()?;
        match len {
            None if inits.len() == 1 => Ok(vec![VariableDecl::new(name, domain, inits[0])]),
            None => self.err("a list of initial values needs an array"),
            Some(n) if inits.len() == 1 => Ok(VariableDecl::array(&name, n, domain, inits[0])),
            Some(n) if inits.len() == n => Ok(inits
                .iter()
                .enumerate()
                .map(|(i, &v)| VariableDecl::new(element_name(&name, i as Lit), domain.clone(), v))
                .collect()),
            Some(n) => self.err(format!("expected {n} initial values")),
        }
    }

    fn edge(&mut self) -> Result<Edge> {
        self.expect_word("edge")?;
        let src = self.ident()?;
        self.expect_sym("->")?;
        let dst = self.ident()?;
        let mut e = Edge::new(src, dst);
        let mut seen = BTreeSet::new();
        while !matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Sym("}")) {
            let key = self.ident()?;
            if !seen.insert(key.clone()) {
                return self.err(format!("field `{key}` given twice"));
            }
            self.expect_sym(":")?;
            match key.as_str() {
                "guard" => e.guard = self.condition()?,
                "clock" => e.clock_guard = self.clock_constraint()?,
                "sync" => {
                    e.sync = if self.eat_sym("-") {
                        SyncLabel::None
                    } else {
                        let ch = self.ident()?;
                        if self.eat_sym("!") {
                            SyncLabel::Emit(ch)
                        } else if self.eat_sym("?") {
                            SyncLabel::Receive(ch)
                        } else {
                            return self.err("expected `!` or `?` after the channel");
                        }
                    }
                }
                "do" => e.action = self.action()?,
                "reset" => e.resets = self.names()?.into_iter().collect(),
                other => return self.err(format!("unknown edge field `{other}`")),
            }
        }
        self.end_of_statement()?;
        Ok(e)
    }

    /// Body of an agent block up to and including the closing brace.
    fn agent_body(&mut self, name: String) -> Result<TimedAgentGraph> {
        let mut decls: Vec<VariableDecl> = Vec::new();
        let mut clocks = Vec::new();
        let mut channels = BTreeSet::new();
        let mut locations: Vec<String> = Vec::new();
        let mut init: Option<(String, Option<Condition>)> = None;
        let mut invariants = Vec::new();
        let mut edges = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Sym("}") => {
                    self.bump();
                    break;
                }
                Tok::Ident(w) => match w.as_str() {
                    "var" => decls.extend(self.var_decl()?),
                    "clock" => {
                        self.bump();
                        clocks.extend(self.names()?);
                        self.end_of_statement()?;
                    }
                    "chan" => {
                        self.bump();
                        channels.extend(self.names()?);
                        self.end_of_statement()?;
                    }
                    "location" => {
                        self.bump();
                        for l in self.names()? {
                            if !locations.contains(&l) {
                                locations.push(l);
                            }
                        }
                        self.end_of_statement()?;
                    }
                    "init" => {
                        self.bump();
                        if init.is_some() {
                            return self.err("`init` given twice");
                        }
                        let l = self.ident()?;
                        let c = if self.eat_sym(":") {
                            Some(self.condition()?)
                        } else {
                            None
                        };
                        init = Some((l, c));
                        self.end_of_statement()?;
                    }
                    "invariant" => {
                        self.bump();
                        let l = self.ident()?;
                        self.expect_sym(":")?;
                        invariants.push((l, self.clock_constraint()?));
                        self.end_of_statement()?;
                    }
                    "edge" => edges.push(self.edge()?),
                    other => return self.err(format!("unknown statement `{other}`")),
                },
                Tok::Eof => return self.err("unclosed agent block"),
                _ => return self.err(format!("expected a statement, found {}", self.describe())),
            }
        }
        let (l0, g0) = match init {
            Some((l, c)) => (l, c),
            None => match locations.first() {
                Some(l) => (l.clone(), None),
                None => return self.err(format!("agent `{name}` has no locations")),
            },
        };
        let mut g = TimedAgentGraph::new(name, l0);
        for l in locations {
            g.add_location(l);
        }
        match g0 {
            Some(c) => {
                g.variables = decls;
                g.initial_condition = c;
            }
            None => decls.into_iter().for_each(|d| g.add_var(d)),
        }
        g.clocks = clocks;
        for e in &edges {
            if let Some(c) = e.sync.channel() {
                channels.insert(c.to_string());
            }
        }
        g.channels = channels;
        for (l, cc) in invariants {
            let merged = g.invariant(&l).and(&cc);
            g.invariants.insert(l, merged);
        }
        g.edges = edges;
        Ok(g)
    }

    fn system(&mut self) -> Result<TmasGraph> {
        self.skip_newlines();
        self.expect_word("system")?;
        self.expect_sym("{")?;
        let mut shared = Vec::new();
        let mut agents = Vec::new();
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Sym("}") => {
                    self.bump();
                    break;
                }
                Tok::Ident(w) if w == "shared" => {
                    self.bump();
                    self.expect_sym("{")?;
                    loop {
                        self.skip_newlines();
                        if self.eat_sym("}") {
                            break;
                        }
                        shared.extend(self.var_decl()?);
                    }
                }
                Tok::Ident(w) if w == "agent" => {
                    self.bump();
                    let name = self.ident()?;
                    let copies = match self.peek().clone() {
                        Tok::Ident(x) if x.len() > 1 && x.starts_with('x') => {
                            match x[1..].parse::<usize>() {
                                Ok(n) if n > 0 => {
                                    self.bump();
                                    Some(n)
                                }
                                _ => return self.err(format!("bad instance count `{x}`")),
                            }
                        }
                        _ => None,
                    };
                    self.expect_sym("{")?;
                    match copies {
                        None => agents.push(self.agent_body(name)?),
                        Some(n) => {
                            let start = self.pos;
                            for i in 1..=n {
                                self.pos = start;
                                self.instance = Some(i);
                                agents.push(self.agent_body(format!("{name}{i}"))?);
                            }
                            self.instance = None;
                        }
                    }
                }
                _ => {
                    return self.err(format!(
                        "expected `shared`, `agent` or `}}`, found {}",
                        self.describe()
                    ))
                }
            }
        }
        self.skip_newlines();
        if *self.peek() != Tok::Eof {
            return self.err(format!("unexpected {} after the system block", self.describe()));
        }
        let mg = TmasGraph::new(shared, agents)?;
        mg.validate()?;
        Ok(mg)
    }

    fn finish(&mut self) -> Result<()> {
        self.skip_newlines();
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }
}

/// `Prop` without location atoms as a condition.
pub fn to_condition(p: &Prop) -> Option<Condition> {
    Some(match p {
        Prop::True => Condition::True,
        Prop::False => Condition::False,
        Prop::Atom(c) => c.clone(),
        Prop::At { .. } => return None,
        Prop::Not(q) => Condition::not(to_condition(q)?),
        Prop::And(ps) => Condition::And(ps.iter().map(to_condition).collect::<Option<_>>()?),
        Prop::Or(ps) => Condition::Or(ps.iter().map(to_condition).collect::<Option<_>>()?),
    })
}

/// Parses a system in the native text format and checks well-formedness.
pub fn parse_system(text: &str) -> Result<TmasGraph> {
    Parser::new(text)?.system()
}

/// Parses a state property; a leading `A[]` or `AG` is accepted.
pub fn parse_prop(text: &str) -> Result<Prop> {
    let mut p = Parser::new(text)?;
    p.skip_newlines();
    if p.is_word("AG") {
        p.bump();
    } else if p.is_word("A") && *p.peek_at(1) == Tok::Sym("[") && *p.peek_at(2) == Tok::Sym("]") {
        p.bump();
        p.bump();
        p.bump();
    }
    let out = p.prop()?;
    p.finish()?;
    Ok(out)
}

pub fn parse_condition(text: &str) -> Result<Condition> {
    let mut p = Parser::new(text)?;
    p.skip_newlines();
    let out = p.condition()?;
    p.finish()?;
    Ok(out)
}

pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = Parser::new(text)?;
    let out = p.expr()?;
    p.finish()?;
    Ok(out)
}

pub fn parse_clock_constraint(text: &str) -> Result<ClockConstraint> {
    let mut p = Parser::new(text)?;
    let out = p.clock_constraint()?;
    p.finish()?;
    Ok(out)
}

/// Observation file: one item per line, `locations`, `values v1, v2`, or
/// a proposition.
pub fn parse_observation(text: &str) -> Result<Observation> {
    let mut p = Parser::new(text)?;
    let mut obs = Observation::default();
    loop {
        p.skip_newlines();
        if *p.peek() == Tok::Eof {
            return Ok(obs);
        }
        if p.is_word("locations") && *p.peek_at(1) == Tok::Newline {
            p.bump();
            obs.locations = true;
        } else if p.is_word("values") && matches!(p.peek_at(1), Tok::Ident(_)) {
            p.bump();
            obs.values.extend(p.names()?);
        } else {
            obs.props.push(p.prop()?);
        }
        p.end_of_statement()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_agent_uses_defaults() {
        let mg = parse_system("system {\n agent A {\n location l0\n }\n}\n").unwrap();
        let g = &mg.agents[0];
        assert_eq!(g.initial_location, "l0");
        assert!(g.edges.is_empty() && g.variables.is_empty() && g.clocks.is_empty());
    }

    #[test]
    fn edge_fields_default_when_omitted() {
        let text = "system {\n agent A {\n var v : 0..2 = 0\n location a, b\n edge a -> b\n edge b -> a guard: v < 2 do: v := v + 1\n }\n}";
        let mg = parse_system(text).unwrap();
        let e = &mg.agents[0].edges[0];
        assert_eq!(*e, Edge::new("a", "b"));
        assert_eq!(mg.agents[0].edges[1].action.to_string(), "v := v + 1");
    }

    #[test]
    fn template_instances_substitute_index() {
        let text = "system {\n agent P x2 {\n location idle\n edge idle -> idle sync: go$!\n }\n agent Q {\n location w\n edge w -> w sync: go1?\n edge w -> w sync: go2?\n }\n}";
        let mg = parse_system(text).unwrap();
        assert_eq!(mg.agents[0].name, "P1");
        assert_eq!(mg.agents[1].edges[0].sync, SyncLabel::Emit("go2".into()));
    }

    #[test]
    fn parenthesised_comparison_and_implication() {
        let p = parse_prop("A[] (V1.np == 1) => V1.vote = -1").unwrap();
        assert_eq!(p.to_string(), "!(V1.np == 1) || (V1.vote == -1)");
        let q = parse_prop("!(a + 1 < 2 && V@l)").unwrap();
        assert!(matches!(q, Prop::Not(_)));
    }

    #[test]
    fn syntax_errors_are_positioned() {
        let err = parse_system("system {\n agent A {\n location l0\n edge l0 -> \n }\n}").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 4, .. }), "{err:?}");
    }

    #[test]
    fn location_atoms_rejected_in_guards() {
        assert!(parse_condition("A@l0").is_err());
    }

    #[test]
    fn observation_lines() {
        let o = parse_observation("locations\nvalues a, B.b\nx > 1\n").unwrap();
        assert!(o.locations);
        assert_eq!(o.values, vec!["a", "B.b"]);
        assert_eq!(o.props.len(), 1);
    }
}
