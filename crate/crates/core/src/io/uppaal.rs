use std::collections::BTreeMap;
use std::fmt::Write;

use itertools::Itertools;

use crate::analysis::Prop;
use crate::error::{Error, Result};
use crate::model::{
    split_element, Action, BinOp, ClockConstraint, Condition, Expr, LValue, TimedAgentGraph,
    TmasGraph, VariableDecl,
};

fn sanitize(s: &str) -> String {
    let mut out: String = s
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    if out.chars().next().is_none_or(|c| c.is_ascii_digit()) {
        out.insert(0, '_');
    }
    out
}

/// Variable reference: `a[3]` keeps its index, `A.v` keeps the process
/// qualifier.
fn var_name(name: &str) -> String {
    if let Some((base, k)) = split_element(name) {
        return format!("{}[{k}]", var_name(base));
    }
    match name.split_once('.') {
        Some((agent, rest)) => format!("{}.{}", sanitize(agent), sanitize(rest)),
        None => sanitize(name),
    }
}

fn expr(e: &Expr) -> String {
    match e {
        Expr::Lit(v) if *v < 0 => format!("({v})"),
        Expr::Lit(v) => v.to_string(),
        Expr::Var(n) => var_name(n),
        Expr::Index(b, i) => format!("{}[{}]", var_name(b), expr(i)),
        Expr::Neg(a) => format!("-({})", expr(a)),
        Expr::Bin(op, a, b) => {
            let sym = match op {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Mod => "%",
                BinOp::Min => "<?",
                BinOp::Max => ">?",
            };
            format!("({} {sym} {})", expr(a), expr(b))
        }
    }
}

fn cond(c: &Condition) -> String {
    match c {
        Condition::True => "true".into(),
        Condition::False => "false".into(),
        Condition::Cmp(op, a, b) => format!("{} {} {}", expr(a), op.symbol(), expr(b)),
        Condition::Not(c) => format!("!({})", cond(c)),
        Condition::And(cs) if cs.is_empty() => "true".into(),
        Condition::Or(cs) if cs.is_empty() => "false".into(),
        Condition::And(cs) => cs.iter().map(|c| format!("({})", cond(c))).join(" && "),
        Condition::Or(cs) => cs.iter().map(|c| format!("({})", cond(c))).join(" || "),
    }
}

fn clock_constraint(cc: &ClockConstraint) -> String {
    cc.0.iter()
        .map(|a| match &a.minus {
            Some(y) => format!("{} - {} {} {}", sanitize(&a.clock), sanitize(y), a.rel.symbol(), a.bound),
            None => format!("{} {} {}", sanitize(&a.clock), a.rel.symbol(), a.bound),
        })
        .join(" && ")
}

fn action(a: &Action) -> Vec<String> {
    a.0.iter()
        .map(|s| {
            let lhs = match &s.target {
                LValue::Var(n) => var_name(n),
                LValue::Index(b, i) => format!("{}[{}]", var_name(b), expr(i)),
            };
            format!("{lhs} = {}", expr(&s.value))
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Declarations with arrays folded back into `int[lo,hi] a[n] = {..};`.
fn declarations(
    out: &mut String,
    decls: &[&VariableDecl],
    init: &BTreeMap<String, i64>,
    owner: &str,
) -> Result<()> {
    let unsupported = |name: &str, message: &str| Error::UnsupportedConstruct {
        location: format!("{owner}.{name}"),
        message: message.into(),
    };
    let groups = decls
        .iter()
        .chunk_by(|d| d.array_part().map(|(b, _)| b.to_string()));
    for (base, group) in &groups {
        let group: Vec<&&VariableDecl> = group.collect();
        let d = group[0];
        if !d.domain.is_contiguous() {
            return Err(unsupported(&d.name, "non-contiguous domain"));
        }
        let (lo, hi) = (d.domain.min().unwrap(), d.domain.max().unwrap());
        let value = |v: &VariableDecl| init.get(&v.name).copied().unwrap_or(v.initial);
        match base {
            None => {
                for v in group {
                    if !v.domain.is_contiguous() {
                        return Err(unsupported(&v.name, "non-contiguous domain"));
                    }
                    let (lo, hi) = (v.domain.min().unwrap(), v.domain.max().unwrap());
                    writeln!(out, "int[{lo},{hi}] {} = {};", sanitize(&v.name), value(v)).unwrap();
                }
            }
            Some(base) => {
                let regular = group.iter().enumerate().all(|(k, e)| {
                    e.array_part().map(|(_, j)| j) == Some(k as i64) && e.domain == d.domain
                });
                if !regular {
                    return Err(unsupported(&base, "array elements must be indexed 0..n with one domain"));
                }
                let inits = group.iter().map(|v| value(v)).join(", ");
                writeln!(out, "int[{lo},{hi}] {}[{}] = {{{inits}}};", sanitize(&base), group.len()).unwrap();
            }
        }
    }
    Ok(())
}

fn template(out: &mut String, g: &TimedAgentGraph, mg: &TmasGraph) -> Result<()> {
    let init = g.initial_evaluation()?;
    let locals: Vec<&VariableDecl> = g.variables.iter().filter(|v| !mg.is_shared(&v.name)).collect();
    let mut decl = String::new();
    declarations(&mut decl, &locals, &init.0, &g.name)?;
    if !g.clocks.is_empty() {
        writeln!(decl, "clock {};", g.clocks.iter().map(|c| sanitize(c)).join(", ")).unwrap();
    }
    let id = |l: &str| format!("{}_{}", sanitize(&g.name), g.location_index(l).unwrap_or(0));
    writeln!(out, "  <template>").unwrap();
    writeln!(out, "    <name>{}</name>", sanitize(&g.name)).unwrap();
    writeln!(out, "    <declaration>{}</declaration>", escape(&decl)).unwrap();
    for l in &g.locations {
        write!(out, "    <location id=\"{}\"><name>{}</name>", id(l), sanitize(l)).unwrap();
        let inv = g.invariant(l);
        if !inv.is_top() {
            write!(out, "<label kind=\"invariant\">{}</label>", escape(&clock_constraint(&inv))).unwrap();
        }
        writeln!(out, "</location>").unwrap();
    }
    writeln!(out, "    <init ref=\"{}\"/>", id(&g.initial_location)).unwrap();
    for e in &g.edges {
        write!(out, "    <transition><source ref=\"{}\"/><target ref=\"{}\"/>", id(&e.source), id(&e.target)).unwrap();
        let mut guards = Vec::new();
        if e.guard != Condition::True {
            guards.push(cond(&e.guard));
        }
        if !e.clock_guard.is_top() {
            guards.push(clock_constraint(&e.clock_guard));
        }
        if !guards.is_empty() {
            let g = guards.iter().map(|s| format!("({s})")).join(" && ");
            write!(out, "<label kind=\"guard\">{}</label>", escape(&g)).unwrap();
        }
        if let Some(ch) = e.sync.channel() {
            let sync = e.sync.to_string().replacen(ch, &sanitize(ch), 1);
            write!(out, "<label kind=\"synchronisation\">{}</label>", escape(&sync)).unwrap();
        }
        let mut assigns = action(&e.action);
        assigns.extend(e.resets.iter().map(|x| format!("{} = 0", sanitize(x))));
        if !assigns.is_empty() {
            write!(out, "<label kind=\"assignment\">{}</label>", escape(&assigns.join(", "))).unwrap();
        }
        writeln!(out, "</transition>").unwrap();
    }
    writeln!(out, "  </template>").unwrap();
    Ok(())
}

/// UPPAAL XML with one template per agent.
pub fn export_uppaal(mg: &TmasGraph) -> Result<String> {
    mg.validate()?;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"utf-8\"?>\n");
    out.push_str("<!DOCTYPE nta PUBLIC '-//Uppaal Team//DTD Flat System 1.1//EN' 'http://www.it.uu.se/research/group/darts/uppaal/flat-1_2.dtd'>\n");
    out.push_str("<nta>\n");
    let mut global = String::new();
    let shared_init = match mg.agents.first() {
        Some(g) => g.initial_evaluation()?.0,
        None => BTreeMap::new(),
    };
    let shared: Vec<&VariableDecl> = mg.shared.iter().collect();
    declarations(&mut global, &shared, &shared_init, "shared")?;
    let channels: std::collections::BTreeSet<&String> =
        mg.agents.iter().flat_map(|g| g.channels.iter()).collect();
    if !channels.is_empty() {
        writeln!(global, "chan {};", channels.iter().map(|c| sanitize(c)).join(", ")).unwrap();
    }
    writeln!(out, "  <declaration>{}</declaration>", escape(&global)).unwrap();
    for g in &mg.agents {
        template(&mut out, g, mg)?;
    }
    let names = mg.agents.iter().map(|g| sanitize(&g.name)).join(", ");
    writeln!(out, "  <system>system {names};</system>").unwrap();
    out.push_str("</nta>\n");
    Ok(out)
}

fn query_prop(mg: &TmasGraph, p: &Prop) -> Result<String> {
    Ok(match p {
        Prop::True => "true".into(),
        Prop::False => "false".into(),
        Prop::Atom(c) => cond(c),
        Prop::At { agent, location } => {
            let holders: Vec<&TimedAgentGraph> = mg
                .agents
                .iter()
                .filter(|g| agent.as_ref().is_none_or(|a| &g.name == a))
                .filter(|g| g.location_index(location).is_some())
                .collect();
            match holders.as_slice() {
                [g] => format!("{}.{}", sanitize(&g.name), sanitize(location)),
                [] => return Err(Error::UndeclaredLocation(p.to_string())),
                _ => return Err(Error::IllFormed(format!("location atom `{p}` is ambiguous"))),
            }
        }
        Prop::Not(q) => format!("!({})", query_prop(mg, q)?),
        Prop::And(ps) if ps.is_empty() => "true".into(),
        Prop::Or(ps) if ps.is_empty() => "false".into(),
        Prop::And(ps) => ps
            .iter()
            .map(|q| query_prop(mg, q).map(|s| format!("({s})")))
            .collect::<Result<Vec<_>>>()?
            .join(" && "),
        Prop::Or(ps) => ps
            .iter()
            .map(|q| query_prop(mg, q).map(|s| format!("({s})")))
            .collect::<Result<Vec<_>>>()?
            .join(" || "),
    })
}

/// Query file line `A[] (...)` for an invariance property.
pub fn export_query(mg: &TmasGraph, p: &Prop) -> Result<String> {
    Ok(format!("A[] ({})\n", query_prop(mg, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{parse_prop, parse_system};

    const SYSTEM: &str = "system {\n shared {\n var s : 0..2 = 0\n }\n agent A {\n var t[2] : 0..3 = 1\n clock x\n location l0, l1\n invariant l0 : x <= 3\n edge l0 -> l1 guard: s < 2 clock: x >= 1 sync: go! do: t[1] := max(s, 1) reset: x\n }\n agent B {\n location w\n edge w -> w sync: go?\n }\n}";

    #[test]
    fn export_is_deterministic_and_escaped() {
        let mg = parse_system(SYSTEM).unwrap();
        let a = export_uppaal(&mg).unwrap();
        assert_eq!(a, export_uppaal(&mg).unwrap());
        assert!(a.contains("int[0,3] t[2] = {1, 1};"), "{a}");
        assert!(a.contains("x &lt;= 3"));
        assert!(a.contains("t[1] = (s &gt;? 1), x = 0"));
        assert!(a.contains("<system>system A, B;</system>"));
    }

    #[test]
    fn query_names_processes() {
        let mg = parse_system(SYSTEM).unwrap();
        let q = export_query(&mg, &parse_prop("@l1 => A.t[0] == 1").unwrap()).unwrap();
        assert_eq!(q, "A[] ((!(A.l1)) || (A.t[0] == 1))\n");
    }
}
