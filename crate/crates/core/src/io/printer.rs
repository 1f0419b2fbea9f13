use std::collections::HashSet;
use std::fmt::Write;

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::model::{TimedAgentGraph, TmasGraph, VariableDecl};

/// Groups `base[0..n]` runs into one line each.
fn print_decls(out: &mut String, decls: &[&VariableDecl], indent: &str, owner: &str) -> Result<()> {
    let mut i = 0;
    while i < decls.len() {
        let d = decls[i];
        match d.array_part() {
            None => {
                writeln!(out, "{indent}var {} : {} = {}", d.name, d.domain, d.initial).unwrap();
                i += 1;
            }
            Some((base, _)) => {
                let run: Vec<&VariableDecl> = decls[i..]
                    .iter()
                    .take_while(|e| e.array_part().is_some_and(|(b, _)| b == base))
                    .copied()
                    .collect();
                let regular = run
                    .iter()
                    .enumerate()
                    .all(|(k, e)| e.array_part().map(|(_, j)| j) == Some(k as i64) && e.domain == d.domain);
                if !regular {
                    return Err(Error::UnsupportedConstruct {
                        location: format!("{owner}.{base}"),
                        message: "array elements must be indexed 0..n with one domain".into(),
                    });
                }
                let inits = if run.iter().all(|e| e.initial == d.initial) {
                    d.initial.to_string()
                } else {
                    format!("[{}]", run.iter().map(|e| e.initial).join(", "))
                };
                writeln!(out, "{indent}var {base}[{}] : {} = {inits}", run.len(), d.domain).unwrap();
                i += run.len();
            }
        }
    }
    Ok(())
}

fn print_agent(out: &mut String, g: &TimedAgentGraph, shared: &HashSet<&str>) -> Result<()> {
    writeln!(out, "  agent {} {{", g.name).unwrap();
    let locals: Vec<&VariableDecl> = g
        .variables
        .iter()
        .filter(|v| !shared.contains(v.name.as_str()))
        .collect();
    print_decls(out, &locals, "    ", &g.name)?;
    if !g.clocks.is_empty() {
        writeln!(out, "    clock {}", g.clocks.join(", ")).unwrap();
    }
    if !g.channels.is_empty() {
        writeln!(out, "    chan {}", g.channels.iter().join(", ")).unwrap();
    }
    writeln!(out, "    location {}", g.locations.join(", ")).unwrap();
    writeln!(out, "    init {} : {}", g.initial_location, g.initial_condition).unwrap();
    for (l, cc) in &g.invariants {
        if !cc.is_top() {
            writeln!(out, "    invariant {l} : {cc}").unwrap();
        }
    }
    for e in &g.edges {
        write!(out, "    edge {} -> {}", e.source, e.target).unwrap();
        if e.guard != crate::model::Condition::True {
            write!(out, " guard: {}", e.guard).unwrap();
        }
        if !e.clock_guard.is_top() {
            write!(out, " clock: {}", e.clock_guard).unwrap();
        }
        if e.sync.channel().is_some() {
            write!(out, " sync: {}", e.sync).unwrap();
        }
        if !e.action.is_tau() {
            write!(out, " do: {}", e.action).unwrap();
        }
        if !e.resets.is_empty() {
            write!(out, " reset: {}", e.resets.iter().join(", ")).unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "  }}").unwrap();
    Ok(())
}

/// Native text form, accepted back by `parse_system`.
pub fn print_system(mg: &TmasGraph) -> Result<String> {
    let mut out = String::from("system {\n");
    if !mg.shared.is_empty() {
        out.push_str("  shared {\n");
        let decls: Vec<&VariableDecl> = mg.shared.iter().collect();
        print_decls(&mut out, &decls, "    ", "shared")?;
        out.push_str("  }\n");
    }
    let shared: HashSet<&str> = mg.shared.iter().map(|v| v.name.as_str()).collect();
    for g in &mg.agents {
        print_agent(&mut out, g, &shared)?;
    }
    out.push_str("}\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_system;
    use crate::model::Domain;

    #[test]
    fn arrays_group_and_roundtrip() {
        let text = "system {\n shared {\n var s : -1..2 = -1\n }\n agent A {\n var t[3] : 0..2 = [0, 1, 0]\n var b : {0, 4} = 4\n location l\n edge l -> l guard: t[1] > 0 && s != -1 do: t[2] := min(t[2] + 1, 2)\n }\n}\n";
        let mg = parse_system(text).unwrap();
        let printed = print_system(&mg).unwrap();
        assert!(printed.contains("var t[3] : 0..2 = [0, 1, 0]"), "{printed}");
        assert_eq!(parse_system(&printed).unwrap(), mg);
    }

    #[test]
    fn irregular_array_rejected() {
        let mut g = TimedAgentGraph::new("A", "l");
        g.add_var(VariableDecl::new("a[1]", Domain::range(0, 1), 0));
        let err = print_system(&TmasGraph::single(g)).unwrap_err();
        assert!(matches!(err, Error::UnsupportedConstruct { .. }));
    }
}
