//! JSON layout of abstraction specs.
//!
//! ```json
//! [ {"agent": "V1", "scope": "all", "remove": ["vote"]},
//!   {"agent": "V2", "scope": ["l0", "l1"],
//!    "map": {"W": ["a"], "Z": [{"name": "za", "domain": [0, 1], "init": 0}],
//!            "table": [[[0], [0]], [[1], [1]], [[2], [1]]]}} ]
//! ```
//!
//! The top level may also be `{"entries": [...]}`. A domain is `[lo, hi]`
//! or `{"values": [..]}`.

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use super::{AbstractionEntry, AbstractionSpec, Mapping, MappingFunction, Scope};
use crate::error::{Error, Result};
use crate::model::{Domain, Lit, VariableDecl};

fn bad(m: impl Into<String>) -> Error {
    Error::Json(m.into())
}

fn strings(v: &Value, what: &str) -> Result<Vec<String>> {
    v.as_array()
        .ok_or_else(|| bad(format!("`{what}` must be an array of names")))?
        .iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| bad(format!("`{what}` must be an array of names")))
        })
        .collect()
}

fn lits(v: &Value, what: &str) -> Result<Vec<Lit>> {
    v.as_array()
        .ok_or_else(|| bad(format!("{what} must be an array of integers")))?
        .iter()
        .map(|x| {
            x.as_i64()
                .ok_or_else(|| bad(format!("{what} must be an array of integers")))
        })
        .collect()
}

fn domain(v: &Value) -> Result<Domain> {
    if let Some(vals) = v.get("values") {
        return Ok(Domain::list(lits(vals, "domain values")?));
    }
    match lits(v, "domain")?.as_slice() {
        [lo, hi] if lo <= hi => Ok(Domain::range(*lo, *hi)),
        _ => Err(bad("domain must be [lo, hi] or {\"values\": [..]}")),
    }
}

fn domain_json(d: &Domain) -> Value {
    match (d.is_contiguous(), d.min(), d.max()) {
        (true, Some(lo), Some(hi)) => json!([lo, hi]),
        _ => json!({ "values": d.values() }),
    }
}

fn entry(v: &Value) -> Result<AbstractionEntry> {
    let obj = v
        .as_object()
        .ok_or_else(|| bad("abstraction entry must be an object"))?;
    let agent = obj
        .get("agent")
        .and_then(Value::as_str)
        .ok_or_else(|| bad("abstraction entry lacks `agent`"))?
        .to_string();
    let scope = match obj.get("scope") {
        None => return Err(bad(format!("entry for `{agent}` lacks `scope`"))),
        Some(Value::String(s)) if s == "all" => Scope::All,
        Some(s) => Scope::Locations(strings(s, "scope")?.into_iter().collect()),
    };
    let f = match (obj.get("remove"), obj.get("map")) {
        (Some(r), None) => MappingFunction::remove(strings(r, "remove")?),
        (None, Some(m)) => {
            let w = strings(
                m.get("W").ok_or_else(|| bad("`map` lacks `W`"))?,
                "W",
            )?;
            let mut z = Vec::new();
            for d in m
                .get("Z")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("`map` lacks `Z`"))?
            {
                let name = d
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| bad("abstract variable lacks `name`"))?;
                let dom = domain(d.get("domain").ok_or_else(|| bad("abstract variable lacks `domain`"))?)?;
                let init = match d.get("init") {
                    Some(i) => i.as_i64().ok_or_else(|| bad("`init` must be an integer"))?,
                    None => dom.min().unwrap_or(0),
                };
                z.push(VariableDecl::new(name, dom, init));
            }
            let mut table = BTreeMap::new();
            for row in m
                .get("table")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("`map` lacks `table`"))?
            {
                match row.as_array().map(Vec::as_slice) {
                    Some([wv, zv]) => {
                        let wv = lits(wv, "table row")?;
                        let zv = lits(zv, "table row")?;
                        if wv.len() != w.len() || zv.len() != z.len() {
                            return Err(bad(format!("table row {row} has the wrong arity")));
                        }
                        if table.insert(wv, zv).is_some() {
                            return Err(bad(format!("table row {row} repeats its source")));
                        }
                    }
                    _ => return Err(bad("table rows must be [[w values], [z values]]")),
                }
            }
            MappingFunction {
                w,
                mapping: Mapping::Table { z, table },
            }
        }
        _ => {
            return Err(bad(format!(
                "entry for `{agent}` needs exactly one of `remove` and `map`"
            )))
        }
    };
    Ok(AbstractionEntry { agent, scope, f })
}

impl AbstractionSpec {
    pub fn from_json(v: &Value) -> Result<Self> {
        let list = match v {
            Value::Array(a) => a,
            Value::Object(o) => o
                .get("entries")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("abstraction spec must be an array of entries"))?,
            _ => return Err(bad("abstraction spec must be an array of entries")),
        };
        Ok(AbstractionSpec {
            entries: list.iter().map(entry).collect::<Result<_>>()?,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Value {
        let entries = self
            .entries
            .iter()
            .map(|e| {
                let mut o = Map::new();
                o.insert("agent".into(), json!(e.agent));
                o.insert(
                    "scope".into(),
                    match &e.scope {
                        Scope::All => json!("all"),
                        Scope::Locations(s) => json!(s),
                    },
                );
                match &e.f.mapping {
                    Mapping::Remove => {
                        o.insert("remove".into(), json!(e.f.w));
                    }
                    Mapping::Table { z, table } => {
                        let z: Vec<Value> = z
                            .iter()
                            .map(|d| {
                                json!({"name": d.name, "domain": domain_json(&d.domain), "init": d.initial})
                            })
                            .collect();
                        let rows: Vec<Value> =
                            table.iter().map(|(a, b)| json!([a, b])).collect();
                        o.insert("map".into(), json!({"W": e.f.w, "Z": z, "table": rows}));
                    }
                }
                Value::Object(o)
            })
            .collect();
        Value::Array(entries)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remove_and_map_round_trip() {
        let text = r#"{"entries": [
            {"agent": "A", "scope": "all", "remove": ["x", "y"]},
            {"agent": "B", "scope": ["l0"], "map": {"W": ["a"],
                "Z": [{"name": "z", "domain": [0, 1], "init": 0}],
                "table": [[[0], [0]], [[1], [1]], [[2], [1]]]}}
        ]}"#;
        let spec = AbstractionSpec::parse(text).unwrap();
        assert_eq!(spec.entries.len(), 2);
        assert_eq!(spec.entries[0].scope, Scope::All);
        assert_eq!(spec.entries[1].f.z()[0].name, "z");
        assert_eq!(AbstractionSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn rejects_entry_with_both_forms() {
        let text = r#"[{"agent": "A", "scope": "all", "remove": [], "map": {}}]"#;
        assert!(matches!(AbstractionSpec::parse(text), Err(Error::Json(_))));
    }
}
