use std::collections::{BTreeMap, BTreeSet};

use serde_json::{Map, Value};

use super::discrete::{explore, ExploreOptions};
use super::zone::zone_explore;
use crate::error::{Error, Result};
use crate::model::{Evaluation, Lit};
use crate::network::Network;

/// Location name → set of evaluations of the ordered variable list `vars`.
/// Locations without an entry have the empty set.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalDomain {
    pub vars: Vec<String>,
    pub map: BTreeMap<String, BTreeSet<Vec<Lit>>>,
}

impl LocalDomain {
    pub fn new(vars: Vec<String>) -> Self {
        LocalDomain {
            vars,
            map: BTreeMap::new(),
        }
    }

    pub fn get(&self, location: &str) -> Option<&BTreeSet<Vec<Lit>>> {
        self.map.get(location)
    }

    pub fn insert(&mut self, location: impl Into<String>, values: Vec<Lit>) -> bool {
        self.map.entry(location.into()).or_default().insert(values)
    }

    pub fn len(&self, location: &str) -> usize {
        self.get(location).map_or(0, BTreeSet::len)
    }

    pub fn total(&self) -> usize {
        self.map.values().map(BTreeSet::len).sum()
    }

    /// Evaluations stored for `location`, as name maps.
    pub fn evaluations(&self, location: &str) -> Vec<Evaluation> {
        self.get(location)
            .into_iter()
            .flatten()
            .map(|vals| self.evaluation(vals))
            .collect()
    }

    pub fn evaluation(&self, vals: &[Lit]) -> Evaluation {
        self.vars.iter().cloned().zip(vals.iter().copied()).collect()
    }

    /// First `(location, values)` of `self` missing from `other`.
    pub fn first_excess(&self, other: &LocalDomain) -> Option<(String, Vec<Lit>)> {
        let perm: Vec<usize> = self
            .vars
            .iter()
            .map(|v| other.vars.iter().position(|w| w == v).unwrap_or(usize::MAX))
            .collect();
        for (l, set) in &self.map {
            let theirs = other.get(l);
            for vals in set {
                if perm.contains(&usize::MAX) {
                    return Some((l.clone(), vals.clone()));
                }
                let mut mapped = vec![0; other.vars.len()];
                for (k, &p) in perm.iter().enumerate() {
                    mapped[p] = vals[k];
                }
                if !theirs.is_some_and(|t| t.contains(&mapped)) {
                    return Some((l.clone(), vals.clone()));
                }
            }
        }
        None
    }

    pub fn is_subset(&self, other: &LocalDomain) -> bool {
        self.first_excess(other).is_none()
    }

    /// Renames locations and variables, merging sets that collide.
    pub fn relabel(
        &self,
        loc: impl Fn(&str) -> String,
        var: impl Fn(&str) -> String,
    ) -> LocalDomain {
        let mut out = LocalDomain::new(self.vars.iter().map(|v| var(v)).collect());
        for (l, set) in &self.map {
            out.map.entry(loc(l)).or_default().extend(set.iter().cloned());
        }
        out
    }

    /// Keeps only the listed variables, in the given order.
    pub fn restrict(&self, vars: &[String]) -> Result<LocalDomain> {
        let idx: Vec<usize> = vars
            .iter()
            .map(|v| {
                self.vars
                    .iter()
                    .position(|w| w == v)
                    .ok_or_else(|| Error::UndeclaredVariable(v.clone()))
            })
            .collect::<Result<_>>()?;
        let mut out = LocalDomain::new(vars.to_vec());
        for (l, set) in &self.map {
            let proj = set
                .iter()
                .map(|vals| idx.iter().map(|&i| vals[i]).collect())
                .collect();
            out.map.insert(l.clone(), proj);
        }
        Ok(out)
    }

    /// `{location: [{var: value, ...}, ...]}`
    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        for (l, set) in &self.map {
            let rows = set
                .iter()
                .map(|vals| {
                    Value::Object(
                        self.vars
                            .iter()
                            .zip(vals)
                            .map(|(n, v)| (n.clone(), Value::from(*v)))
                            .collect(),
                    )
                })
                .collect();
            obj.insert(l.clone(), Value::Array(rows));
        }
        Value::Object(obj)
    }

    /// Reads the layout written by [`LocalDomain::to_json`]; every record
    /// must bind exactly `vars`.
    pub fn from_json(value: &Value, vars: &[String]) -> Result<LocalDomain> {
        let bad = |m: String| Error::Json(m);
        let obj = value
            .as_object()
            .ok_or_else(|| bad("local domain must be an object".into()))?;
        let mut out = LocalDomain::new(vars.to_vec());
        for (l, rows) in obj {
            let rows = rows
                .as_array()
                .ok_or_else(|| bad(format!("entry for `{l}` must be an array")))?;
            let set = out.map.entry(l.clone()).or_default();
            for row in rows {
                let rec = row
                    .as_object()
                    .ok_or_else(|| bad(format!("record at `{l}` must be an object")))?;
                if rec.len() != vars.len() {
                    return Err(bad(format!("record at `{l}` must bind {vars:?}")));
                }
                let vals = vars
                    .iter()
                    .map(|v| {
                        rec.get(v)
                            .and_then(Value::as_i64)
                            .ok_or_else(|| bad(format!("record at `{l}` lacks `{v}`")))
                    })
                    .collect::<Result<Vec<_>>>()?;
                set.insert(vals);
            }
        }
        Ok(out)
    }
}

fn var_indices(net: &Network, vars: &[String]) -> Result<Vec<usize>> {
    vars.iter()
        .map(|v| {
            net.var_index
                .get(v)
                .copied()
                .ok_or_else(|| Error::UndeclaredVariable(v.clone()))
        })
        .collect()
}

/// Projection of the reachable states onto `vars`, per product location.
/// With `timed` the zone graph is explored; otherwise timing is ignored.
pub fn exact_local_domain(
    net: &Network,
    vars: &[String],
    timed: bool,
    opts: ExploreOptions,
) -> Result<LocalDomain> {
    let idx = var_indices(net, vars)?;
    let n = net.agent_count();
    let mut out = LocalDomain::new(vars.to_vec());
    let mut add = |s: &[Lit]| {
        let vals = idx.iter().map(|&i| s[n + i]).collect();
        out.insert(net.location_name(s), vals);
    };
    if timed {
        let (g, _) = zone_explore(net, opts, |_| Ok(false))?;
        g.keys.iter().for_each(|s| add(s));
    } else {
        let (space, _) = explore(net, opts, |_| Ok(false))?;
        space.states.iter().for_each(|s| add(s));
    }
    Ok(out)
}
