use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Literal type of every discrete variable. Booleans are encoded as `{0, 1}`.
pub type Lit = i64;

/// Finite ordered set of integer literals.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Domain {
    /// Closed interval `lo..hi`.
    Range { lo: Lit, hi: Lit },
    /// Explicit list, kept sorted and deduplicated.
    List(Vec<Lit>),
}

impl Domain {
    pub fn range(lo: Lit, hi: Lit) -> Self {
        Domain::Range { lo, hi }
    }

    pub fn list(mut values: Vec<Lit>) -> Self {
        values.sort_unstable();
        values.dedup();
        Domain::List(values)
    }

    pub fn boolean() -> Self {
        Domain::Range { lo: 0, hi: 1 }
    }

    pub fn contains(&self, v: Lit) -> bool {
        match self {
            Domain::Range { lo, hi } => *lo <= v && v <= *hi,
            Domain::List(values) => values.binary_search(&v).is_ok(),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Domain::Range { lo, hi } if hi >= lo => (hi - lo + 1) as usize,
            Domain::Range { .. } => 0,
            Domain::List(values) => values.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn values(&self) -> Vec<Lit> {
        match self {
            Domain::Range { lo, hi } => (*lo..=*hi).collect(),
            Domain::List(values) => values.clone(),
        }
    }

    pub fn min(&self) -> Option<Lit> {
        match self {
            Domain::Range { lo, hi } if lo <= hi => Some(*lo),
            Domain::Range { .. } => None,
            Domain::List(values) => values.first().copied(),
        }
    }

    pub fn max(&self) -> Option<Lit> {
        match self {
            Domain::Range { lo, hi } if lo <= hi => Some(*hi),
            Domain::Range { .. } => None,
            Domain::List(values) => values.last().copied(),
        }
    }

    /// True when the domain is a gap-free run of integers.
    pub fn is_contiguous(&self) -> bool {
        match self {
            Domain::Range { .. } => true,
            Domain::List(values) => values.windows(2).all(|w| w[1] == w[0] + 1),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Range { lo, hi } => write!(f, "{lo}..{hi}"),
            Domain::List(values) => {
                write!(f, "{{")?;
                for (i, v) in values.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, "}}")
            }
        }
    }
}

/// A scalar discrete variable. Array variables are expanded into one
/// declaration per element named `base[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VariableDecl {
    pub name: String,
    pub domain: Domain,
    pub initial: Lit,
}

impl VariableDecl {
    pub fn new(name: impl Into<String>, domain: Domain, initial: Lit) -> Self {
        VariableDecl {
            name: name.into(),
            domain,
            initial,
        }
    }

    /// Declarations for `base[0..len]`, all starting at `initial`.
    pub fn array(base: &str, len: usize, domain: Domain, initial: Lit) -> Vec<Self> {
        (0..len)
            .map(|i| VariableDecl::new(element_name(base, i as Lit), domain.clone(), initial))
            .collect()
    }

    /// Array base name and element index, if this is an array element.
    pub fn array_part(&self) -> Option<(&str, Lit)> {
        split_element(&self.name)
    }
}

pub fn element_name(base: &str, index: Lit) -> String {
    format!("{base}[{index}]")
}

/// Splits `a[3]` into `("a", 3)`.
pub fn split_element(name: &str) -> Option<(&str, Lit)> {
    let open = name.rfind('[')?;
    let inner = name[open + 1..].strip_suffix(']')?;
    inner.parse().ok().map(|i| (&name[..open], i))
}

/// Total map from variable names to literals.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Evaluation(pub BTreeMap<String, Lit>);

impl Evaluation {
    pub fn new() -> Self {
        Evaluation(BTreeMap::new())
    }

    pub fn get(&self, name: &str) -> Option<Lit> {
        self.0.get(name).copied()
    }

    pub fn set(&mut self, name: impl Into<String>, value: Lit) {
        self.0.insert(name.into(), value);
    }

    pub fn lookup(&self, name: &str) -> Result<Lit> {
        self.get(name)
            .ok_or_else(|| Error::UndeclaredVariable(name.to_string()))
    }

    /// `self` overridden by every binding of `other`.
    pub fn overridden(&self, other: &Evaluation) -> Evaluation {
        let mut out = self.clone();
        for (k, v) in &other.0 {
            out.0.insert(k.clone(), *v);
        }
        out
    }

    /// Restriction to the given names; absent names are skipped.
    pub fn restrict<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> Evaluation {
        Evaluation(
            names
                .into_iter()
                .filter_map(|n| self.0.get(n).map(|v| (n.clone(), *v)))
                .collect(),
        )
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Lit)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<(String, Lit)> for Evaluation {
    fn from_iter<I: IntoIterator<Item = (String, Lit)>>(iter: I) -> Self {
        Evaluation(iter.into_iter().collect())
    }
}

impl fmt::Display for Evaluation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (k, v)) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        write!(f, "}}")
    }
}

/// Calls `visit` once for every point of the product of `domains`, in
/// lexicographic order. Stops early when `visit` returns `false`.
pub fn for_each_product(domains: &[Vec<Lit>], mut visit: impl FnMut(&[Lit]) -> bool) {
    if domains.iter().any(|d| d.is_empty()) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut point: Vec<Lit> = domains.iter().map(|d| d[0]).collect();
    loop {
        if !visit(&point) {
            return;
        }
        let mut k = domains.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                point[k] = domains[k][idx[k]];
                break;
            }
            idx[k] = 0;
            point[k] = domains[k][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_membership() {
        let d = Domain::range(-1, 2);
        assert!(d.contains(-1) && d.contains(2) && !d.contains(3));
        assert_eq!(d.len(), 4);
        let l = Domain::list(vec![3, 1, 1, 2]);
        assert_eq!(l, Domain::List(vec![1, 2, 3]));
        assert!(l.is_contiguous());
        assert!(!Domain::list(vec![0, 2]).is_contiguous());
    }

    #[test]
    fn element_names_round_trip() {
        assert_eq!(split_element("tally[2]"), Some(("tally", 2)));
        assert_eq!(split_element("EA.tally[0]"), Some(("EA.tally", 0)));
        assert_eq!(split_element("x"), None);
    }

    #[test]
    fn product_enumeration_is_lexicographic() {
        let mut seen = Vec::new();
        for_each_product(&[vec![0, 1], vec![5, 6, 7]], |p| {
            seen.push(p.to_vec());
            true
        });
        assert_eq!(seen.len(), 6);
        assert_eq!(seen[0], vec![0, 5]);
        assert_eq!(seen[5], vec![1, 7]);
        let mut count = 0;
        for_each_product(&[], |_| {
            count += 1;
            true
        });
        assert_eq!(count, 1);
    }
}
