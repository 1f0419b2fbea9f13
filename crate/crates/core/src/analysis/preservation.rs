use serde::{Deserialize, Serialize};

use super::check::{check_ag, Verdict};
use super::prop::Prop;
use crate::abstraction::{abstract_mas, AbstractOptions, AbstractionSpec};
use crate::error::{Error, Result};
use crate::model::{split_element, TmasGraph};
use crate::semantics::ExploreOptions;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// Both sides give the same verdict.
    Agree,
    /// Abstract counterexample, concrete model satisfies the property.
    Inconclusive,
    /// Abstract model satisfies the property, concrete one does not.
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub abstract_sat: bool,
    pub concrete_sat: bool,
    pub outcome: Outcome,
}

/// Fails with [`Error::RemovedVariableInProperty`] when `prop` reads a
/// variable that `spec` removes.
pub fn ensure_observable(mg: &TmasGraph, spec: &AbstractionSpec, prop: &Prop) -> Result<()> {
    let removed = spec.removed(mg);
    for v in prop.vars() {
        let hit = removed.contains(&v)
            || removed
                .iter()
                .any(|r| split_element(r).is_some_and(|(base, _)| base == v));
        if hit {
            return Err(Error::RemovedVariableInProperty(v));
        }
    }
    Ok(())
}

pub fn classify(abstract_sat: bool, concrete_sat: bool) -> Outcome {
    match (abstract_sat, concrete_sat) {
        (true, false) => Outcome::Violation,
        (false, true) => Outcome::Inconclusive,
        _ => Outcome::Agree,
    }
}

/// Checks `A G prop` on `mg` and on its abstraction under `spec`.
pub fn preservation_test(
    mg: &TmasGraph,
    spec: &AbstractionSpec,
    prop: &Prop,
    timed: bool,
    abs: AbstractOptions,
    opts: ExploreOptions,
) -> Result<PreservationReport> {
    ensure_observable(mg, spec, prop)?;
    let a = abstract_mas(mg, spec, abs)?;
    let abstract_sat = check_ag(&a.mg, prop, timed, opts)?.verdict == Verdict::Sat;
    let concrete_sat = check_ag(mg, prop, timed, opts)?.verdict == Verdict::Sat;
    Ok(PreservationReport {
        abstract_sat,
        concrete_sat,
        outcome: classify(abstract_sat, concrete_sat),
    })
}
