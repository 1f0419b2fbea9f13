//! Workloads shared by the criterion benches.

use tmas_core::abstraction::{abstract_mas, AbstractOptions, AbstractionSpec};
use tmas_core::voting::{abstraction_preset, generate, Preset, VotingConfig};
use tmas_core::TmasGraph;

/// Forced-abstention model with `nv` voters and `nc` candidates.
pub fn voting(nv: usize, nc: usize, revote: bool) -> (VotingConfig, TmasGraph) {
    let cfg = VotingConfig::faa(nv, nc, revote);
    let mg = generate(&cfg).expect("voting model");
    (cfg, mg)
}

pub fn preset(cfg: &VotingConfig, p: Preset) -> AbstractionSpec {
    abstraction_preset(cfg, p)
}

pub fn abstracted(mg: &TmasGraph, spec: &AbstractionSpec) -> TmasGraph {
    abstract_mas(mg, spec, AbstractOptions::default()).expect("abstraction").mg
}
