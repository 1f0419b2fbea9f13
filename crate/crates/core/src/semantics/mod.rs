//! Explicit discrete semantics, zone graphs and exact local domains.

pub mod dbm;
pub mod discrete;
pub mod local;
pub mod zone;

pub use dbm::Dbm;
pub use discrete::{discrete_model, explore, ExploreOptions, StateSpace};
pub use local::{exact_local_domain, LocalDomain};
pub use zone::{zone_explore, zone_reach, ZoneGraph, ZoneNode};
