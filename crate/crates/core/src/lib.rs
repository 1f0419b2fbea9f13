//! Specification-level variable abstraction for timed multi-agent systems.

pub mod error;
pub mod io;
pub mod localdomain;
pub mod abstraction;
pub mod analysis;
pub mod compose;
pub mod model;
pub mod network;
pub mod random;
pub mod semantics;
pub mod voting;

pub use error::{Error, Result};
pub use model::*;
