//! Timed agent graphs, conditions, actions and clock constraints.

pub mod clock;
pub mod domain;
pub mod expr;
pub mod graph;

pub use clock::{ClockAtom, ClockConstraint, ClockRel, ClockValuation};
pub use domain::{element_name, for_each_product, split_element, Domain, Evaluation, Lit, VariableDecl};
pub use expr::{map_name, Action, Assign, BinOp, CmpOp, Condition, Env, Expr, LValue, VarSet};
pub use graph::{initial_evaluation, Edge, SyncLabel, TimedAgentGraph, TmasGraph};
