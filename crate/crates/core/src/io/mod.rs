//! Text format, its printer, and UPPAAL export.

mod lexer;
mod parser;
mod printer;
mod uppaal;

pub use parser::{
    parse_clock_constraint, parse_condition, parse_expr, parse_observation, parse_prop,
    parse_system, to_condition,
};
pub use printer::print_system;
pub use uppaal::{export_query, export_uppaal};
