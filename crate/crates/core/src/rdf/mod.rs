//! RDF terms, graphs and Turtle I/O.

mod graph;
mod term;
mod turtle;

pub use graph::Graph;
pub use term::{local_name, Literal, Term, Triple};
pub use turtle::{parse_turtle, serialize_turtle};
