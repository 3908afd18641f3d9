//! Synthetic RDF graph generation from SHACL shapes, with a built-in conformance checker.

pub mod error;
pub mod rdf;
pub mod vocab;
pub mod shapes;
pub mod constraints;
pub mod literal;
pub mod synth;
pub mod generate;
pub mod validate;
pub mod cli;
