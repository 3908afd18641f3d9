use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RdfError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared prefix `{prefix}:` at {line}:{column}")]
    UnresolvedPrefix {
        prefix: String,
        line: usize,
        column: usize,
    },
    #[error("malformed list at {node}: {reason}")]
    MalformedList { node: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("property shape {shape} has no sh:path")]
    MissingPath { shape: String },
    #[error("property shape {shape} uses an unsupported path expression {path}")]
    UnsupportedPath { shape: String, path: String },
    #[error("sh:node on {shape} must name an IRI, found {value}")]
    UnsupportedNodeRef { shape: String, value: String },
    #[error(transparent)]
    Rdf(#[from] RdfError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstraintError {
    #[error("{constraint} on {path}: cannot interpret {value}")]
    TypeMismatch {
        path: String,
        constraint: String,
        value: String,
    },
    #[error("{path}: sh:minCount {min} exceeds sh:maxCount {max}")]
    ContradictoryCardinality { path: String, min: u64, max: u64 },
    #[error("property pair constraints form a cycle through {}", .predicates.join(", "))]
    PairCycle { predicates: Vec<String> },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthError {
    #[error("unsatisfiable constraint: {0}")]
    Unsatisfiable(String),
    #[error("unsupported regex feature {feature} in /{pattern}/")]
    UnsupportedRegexFeature { feature: String, pattern: String },
    #[error("invalid regex /{pattern}/: {message}")]
    RegexSyntax { pattern: String, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenerateError {
    #[error("entity count must be at least 1")]
    InvalidEntityCount,
    #[error("shapes graph contains no node shapes")]
    NoShapes,
    #[error("sh:node refers to unknown shape {0}")]
    MissingShape(String),
    #[error("sh:node chain deeper than {0} levels")]
    RecursionLimit(usize),
    #[error("empty logical constraint list on {0}")]
    EmptyLogicalList(String),
    #[error("shape {shape}, property {property}: {source}")]
    Property {
        shape: String,
        property: String,
        #[source]
        source: Box<GenerateError>,
    },
    #[error("shape {shape}: {source}")]
    Shape {
        shape: String,
        #[source]
        source: Box<GenerateError>,
    },
    #[error(transparent)]
    Constraint(#[from] ConstraintError),
    #[error(transparent)]
    Synth(#[from] SynthError),
}

impl GenerateError {
    pub(crate) fn in_property(self, shape: &str, property: &str) -> Self {
        match self {
            e @ (GenerateError::Property { .. } | GenerateError::Shape { .. }) => e,
            e => GenerateError::Property {
                shape: shape.to_owned(),
                property: property.to_owned(),
                source: Box::new(e),
            },
        }
    }

    pub(crate) fn in_shape(self, shape: &str) -> Self {
        match self {
            e @ (GenerateError::Property { .. } | GenerateError::Shape { .. }) => e,
            e => GenerateError::Shape {
                shape: shape.to_owned(),
                source: Box::new(e),
            },
        }
    }
}

/// Failure of the end-to-end pipeline, tagged with the failing stage.
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("parse: {0}")]
    Parse(#[from] RdfError),
    #[error("shapes: {0}")]
    Shapes(#[from] ShapeError),
    #[error("constraints: {0}")]
    Constraints(#[from] ConstraintError),
    #[error("generate: {0}")]
    Generate(#[from] GenerateError),
}
