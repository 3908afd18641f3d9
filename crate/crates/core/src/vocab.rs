//! IRI constants for the vocabularies the generator understands.

pub mod rdf {
    pub const NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
    pub const TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";
    pub const FIRST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#first";
    pub const REST: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#rest";
    pub const NIL: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#nil";
    pub const LANG_STRING: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#langString";
}

pub mod xsd {
    pub const NS: &str = "http://www.w3.org/2001/XMLSchema#";
    pub const STRING: &str = "http://www.w3.org/2001/XMLSchema#string";
    pub const BOOLEAN: &str = "http://www.w3.org/2001/XMLSchema#boolean";
    pub const INTEGER: &str = "http://www.w3.org/2001/XMLSchema#integer";
    pub const DECIMAL: &str = "http://www.w3.org/2001/XMLSchema#decimal";
    pub const DOUBLE: &str = "http://www.w3.org/2001/XMLSchema#double";
    pub const FLOAT: &str = "http://www.w3.org/2001/XMLSchema#float";
    pub const DATE: &str = "http://www.w3.org/2001/XMLSchema#date";
    pub const DATE_TIME: &str = "http://www.w3.org/2001/XMLSchema#dateTime";

    const INTEGER_TYPES: &[&str] = &[
        "integer",
        "int",
        "long",
        "short",
        "byte",
        "nonNegativeInteger",
        "positiveInteger",
        "nonPositiveInteger",
        "negativeInteger",
        "unsignedLong",
        "unsignedInt",
        "unsignedShort",
        "unsignedByte",
    ];

    fn xsd_local(iri: &str) -> Option<&str> {
        iri.strip_prefix(NS)
    }

    pub fn is_integer(iri: &str) -> bool {
        xsd_local(iri).is_some_and(|l| INTEGER_TYPES.contains(&l))
    }

    pub fn is_numeric(iri: &str) -> bool {
        is_integer(iri) || iri == DECIMAL || iri == DOUBLE || iri == FLOAT
    }

    pub fn is_temporal(iri: &str) -> bool {
        iri == DATE || iri == DATE_TIME
    }
}

/// SHACL vocabulary.
///
/// Shapes graphs in the wild use both the W3C namespace and an upper-case
/// `SHACL#` variant; both are accepted and keys are stored under the W3C form.
pub mod sh {
    use std::borrow::Cow;

    pub const NS: &str = "http://www.w3.org/ns/shacl#";
    pub const NS_UPPER: &str = "http://www.w3.org/ns/SHACL#";

    pub const NODE_SHAPE: &str = "http://www.w3.org/ns/shacl#NodeShape";
    pub const PROPERTY: &str = "http://www.w3.org/ns/shacl#property";
    pub const PATH: &str = "http://www.w3.org/ns/shacl#path";
    pub const TARGET_CLASS: &str = "http://www.w3.org/ns/shacl#targetClass";
    pub const DATATYPE: &str = "http://www.w3.org/ns/shacl#datatype";
    pub const MIN_COUNT: &str = "http://www.w3.org/ns/shacl#minCount";
    pub const MAX_COUNT: &str = "http://www.w3.org/ns/shacl#maxCount";
    pub const MIN_INCLUSIVE: &str = "http://www.w3.org/ns/shacl#minInclusive";
    pub const MAX_INCLUSIVE: &str = "http://www.w3.org/ns/shacl#maxInclusive";
    pub const MIN_EXCLUSIVE: &str = "http://www.w3.org/ns/shacl#minExclusive";
    pub const MAX_EXCLUSIVE: &str = "http://www.w3.org/ns/shacl#maxExclusive";
    pub const MIN_LENGTH: &str = "http://www.w3.org/ns/shacl#minLength";
    pub const MAX_LENGTH: &str = "http://www.w3.org/ns/shacl#maxLength";
    pub const PATTERN: &str = "http://www.w3.org/ns/shacl#pattern";
    pub const FLAGS: &str = "http://www.w3.org/ns/shacl#flags";
    pub const IN: &str = "http://www.w3.org/ns/shacl#in";
    pub const NODE: &str = "http://www.w3.org/ns/shacl#node";
    pub const EQUALS: &str = "http://www.w3.org/ns/shacl#equals";
    pub const DISJOINT: &str = "http://www.w3.org/ns/shacl#disjoint";
    pub const LESS_THAN: &str = "http://www.w3.org/ns/shacl#lessThan";
    pub const LESS_THAN_OR_EQUALS: &str = "http://www.w3.org/ns/shacl#lessThanOrEquals";
    pub const XONE: &str = "http://www.w3.org/ns/shacl#xone";
    pub const OR: &str = "http://www.w3.org/ns/shacl#or";
    pub const AND: &str = "http://www.w3.org/ns/shacl#and";
    pub const NAME: &str = "http://www.w3.org/ns/shacl#name";
    pub const DESCRIPTION: &str = "http://www.w3.org/ns/shacl#description";
    pub const CLOSED: &str = "http://www.w3.org/ns/shacl#closed";
    pub const IGNORED_PROPERTIES: &str = "http://www.w3.org/ns/shacl#ignoredProperties";

    /// Rewrites an upper-case-namespace SHACL IRI to the W3C namespace.
    pub fn canonical(iri: &str) -> Cow<'_, str> {
        match iri.strip_prefix(NS_UPPER) {
            Some(local) => Cow::Owned(format!("{NS}{local}")),
            None => Cow::Borrowed(iri),
        }
    }

    /// Both namespace spellings of a SHACL term.
    pub fn variants(iri: &str) -> [String; 2] {
        let local = iri.strip_prefix(NS).unwrap_or(iri);
        [format!("{NS}{local}"), format!("{NS_UPPER}{local}")]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_upper_case_namespace() {
        assert_eq!(sh::canonical("http://www.w3.org/ns/SHACL#path"), sh::PATH);
        assert_eq!(sh::canonical(sh::PATH), sh::PATH);
        assert_eq!(sh::canonical("http://schema.org/name"), "http://schema.org/name");
    }

    #[test]
    fn integer_family() {
        assert!(xsd::is_integer(xsd::INTEGER));
        assert!(xsd::is_integer("http://www.w3.org/2001/XMLSchema#nonNegativeInteger"));
        assert!(!xsd::is_integer(xsd::DECIMAL));
        assert!(xsd::is_numeric(xsd::DECIMAL));
    }
}
