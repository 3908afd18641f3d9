//! Extraction of SHACL node shapes into nested shape maps.
//!
//! A [`ShapeMap`] is a structural copy of one shape: every `(shape, p, o)`
//! triple becomes an entry under `p`, except `sh:property`, whose property
//! shapes are mapped recursively and stored in `properties` keyed by their
//! `sh:path`. SHACL lists are expanded, and list items that are themselves
//! shape descriptions (the branches of `sh:xone`/`sh:or`/`sh:and`) are
//! mapped as shapes.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use indexmap::IndexMap;
use log::warn;

use crate::error::ShapeError;
use crate::rdf::{Graph, Term};
use crate::vocab::{rdf, sh};

const MAX_NESTING: usize = 64;

/// Value stored under a constraint predicate.
#[derive(Debug, Clone, PartialEq)]
pub enum EntryValue {
    Term(Term),
    List(Vec<EntryValue>),
    Shape(Box<ShapeMap>),
}

impl EntryValue {
    pub fn as_term(&self) -> Option<&Term> {
        match self {
            EntryValue::Term(t) => Some(t),
            _ => None,
        }
    }

    pub fn as_list(&self) -> Option<&[EntryValue]> {
        match self {
            EntryValue::List(items) => Some(items),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShapeMap {
    pub shape_id: Term,
    /// Constraint predicate (W3C SHACL namespace) to its values.
    pub entries: BTreeMap<String, Vec<EntryValue>>,
    /// Nested property shapes keyed by path, in declaration order.
    pub properties: IndexMap<String, ShapeMap>,
    pub source_order: usize,
    /// Added by [`synthesize_pair_targets`] rather than declared.
    pub synthesized: bool,
}

impl ShapeMap {
    pub fn new(shape_id: Term) -> Self {
        Self {
            shape_id,
            entries: BTreeMap::new(),
            properties: IndexMap::new(),
            source_order: 0,
            synthesized: false,
        }
    }

    /// First value stored under `key`.
    pub fn entry(&self, key: &str) -> Option<&EntryValue> {
        self.entries.get(key).and_then(|v| v.first())
    }

    pub fn entry_term(&self, key: &str) -> Option<&Term> {
        self.entry(key).and_then(EntryValue::as_term)
    }

    pub fn path(&self) -> Option<&str> {
        self.entry_term(sh::PATH).and_then(Term::as_iri)
    }

    pub fn push_entry(&mut self, key: impl Into<String>, value: EntryValue) {
        self.entries.entry(key.into()).or_default().push(value);
    }
}

/// The root shape map: one [`ShapeMap`] per node shape in the shapes graph.
#[derive(Debug, Clone)]
pub struct RootShapeMap {
    pub shapes: IndexMap<String, ShapeMap>,
    pub first_shape: String,
    /// SHACL namespace spelling used by the input, reused for output links.
    pub shacl_namespace: String,
    /// Prefix table of the shapes graph.
    pub prefixes: BTreeMap<String, String>,
}

impl RootShapeMap {
    pub fn get(&self, shape: &str) -> Option<&ShapeMap> {
        self.shapes.get(shape)
    }

    /// IRI of `sh:description` in the input's SHACL namespace.
    pub fn description_predicate(&self) -> String {
        format!("{}description", self.shacl_namespace)
    }

    /// Node shapes referenced through `sh:node` anywhere inside `shape`.
    pub fn pointed_from(&self, shape: &str) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if let Some(sm) = self.shapes.get(shape) {
            collect_node_refs(sm, &mut out);
        }
        out
    }

    /// Shapes reachable from `start` by following `sh:node` references,
    /// including `start`.
    pub fn reachable_from(&self, start: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.to_owned()];
        while let Some(s) = stack.pop() {
            if seen.insert(s.clone()) {
                stack.extend(self.pointed_from(&s));
            }
        }
        seen
    }
}

fn collect_node_refs(sm: &ShapeMap, out: &mut BTreeSet<String>) {
    if let Some(values) = sm.entries.get(sh::NODE) {
        for v in values {
            if let Some(Term::Iri(iri)) = v.as_term() {
                out.insert(iri.clone());
            }
        }
    }
    for values in sm.entries.values() {
        for v in values {
            collect_in_value(v, out);
        }
    }
    for child in sm.properties.values() {
        collect_node_refs(child, out);
    }
}

fn collect_in_value(v: &EntryValue, out: &mut BTreeSet<String>) {
    match v {
        EntryValue::Term(_) => {}
        EntryValue::List(items) => items.iter().for_each(|i| collect_in_value(i, out)),
        EntryValue::Shape(sm) => collect_node_refs(sm, out),
    }
}

/// Key used for a node shape in the root map.
pub fn shape_key(term: &Term) -> String {
    match term {
        Term::Iri(iri) => iri.clone(),
        other => other.to_string(),
    }
}

/// Subjects typed `sh:NodeShape`, in the order they first appear as subjects.
pub fn find_node_shapes(graph: &Graph) -> Vec<Term> {
    let types: Vec<Term> = sh::variants(sh::NODE_SHAPE).into_iter().map(Term::Iri).collect();
    let rdf_type = Term::iri(rdf::TYPE);
    let mut shapes: HashSet<&Term> = HashSet::new();
    for t in graph.iter() {
        if t.predicate == rdf_type && types.contains(&t.object) {
            shapes.insert(&t.subject);
        }
    }
    let mut ordered = Vec::with_capacity(shapes.len());
    let mut seen = HashSet::new();
    for t in graph.iter() {
        if shapes.contains(&t.subject) && seen.insert(&t.subject) {
            ordered.push(t.subject.clone());
        }
    }
    ordered
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Node,
    Property,
    Branch,
}

/// Transforms one shape into a shape map.
pub fn map_shape(shape: &Term, graph: &Graph) -> Result<ShapeMap, ShapeError> {
    map_with_role(shape, graph, Role::Node, 0)
}

fn map_with_role(shape: &Term, graph: &Graph, role: Role, depth: usize) -> Result<ShapeMap, ShapeError> {
    if depth > MAX_NESTING {
        return Err(ShapeError::UnsupportedPath {
            shape: shape.to_string(),
            path: "nesting too deep".into(),
        });
    }
    let mut sm = ShapeMap::new(shape.clone());
    for t in graph.triples_of(shape) {
        let Some(predicate) = t.predicate.as_iri() else { continue };
        let predicate = sh::canonical(predicate).into_owned();
        let object = &t.object;
        if predicate == sh::PROPERTY {
            let child = map_with_role(object, graph, Role::Property, depth + 1)?;
            let path = child.path().expect("property role guarantees a path").to_owned();
            if sm.properties.contains_key(&path) {
                warn!("{shape}: duplicate property shapes for {path}; keeping the last");
            }
            sm.properties.insert(path, child);
            continue;
        }
        let value = match predicate.as_str() {
            sh::PATH => {
                if !object.is_iri() {
                    return Err(ShapeError::UnsupportedPath {
                        shape: shape.to_string(),
                        path: object.to_string(),
                    });
                }
                EntryValue::Term(object.clone())
            }
            sh::NODE => {
                if !object.is_iri() {
                    return Err(ShapeError::UnsupportedNodeRef {
                        shape: shape.to_string(),
                        value: object.to_string(),
                    });
                }
                EntryValue::Term(object.clone())
            }
            _ => map_object(object, graph, depth)?,
        };
        sm.push_entry(predicate, value);
    }
    if role == Role::Property && sm.path().is_none() {
        return Err(ShapeError::MissingPath {
            shape: shape.to_string(),
        });
    }
    Ok(sm)
}

fn map_object(object: &Term, graph: &Graph, depth: usize) -> Result<EntryValue, ShapeError> {
    if graph.is_list_head(object) {
        let items = graph.read_list(object)?;
        let mapped = items
            .iter()
            .map(|item| map_list_item(item, graph, depth))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(EntryValue::List(mapped));
    }
    if object.is_blank() && graph.has_subject(object) {
        return Ok(EntryValue::Shape(Box::new(map_with_role(object, graph, Role::Branch, depth + 1)?)));
    }
    Ok(EntryValue::Term(object.clone()))
}

fn map_list_item(item: &Term, graph: &Graph, depth: usize) -> Result<EntryValue, ShapeError> {
    if item.is_blank() && graph.has_subject(item) && !graph.is_list_head(item) {
        Ok(EntryValue::Shape(Box::new(map_with_role(item, graph, Role::Branch, depth + 1)?)))
    } else if graph.is_list_head(item) {
        map_object(item, graph, depth)
    } else {
        Ok(EntryValue::Term(item.clone()))
    }
}

const PAIR_PREDICATES: [&str; 4] = [sh::LESS_THAN, sh::LESS_THAN_OR_EQUALS, sh::EQUALS, sh::DISJOINT];

/// Adds a path-only property map for every pair-constraint target that has
/// no property shape of its own.
pub fn synthesize_pair_targets(mut sm: ShapeMap) -> ShapeMap {
    let mut missing = Vec::new();
    for child in sm.properties.values() {
        for key in PAIR_PREDICATES {
            for v in child.entries.get(key).into_iter().flatten() {
                if let Some(Term::Iri(target)) = v.as_term() {
                    if !sm.properties.contains_key(target) && !missing.contains(target) {
                        missing.push(target.clone());
                    }
                }
            }
        }
    }
    for target in missing {
        let mut child = ShapeMap::new(Term::iri(&target));
        child.push_entry(sh::PATH, EntryValue::Term(Term::iri(&target)));
        child.synthesized = true;
        sm.properties.insert(target, child);
    }
    sm
}

/// Result of root-shape selection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RootSelection {
    pub roots: Vec<String>,
    /// Every shape is pointed to by another; all shapes were returned.
    pub cycle: bool,
}

/// Node shapes not pointed to by any other node shape, in document order.
pub fn find_root_shapes(root: &RootShapeMap) -> RootSelection {
    let mut pointed = HashSet::new();
    for key in root.shapes.keys() {
        for target in root.pointed_from(key) {
            if &target != key {
                pointed.insert(target);
            }
        }
    }
    let roots: Vec<String> = root.shapes.keys().filter(|k| !pointed.contains(*k)).cloned().collect();
    if roots.is_empty() && !root.shapes.is_empty() {
        warn!("every node shape is pointed to by another shape; treating all as roots");
        return RootSelection {
            roots: root.shapes.keys().cloned().collect(),
            cycle: true,
        };
    }
    RootSelection { roots, cycle: false }
}

/// Runs node-shape discovery, shape mapping and pair-target synthesis.
pub fn extract_shape_maps(graph: &Graph) -> Result<RootShapeMap, ShapeError> {
    let node_shapes = find_node_shapes(graph);
    let upper = Term::iri(format!("{}NodeShape", sh::NS_UPPER));
    let rdf_type = Term::iri(rdf::TYPE);
    let uses_upper = !graph.matching(None, Some(&rdf_type), Some(&upper)).is_empty()
        && graph.matching(None, Some(&rdf_type), Some(&Term::iri(sh::NODE_SHAPE))).is_empty();
    let mut shapes = IndexMap::new();
    for (order, shape) in node_shapes.iter().enumerate() {
        let mut sm = synthesize_pair_targets(map_shape(shape, graph)?);
        sm.source_order = order;
        shapes.insert(shape_key(shape), sm);
    }
    let first_shape = shapes.keys().next().cloned().unwrap_or_default();
    Ok(RootShapeMap {
        shapes,
        first_shape,
        shacl_namespace: if uses_upper { sh::NS_UPPER } else { sh::NS }.to_owned(),
        prefixes: graph.prefixes().clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use crate::vocab::xsd;

    const EXAMPLE1: &str = include_str!("../fixtures/example1-person.ttl");
    const PERSON: &str = include_str!("../fixtures/input-shape-person.ttl");
    const BOOKS: &str = include_str!("../fixtures/input-shape-books.ttl");

    fn ex(local: &str) -> String {
        format!("http://example.com/ns#{local}")
    }

    fn term(t: Term) -> EntryValue {
        EntryValue::Term(t)
    }

    #[test]
    fn finds_example_node_shape() {
        let g = parse_turtle(EXAMPLE1).unwrap();
        assert_eq!(find_node_shapes(&g), vec![Term::iri(ex("PersonShape"))]);
        assert!(find_node_shapes(&Graph::new()).is_empty());
    }

    #[test]
    fn finds_shapes_in_file_order() {
        let g = parse_turtle(PERSON).unwrap();
        assert_eq!(
            find_node_shapes(&g),
            vec![Term::iri("http://schema.org/PersonShape"), Term::iri("http://schema.org/AddressShape")]
        );
        // AuthorShape declares `a sh:NodeShape` after sh:targetClass
        let g = parse_turtle(BOOKS).unwrap();
        assert_eq!(
            find_node_shapes(&g),
            vec![Term::iri("http://schema.org/BookShape"), Term::iri("http://schema.org/AuthorShape")]
        );
    }

    #[test]
    fn maps_example_person_shape() {
        let g = parse_turtle(EXAMPLE1).unwrap();
        let shape = Term::iri(ex("PersonShape"));
        let sm = synthesize_pair_targets(map_shape(&shape, &g).unwrap());

        // hand-written expected shape map
        let mut expected = ShapeMap::new(shape.clone());
        expected.push_entry(rdf::TYPE, term(Term::iri(format!("{}NodeShape", sh::NS_UPPER))));
        expected.push_entry(sh::TARGET_CLASS, term(Term::iri(ex("Person"))));
        let mut name = ShapeMap::new(Term::blank("x"));
        name.push_entry(sh::PATH, term(Term::iri(ex("name"))));
        name.push_entry(sh::DATATYPE, term(Term::iri(xsd::STRING)));
        name.push_entry(sh::MAX_COUNT, term(Term::typed("1", xsd::INTEGER)));
        name.push_entry(sh::NAME, term(Term::string("Person's name")));
        let mut birth = ShapeMap::new(Term::blank("x"));
        birth.push_entry(sh::PATH, term(Term::iri(ex("birthDate"))));
        birth.push_entry(sh::LESS_THAN, term(Term::iri(ex("deathDate"))));
        birth.push_entry(sh::MAX_COUNT, term(Term::typed("1", xsd::INTEGER)));
        let mut gender = ShapeMap::new(Term::blank("x"));
        gender.push_entry(sh::PATH, term(Term::iri(ex("gender"))));
        gender.push_entry(
            sh::IN,
            EntryValue::List(vec![term(Term::string("female")), term(Term::string("male"))]),
        );

        assert_eq!(sm.entries, expected.entries);
        let keys: Vec<&str> = sm.properties.keys().map(String::as_str).collect();
        assert_eq!(keys, [ex("name"), ex("birthDate"), ex("gender"), ex("deathDate")]);
        assert_eq!(sm.properties[&ex("name")].entries, name.entries);
        assert_eq!(sm.properties[&ex("birthDate")].entries, birth.entries);
        assert_eq!(sm.properties[&ex("gender")].entries, gender.entries);
        let death = &sm.properties[&ex("deathDate")];
        assert!(death.synthesized);
        assert_eq!(death.entries.len(), 1);
        assert_eq!(death.path(), Some(ex("deathDate").as_str()));
        assert!(!sm.entries.contains_key(sh::PROPERTY));
    }

    #[test]
    fn shape_without_properties() {
        let g = parse_turtle("@prefix sh: <http://www.w3.org/ns/shacl#> .\n<http://x/S> a sh:NodeShape .").unwrap();
        let sm = map_shape(&Term::iri("http://x/S"), &g).unwrap();
        assert!(sm.properties.is_empty());
        assert_eq!(sm.entries.len(), 1);
    }

    #[test]
    fn three_level_nesting() {
        let src = r#"
            @prefix sh: <http://www.w3.org/ns/shacl#> .
            @prefix ex: <http://x/> .
            ex:S a sh:NodeShape ;
                sh:property [ sh:path ex:a ;
                    sh:property [ sh:path ex:b ;
                        sh:property [ sh:path ex:c ; sh:minLength 3 ] ] ] .
        "#;
        let g = parse_turtle(src).unwrap();
        let sm = map_shape(&Term::iri("http://x/S"), &g).unwrap();
        let a = &sm.properties["http://x/a"];
        let b = &a.properties["http://x/b"];
        let c = &b.properties["http://x/c"];
        assert!(c.properties.is_empty());
        assert_eq!(c.entry_term(sh::MIN_LENGTH), Some(&Term::typed("3", xsd::INTEGER)));
        for (key, child) in [("http://x/a", a), ("http://x/b", b), ("http://x/c", c)] {
            assert_eq!(child.path(), Some(key));
        }
    }

    #[test]
    fn xone_branch_forms() {
        let g = parse_turtle(PERSON).unwrap();
        let sm = map_shape(&Term::iri("http://schema.org/PersonShape"), &g).unwrap();
        let branches = sm.entry(sh::XONE).unwrap().as_list().unwrap();
        assert_eq!(branches.len(), 2);
        let EntryValue::Shape(group) = &branches[0] else { panic!("branch 0 not a shape") };
        let keys: Vec<&String> = group.properties.keys().collect();
        assert_eq!(keys, ["http://schema.org/givenName", "http://schema.org/familyName"]);
        let EntryValue::Shape(bare) = &branches[1] else { panic!("branch 1 not a shape") };
        assert_eq!(bare.path(), Some("http://schema.org/name"));
        assert!(bare.properties.is_empty());
    }

    #[test]
    fn missing_path_is_an_error() {
        let src = "@prefix sh: <http://www.w3.org/ns/shacl#> .\n<http://x/S> a sh:NodeShape ; sh:property [ sh:minCount 1 ] .";
        let g = parse_turtle(src).unwrap();
        assert!(matches!(
            map_shape(&Term::iri("http://x/S"), &g),
            Err(ShapeError::MissingPath { .. })
        ));
    }

    #[test]
    fn blank_node_ref_rejected() {
        let src = "@prefix sh: <http://www.w3.org/ns/shacl#> .\n<http://x/S> a sh:NodeShape ; sh:property [ sh:path <http://x/p> ; sh:node [ sh:minCount 1 ] ] .";
        let g = parse_turtle(src).unwrap();
        assert!(matches!(
            map_shape(&Term::iri("http://x/S"), &g),
            Err(ShapeError::UnsupportedNodeRef { .. })
        ));
    }

    #[test]
    fn duplicate_path_last_wins() {
        let src = "@prefix sh: <http://www.w3.org/ns/shacl#> .\n<http://x/S> a sh:NodeShape ;
            sh:property [ sh:path <http://x/p> ; sh:minCount 1 ] ;
            sh:property [ sh:path <http://x/p> ; sh:minCount 2 ] .";
        let g = parse_turtle(src).unwrap();
        let sm = map_shape(&Term::iri("http://x/S"), &g).unwrap();
        assert_eq!(sm.properties.len(), 1);
        assert_eq!(
            sm.properties["http://x/p"].entry_term(sh::MIN_COUNT),
            Some(&Term::typed("2", xsd::INTEGER))
        );
    }

    #[test]
    fn synthesize_is_idempotent_and_noop_without_pairs() {
        let g = parse_turtle(EXAMPLE1).unwrap();
        let sm = map_shape(&Term::iri(ex("PersonShape")), &g).unwrap();
        let once = synthesize_pair_targets(sm);
        let twice = synthesize_pair_targets(once.clone());
        assert_eq!(once, twice);

        let g = parse_turtle(PERSON).unwrap();
        let address = map_shape(&Term::iri("http://schema.org/AddressShape"), &g).unwrap();
        assert_eq!(synthesize_pair_targets(address.clone()), address);
    }

    #[test]
    fn roots() {
        let root = extract_shape_maps(&parse_turtle(PERSON).unwrap()).unwrap();
        assert_eq!(find_root_shapes(&root).roots, vec!["http://schema.org/PersonShape".to_owned()]);
        assert_eq!(root.shacl_namespace, sh::NS_UPPER);

        let root = extract_shape_maps(&parse_turtle(BOOKS).unwrap()).unwrap();
        assert_eq!(find_root_shapes(&root).roots, vec!["http://schema.org/BookShape".to_owned()]);

        let root = extract_shape_maps(&parse_turtle(EXAMPLE1).unwrap()).unwrap();
        let sel = find_root_shapes(&root);
        assert_eq!(sel.roots, vec![ex("PersonShape")]);
        assert!(!sel.cycle);
    }

    #[test]
    fn cyclic_pointing_returns_all() {
        let src = "@prefix sh: <http://www.w3.org/ns/shacl#> .
            <http://x/A> a sh:NodeShape ; sh:property [ sh:path <http://x/b> ; sh:node <http://x/B> ] .
            <http://x/B> a sh:NodeShape ; sh:property [ sh:path <http://x/a> ; sh:node <http://x/A> ] .";
        let root = extract_shape_maps(&parse_turtle(src).unwrap()).unwrap();
        let sel = find_root_shapes(&root);
        assert!(sel.cycle);
        assert_eq!(sel.roots.len(), 2);
    }

    #[test]
    fn completeness_over_fixtures() {
        for src in [EXAMPLE1, PERSON, BOOKS] {
            let g = parse_turtle(src).unwrap();
            for shape in find_node_shapes(&g) {
                let sm = map_shape(&shape, &g).unwrap();
                let mut entry_count = 0;
                let mut property_count = 0;
                for t in g.triples_of(&shape) {
                    if sh::canonical(t.predicate.as_iri().unwrap()) == sh::PROPERTY {
                        property_count += 1;
                    } else {
                        entry_count += 1;
                    }
                }
                assert_eq!(sm.entries.values().map(Vec::len).sum::<usize>(), entry_count);
                assert_eq!(sm.properties.len(), property_count);
                for (key, child) in &sm.properties {
                    assert_eq!(child.path(), Some(key.as_str()));
                }
            }
        }
    }
}
