//! Conformance checking of data graphs against the supported SHACL subset.
//!
//! Focus nodes are instances of a shape's `sh:targetClass` and nodes linked
//! to the shape with `sh:description`. Node-level `xone`/`or`/`and` branches
//! count as satisfied when every property of the branch is present and
//! conforms. `sh:pattern` must match the whole value. `sh:closed` is not
//! checked.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use regex::{Regex, RegexBuilder};

use crate::constraints::{normalize, ConstraintSet, Logical};
use crate::error::ConstraintError;
use crate::literal::{is_well_formed, ordered};
use crate::rdf::{Graph, Literal, Term};
use crate::shapes::RootShapeMap;
use crate::vocab::{rdf, sh};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintKind {
    MinCount,
    MaxCount,
    Datatype,
    MinInclusive,
    MaxInclusive,
    MinExclusive,
    MaxExclusive,
    MinLength,
    MaxLength,
    Pattern,
    In,
    Equals,
    LessThan,
    LessThanOrEquals,
    Disjoint,
    Xone,
    Or,
    And,
    Node,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 19] = [
        ConstraintKind::MinCount,
        ConstraintKind::MaxCount,
        ConstraintKind::Datatype,
        ConstraintKind::MinInclusive,
        ConstraintKind::MaxInclusive,
        ConstraintKind::MinExclusive,
        ConstraintKind::MaxExclusive,
        ConstraintKind::MinLength,
        ConstraintKind::MaxLength,
        ConstraintKind::Pattern,
        ConstraintKind::In,
        ConstraintKind::Equals,
        ConstraintKind::LessThan,
        ConstraintKind::LessThanOrEquals,
        ConstraintKind::Disjoint,
        ConstraintKind::Xone,
        ConstraintKind::Or,
        ConstraintKind::And,
        ConstraintKind::Node,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::MinCount => "minCount",
            ConstraintKind::MaxCount => "maxCount",
            ConstraintKind::Datatype => "datatype",
            ConstraintKind::MinInclusive => "minInclusive",
            ConstraintKind::MaxInclusive => "maxInclusive",
            ConstraintKind::MinExclusive => "minExclusive",
            ConstraintKind::MaxExclusive => "maxExclusive",
            ConstraintKind::MinLength => "minLength",
            ConstraintKind::MaxLength => "maxLength",
            ConstraintKind::Pattern => "pattern",
            ConstraintKind::In => "in",
            ConstraintKind::Equals => "equals",
            ConstraintKind::LessThan => "lessThan",
            ConstraintKind::LessThanOrEquals => "lessThanOrEquals",
            ConstraintKind::Disjoint => "disjoint",
            ConstraintKind::Xone => "xone",
            ConstraintKind::Or => "or",
            ConstraintKind::And => "and",
            ConstraintKind::Node => "node",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Violation {
    pub node: Term,
    pub path: Option<String>,
    pub constraint: ConstraintKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.path {
            Some(p) => write!(f, "{} <{}>: {} violated: {}", self.node, p, self.constraint, self.detail),
            None => write!(f, "{}: {} violated: {}", self.node, self.constraint, self.detail),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Report {
    pub conforms: bool,
    pub violations: Vec<Violation>,
    pub focus_nodes: usize,
}

impl Report {
    fn new(mut violations: Vec<Violation>, focus_nodes: usize) -> Self {
        violations.sort();
        violations.dedup();
        Self {
            conforms: violations.is_empty(),
            violations,
            focus_nodes,
        }
    }

    pub fn kinds(&self) -> BTreeSet<ConstraintKind> {
        self.violations.iter().map(|v| v.constraint).collect()
    }

    /// Human-readable summary followed by one violation per line.
    pub fn to_text(&self) -> String {
        let mut out = if self.conforms {
            format!("conforms: {} focus nodes checked, no violations\n", self.focus_nodes)
        } else {
            format!(
                "does not conform: {} violation(s) over {} focus nodes\n",
                self.violations.len(),
                self.focus_nodes
            )
        };
        for v in &self.violations {
            out.push_str(&format!("  {v}\n"));
        }
        out
    }

    /// One line per violation: node, path, constraint, detail, tab separated.
    pub fn to_tsv(&self) -> String {
        let clean = |s: &str| s.replace(['\t', '\n'], " ");
        self.violations
            .iter()
            .map(|v| {
                format!(
                    "{}\t{}\t{}\t{}\n",
                    v.node,
                    v.path.as_deref().unwrap_or(""),
                    v.constraint,
                    clean(&v.detail)
                )
            })
            .collect()
    }
}

type Found = Vec<(ConstraintKind, String)>;

/// Normalized shapes with their patterns compiled.
pub struct Validator {
    shapes: IndexMap<String, ConstraintSet>,
    patterns: HashMap<(String, String), Option<Regex>>,
}

fn full_match_regex(pattern: &str, flags: &str) -> Option<Regex> {
    RegexBuilder::new(&format!("^(?:{pattern})$"))
        .case_insensitive(flags.contains('i'))
        .multi_line(flags.contains('m'))
        .dot_matches_new_line(flags.contains('s'))
        .ignore_whitespace(flags.contains('x'))
        .build()
        .ok()
}

fn show(values: &[Term]) -> String {
    values.iter().map(Term::to_string).collect::<Vec<_>>().join(", ")
}

/// Orders two values for `lessThan`: orderable literals by value, other
/// literals of the same datatype lexically. Anything else is incomparable.
fn order(a: &Term, b: &Term) -> Option<Ordering> {
    let (a, b) = (a.as_literal()?, b.as_literal()?);
    match (ordered(a), ordered(b)) {
        (Some(x), Some(y)) => x.compare(&y),
        (None, None) if a.datatype() == b.datatype() && a.lang() == b.lang() => Some(a.lexical().cmp(b.lexical())),
        _ => None,
    }
}

impl Validator {
    pub fn new(root: &RootShapeMap) -> Result<Self, ConstraintError> {
        let mut shapes = IndexMap::new();
        for (key, sm) in &root.shapes {
            shapes.insert(key.clone(), normalize(sm)?);
        }
        let mut patterns = HashMap::new();
        fn collect(cs: &ConstraintSet, out: &mut HashMap<(String, String), Option<Regex>>) {
            if let Some(p) = &cs.pattern {
                let flags = cs.flags.clone().unwrap_or_default();
                out.entry((p.clone(), flags.clone()))
                    .or_insert_with(|| full_match_regex(p, &flags));
            }
            cs.properties.iter().for_each(|c| collect(c, out));
            for (_, branches) in cs.logicals() {
                branches.iter().for_each(|b| collect(b, out));
            }
        }
        shapes.values().for_each(|cs| collect(cs, &mut patterns));
        Ok(Self { shapes, patterns })
    }

    /// `(node, shape)` pairs to check, in a stable order.
    pub fn focus_nodes(&self, data: &Graph) -> Vec<(Term, String)> {
        let mut out = BTreeSet::new();
        let type_p = Term::iri(rdf::TYPE);
        let descriptions: Vec<Term> = sh::variants(sh::DESCRIPTION).into_iter().map(Term::iri).collect();
        for (key, cs) in &self.shapes {
            if let Some(class) = &cs.target_class {
                for t in data.matching(None, Some(&type_p), Some(&Term::iri(class))) {
                    out.insert((t.subject.clone(), key.clone()));
                }
            }
            for d in &descriptions {
                for t in data.matching(None, Some(d), Some(&Term::iri(key))) {
                    out.insert((t.subject.clone(), key.clone()));
                }
            }
        }
        out.into_iter().collect()
    }

    pub fn validate(&self, data: &Graph) -> Report {
        let focus = self.focus_nodes(data);
        self.validate_focus(data, &focus)
    }

    /// Checks only the given focus nodes.
    pub fn validate_focus(&self, data: &Graph, focus: &[(Term, String)]) -> Report {
        let mut violations = Vec::new();
        for (node, shape) in focus {
            if let Some(cs) = self.shapes.get(shape) {
                let mut visited = HashSet::new();
                visited.insert((node.clone(), shape.clone()));
                violations.extend(self.check_node(data, node, cs, &mut visited));
            }
        }
        Report::new(violations, focus.len())
    }

    fn check_node(
        &self,
        data: &Graph,
        node: &Term,
        cs: &ConstraintSet,
        visited: &mut HashSet<(Term, String)>,
    ) -> Vec<Violation> {
        let mut out = Vec::new();
        for (kind, branches) in cs.logicals() {
            let satisfied = branches
                .iter()
                .filter(|b| self.branch_satisfied(data, node, b, visited))
                .count();
            let (ok, constraint) = match kind {
                Logical::Xone => (satisfied == 1, ConstraintKind::Xone),
                Logical::Or => (satisfied >= 1, ConstraintKind::Or),
                Logical::And => (satisfied == branches.len(), ConstraintKind::And),
            };
            if !ok {
                out.push(Violation {
                    node: node.clone(),
                    path: None,
                    constraint,
                    detail: format!("{satisfied} of {} branches satisfied", branches.len()),
                });
            }
        }
        for p in &cs.properties {
            out.extend(self.check_property(data, node, p, visited));
        }
        out
    }

    fn branch_satisfied(
        &self,
        data: &Graph,
        node: &Term,
        branch: &ConstraintSet,
        visited: &mut HashSet<(Term, String)>,
    ) -> bool {
        if branch.path.is_some() {
            let present = data.objects(node, branch.path_str()).next().is_some();
            return present && self.check_property(data, node, branch, visited).is_empty();
        }
        if !branch.properties.is_empty() || branch.logicals().next().is_some() {
            let all_present = branch
                .properties
                .iter()
                .all(|p| data.objects(node, p.path_str()).next().is_some());
            return all_present && self.check_node(data, node, branch, visited).is_empty();
        }
        self.check_value(node, branch).is_empty()
    }

    fn check_property(
        &self,
        data: &Graph,
        node: &Term,
        p: &ConstraintSet,
        visited: &mut HashSet<(Term, String)>,
    ) -> Vec<Violation> {
        let path = p.path_str();
        let values: Vec<Term> = data.objects(node, path).cloned().collect();
        let mut found: Found = Vec::new();
        let n = values.len() as u64;
        if let Some(min) = p.min_count.filter(|&m| n < m) {
            found.push((ConstraintKind::MinCount, format!("{n} values, at least {min} required")));
        }
        if let Some(max) = p.max_count.filter(|&m| n > m) {
            found.push((ConstraintKind::MaxCount, format!("{n} values, at most {max} allowed")));
        }

        let value_branches = p.xone.as_ref().map(|b| (ConstraintKind::Xone, b)).or(p.or.as_ref().map(|b| (ConstraintKind::Or, b)));
        for v in &values {
            match value_branches {
                Some((kind, branches)) => {
                    let satisfied = branches
                        .iter()
                        .filter(|b| self.check_value(v, &p.merge_branch(b)).is_empty())
                        .count();
                    let ok = if kind == ConstraintKind::Xone { satisfied == 1 } else { satisfied >= 1 };
                    if !ok {
                        found.push((kind, format!("{v}: {satisfied} of {} branches satisfied", branches.len())));
                    }
                }
                None => found.extend(self.check_value(v, p)),
            }
            if let Some(all) = &p.and {
                let failing = all.iter().filter(|b| !self.check_value(v, &p.merge_branch(b)).is_empty()).count();
                if failing > 0 {
                    found.push((ConstraintKind::And, format!("{v}: {failing} of {} branches failed", all.len())));
                }
            }
        }

        let peer_values = |peer: &str| -> Vec<Term> { data.objects(node, peer).cloned().collect() };
        if let Some(peer) = &p.equals {
            let mine: BTreeSet<&Term> = values.iter().collect();
            let theirs = peer_values(peer);
            if mine != theirs.iter().collect() {
                found.push((ConstraintKind::Equals, format!("{{{}}} vs <{peer}> {{{}}}", show(&values), show(&theirs))));
            }
        }
        if let Some(peer) = &p.disjoint {
            let theirs = peer_values(peer);
            let shared: Vec<Term> = values.iter().filter(|v| theirs.contains(v)).cloned().collect();
            if !shared.is_empty() {
                found.push((ConstraintKind::Disjoint, format!("shared with <{peer}>: {}", show(&shared))));
            }
        }
        for (peer, kind, strict) in [
            (&p.less_than, ConstraintKind::LessThan, true),
            (&p.less_than_or_equals, ConstraintKind::LessThanOrEquals, false),
        ] {
            let Some(peer) = peer else { continue };
            for v in &values {
                for w in peer_values(peer) {
                    let ok = match order(v, &w) {
                        Some(Ordering::Less) => true,
                        Some(Ordering::Equal) => !strict,
                        _ => false,
                    };
                    if !ok {
                        found.push((kind, format!("{v} vs <{peer}> {w}")));
                    }
                }
            }
        }

        let mut out: Vec<Violation> = found
            .into_iter()
            .map(|(constraint, detail)| Violation {
                node: node.clone(),
                path: Some(path.to_owned()),
                constraint,
                detail,
            })
            .collect();

        if let Some(shape) = &p.node_ref {
            for v in &values {
                let detail = if v.is_literal() {
                    Some(format!("literal {v} where a {shape} node is required"))
                } else if !visited.insert((v.clone(), shape.clone())) {
                    None
                } else {
                    let inner = self
                        .shapes
                        .get(shape)
                        .map(|target| self.check_node(data, v, target, visited))
                        .unwrap_or_default();
                    visited.remove(&(v.clone(), shape.clone()));
                    inner.first().map(|first| format!("{v} does not conform to {shape}: {first}"))
                };
                if let Some(detail) = detail {
                    out.push(Violation {
                        node: node.clone(),
                        path: Some(path.to_owned()),
                        constraint: ConstraintKind::Node,
                        detail,
                    });
                }
            }
        }
        if !p.properties.is_empty() {
            for v in values.iter().filter(|v| v.is_node()) {
                out.extend(p.properties.iter().flat_map(|c| self.check_property(data, v, c, visited)));
            }
        }
        out
    }

    /// Value-level checks of one value.
    fn check_value(&self, v: &Term, cs: &ConstraintSet) -> Found {
        let mut found = Vec::new();
        if let Some(dt) = &cs.datatype {
            let ok = v.as_literal().is_some_and(|l| l.datatype() == dt && is_well_formed(l));
            if !ok {
                found.push((ConstraintKind::Datatype, format!("{v} is not a valid <{dt}>")));
            }
        }
        if let Some(allowed) = &cs.in_values {
            if !allowed.contains(v) {
                found.push((ConstraintKind::In, format!("{v} not in ({})", show(allowed))));
            }
        }
        let text = match v {
            Term::Literal(l) => Some(l.lexical()),
            Term::Iri(i) => Some(i.as_str()),
            Term::Blank(_) => None,
        };
        let len = text.map(|t| t.chars().count() as u64);
        if let Some(min) = cs.min_length {
            if len.is_none_or(|l| l < min) {
                found.push((ConstraintKind::MinLength, format!("{v} shorter than {min}")));
            }
        }
        if let Some(max) = cs.max_length {
            if len.is_none_or(|l| l > max) {
                found.push((ConstraintKind::MaxLength, format!("{v} longer than {max}")));
            }
        }
        if let Some(p) = &cs.pattern {
            let flags = cs.flags.clone().unwrap_or_default();
            let re = self
                .patterns
                .get(&(p.clone(), flags.clone()))
                .cloned()
                .unwrap_or_else(|| full_match_regex(p, &flags));
            let ok = match (&re, text) {
                (Some(re), Some(t)) => re.is_match(t),
                _ => false,
            };
            if !ok {
                found.push((ConstraintKind::Pattern, format!("{v} does not match /{p}/")));
            }
        }
        let value = v.as_literal().and_then(ordered);
        let bounds: [(&Option<Literal>, ConstraintKind, &[Ordering]); 4] = [
            (&cs.min_inclusive, ConstraintKind::MinInclusive, &[Ordering::Greater, Ordering::Equal]),
            (&cs.max_inclusive, ConstraintKind::MaxInclusive, &[Ordering::Less, Ordering::Equal]),
            (&cs.min_exclusive, ConstraintKind::MinExclusive, &[Ordering::Greater]),
            (&cs.max_exclusive, ConstraintKind::MaxExclusive, &[Ordering::Less]),
        ];
        for (bound, kind, accept) in bounds {
            let Some(bound) = bound else { continue };
            let cmp = value.zip(ordered(bound)).and_then(|(a, b)| a.compare(&b));
            if !cmp.is_some_and(|o| accept.contains(&o)) {
                found.push((kind, format!("{v} against {}", Term::Literal(bound.clone()))));
            }
        }
        found
    }
}

/// Validates `data` against every shape in `root`.
pub fn validate(data: &Graph, root: &RootShapeMap) -> Result<Report, ConstraintError> {
    Ok(Validator::new(root)?.validate(data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use crate::shapes::extract_shape_maps;

    const PERSON_IN: &str = include_str!("../fixtures/input-shape-person.ttl");
    const PERSON_OUT: &str = include_str!("../fixtures/output-graph-person.ttl");

    fn shapes(src: &str) -> RootShapeMap {
        extract_shape_maps(&parse_turtle(src).unwrap()).unwrap()
    }

    #[test]
    fn published_person_output_conforms() {
        let report = validate(&parse_turtle(PERSON_OUT).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert!(report.conforms, "{}", report.to_text());
        assert_eq!(report.focus_nodes, 4);
    }

    #[test]
    fn empty_graph_conforms() {
        let report = validate(&Graph::new(), &shapes(PERSON_IN)).unwrap();
        assert!(report.conforms);
        assert_eq!(report.focus_nodes, 0);
    }

    #[test]
    fn gender_mutation_yields_one_in_violation() {
        let mutated = PERSON_OUT.replacen("schema:gender \"male\"", "schema:gender \"other\"", 1);
        let report = validate(&parse_turtle(&mutated).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert_eq!(report.violations.len(), 1, "{}", report.to_text());
        let v = &report.violations[0];
        assert_eq!(v.constraint, ConstraintKind::In);
        assert_eq!(v.path.as_deref(), Some("http://schema.org/gender"));
        assert_eq!(v.node, Term::iri("http://example.org/ns#Node100"));
        let tsv = report.to_tsv();
        assert_eq!(tsv.lines().count(), 1);
        assert!(tsv.starts_with("<http://example.org/ns#Node100>\thttp://schema.org/gender\tin\t"));
    }

    #[test]
    fn xone_both_branches_is_a_violation() {
        let mutated = PERSON_OUT.replacen(
            "schema:givenName \"Ulysses\" ;",
            "schema:givenName \"Ulysses\" ;\n    schema:name \"Ulysses Pate\" ;",
            1,
        );
        let report = validate(&parse_turtle(&mutated).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert_eq!(report.kinds(), [ConstraintKind::Xone].into());
    }

    #[test]
    fn postal_code_or_branches() {
        let out_of_range = PERSON_OUT.replacen("schema:postalCode 17481", "schema:postalCode 123", 1);
        let report = validate(&parse_turtle(&out_of_range).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert_eq!(report.kinds(), [ConstraintKind::Or, ConstraintKind::Node].into(), "{}", report.to_text());
    }

    #[test]
    fn address_checked_through_node_reference() {
        let bad = PERSON_OUT.replacen("schema:streetAddress \"no. 3 Lily st\"", "schema:streetAddress 3", 1);
        let report = validate(&parse_turtle(&bad).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert_eq!(report.kinds(), [ConstraintKind::Datatype, ConstraintKind::Node].into(), "{}", report.to_text());
    }

    #[test]
    fn mixed_type_less_than_is_a_violation() {
        let bad = PERSON_OUT.replacen("\"1981-07-07\"^^xsd:date", "1981", 1);
        let report = validate(&parse_turtle(&bad).unwrap(), &shapes(PERSON_IN)).unwrap();
        assert_eq!(report.kinds(), [ConstraintKind::LessThan].into(), "{}", report.to_text());
    }
}
