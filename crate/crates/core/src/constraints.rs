//! Typed view of shape maps: constraint sets, effective cardinalities and
//! property-pair dependency planning.

use std::collections::BTreeMap;

use log::warn;

use crate::error::ConstraintError;
use crate::literal::{datatype_kind, ordered, OrderKind};
use crate::rdf::{local_name, Literal, Term};
use crate::shapes::{EntryValue, ShapeMap};
use crate::vocab::{rdf, sh, xsd};

/// Normalized constraints of one shape (node shape, property shape or
/// logical branch).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConstraintSet {
    pub path: Option<String>,
    pub datatype: Option<String>,
    pub min_count: Option<u64>,
    pub max_count: Option<u64>,
    pub min_inclusive: Option<Literal>,
    pub max_inclusive: Option<Literal>,
    pub min_exclusive: Option<Literal>,
    pub max_exclusive: Option<Literal>,
    pub min_length: Option<u64>,
    pub max_length: Option<u64>,
    pub pattern: Option<String>,
    pub flags: Option<String>,
    pub in_values: Option<Vec<Term>>,
    pub node_ref: Option<String>,
    pub equals: Option<String>,
    pub less_than: Option<String>,
    pub less_than_or_equals: Option<String>,
    pub disjoint: Option<String>,
    pub xone: Option<Vec<ConstraintSet>>,
    pub or: Option<Vec<ConstraintSet>>,
    pub and: Option<Vec<ConstraintSet>>,
    pub name: Option<String>,
    pub description: Option<String>,
    pub target_class: Option<String>,
    pub closed: Option<bool>,
    /// Nested property shapes, in declaration order.
    pub properties: Vec<ConstraintSet>,
    /// Present only as the target of another property's pair constraint.
    pub synthesized: bool,
    /// Entries this model does not interpret.
    pub extras: BTreeMap<String, Vec<Term>>,
}

/// Logical constraint component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Logical {
    Xone,
    Or,
    And,
}

impl Logical {
    pub fn name(self) -> &'static str {
        match self {
            Logical::Xone => "xone",
            Logical::Or => "or",
            Logical::And => "and",
        }
    }
}

/// Property pair relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PairRelation {
    Equals,
    LessThan,
    LessThanOrEquals,
    Disjoint,
}

impl PairRelation {
    pub fn name(self) -> &'static str {
        match self {
            PairRelation::Equals => "equals",
            PairRelation::LessThan => "lessThan",
            PairRelation::LessThanOrEquals => "lessThanOrEquals",
            PairRelation::Disjoint => "disjoint",
        }
    }
}

impl ConstraintSet {
    pub fn path_str(&self) -> &str {
        self.path.as_deref().unwrap_or("")
    }

    pub fn local_name(&self) -> &str {
        self.path.as_deref().map(local_name).unwrap_or("")
    }

    /// Logical components present, in a fixed order.
    pub fn logicals(&self) -> impl Iterator<Item = (Logical, &[ConstraintSet])> {
        [
            (Logical::Xone, self.xone.as_deref()),
            (Logical::Or, self.or.as_deref()),
            (Logical::And, self.and.as_deref()),
        ]
        .into_iter()
        .filter_map(|(kind, branches)| branches.map(|b| (kind, b)))
    }

    /// Pair constraints declared on this property.
    pub fn pairs(&self) -> impl Iterator<Item = (PairRelation, &str)> {
        [
            (PairRelation::Equals, self.equals.as_deref()),
            (PairRelation::LessThan, self.less_than.as_deref()),
            (PairRelation::LessThanOrEquals, self.less_than_or_equals.as_deref()),
            (PairRelation::Disjoint, self.disjoint.as_deref()),
        ]
        .into_iter()
        .filter_map(|(rel, target)| target.map(|t| (rel, t)))
    }

    pub fn has_range(&self) -> bool {
        self.range_bounds().next().is_some()
    }

    pub fn range_bounds(&self) -> impl Iterator<Item = &Literal> {
        [&self.min_inclusive, &self.max_inclusive, &self.min_exclusive, &self.max_exclusive]
            .into_iter()
            .flatten()
    }

    /// A branch is a property branch (`sh:path`), a group of properties, or
    /// a value-level constraint branch.
    pub fn is_property_branch(&self) -> bool {
        self.path.is_some()
    }

    pub fn is_group_branch(&self) -> bool {
        self.path.is_none() && !self.properties.is_empty()
    }

    /// Applies a value-level logical branch on top of these constraints.
    ///
    /// Fields the branch declares replace the enclosing ones. Enclosing range
    /// bounds are dropped when the resulting datatype cannot be ordered like
    /// them (a string branch under numeric bounds).
    pub fn merge_branch(&self, branch: &ConstraintSet) -> ConstraintSet {
        let mut merged = self.clone();
        merged.xone = None;
        merged.or = None;
        merged.and = None;
        macro_rules! overlay {
            ($($field:ident),*) => {$(
                if branch.$field.is_some() {
                    merged.$field = branch.$field.clone();
                }
            )*};
        }
        overlay!(
            datatype, min_inclusive, max_inclusive, min_exclusive, max_exclusive, min_length,
            max_length, pattern, flags, in_values, node_ref
        );
        if let Some(dt) = &merged.datatype {
            let kind = datatype_kind(dt);
            let keep = |own: &Option<Literal>, bound: &Option<Literal>| -> Option<Literal> {
                if own.is_some() {
                    return own.clone();
                }
                bound
                    .as_ref()
                    .filter(|b| ordered(b).map(|o| o.kind()) == kind && kind.is_some())
                    .cloned()
            };
            merged.min_inclusive = keep(&branch.min_inclusive, &merged.min_inclusive);
            merged.max_inclusive = keep(&branch.max_inclusive, &merged.max_inclusive);
            merged.min_exclusive = keep(&branch.min_exclusive, &merged.min_exclusive);
            merged.max_exclusive = keep(&branch.max_exclusive, &merged.max_exclusive);
        }
        merged
    }
}

fn mismatch(path: &str, constraint: &str, value: &EntryValue) -> ConstraintError {
    ConstraintError::TypeMismatch {
        path: path.to_owned(),
        constraint: local_name(constraint).to_owned(),
        value: match value {
            EntryValue::Term(t) => t.to_string(),
            EntryValue::List(_) => "a list".to_owned(),
            EntryValue::Shape(_) => "a shape".to_owned(),
        },
    }
}

/// Converts a shape map into a typed constraint set.
pub fn normalize(sm: &ShapeMap) -> Result<ConstraintSet, ConstraintError> {
    let mut cs = ConstraintSet {
        path: sm.path().map(str::to_owned),
        synthesized: sm.synthesized,
        ..Default::default()
    };
    let label = sm.path().map(str::to_owned).unwrap_or_else(|| sm.shape_id.to_string());

    for (key, values) in &sm.entries {
        let Some(value) = values.first() else { continue };
        let err = || mismatch(&label, key, value);
        let iri = || value.as_term().and_then(Term::as_iri).map(str::to_owned).ok_or_else(err);
        let count = || {
            value
                .as_term()
                .and_then(Term::as_literal)
                .and_then(|l| l.lexical().trim().parse::<u64>().ok())
                .ok_or_else(err)
        };
        let bound = || {
            value
                .as_term()
                .and_then(Term::as_literal)
                .filter(|l| ordered(l).is_some())
                .cloned()
                .ok_or_else(err)
        };
        let text = || value.as_term().and_then(Term::as_literal).map(|l| l.lexical().to_owned()).ok_or_else(err);
        let terms = || -> Result<Vec<Term>, ConstraintError> {
            value
                .as_list()
                .ok_or_else(err)?
                .iter()
                .map(|v| v.as_term().cloned().ok_or_else(err))
                .collect()
        };
        let branches = || -> Result<Vec<ConstraintSet>, ConstraintError> {
            value
                .as_list()
                .ok_or_else(err)?
                .iter()
                .map(|v| match v {
                    EntryValue::Shape(inner) => normalize(inner),
                    other => Err(mismatch(&label, key, other)),
                })
                .collect()
        };

        match key.as_str() {
            sh::PATH | rdf::TYPE => {}
            sh::DATATYPE => cs.datatype = Some(iri()?),
            sh::MIN_COUNT => cs.min_count = Some(count()?),
            sh::MAX_COUNT => cs.max_count = Some(count()?),
            sh::MIN_LENGTH => cs.min_length = Some(count()?),
            sh::MAX_LENGTH => cs.max_length = Some(count()?),
            sh::MIN_INCLUSIVE => cs.min_inclusive = Some(bound()?),
            sh::MAX_INCLUSIVE => cs.max_inclusive = Some(bound()?),
            sh::MIN_EXCLUSIVE => cs.min_exclusive = Some(bound()?),
            sh::MAX_EXCLUSIVE => cs.max_exclusive = Some(bound()?),
            sh::PATTERN => cs.pattern = Some(text()?),
            sh::FLAGS => cs.flags = Some(text()?),
            sh::IN => cs.in_values = Some(terms()?),
            sh::NODE => cs.node_ref = Some(iri()?),
            sh::EQUALS => cs.equals = Some(iri()?),
            sh::LESS_THAN => cs.less_than = Some(iri()?),
            sh::LESS_THAN_OR_EQUALS => cs.less_than_or_equals = Some(iri()?),
            sh::DISJOINT => cs.disjoint = Some(iri()?),
            sh::XONE => cs.xone = Some(branches()?),
            sh::OR => cs.or = Some(branches()?),
            sh::AND => cs.and = Some(branches()?),
            sh::NAME => cs.name = Some(text()?),
            sh::DESCRIPTION => cs.description = Some(text()?),
            sh::TARGET_CLASS => cs.target_class = Some(iri()?),
            sh::CLOSED => {
                cs.closed = Some(match text()?.as_str() {
                    "true" | "1" => true,
                    "false" | "0" => false,
                    _ => return Err(err()),
                })
            }
            other => {
                if other.starts_with(sh::NS) && other != sh::IGNORED_PROPERTIES {
                    warn!("{label}: ignoring unsupported constraint {other}");
                }
                let terms: Vec<Term> = values.iter().filter_map(|v| v.as_term().cloned()).collect();
                cs.extras.insert(other.to_owned(), terms);
            }
        }
    }

    if let (Some(min), Some(max)) = (cs.min_count, cs.max_count) {
        if min > max {
            return Err(ConstraintError::ContradictoryCardinality { path: label, min, max });
        }
    }
    if let (Some(min), Some(max)) = (cs.min_length, cs.max_length) {
        if min > max {
            return Err(ConstraintError::TypeMismatch {
                path: label,
                constraint: "minLength".into(),
                value: format!("{min} > maxLength {max}"),
            });
        }
    }
    let kinds: Vec<OrderKind> = cs.range_bounds().filter_map(|b| ordered(b).map(|o| o.kind())).collect();
    if kinds.windows(2).any(|w| w[0] != w[1]) {
        return Err(ConstraintError::TypeMismatch {
            path: label,
            constraint: "range".into(),
            value: "bounds mix numbers and dates".into(),
        });
    }

    cs.properties = sm.properties.values().map(normalize).collect::<Result<_, _>>()?;
    Ok(cs)
}

/// Number of values to generate for a property.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EffectiveCount {
    pub low: u64,
    pub high: u64,
    pub optional_if_pair_target: bool,
}

/// Cardinality policy: no counts means exactly one value, `maxCount` alone
/// means one up to the maximum, `minCount` alone means exactly the minimum.
/// Properties that exist only as pair-constraint targets get zero or one.
pub fn effective_count(cs: &ConstraintSet, synthesized_only: bool) -> Result<EffectiveCount, ConstraintError> {
    if synthesized_only {
        return Ok(EffectiveCount {
            low: 0,
            high: 1,
            optional_if_pair_target: true,
        });
    }
    if let (Some(min), Some(max)) = (cs.min_count, cs.max_count) {
        if min > max {
            return Err(ConstraintError::ContradictoryCardinality {
                path: cs.path_str().to_owned(),
                min,
                max,
            });
        }
    }
    let low = match (cs.min_count, cs.max_count) {
        (Some(min), _) => min,
        (None, Some(max)) => max.min(1),
        (None, None) => 1,
    };
    let high = cs.max_count.unwrap_or(low.max(1));
    Ok(EffectiveCount {
        low,
        high,
        optional_if_pair_target: false,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEdge {
    pub source: String,
    pub relation: PairRelation,
    pub target: String,
}

/// Generation order for the properties of one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairPlan {
    pub order: Vec<String>,
    pub edges: Vec<PairEdge>,
}

/// Orders properties so that every `equals`/`lessThan`/`lessThanOrEquals`
/// target is generated before its source. Ties keep declaration order.
pub fn plan_pairs(properties: &[&ConstraintSet]) -> Result<PairPlan, ConstraintError> {
    let paths: Vec<&str> = properties.iter().filter_map(|p| p.path.as_deref()).collect();
    let mut edges = Vec::new();
    let mut deps: Vec<Vec<usize>> = vec![Vec::new(); paths.len()];
    for (i, cs) in properties.iter().filter(|p| p.path.is_some()).enumerate() {
        for (relation, target) in cs.pairs() {
            edges.push(PairEdge {
                source: paths[i].to_owned(),
                relation,
                target: target.to_owned(),
            });
            if relation == PairRelation::Disjoint || target == paths[i] {
                continue;
            }
            if let Some(j) = paths.iter().position(|p| *p == target) {
                deps[i].push(j);
            }
        }
    }
    let mut placed = vec![false; paths.len()];
    let mut order = Vec::with_capacity(paths.len());
    while order.len() < paths.len() {
        let next = (0..paths.len()).find(|&i| !placed[i] && deps[i].iter().all(|&d| placed[d]));
        match next {
            Some(i) => {
                placed[i] = true;
                order.push(paths[i].to_owned());
            }
            None => {
                let predicates = (0..paths.len())
                    .filter(|&i| !placed[i])
                    .map(|i| paths[i].to_owned())
                    .collect();
                return Err(ConstraintError::PairCycle { predicates });
            }
        }
    }
    Ok(PairPlan { order, edges })
}

/// Datatype to generate for a property: the declared one, else `xsd:date`
/// for date-like names, else the datatype of the range bounds, else the
/// peer's inferred datatype.
pub fn infer_datatype(cs: &ConstraintSet, peer: Option<&ConstraintSet>) -> Option<String> {
    if let Some(dt) = &cs.datatype {
        return Some(dt.clone());
    }
    if cs.local_name().to_ascii_lowercase().contains("date") {
        return Some(xsd::DATE.to_owned());
    }
    if let Some(bound) = cs.range_bounds().next() {
        return Some(bound.datatype().to_owned());
    }
    peer.and_then(|p| infer_datatype(p, None))
}
