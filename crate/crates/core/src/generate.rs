//! Entity generation: turns node shapes into an RDF graph.
//!
//! Every root entity is generated into its own fragment with local node
//! numbers and an RNG seeded from `(seed, shape, entity)`. Fragments are then
//! numbered by prefix sum, so sequential and parallel runs produce the same
//! graph.

use std::collections::HashMap;

use chrono::NaiveDate;
use indexmap::IndexMap;
use rand::Rng;

use crate::constraints::{effective_count, normalize, plan_pairs, ConstraintSet, Logical, PairRelation};
use crate::error::{GenerateError, PipelineError, SynthError};
use crate::rdf::{parse_turtle, Graph, Term};
use crate::shapes::{extract_shape_maps, find_root_shapes, RootShapeMap};
use crate::synth::{
    generate_object, relation_holds, resolve_pair_value, Dictionaries, PatternCache, PersonaState, ValueContext,
    RETRY_BUDGET,
};
use crate::vocab::rdf;

pub const DEFAULT_BASE_IRI: &str = "http://example.org/ns#";
pub const DEFAULT_START_INDEX: u64 = 100;
/// Deepest `sh:node` chain followed before giving up.
pub const MAX_DEPTH: usize = 32;
/// Fresh attempts per root entity when a value turns out unsatisfiable.
pub const ENTITY_ATTEMPTS: u64 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Rayon across root entities; sequential when built without the
    /// `parallel` feature.
    #[default]
    Parallel,
}

/// Generation settings.
#[derive(Debug, Clone)]
pub struct GenContext {
    pub seed: u64,
    pub entity_count: usize,
    pub base_iri: String,
    pub start_index: u64,
    /// Upper end of default date ranges.
    pub today: NaiveDate,
    pub dictionaries: Dictionaries,
    pub execution: Execution,
}

impl GenContext {
    pub fn new(seed: u64, entity_count: usize) -> Self {
        Self {
            seed,
            entity_count,
            base_iri: DEFAULT_BASE_IRI.to_owned(),
            start_index: DEFAULT_START_INDEX,
            today: chrono::Local::now().date_naive(),
            dictionaries: Dictionaries::builtin(),
            execution: Execution::default(),
        }
    }
}

/// A generated node and the shape it was generated for.
#[derive(Debug, Clone, PartialEq)]
pub struct EntityRecord {
    pub node: Term,
    pub shape: String,
    pub persona: PersonaState,
}

#[derive(Debug, Clone)]
pub struct GeneratedGraph {
    pub graph: Graph,
    pub entities: Vec<EntityRecord>,
    /// Root shapes, in generation order.
    pub roots: Vec<String>,
}

/// Normalized shapes ready for generation.
pub struct Generator {
    shapes: IndexMap<String, ConstraintSet>,
    roots: Vec<String>,
    patterns: PatternCache,
    description: String,
    prefixes: Vec<(String, String)>,
    ctx: GenContext,
}

#[derive(Debug, Clone)]
enum Object {
    Node(u64),
    Term(Term),
}

#[derive(Debug, Default)]
struct Fragment {
    nodes: u64,
    triples: Vec<(u64, String, Object)>,
    records: Vec<(u64, String, PersonaState)>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn sub_seed(seed: u64, shape: usize, entity: usize, attempt: u64) -> u64 {
    let mut h = splitmix(seed);
    for part in [shape as u64, entity as u64, attempt] {
        h = splitmix(h ^ part);
    }
    h
}

fn is_unsatisfiable(e: &GenerateError) -> bool {
    match e {
        GenerateError::Synth(SynthError::Unsatisfiable(_)) => true,
        GenerateError::Property { source, .. } | GenerateError::Shape { source, .. } => is_unsatisfiable(source),
        _ => false,
    }
}

fn check_logicals(cs: &ConstraintSet, shape: &str, shapes: &IndexMap<String, ConstraintSet>) -> Result<(), GenerateError> {
    for (kind, branches) in cs.logicals() {
        if branches.is_empty() {
            return Err(GenerateError::EmptyLogicalList(format!("{} of {shape}", kind.name())));
        }
        for b in branches {
            check_logicals(b, shape, shapes)?;
        }
    }
    if let Some(r) = &cs.node_ref {
        if !shapes.contains_key(r) {
            return Err(GenerateError::MissingShape(r.clone()));
        }
    }
    for p in &cs.properties {
        check_logicals(p, shape, shapes)?;
    }
    let own: Vec<&ConstraintSet> = cs.properties.iter().collect();
    plan_pairs(&own)?;
    Ok(())
}

impl Generator {
    pub fn new(root: &RootShapeMap, ctx: GenContext) -> Result<Self, GenerateError> {
        if ctx.entity_count == 0 {
            return Err(GenerateError::InvalidEntityCount);
        }
        if root.shapes.is_empty() {
            return Err(GenerateError::NoShapes);
        }
        let mut shapes = IndexMap::new();
        for (key, sm) in &root.shapes {
            shapes.insert(key.clone(), normalize(sm).map_err(|e| GenerateError::from(e).in_shape(key))?);
        }
        for (key, cs) in &shapes {
            check_logicals(cs, key, &shapes).map_err(|e| e.in_shape(key))?;
        }
        let mut roots = find_root_shapes(root).roots;
        let mut covered: std::collections::BTreeSet<String> =
            roots.iter().flat_map(|r| root.reachable_from(r)).collect();
        for key in root.shapes.keys() {
            if !covered.contains(key) {
                log::warn!("shape {key} is unreachable from any root; generating it as a root");
                covered.extend(root.reachable_from(key));
                roots.push(key.clone());
            }
        }
        let patterns = PatternCache::collect(shapes.values());
        Ok(Self {
            shapes,
            roots,
            patterns,
            description: root.description_predicate(),
            prefixes: root.prefixes.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            ctx,
        })
    }

    pub fn roots(&self) -> &[String] {
        &self.roots
    }

    pub fn shapes(&self) -> &IndexMap<String, ConstraintSet> {
        &self.shapes
    }

    pub fn generate(&self) -> Result<GeneratedGraph, GenerateError> {
        let jobs: Vec<(usize, usize)> = (0..self.roots.len())
            .flat_map(|s| (0..self.ctx.entity_count).map(move |e| (s, e)))
            .collect();
        let fragments = self.run_jobs(&jobs);
        let mut graph = Graph::new();
        for (prefix, ns) in &self.prefixes {
            graph.set_prefix(prefix.clone(), ns.clone());
        }
        let mut entities = Vec::new();
        let mut next = self.ctx.start_index;
        for fragment in fragments {
            let fragment = fragment?;
            let iri = |local: u64| Term::iri(format!("{}Node{}", self.ctx.base_iri, next + local));
            for (subject, predicate, object) in fragment.triples {
                let object = match object {
                    Object::Node(n) => iri(n),
                    Object::Term(t) => t,
                };
                graph.add(iri(subject), &predicate, object);
            }
            for (node, shape, persona) in fragment.records {
                entities.push(EntityRecord {
                    node: iri(node),
                    shape,
                    persona,
                });
            }
            next += fragment.nodes;
        }
        Ok(GeneratedGraph {
            graph,
            entities,
            roots: self.roots.clone(),
        })
    }

    #[cfg(feature = "parallel")]
    fn run_jobs(&self, jobs: &[(usize, usize)]) -> Vec<Result<Fragment, GenerateError>> {
        use rayon::prelude::*;
        match self.ctx.execution {
            Execution::Parallel => jobs.par_iter().map(|&(s, e)| self.root_fragment(s, e)).collect(),
            Execution::Sequential => jobs.iter().map(|&(s, e)| self.root_fragment(s, e)).collect(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn run_jobs(&self, jobs: &[(usize, usize)]) -> Vec<Result<Fragment, GenerateError>> {
        jobs.iter().map(|&(s, e)| self.root_fragment(s, e)).collect()
    }

    fn root_fragment(&self, shape_index: usize, entity: usize) -> Result<Fragment, GenerateError> {
        let shape = &self.roots[shape_index];
        let mut last = None;
        for attempt in 0..ENTITY_ATTEMPTS {
            let seed = sub_seed(self.ctx.seed, shape_index, entity, attempt);
            let mut builder = Builder {
                gen: self,
                values: ValueContext::new(seed, &self.ctx.dictionaries, &self.patterns, self.ctx.today),
                frag: Fragment::default(),
            };
            match builder.entity(shape, 0) {
                Ok(_) => return Ok(builder.frag),
                Err(e) if is_unsatisfiable(&e) => last = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(last.expect("at least one attempt"))
    }
}

struct Builder<'g> {
    gen: &'g Generator,
    values: ValueContext<'g>,
    frag: Fragment,
}

impl<'g> Builder<'g> {
    fn alloc(&mut self) -> u64 {
        self.frag.nodes += 1;
        self.frag.nodes - 1
    }

    fn emit(&mut self, subject: u64, predicate: &str, object: Object) {
        self.frag.triples.push((subject, predicate.to_owned(), object));
    }

    fn entity(&mut self, shape: &str, depth: usize) -> Result<u64, GenerateError> {
        if depth > MAX_DEPTH {
            return Err(GenerateError::RecursionLimit(MAX_DEPTH));
        }
        let gen = self.gen;
        let cs = gen.shapes.get(shape).ok_or_else(|| GenerateError::MissingShape(shape.to_owned()))?;
        let id = self.alloc();
        let class = cs.target_class.as_deref();
        if let Some(c) = class {
            self.emit(id, rdf::TYPE, Object::Term(Term::iri(c)));
        }
        if !shape.starts_with("_:") {
            self.emit(id, &gen.description, Object::Term(Term::iri(shape)));
        }
        let mut persona = PersonaState::default();
        self.fill(id, cs, shape, class, &mut persona, depth)
            .map_err(|e| e.in_shape(shape))?;
        self.frag.records.push((id, shape.to_owned(), persona));
        Ok(id)
    }

    /// Branch properties picked by node-level `xone`/`or` (one branch) and
    /// `and` (every branch).
    fn choose_branches(&mut self, cs: &'g ConstraintSet, out: &mut Vec<&'g ConstraintSet>) -> Result<(), GenerateError> {
        for (kind, branches) in cs.logicals() {
            if branches.is_empty() {
                return Err(GenerateError::EmptyLogicalList(cs.path_str().to_owned()));
            }
            let chosen: Vec<&'g ConstraintSet> = match kind {
                Logical::Xone | Logical::Or => vec![&branches[self.values.rng.gen_range(0..branches.len())]],
                Logical::And => branches.iter().collect(),
            };
            for b in chosen {
                if b.is_property_branch() {
                    out.push(b);
                } else {
                    self.choose_branches(b, out)?;
                    out.extend(b.properties.iter());
                }
            }
        }
        Ok(())
    }

    fn fill(
        &mut self,
        id: u64,
        cs: &'g ConstraintSet,
        shape: &str,
        class: Option<&str>,
        persona: &mut PersonaState,
        depth: usize,
    ) -> Result<(), GenerateError> {
        let mut props: Vec<&'g ConstraintSet> = Vec::new();
        self.choose_branches(cs, &mut props)?;
        for p in &cs.properties {
            if !props.iter().any(|q| q.path == p.path) {
                props.push(p);
            }
        }
        let plan = plan_pairs(&props)?;
        let mut produced: HashMap<&'g str, Vec<Term>> = HashMap::new();
        for path in &plan.order {
            let p = *props.iter().find(|q| q.path_str() == path).expect("planned path");
            self.property(id, p, &props, class, persona, depth, &mut produced)
                .map_err(|e| e.in_property(shape, path))?;
        }
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn property(
        &mut self,
        id: u64,
        p: &'g ConstraintSet,
        siblings: &[&'g ConstraintSet],
        class: Option<&str>,
        persona: &mut PersonaState,
        depth: usize,
        produced: &mut HashMap<&'g str, Vec<Term>>,
    ) -> Result<(), GenerateError> {
        let path = p.path_str();
        if let Some(peer) = p.equals.as_deref() {
            if let Some(values) = produced.get(peer).cloned() {
                for v in &values {
                    self.emit(id, path, Object::Term(v.clone()));
                }
                produced.insert(path, values);
                return Ok(());
            }
        }
        let count = effective_count(p, p.synthesized)?;
        let n = self.values.rng.gen_range(count.low..=count.high);

        if p.node_ref.is_some() || !p.properties.is_empty() {
            for _ in 0..n {
                let child = match &p.node_ref {
                    Some(r) => self.entity(r, depth + 1)?,
                    None => self.alloc(),
                };
                if !p.properties.is_empty() {
                    if depth + 1 > MAX_DEPTH {
                        return Err(GenerateError::RecursionLimit(MAX_DEPTH));
                    }
                    let mut inner = PersonaState::default();
                    self.fill(child, p, path, None, &mut inner, depth + 1)?;
                }
                self.emit(id, path, Object::Node(child));
            }
            produced.insert(path, Vec::new());
            return Ok(());
        }

        let mut relations: Vec<(PairRelation, Vec<Term>)> = p
            .pairs()
            .filter(|(rel, _)| *rel != PairRelation::Equals)
            .filter_map(|(rel, peer)| Some((rel, produced.get(peer)?.clone())))
            .collect();
        for q in siblings {
            if q.disjoint.as_deref() == Some(path) {
                if let Some(values) = produced.get(q.path_str()) {
                    relations.push((PairRelation::Disjoint, values.clone()));
                }
            }
        }
        relations.sort_by_key(|(rel, _)| *rel == PairRelation::Disjoint);

        let mut values: Vec<Term> = Vec::with_capacity(n as usize);
        let mut duplicates = 0;
        while (values.len() as u64) < n {
            let v = self.one_value(p, class, persona, &relations)?;
            if values.contains(&v) {
                duplicates += 1;
                if duplicates >= RETRY_BUDGET {
                    if values.len() as u64 >= count.low {
                        break;
                    }
                    return Err(SynthError::Unsatisfiable(format!(
                        "{path}: fewer than {} distinct values",
                        count.low
                    ))
                    .into());
                }
                continue;
            }
            values.push(v);
        }
        for v in &values {
            self.emit(id, path, Object::Term(v.clone()));
        }
        produced.insert(path, values);
        Ok(())
    }

    /// Constraints for one value, with a value-level `xone`/`or` branch
    /// picked and `and` branches merged in.
    fn value_constraints(&mut self, p: &ConstraintSet) -> ConstraintSet {
        let mut cs = p.clone();
        if let Some(branches) = p.xone.as_ref().or(p.or.as_ref()).filter(|b| !b.is_empty()) {
            let b = &branches[self.values.rng.gen_range(0..branches.len())];
            cs = cs.merge_branch(b);
        }
        if let Some(all) = &p.and {
            for b in all {
                cs = cs.merge_branch(b);
            }
        }
        cs.xone = None;
        cs.or = None;
        cs.and = None;
        cs
    }

    fn one_value(
        &mut self,
        p: &ConstraintSet,
        class: Option<&str>,
        persona: &mut PersonaState,
        relations: &[(PairRelation, Vec<Term>)],
    ) -> Result<Term, GenerateError> {
        let cs = self.value_constraints(p);
        let Some((primary, peers)) = relations.first() else {
            return Ok(generate_object(&cs, class, persona, &mut self.values)?);
        };
        for _ in 0..RETRY_BUDGET {
            let v = resolve_pair_value(&cs, class, persona, *primary, peers, &mut self.values)?;
            if relations.iter().all(|(rel, peers)| peers.iter().all(|peer| relation_holds(*rel, &v, peer))) {
                return Ok(v);
            }
        }
        Err(SynthError::Unsatisfiable(format!("{}: pair constraints conflict", p.path_str())).into())
    }
}

/// Generates `ctx.entity_count` entities per root shape.
pub fn generate_graph(root: &RootShapeMap, ctx: GenContext) -> Result<GeneratedGraph, GenerateError> {
    Generator::new(root, ctx)?.generate()
}

/// Parses a shapes graph in Turtle and generates a data graph from it.
pub fn run_pipeline(shapes_turtle: &str, ctx: GenContext) -> Result<GeneratedGraph, PipelineError> {
    let graph = parse_turtle(shapes_turtle)?;
    let root = extract_shape_maps(&graph)?;
    Ok(generate_graph(&root, ctx)?)
}
