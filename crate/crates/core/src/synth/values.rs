//! Constraint-driven literal generation.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use chrono::{Duration, NaiveDate, NaiveTime};
use rand::distributions::Alphanumeric;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regex::{Regex, RegexBuilder};

use super::dictionary::Dictionaries;
use super::heuristics::{accepts_strings, heuristic_value, PersonaState};
use super::regex::RegexProgram;
use crate::constraints::{infer_datatype, ConstraintSet, PairRelation};
use crate::error::SynthError;
use crate::literal::{is_well_formed, ordered, Ordered};
use crate::rdf::{Literal, Term};
use crate::vocab::xsd;

/// Bound on reject-sampling loops.
pub const RETRY_BUDGET: usize = 100;
const DEFAULT_SPAN: i64 = 100;
const DATE_SPAN_DAYS: i64 = 36_525;

/// A pattern compiled for synthesis and for matching.
#[derive(Debug)]
pub struct CompiledPattern {
    pub program: Result<RegexProgram, SynthError>,
    pub matcher: Option<Regex>,
}

impl CompiledPattern {
    pub fn new(pattern: &str, flags: Option<&str>) -> Self {
        Self {
            program: RegexProgram::compile(pattern),
            matcher: compile_matcher(pattern, flags),
        }
    }
}

/// Full-match `sh:pattern` matcher honouring `sh:flags` (`i`, `m`, `s`, `x`).
pub fn compile_matcher(pattern: &str, flags: Option<&str>) -> Option<Regex> {
    let flags = flags.unwrap_or("");
    RegexBuilder::new(&format!("^(?:{pattern})$"))
        .case_insensitive(flags.contains('i'))
        .multi_line(flags.contains('m'))
        .dot_matches_new_line(flags.contains('s'))
        .ignore_whitespace(flags.contains('x'))
        .build()
        .ok()
}

/// Patterns compiled once and shared read-only between workers.
#[derive(Debug, Default)]
pub struct PatternCache {
    entries: HashMap<(String, String), Arc<CompiledPattern>>,
}

impl PatternCache {
    /// Compiles every pattern reachable from `sets`.
    pub fn collect<'a>(sets: impl IntoIterator<Item = &'a ConstraintSet>) -> Self {
        let mut cache = Self::default();
        for cs in sets {
            cache.add_recursive(cs);
        }
        cache
    }

    fn add_recursive(&mut self, cs: &ConstraintSet) {
        if let Some(p) = &cs.pattern {
            self.insert(p, cs.flags.as_deref());
        }
        for child in &cs.properties {
            self.add_recursive(child);
        }
        for (_, branches) in cs.logicals() {
            for b in branches {
                self.add_recursive(b);
            }
        }
    }

    pub fn insert(&mut self, pattern: &str, flags: Option<&str>) {
        let key = (pattern.to_owned(), flags.unwrap_or("").to_owned());
        self.entries
            .entry(key)
            .or_insert_with(|| Arc::new(CompiledPattern::new(pattern, flags)));
    }

    /// The compiled pattern, compiling on the spot when it was not collected.
    pub fn get(&self, pattern: &str, flags: Option<&str>) -> Arc<CompiledPattern> {
        let key = (pattern.to_owned(), flags.unwrap_or("").to_owned());
        match self.entries.get(&key) {
            Some(c) => c.clone(),
            None => Arc::new(CompiledPattern::new(pattern, flags)),
        }
    }
}

/// Per-worker state for value generation.
pub struct ValueContext<'a> {
    pub rng: ChaCha8Rng,
    pub dictionaries: &'a Dictionaries,
    pub patterns: &'a PatternCache,
    pub today: NaiveDate,
}

impl<'a> ValueContext<'a> {
    pub fn new(seed: u64, dictionaries: &'a Dictionaries, patterns: &'a PatternCache, today: NaiveDate) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            dictionaries,
            patterns,
            today,
        }
    }
}

fn unsat(what: impl Into<String>) -> SynthError {
    SynthError::Unsatisfiable(what.into())
}

/// Checks a candidate against the literal-level constraints of `cs`.
pub fn admissible(term: &Term, cs: &ConstraintSet, patterns: &PatternCache) -> bool {
    if let Some(values) = &cs.in_values {
        if !values.contains(term) {
            return false;
        }
    }
    let text = match term {
        Term::Literal(l) => l.lexical(),
        Term::Iri(i) => i.as_str(),
        Term::Blank(_) => return cs.datatype.is_none() && cs.pattern.is_none() && !cs.has_range(),
    };
    if let Some(dt) = &cs.datatype {
        match term.as_literal() {
            Some(l) if l.datatype() == dt && is_well_formed(l) => {}
            _ => return false,
        }
    }
    let len = text.chars().count() as u64;
    if cs.min_length.is_some_and(|m| len < m) || cs.max_length.is_some_and(|m| len > m) {
        return false;
    }
    if let Some(p) = &cs.pattern {
        match &patterns.get(p, cs.flags.as_deref()).matcher {
            Some(re) if re.is_match(text) => {}
            _ => return false,
        }
    }
    if cs.has_range() {
        let Some(value) = term.as_literal().and_then(ordered) else {
            return false;
        };
        let cmp = |b: &Option<Literal>| b.as_ref().and_then(ordered).and_then(|b| value.compare(&b));
        let ok = |b: &Option<Literal>, accept: &[Ordering]| b.is_none() || cmp(b).is_some_and(|o| accept.contains(&o));
        if !(ok(&cs.min_inclusive, &[Ordering::Greater, Ordering::Equal])
            && ok(&cs.max_inclusive, &[Ordering::Less, Ordering::Equal])
            && ok(&cs.min_exclusive, &[Ordering::Greater])
            && ok(&cs.max_exclusive, &[Ordering::Less]))
        {
            return false;
        }
    }
    true
}

fn dictionary_term(value: &str, datatype: Option<&str>) -> Term {
    if value.contains("://") && datatype.is_none() {
        Term::iri(value)
    } else {
        Term::string(value)
    }
}

/// Generates one value for a literal-valued property.
pub fn generate_object(
    cs: &ConstraintSet,
    class: Option<&str>,
    persona: &mut PersonaState,
    ctx: &mut ValueContext<'_>,
) -> Result<Term, SynthError> {
    if let Some(values) = &cs.in_values {
        return values
            .choose(&mut ctx.rng)
            .cloned()
            .ok_or_else(|| unsat(format!("{}: empty sh:in", cs.path_str())));
    }
    let datatype = infer_datatype(cs, None);
    let stringy = accepts_strings(cs.datatype.as_deref()) && datatype.as_deref().is_none_or(|d| d == xsd::STRING);

    if stringy {
        if let Some(dict) = ctx.dictionaries.lookup(class, cs.local_name()) {
            let values = dict.values.clone();
            for _ in 0..10 {
                let v = values.choose(&mut ctx.rng).expect("non-empty dictionary");
                let term = dictionary_term(v, cs.datatype.as_deref());
                if admissible(&term, cs, ctx.patterns) {
                    return Ok(term);
                }
            }
        }
    }
    if stringy || datatype.as_deref() == Some(xsd::DATE) {
        let saved = persona.clone();
        if let Some(term) = heuristic_value(cs, class, persona, ctx)? {
            if admissible(&term, cs, ctx.patterns) {
                return Ok(term);
            }
            *persona = saved;
        }
    }
    if let Some(pattern) = &cs.pattern {
        return pattern_value(pattern, cs, ctx);
    }
    let dt = datatype.unwrap_or_else(|| xsd::STRING.to_owned());
    for _ in 0..RETRY_BUDGET {
        let lit = generate_typed(cs, &dt, ctx)?;
        let term = Term::Literal(lit);
        if admissible(&term, cs, ctx.patterns) {
            return Ok(term);
        }
    }
    Err(unsat(format!("{}: no admissible {dt} value", cs.path_str())))
}

/// Synthesizes from `pattern` until the result also meets the other
/// literal constraints of `cs`.
pub fn pattern_value(pattern: &str, cs: &ConstraintSet, ctx: &mut ValueContext<'_>) -> Result<Term, SynthError> {
    let compiled = ctx.patterns.get(pattern, cs.flags.as_deref());
    let prog = compiled.program.as_ref().map_err(Clone::clone)?;
    let datatype = cs.datatype.clone().unwrap_or_else(|| xsd::STRING.to_owned());
    for _ in 0..RETRY_BUDGET {
        let s = prog.sample(&mut ctx.rng);
        let term = Term::typed(s, datatype.clone());
        if admissible(&term, cs, ctx.patterns) {
            return Ok(term);
        }
    }
    Err(unsat(format!(
        "{}: /{pattern}/ yields no value within the other constraints after {RETRY_BUDGET} tries",
        cs.path_str()
    )))
}

fn generate_typed(cs: &ConstraintSet, dt: &str, ctx: &mut ValueContext<'_>) -> Result<Literal, SynthError> {
    if xsd::is_temporal(dt) {
        let mut cs = cs.clone();
        cs.datatype = Some(dt.to_owned());
        return generate_date(&cs, ctx);
    }
    if xsd::is_numeric(dt) {
        return generate_numeric(cs, dt, &mut ctx.rng);
    }
    if dt == xsd::BOOLEAN {
        return Ok(Literal::typed(if ctx.rng.gen() { "true" } else { "false" }, dt));
    }
    let s = random_string(cs.min_length, cs.max_length, &mut ctx.rng)?;
    Ok(Literal::typed(s, dt))
}

/// Alphanumeric string of length uniform in `[min or 8, max or 12]`.
pub fn random_string<R: Rng + ?Sized>(min: Option<u64>, max: Option<u64>, rng: &mut R) -> Result<String, SynthError> {
    let low = min.unwrap_or_else(|| max.map_or(8, |m| m.min(8)));
    let high = max.unwrap_or(low.max(12));
    if low > high {
        return Err(unsat(format!("length range [{low}, {high}] is empty")));
    }
    let n = rng.gen_range(low..=high) as usize;
    Ok(rng.sample_iter(&Alphanumeric).take(n).map(char::from).collect())
}

fn bound_date(l: &Literal) -> Option<(NaiveDate, bool)> {
    match ordered(l)? {
        Ordered::Date(d) => Some((d, false)),
        Ordered::DateTime(dt) => Some((dt.date(), dt.time() != NaiveTime::MIN)),
        Ordered::Number(_) => None,
    }
}

/// Closed day interval admitted by the range constraints of `cs`.
///
/// Without a lower bound the interval starts at 1900-01-01, without an upper
/// bound it ends at `today`; a one-sided interval that misses that window is
/// widened to a century on its open side.
pub fn date_interval(cs: &ConstraintSet, today: NaiveDate, with_time: bool) -> Result<(NaiveDate, NaiveDate), SynthError> {
    let day = Duration::days(1);
    let mut lo: Option<NaiveDate> = None;
    let mut hi: Option<NaiveDate> = None;
    let mut raise = |d: NaiveDate| lo = Some(lo.map_or(d, |l| l.max(d)));
    if let Some((d, timed)) = cs.min_inclusive.as_ref().and_then(bound_date) {
        raise(if timed { d + day } else { d });
    }
    if let Some((d, _)) = cs.min_exclusive.as_ref().and_then(bound_date) {
        raise(d + day);
    }
    let mut lower = |d: NaiveDate| hi = Some(hi.map_or(d, |h| h.min(d)));
    if let Some((d, timed)) = cs.max_inclusive.as_ref().and_then(bound_date) {
        lower(if with_time && !timed { d - day } else { d });
    }
    if let Some((d, _)) = cs.max_exclusive.as_ref().and_then(bound_date) {
        lower(d - day);
    }
    let epoch = NaiveDate::from_ymd_opt(1900, 1, 1).unwrap();
    let span = Duration::days(DATE_SPAN_DAYS);
    let (lo, hi) = match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => (l, if l <= today { today } else { l + span }),
        (None, Some(h)) => (if h >= epoch { epoch } else { h - span }, h),
        (None, None) => (epoch, today),
    };
    if lo > hi {
        return Err(unsat(format!("{}: empty date range {lo}..{hi}", cs.path_str())));
    }
    Ok((lo, hi))
}

/// Uniform date (or dateTime, when declared) within the admitted range.
pub fn generate_date(cs: &ConstraintSet, ctx: &mut ValueContext<'_>) -> Result<Literal, SynthError> {
    let with_time = cs.datatype.as_deref() == Some(xsd::DATE_TIME);
    let (lo, hi) = date_interval(cs, ctx.today, with_time)?;
    let days = (hi - lo).num_days();
    let d = lo + Duration::days(ctx.rng.gen_range(0..=days));
    if with_time {
        let secs = ctx.rng.gen_range(0..86_400u32);
        let t = NaiveTime::from_num_seconds_from_midnight_opt(secs, 0).unwrap();
        Ok(Literal::typed(d.and_time(t).format("%Y-%m-%dT%H:%M:%S").to_string(), xsd::DATE_TIME))
    } else {
        Ok(Literal::typed(d.format("%Y-%m-%d").to_string(), xsd::DATE))
    }
}

fn number(l: &Option<Literal>) -> Option<f64> {
    match l.as_ref().and_then(ordered)? {
        Ordered::Number(v) => Some(v),
        _ => None,
    }
}

/// Integer interval `[lo, hi]` on a grid of `1/scale`.
fn grid_interval(cs: &ConstraintSet, scale: f64) -> (Option<i64>, Option<i64>) {
    let snap = |x: f64, up: bool| {
        let y = x * scale;
        if (y - y.round()).abs() < 1e-9 {
            y.round()
        } else if up {
            y.ceil()
        } else {
            y.floor()
        }
    };
    let mut lo: Option<i64> = None;
    let mut hi: Option<i64> = None;
    if let Some(v) = number(&cs.min_inclusive) {
        lo = Some(lo.map_or(snap(v, true) as i64, |l: i64| l.max(snap(v, true) as i64)));
    }
    if let Some(v) = number(&cs.min_exclusive) {
        let s = snap(v, false) as i64 + 1;
        lo = Some(lo.map_or(s, |l| l.max(s)));
    }
    if let Some(v) = number(&cs.max_inclusive) {
        let s = snap(v, false) as i64;
        hi = Some(hi.map_or(s, |h| h.min(s)));
    }
    if let Some(v) = number(&cs.max_exclusive) {
        let s = snap(v, true) as i64 - 1;
        hi = Some(hi.map_or(s, |h| h.min(s)));
    }
    (lo, hi)
}

fn implicit_integer_bounds(dt: &str) -> (Option<i64>, Option<i64>) {
    match dt.strip_prefix(xsd::NS).unwrap_or("") {
        "nonNegativeInteger" | "unsignedLong" => (Some(0), None),
        "positiveInteger" => (Some(1), None),
        "nonPositiveInteger" => (None, Some(0)),
        "negativeInteger" => (None, Some(-1)),
        "int" => (Some(i32::MIN.into()), Some(i32::MAX.into())),
        "short" => (Some(i16::MIN.into()), Some(i16::MAX.into())),
        "byte" => (Some(i8::MIN.into()), Some(i8::MAX.into())),
        "unsignedInt" => (Some(0), Some(u32::MAX.into())),
        "unsignedShort" => (Some(0), Some(u16::MAX.into())),
        "unsignedByte" => (Some(0), Some(u8::MAX.into())),
        _ => (None, None),
    }
}

/// Closes a possibly open interval: `[0, span]` when unbounded, `[min,
/// min+span]` for min-only, `[0, max]` (or `[max-span, max]` below zero) for
/// max-only.
fn close_interval(lo: Option<i64>, hi: Option<i64>, span: i64) -> (i64, i64) {
    match (lo, hi) {
        (Some(l), Some(h)) => (l, h),
        (Some(l), None) => (l, l.saturating_add(span)),
        (None, Some(h)) if h >= 0 => (0, h),
        (None, Some(h)) => (h.saturating_sub(span), h),
        (None, None) => (0, span),
    }
}

/// Uniform number within the admitted range. Decimals carry two fraction
/// digits.
pub fn generate_numeric<R: Rng + ?Sized>(cs: &ConstraintSet, dt: &str, rng: &mut R) -> Result<Literal, SynthError> {
    if xsd::is_integer(dt) {
        let (lo, hi) = grid_interval(cs, 1.0);
        let (ilo, ihi) = implicit_integer_bounds(dt);
        let lo = match (lo, ilo) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        let hi = match (hi, ihi) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        let (lo, hi) = close_interval(lo, hi, DEFAULT_SPAN);
        if lo > hi {
            return Err(unsat(format!("{}: empty integer range [{lo}, {hi}]", cs.path_str())));
        }
        return Ok(Literal::typed(rng.gen_range(lo..=hi).to_string(), dt));
    }
    let (lo, hi) = grid_interval(cs, 100.0);
    let (lo, hi) = close_interval(lo, hi, DEFAULT_SPAN * 100);
    if lo > hi {
        return Err(unsat(format!("{}: empty decimal range", cs.path_str())));
    }
    let cents = rng.gen_range(lo..=hi);
    let sign = if cents < 0 { "-" } else { "" };
    let abs = cents.unsigned_abs();
    Ok(Literal::typed(format!("{sign}{}.{:02}", abs / 100, abs % 100), dt))
}

fn tighter(existing: &Option<Literal>, candidate: &Literal) -> Literal {
    match existing.as_ref().and_then(|e| Some((e, ordered(e)?))) {
        Some((e, ev)) => match ordered(candidate).and_then(|c| ev.compare(&c)) {
            Some(Ordering::Less) => e.clone(),
            _ => candidate.clone(),
        },
        None => candidate.clone(),
    }
}

/// True when `value relation peer` holds, comparing orderable values by
/// value and plain strings lexically.
pub fn relation_holds(relation: PairRelation, value: &Term, peer: &Term) -> bool {
    match relation {
        PairRelation::Equals => value == peer,
        PairRelation::Disjoint => value != peer,
        PairRelation::LessThan | PairRelation::LessThanOrEquals => {
            let (Some(a), Some(b)) = (value.as_literal(), peer.as_literal()) else {
                return false;
            };
            let order = match (ordered(a), ordered(b)) {
                (Some(x), Some(y)) => x.compare(&y),
                (None, None) if a.datatype() == b.datatype() => Some(a.lexical().cmp(b.lexical())),
                _ => None,
            };
            match order {
                Some(Ordering::Less) => true,
                Some(Ordering::Equal) => relation == PairRelation::LessThanOrEquals,
                _ => false,
            }
        }
    }
}

/// Generates a value for `cs` that stands in `relation` to every peer value.
pub fn resolve_pair_value(
    cs: &ConstraintSet,
    class: Option<&str>,
    persona: &mut PersonaState,
    relation: PairRelation,
    peers: &[Term],
    ctx: &mut ValueContext<'_>,
) -> Result<Term, SynthError> {
    if relation == PairRelation::Equals {
        return peers
            .first()
            .cloned()
            .ok_or_else(|| unsat(format!("{}: equals peer has no value", cs.path_str())));
    }
    let mut target = cs.clone();
    if matches!(relation, PairRelation::LessThan | PairRelation::LessThanOrEquals) {
        let least = peers
            .iter()
            .filter_map(|p| p.as_literal())
            .filter_map(|l| Some((l, ordered(l)?)))
            .min_by(|a, b| a.1.compare(&b.1).unwrap_or(Ordering::Equal));
        if let Some((lit, value)) = least {
            if target.datatype.is_none() && infer_datatype(&target, None).is_none() {
                target.datatype = Some(lit.datatype().to_owned());
            }
            let has_lower = target.min_inclusive.is_some() || target.min_exclusive.is_some();
            if matches!(value, Ordered::Number(_)) && !has_lower {
                target.min_inclusive = Some(Literal::integer(0));
            }
            if relation == PairRelation::LessThan {
                target.max_exclusive = Some(tighter(&target.max_exclusive, lit));
            } else {
                target.max_inclusive = Some(tighter(&target.max_inclusive, lit));
            }
        }
    }
    for _ in 0..RETRY_BUDGET {
        let saved = persona.clone();
        let value = generate_object(&target, class, persona, ctx)?;
        if peers.iter().all(|p| relation_holds(relation, &value, p)) {
            return Ok(value);
        }
        *persona = saved;
    }
    Err(unsat(format!(
        "{}: no value {} its peer after {RETRY_BUDGET} tries",
        cs.path_str(),
        relation.name()
    )))
}
