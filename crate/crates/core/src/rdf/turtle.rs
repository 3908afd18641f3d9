//! Turtle reader and writer for the subset used by SHACL shapes graphs and
//! generated data graphs.
//!
//! Supported: `@prefix`/`PREFIX`, `@base`/`BASE`, IRIs, prefixed names,
//! blank-node labels, `[ ... ]` property lists, `( ... )` collections,
//! single/double/triple quoted strings with `@lang` or `^^datatype`, numeric
//! and boolean literals, the `a` keyword and `;` / `,` abbreviations.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::graph::Graph;
use super::term::{escape_string, Literal, Term, Triple};
use crate::error::RdfError;
use crate::vocab::{rdf, xsd};

/// Parses a Turtle document into a [`Graph`].
pub fn parse_turtle(source: &str) -> Result<Graph, RdfError> {
    let mut parser = Parser {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        graph: Graph::new(),
        base: None,
        labels: HashMap::new(),
    };
    parser.document()?;
    Ok(parser.graph)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    graph: Graph,
    base: Option<String>,
    labels: HashMap<String, Term>,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-' || c == '\u{B7}'
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> RdfError {
        RdfError::Syntax {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, want: char) -> Result<(), RdfError> {
        self.skip_ws();
        match self.peek() {
            Some(c) if c == want => {
                self.bump();
                Ok(())
            }
            Some(c) => Err(self.error(format!("expected `{want}`, found `{c}`"))),
            None => Err(self.error(format!("expected `{want}`, found end of input"))),
        }
    }

    fn starts_with_keyword(&self, kw: &str, case_insensitive: bool) -> bool {
        let n = kw.chars().count();
        let matches = kw.chars().enumerate().all(|(i, k)| match self.peek_at(i) {
            Some(c) if case_insensitive => c.eq_ignore_ascii_case(&k),
            Some(c) => c == k,
            None => false,
        });
        matches && !self.peek_at(n).is_some_and(|c| is_name_char(c) || c == ':')
    }

    fn document(&mut self) -> Result<(), RdfError> {
        loop {
            self.skip_ws();
            let Some(c) = self.peek() else { return Ok(()) };
            if c == '@' {
                self.at_directive()?;
            } else if self.starts_with_keyword("PREFIX", true) {
                self.advance(6);
                self.prefix_body()?;
            } else if self.starts_with_keyword("BASE", true) {
                self.advance(4);
                self.base_body()?;
            } else {
                self.triples()?;
                self.expect('.')?;
            }
        }
    }

    fn advance(&mut self, n: usize) {
        for _ in 0..n {
            self.bump();
        }
    }

    fn at_directive(&mut self) -> Result<(), RdfError> {
        self.bump();
        if self.starts_with_keyword("prefix", false) {
            self.advance(6);
            self.prefix_body()?;
        } else if self.starts_with_keyword("base", false) {
            self.advance(4);
            self.base_body()?;
        } else {
            return Err(self.error("unknown directive"));
        }
        self.expect('.')
    }

    fn prefix_body(&mut self) -> Result<(), RdfError> {
        self.skip_ws();
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if !(is_name_char(c) || c == '.') {
                return Err(self.error(format!("invalid character `{c}` in prefix")));
            }
            prefix.push(c);
            self.bump();
        }
        self.expect(':')?;
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.graph.set_prefix(prefix, iri);
        Ok(())
    }

    fn base_body(&mut self) -> Result<(), RdfError> {
        self.skip_ws();
        let iri = self.iri_ref()?;
        self.base = Some(iri);
        Ok(())
    }

    fn resolve(&self, iri: String) -> String {
        if iri.contains(':') {
            return iri;
        }
        match &self.base {
            Some(base) => format!("{base}{iri}"),
            None => iri,
        }
    }

    fn iri_ref(&mut self) -> Result<String, RdfError> {
        if self.peek() != Some('<') {
            return Err(self.error("expected IRI"));
        }
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some('\\') => iri.push(self.unicode_escape()?),
                Some(c) if c.is_whitespace() || c == '<' || c == '"' => {
                    return Err(self.error(format!("invalid character {c:?} in IRI")));
                }
                Some(c) => iri.push(c),
                None => return Err(self.error("unterminated IRI")),
            }
        }
        Ok(self.resolve(iri))
    }

    fn unicode_escape(&mut self) -> Result<char, RdfError> {
        let width = match self.bump() {
            Some('u') => 4,
            Some('U') => 8,
            _ => return Err(self.error("invalid escape")),
        };
        let mut hex = String::new();
        for _ in 0..width {
            hex.push(self.bump().ok_or_else(|| self.error("truncated escape"))?);
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error(format!("invalid code point {hex}")))
    }

    fn prefixed_name(&mut self) -> Result<String, RdfError> {
        let (line, column) = (self.line, self.column);
        let mut prefix = String::new();
        while let Some(c) = self.peek() {
            if c == ':' {
                break;
            }
            if !(is_name_char(c) || c == '.') {
                return Err(self.error(format!("unexpected character `{c}`")));
            }
            prefix.push(c);
            self.bump();
        }
        if self.peek() != Some(':') {
            return Err(self.error(format!("expected prefixed name, found `{prefix}`")));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let inner_dot = c == '.' && self.peek_at(1).is_some_and(|n| is_name_char(n) || n == ':');
            if is_name_char(c) || c == ':' || inner_dot {
                local.push(c);
                self.bump();
            } else if c == '\\' {
                self.bump();
                local.push(self.bump().ok_or_else(|| self.error("truncated escape"))?);
            } else if c == '%' {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        let ns = self
            .graph
            .prefixes()
            .get(&prefix)
            .ok_or(RdfError::UnresolvedPrefix { prefix, line, column })?;
        Ok(format!("{ns}{local}"))
    }

    fn iri(&mut self) -> Result<String, RdfError> {
        if self.peek() == Some('<') {
            self.iri_ref()
        } else {
            self.prefixed_name()
        }
    }

    fn blank_label(&mut self) -> Result<Term, RdfError> {
        self.advance(2);
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) || (c == '.' && self.peek_at(1).is_some_and(is_name_char)) {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        if label.is_empty() {
            return Err(self.error("empty blank node label"));
        }
        if let Some(t) = self.labels.get(&label) {
            return Ok(t.clone());
        }
        let t = self.graph.fresh_blank();
        self.labels.insert(label, t.clone());
        Ok(t)
    }

    fn triples(&mut self) -> Result<(), RdfError> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_property_list()?;
            self.skip_ws();
            if self.peek() != Some('.') {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> Result<Term, RdfError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => self.collection(),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some(_) => Ok(Term::Iri(self.iri()?)),
            None => Err(self.error("expected subject")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), RdfError> {
        loop {
            self.skip_ws();
            let predicate = self.verb()?;
            loop {
                let object = self.object()?;
                self.graph.insert(Triple::new(subject.clone(), predicate.clone(), object));
                self.skip_ws();
                if self.peek() == Some(',') {
                    self.bump();
                } else {
                    break;
                }
            }
            // one or more ';', optionally followed by another verb
            let mut saw_semicolon = false;
            loop {
                self.skip_ws();
                if self.peek() == Some(';') {
                    self.bump();
                    saw_semicolon = true;
                } else {
                    break;
                }
            }
            if !saw_semicolon {
                return Ok(());
            }
            self.skip_ws();
            match self.peek() {
                Some('.') | Some(']') | None => return Ok(()),
                _ => {}
            }
        }
    }

    fn verb(&mut self) -> Result<Term, RdfError> {
        if self.peek() == Some('a') && !self.peek_at(1).is_some_and(|c| is_name_char(c) || c == ':') {
            self.bump();
            return Ok(Term::iri(rdf::TYPE));
        }
        if self.peek() == Some('_') || self.peek() == Some('[') || self.peek() == Some('"') {
            return Err(self.error("predicate must be an IRI"));
        }
        Ok(Term::Iri(self.iri()?))
    }

    fn object(&mut self) -> Result<Term, RdfError> {
        self.skip_ws();
        match self.peek() {
            Some('[') => self.blank_property_list(),
            Some('(') => self.collection(),
            Some('_') if self.peek_at(1) == Some(':') => self.blank_label(),
            Some('"') | Some('\'') => self.string_literal(),
            Some(c) if c.is_ascii_digit() || c == '+' || c == '-' || c == '.' => self.numeric_literal(),
            Some('<') => Ok(Term::Iri(self.iri_ref()?)),
            Some(_) if self.starts_with_keyword("true", false) => {
                self.advance(4);
                Ok(Term::typed("true", xsd::BOOLEAN))
            }
            Some(_) if self.starts_with_keyword("false", false) => {
                self.advance(5);
                Ok(Term::typed("false", xsd::BOOLEAN))
            }
            Some(_) => Ok(Term::Iri(self.prefixed_name()?)),
            None => Err(self.error("expected object")),
        }
    }

    fn blank_property_list(&mut self) -> Result<Term, RdfError> {
        self.expect('[')?;
        let node = self.graph.fresh_blank();
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn collection(&mut self) -> Result<Term, RdfError> {
        self.expect('(')?;
        let mut items = Vec::new();
        loop {
            self.skip_ws();
            match self.peek() {
                Some(')') => {
                    self.bump();
                    break;
                }
                None => return Err(self.error("unterminated collection")),
                _ => items.push(self.object()?),
            }
        }
        Ok(self.graph.write_list(&items))
    }

    fn string_literal(&mut self) -> Result<Term, RdfError> {
        let quote = self.bump().expect("caller checked quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.advance(2);
        }
        let mut value = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error("unterminated string literal"));
            };
            if c == quote {
                if !long {
                    break;
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    self.advance(2);
                    break;
                }
                value.push(c);
            } else if c == '\\' {
                let escaped = match self.peek() {
                    Some('t') => '\t',
                    Some('n') => '\n',
                    Some('r') => '\r',
                    Some('b') => '\u{8}',
                    Some('f') => '\u{c}',
                    Some('"') => '"',
                    Some('\'') => '\'',
                    Some('\\') => '\\',
                    Some('u') | Some('U') => {
                        value.push(self.unicode_escape()?);
                        continue;
                    }
                    _ => return Err(self.error("invalid string escape")),
                };
                self.bump();
                value.push(escaped);
            } else {
                // Raw line breaks inside short strings are tolerated; some
                // hand-written shapes files wrap long sh:description values.
                value.push(c);
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                let mut lang = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        lang.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                if lang.is_empty() {
                    return Err(self.error("empty language tag"));
                }
                Ok(Term::literal(Literal::lang_string(value, lang)))
            }
            Some('^') if self.peek_at(1) == Some('^') => {
                self.advance(2);
                let datatype = self.iri()?;
                Ok(Term::typed(value, datatype))
            }
            _ => Ok(Term::string(value)),
        }
    }

    fn numeric_literal(&mut self) -> Result<Term, RdfError> {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.bump();
        }
        let mut digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            text.push(c);
            self.bump();
            digits += 1;
        }
        let mut datatype = xsd::INTEGER;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            text.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
                digits += 1;
            }
            datatype = xsd::DECIMAL;
        }
        if digits == 0 {
            return Err(self.error("malformed number"));
        }
        if let Some(e @ ('e' | 'E')) = self.peek() {
            text.push(e);
            self.bump();
            if let Some(c @ ('+' | '-')) = self.peek() {
                text.push(c);
                self.bump();
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                text.push(c);
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(self.error("malformed exponent"));
            }
            datatype = xsd::DOUBLE;
        }
        Ok(Term::typed(text, datatype))
    }
}

/// Serializes a graph as Turtle.
///
/// Output is deterministic: prefixes sorted by name, one block per subject
/// with subjects sorted, `rdf:type` first (written `a`) and the remaining
/// predicates sorted by IRI.
pub fn serialize_turtle(graph: &Graph) -> String {
    let mut out = String::new();
    for (prefix, ns) in graph.prefixes() {
        let _ = writeln!(out, "@prefix {prefix}: <{ns}> .");
    }
    let mut by_subject: Vec<(&Term, Vec<&Triple>)> = Vec::new();
    {
        let mut triples: Vec<&Triple> = graph.iter().collect();
        triples.sort_by(|a, b| {
            a.subject
                .cmp(&b.subject)
                .then_with(|| predicate_key(&a.predicate).cmp(&predicate_key(&b.predicate)))
                .then_with(|| a.object.cmp(&b.object))
        });
        for t in triples {
            match by_subject.last_mut() {
                Some((s, ts)) if *s == &t.subject => ts.push(t),
                _ => by_subject.push((&t.subject, vec![t])),
            }
        }
    }
    let writer = TermWriter::new(graph);
    for (subject, triples) in by_subject {
        out.push('\n');
        out.push_str(&writer.term(subject));
        let mut first_predicate = true;
        let mut i = 0;
        while i < triples.len() {
            let predicate = &triples[i].predicate;
            let mut j = i;
            while j < triples.len() && &triples[j].predicate == predicate {
                j += 1;
            }
            if !first_predicate {
                out.push_str(" ;\n   ");
            }
            first_predicate = false;
            out.push(' ');
            if predicate.as_iri() == Some(rdf::TYPE) {
                out.push('a');
            } else {
                out.push_str(&writer.term(predicate));
            }
            for (k, t) in triples[i..j].iter().enumerate() {
                out.push_str(if k > 0 { ",\n        " } else { " " });
                out.push_str(&writer.term(&t.object));
            }
            i = j;
        }
        out.push_str(" .\n");
    }
    out
}

fn predicate_key(p: &Term) -> (bool, &str) {
    let iri = p.as_iri().unwrap_or_default();
    (iri != rdf::TYPE, iri)
}

struct TermWriter<'a> {
    prefixes: Vec<(&'a str, &'a str)>,
}

impl<'a> TermWriter<'a> {
    fn new(graph: &'a Graph) -> Self {
        let mut prefixes: Vec<(&str, &str)> =
            graph.prefixes().iter().map(|(p, ns)| (p.as_str(), ns.as_str())).collect();
        // longest namespace first so the most specific prefix wins
        prefixes.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        Self { prefixes }
    }

    fn iri(&self, iri: &str) -> String {
        for (prefix, ns) in &self.prefixes {
            if let Some(local) = iri.strip_prefix(ns) {
                if is_simple_local(local) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{iri}>")
    }

    fn term(&self, term: &Term) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Blank(id) => format!("_:{id}"),
            Term::Literal(lit) => {
                if lit.lang().is_none() && lit.datatype() == xsd::INTEGER && is_canonical_integer(lit.lexical()) {
                    return lit.lexical().to_owned();
                }
                let mut s = format!("\"{}\"", escape_string(lit.lexical()));
                if let Some(lang) = lit.lang() {
                    s.push('@');
                    s.push_str(lang);
                } else if lit.datatype() != xsd::STRING {
                    s.push_str("^^");
                    s.push_str(&self.iri(lit.datatype()));
                }
                s
            }
        }
    }
}

fn is_simple_local(local: &str) -> bool {
    let mut chars = local.chars();
    match chars.next() {
        None => true,
        Some(c) if c.is_ascii_alphanumeric() || c == '_' => {
            chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        }
        Some(_) => false,
    }
}

fn is_canonical_integer(s: &str) -> bool {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}
