//! Random string synthesis from regular expressions.
//!
//! Supported: literals, escapes, character classes (ranges, negation,
//! `\d \w \s` and their complements), `.`, groups (capturing, `(?:...)`,
//! named), alternation, the quantifiers `? * + {n} {n,} {m,n}` (lazy forms
//! accepted) and the anchors `^ $`. Unbounded repetition draws at most ten
//! extra repeats. Negated classes and `.` sample from printable ASCII.

use rand::Rng;

use crate::error::SynthError;

const UNBOUNDED_EXTRA: u32 = 10;
const PRINTABLE: (char, char) = (' ', '~');

/// A parsed pattern ready for sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct RegexProgram {
    pattern: String,
    ast: Node,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Empty,
    Literal(char),
    Class(CharSet),
    Concat(Vec<Node>),
    Alternation(Vec<Node>),
    Repeat { node: Box<Node>, min: u32, max: u32 },
    Anchor,
}

/// Sorted, disjoint inclusive ranges.
#[derive(Debug, Clone, PartialEq)]
struct CharSet {
    ranges: Vec<(char, char)>,
}

impl CharSet {
    fn from_ranges(mut ranges: Vec<(char, char)>) -> Self {
        ranges.sort();
        let mut merged: Vec<(char, char)> = Vec::with_capacity(ranges.len());
        for (lo, hi) in ranges {
            match merged.last_mut() {
                Some(last) if (lo as u32) <= (last.1 as u32).saturating_add(1) => {
                    if hi > last.1 {
                        last.1 = hi;
                    }
                }
                _ => merged.push((lo, hi)),
            }
        }
        Self { ranges: merged }
    }

    /// Complement within printable ASCII.
    fn negate(&self) -> Self {
        let mut out = Vec::new();
        let mut next = PRINTABLE.0 as u32;
        let end = PRINTABLE.1 as u32;
        for &(lo, hi) in &self.ranges {
            let (lo, hi) = (lo as u32, hi as u32);
            if hi < next {
                continue;
            }
            if lo > end {
                break;
            }
            if lo > next {
                out.push((char::from_u32(next).unwrap(), char::from_u32(lo - 1).unwrap()));
            }
            next = hi + 1;
        }
        if next <= end {
            out.push((char::from_u32(next).unwrap(), PRINTABLE.1));
        }
        Self { ranges: out }
    }

    fn size(&self) -> u32 {
        self.ranges.iter().map(|&(lo, hi)| hi as u32 - lo as u32 + 1).sum()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> char {
        let mut k = rng.gen_range(0..self.size());
        for &(lo, hi) in &self.ranges {
            let span = hi as u32 - lo as u32 + 1;
            if k < span {
                // surrogates cannot appear: ranges are built from valid chars
                // and never straddle the surrogate block in practice
                return char::from_u32(lo as u32 + k).unwrap_or(lo);
            }
            k -= span;
        }
        unreachable!("index within total size")
    }
}

fn digit() -> Vec<(char, char)> {
    vec![('0', '9')]
}

fn word() -> Vec<(char, char)> {
    vec![('0', '9'), ('A', 'Z'), ('_', '_'), ('a', 'z')]
}

fn space() -> Vec<(char, char)> {
    vec![('\t', '\t'), (' ', ' ')]
}

impl RegexProgram {
    /// Parses `pattern`, rejecting constructs that cannot be synthesized.
    pub fn compile(pattern: &str) -> Result<Self, SynthError> {
        let mut parser = RegexParser {
            chars: pattern.chars().collect(),
            pos: 0,
            pattern,
        };
        let ast = parser.alternation()?;
        if parser.pos < parser.chars.len() {
            return Err(parser.syntax("unbalanced `)`"));
        }
        Ok(Self {
            pattern: pattern.to_owned(),
            ast,
        })
    }

    pub fn pattern(&self) -> &str {
        &self.pattern
    }

    /// Draws one string from the pattern's language.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> String {
        let mut out = String::new();
        emit(&self.ast, rng, &mut out);
        out
    }
}

/// Draws one string matching `prog`.
pub fn synthesize_from_regex<R: Rng + ?Sized>(prog: &RegexProgram, rng: &mut R) -> String {
    prog.sample(rng)
}

fn emit<R: Rng + ?Sized>(node: &Node, rng: &mut R, out: &mut String) {
    match node {
        Node::Empty | Node::Anchor => {}
        Node::Literal(c) => out.push(*c),
        Node::Class(set) => out.push(set.sample(rng)),
        Node::Concat(nodes) => nodes.iter().for_each(|n| emit(n, rng, out)),
        Node::Alternation(branches) => {
            let i = rng.gen_range(0..branches.len());
            emit(&branches[i], rng, out);
        }
        Node::Repeat { node, min, max } => {
            let n = rng.gen_range(*min..=*max);
            for _ in 0..n {
                emit(node, rng, out);
            }
        }
    }
}

struct RegexParser<'p> {
    chars: Vec<char>,
    pos: usize,
    pattern: &'p str,
}

impl RegexParser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn next(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn rest_starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.chars.get(self.pos + i) == Some(&c))
    }

    fn syntax(&self, message: &str) -> SynthError {
        SynthError::RegexSyntax {
            pattern: self.pattern.to_owned(),
            message: format!("{message} at offset {}", self.pos),
        }
    }

    fn unsupported(&self, feature: &str) -> SynthError {
        SynthError::UnsupportedRegexFeature {
            feature: feature.to_owned(),
            pattern: self.pattern.to_owned(),
        }
    }

    fn alternation(&mut self) -> Result<Node, SynthError> {
        let mut branches = vec![self.concat()?];
        while self.eat('|') {
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 {
            branches.pop().unwrap()
        } else {
            Node::Alternation(branches)
        })
    }

    fn concat(&mut self) -> Result<Node, SynthError> {
        let mut items = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom = self.atom()?;
            items.push(self.quantified(atom)?);
        }
        Ok(match items.len() {
            0 => Node::Empty,
            1 => items.pop().unwrap(),
            _ => Node::Concat(items),
        })
    }

    fn quantified(&mut self, atom: Node) -> Result<Node, SynthError> {
        let mut node = atom;
        loop {
            let (min, max) = match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    (0, UNBOUNDED_EXTRA)
                }
                Some('+') => {
                    self.pos += 1;
                    (1, UNBOUNDED_EXTRA)
                }
                Some('?') => {
                    self.pos += 1;
                    (0, 1)
                }
                Some('{') => match self.counted()? {
                    Some(bounds) => bounds,
                    None => return Ok(node),
                },
                _ => return Ok(node),
            };
            if matches!(node, Node::Anchor) {
                return Err(self.syntax("quantifier on an anchor"));
            }
            if self.eat('?') {
                // lazy: same language
            } else if self.peek() == Some('+') {
                return Err(self.unsupported("possessive quantifier"));
            }
            node = Node::Repeat {
                node: Box::new(node),
                min,
                max,
            };
            if matches!(self.peek(), Some('*' | '+' | '?' | '{')) {
                return Err(self.syntax("repeated quantifier"));
            }
        }
    }

    /// Parses `{n}`, `{n,}` or `{m,n}`.
    fn counted(&mut self) -> Result<Option<(u32, u32)>, SynthError> {
        let start = self.pos;
        self.pos += 1;
        let min = self.number();
        let Some(min) = min else {
            self.pos = start;
            return Err(self.syntax("malformed repetition"));
        };
        let max = if self.eat(',') {
            match self.number() {
                Some(max) => max,
                None => min + UNBOUNDED_EXTRA,
            }
        } else {
            min
        };
        if !self.eat('}') {
            return Err(self.syntax("unterminated repetition"));
        }
        if max < min {
            return Err(self.syntax("repetition max below min"));
        }
        if max > 1000 {
            return Err(self.syntax("repetition count too large"));
        }
        Ok(Some((min, max)))
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return None;
        }
        self.chars[start..self.pos].iter().collect::<String>().parse().ok()
    }

    fn atom(&mut self) -> Result<Node, SynthError> {
        let c = self.next().ok_or_else(|| self.syntax("unexpected end"))?;
        match c {
            '(' => self.group(),
            '[' => Ok(Node::Class(self.class()?)),
            '.' => Ok(Node::Class(CharSet::from_ranges(vec![PRINTABLE]))),
            '^' | '$' => Ok(Node::Anchor),
            '\\' => self.escape(),
            '*' | '+' | '?' | '{' => Err(self.syntax("nothing to repeat")),
            c => Ok(Node::Literal(c)),
        }
    }

    fn group(&mut self) -> Result<Node, SynthError> {
        if self.eat('?') {
            if self.eat(':') {
                // non-capturing
            } else if self.rest_starts_with("=") || self.rest_starts_with("!") {
                return Err(self.unsupported("lookahead"));
            } else if self.rest_starts_with("<=") || self.rest_starts_with("<!") {
                return Err(self.unsupported("lookbehind"));
            } else if self.eat('P') || self.peek() == Some('<') {
                if !self.eat('<') {
                    return Err(self.syntax("malformed group name"));
                }
                while let Some(c) = self.next() {
                    if c == '>' {
                        break;
                    }
                }
            } else {
                return Err(self.unsupported("inline flags"));
            }
        }
        let inner = self.alternation()?;
        if !self.eat(')') {
            return Err(self.syntax("unclosed group"));
        }
        Ok(inner)
    }

    fn escape(&mut self) -> Result<Node, SynthError> {
        let c = self.next().ok_or_else(|| self.syntax("trailing backslash"))?;
        if let Some(set) = self.class_escape(c) {
            return Ok(Node::Class(set));
        }
        match c {
            '1'..='9' => Err(self.unsupported("backreference")),
            'b' | 'B' => Err(self.unsupported("word boundary")),
            'A' | 'z' | 'Z' | 'G' => Err(self.unsupported("absolute anchor")),
            'k' => Err(self.unsupported("backreference")),
            'p' | 'P' => Err(self.unsupported("unicode class")),
            _ => Ok(Node::Literal(self.literal_escape(c)?)),
        }
    }

    fn class_escape(&self, c: char) -> Option<CharSet> {
        Some(match c {
            'd' => CharSet::from_ranges(digit()),
            'D' => CharSet::from_ranges(digit()).negate(),
            'w' => CharSet::from_ranges(word()),
            'W' => CharSet::from_ranges(word()).negate(),
            's' => CharSet::from_ranges(space()),
            'S' => CharSet::from_ranges(space()).negate(),
            _ => return None,
        })
    }

    fn literal_escape(&mut self, c: char) -> Result<char, SynthError> {
        Ok(match c {
            'n' => '\n',
            't' => '\t',
            'r' => '\r',
            'f' => '\u{c}',
            'v' => '\u{b}',
            '0' => '\0',
            'x' => {
                let hex: String = (0..2).filter_map(|_| self.next()).collect();
                u32::from_str_radix(&hex, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| self.syntax("bad \\x escape"))?
            }
            c if c.is_ascii_alphanumeric() => return Err(self.unsupported(&format!("escape \\{c}"))),
            c => c,
        })
    }

    fn class(&mut self) -> Result<CharSet, SynthError> {
        let negated = self.eat('^');
        let mut ranges = Vec::new();
        let mut first = true;
        loop {
            let c = self.next().ok_or_else(|| self.syntax("unclosed character class"))?;
            if c == ']' && !first {
                break;
            }
            first = false;
            if c == '[' {
                if self.peek() == Some(':') {
                    return Err(self.unsupported("POSIX class"));
                }
                return Err(self.unsupported("nested class"));
            }
            if c == '&' && self.peek() == Some('&') {
                return Err(self.unsupported("class intersection"));
            }
            let lo = if c == '\\' {
                let e = self.next().ok_or_else(|| self.syntax("trailing backslash"))?;
                if let Some(set) = self.class_escape(e) {
                    ranges.extend(set.ranges);
                    continue;
                }
                match e {
                    'b' => '\u{8}',
                    e => self.literal_escape(e)?,
                }
            } else {
                c
            };
            if self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']') {
                self.pos += 1;
                let h = self.next().unwrap();
                let hi = if h == '\\' {
                    let e = self.next().ok_or_else(|| self.syntax("trailing backslash"))?;
                    if self.class_escape(e).is_some() {
                        return Err(self.syntax("class escape as range end"));
                    }
                    self.literal_escape(e)?
                } else {
                    h
                };
                if hi < lo {
                    return Err(self.syntax("inverted class range"));
                }
                ranges.push((lo, hi));
            } else {
                ranges.push((lo, lo));
            }
        }
        let set = CharSet::from_ranges(ranges);
        let set = if negated { set.negate() } else { set };
        if set.size() == 0 {
            return Err(self.syntax("empty character class"));
        }
        Ok(set)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeSet;

    fn full_match(pattern: &str) -> regex::Regex {
        regex::Regex::new(&format!("^(?:{pattern})$")).unwrap()
    }

    #[test]
    fn literal_only() {
        let prog = RegexProgram::compile("abc").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(prog.sample(&mut rng), "abc");
    }

    #[test]
    fn book_identifier_pattern() {
        let prog = RegexProgram::compile("^[a-z]{4}[0-9]{4}$").unwrap();
        let re = full_match("^[a-z]{4}[0-9]{4}$");
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let s = prog.sample(&mut rng);
            assert_eq!(s.len(), 8);
            assert!(re.is_match(&s), "{s}");
        }
        assert!(re.is_match("wrzx5410"));
    }

    #[test]
    fn eidr_class_with_dot_slash_range() {
        let pattern = "[A-Z1-9.-/]{10,20}";
        let prog = RegexProgram::compile(pattern).unwrap();
        let re = full_match(pattern);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..500 {
            let s = prog.sample(&mut rng);
            assert!((10..=20).contains(&s.chars().count()));
            assert!(re.is_match(&s), "{s}");
        }
        assert!(re.is_match("7ZFCQWFG32."));
    }

    /// Enumerates the language of `(a|b){2}` by brute force over all
    /// two-letter strings on {a, b, c} and checks sampling covers exactly it.
    #[test]
    fn alternation_language_is_exhausted() {
        let re = full_match("(a|b){2}");
        let mut language = BTreeSet::new();
        for x in ['a', 'b', 'c'] {
            for y in ['a', 'b', 'c'] {
                let s: String = [x, y].iter().collect();
                if re.is_match(&s) {
                    language.insert(s);
                }
            }
        }
        assert_eq!(language, ["aa", "ab", "ba", "bb"].iter().map(|s| s.to_string()).collect());
        let prog = RegexProgram::compile("(a|b){2}").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let seen: BTreeSet<String> = (0..400).map(|_| prog.sample(&mut rng)).collect();
        assert_eq!(seen, language);
    }

    #[test]
    fn unbounded_quantifiers_are_capped() {
        let star = RegexProgram::compile("x*").unwrap();
        let plus = RegexProgram::compile("x+").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..300 {
            assert!(star.sample(&mut rng).len() <= 10);
            let p = plus.sample(&mut rng).len();
            assert!((1..=10).contains(&p));
        }
    }

    #[test]
    fn unsupported_features_are_named() {
        for (pattern, feature) in [
            (r"(a)\1", "backreference"),
            ("a(?=b)", "lookahead"),
            ("(?<!a)b", "lookbehind"),
            (r"\bword", "word boundary"),
        ] {
            match RegexProgram::compile(pattern) {
                Err(SynthError::UnsupportedRegexFeature { feature: f, .. }) => assert_eq!(f, feature),
                other => panic!("{pattern}: {other:?}"),
            }
        }
        assert!(matches!(RegexProgram::compile("a{3"), Err(SynthError::RegexSyntax { .. })));
        assert!(matches!(RegexProgram::compile("(ab"), Err(SynthError::RegexSyntax { .. })));
        assert!(matches!(RegexProgram::compile("*a"), Err(SynthError::RegexSyntax { .. })));
    }

    #[test]
    fn negated_and_escaped_classes() {
        for pattern in [r"[^a-z]{5}", r"\D\W\S", r"[\d_-]+", r"\.\*\?", r"[^\w\s]x", r"(?:ab|c)?d{2,}"] {
            let prog = RegexProgram::compile(pattern).unwrap();
            let re = full_match(pattern);
            let mut rng = ChaCha8Rng::seed_from_u64(9);
            for _ in 0..200 {
                let s = prog.sample(&mut rng);
                assert!(re.is_match(&s), "{pattern} -> {s:?}");
            }
        }
    }

    #[test]
    fn determinism() {
        let prog = RegexProgram::compile("[A-Za-z]{3,9}-[0-9]+").unwrap();
        let a: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..10).map(|_| prog.sample(&mut rng)).collect()
        };
        let b: Vec<String> = {
            let mut rng = ChaCha8Rng::seed_from_u64(42);
            (0..10).map(|_| prog.sample(&mut rng)).collect()
        };
        assert_eq!(a, b);
    }

    fn subset_regex() -> impl proptest::strategy::Strategy<Value = String> {
        use proptest::prelude::*;
        let leaf = prop_oneof![
            "[a-zA-Z0-9]".prop_map(|s| s),
            Just(r"\d".to_owned()),
            Just(r"\w".to_owned()),
            Just(r"\.".to_owned()),
            Just(".".to_owned()),
            Just("[A-Z1-9.-/]".to_owned()),
            Just("[^a-z]".to_owned()),
            Just("[a-f_-]".to_owned()),
        ];
        leaf.prop_recursive(4, 24, 4, |inner| {
            prop_oneof![
                prop::collection::vec(inner.clone(), 1..4).prop_map(|v| v.concat()),
                prop::collection::vec(inner.clone(), 2..4).prop_map(|v| format!("({})", v.join("|"))),
                (inner.clone(), prop_oneof![
                    Just("?".to_owned()),
                    Just("*".to_owned()),
                    Just("+".to_owned()),
                    (0u32..4).prop_map(|n| format!("{{{n}}}")),
                    (0u32..3, 0u32..3).prop_map(|(a, b)| format!("{{{a},{}}}", a + b)),
                    (0u32..3).prop_map(|n| format!("{{{n},}}")),
                ])
                    .prop_map(|(a, q)| format!("(?:{a}){q}")),
            ]
        })
    }

    proptest::proptest! {
        #[test]
        fn samples_full_match_their_pattern(body in subset_regex(), anchored: bool, seed: u64) {
            let pattern = if anchored { format!("^{body}$") } else { body };
            let prog = RegexProgram::compile(&pattern).unwrap();
            let re = full_match(&pattern);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..10 {
                let s = prog.sample(&mut rng);
                proptest::prop_assert!(re.is_match(&s), "{} -> {:?}", pattern, s);
            }
        }
    }
}
