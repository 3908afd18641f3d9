//! Interpretation of literal values for ordering and datatype checks.

use std::cmp::Ordering;

use chrono::{NaiveDate, NaiveDateTime};

use crate::rdf::Literal;
use crate::vocab::xsd;

/// A literal's value in a totally ordered domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ordered {
    Number(f64),
    Date(NaiveDate),
    DateTime(NaiveDateTime),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderKind {
    Number,
    Temporal,
}

impl Ordered {
    pub fn kind(&self) -> OrderKind {
        match self {
            Ordered::Number(_) => OrderKind::Number,
            Ordered::Date(_) | Ordered::DateTime(_) => OrderKind::Temporal,
        }
    }

    /// Compares values of the same kind; `None` across kinds.
    pub fn compare(&self, other: &Ordered) -> Option<Ordering> {
        match (self, other) {
            (Ordered::Number(a), Ordered::Number(b)) => a.partial_cmp(b),
            (Ordered::Date(a), Ordered::Date(b)) => Some(a.cmp(b)),
            (Ordered::DateTime(a), Ordered::DateTime(b)) => Some(a.cmp(b)),
            (Ordered::Date(a), Ordered::DateTime(b)) => Some(a.and_hms_opt(0, 0, 0)?.cmp(b)),
            (Ordered::DateTime(a), Ordered::Date(b)) => Some(a.cmp(&b.and_hms_opt(0, 0, 0)?)),
            _ => None,
        }
    }
}

pub fn parse_date(s: &str) -> Option<NaiveDate> {
    NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()
}

pub fn parse_date_time(s: &str) -> Option<NaiveDateTime> {
    NaiveDateTime::parse_from_str(s.trim_end_matches('Z'), "%Y-%m-%dT%H:%M:%S").ok()
}

pub fn parse_integer(s: &str) -> Option<i64> {
    s.strip_prefix('+').unwrap_or(s).parse().ok()
}

/// Orderable value of a literal, if its datatype has one and the lexical
/// form is valid.
pub fn ordered(lit: &Literal) -> Option<Ordered> {
    let dt = lit.datatype();
    let lex = lit.lexical();
    if xsd::is_integer(dt) {
        parse_integer(lex).map(|v| Ordered::Number(v as f64))
    } else if xsd::is_numeric(dt) {
        lex.parse::<f64>().ok().filter(|v| !v.is_nan()).map(Ordered::Number)
    } else if dt == xsd::DATE {
        parse_date(lex).map(Ordered::Date)
    } else if dt == xsd::DATE_TIME {
        parse_date_time(lex).map(Ordered::DateTime)
    } else {
        None
    }
}

/// Kind of ordering a datatype IRI implies.
pub fn datatype_kind(datatype: &str) -> Option<OrderKind> {
    if xsd::is_numeric(datatype) {
        Some(OrderKind::Number)
    } else if xsd::is_temporal(datatype) {
        Some(OrderKind::Temporal)
    } else {
        None
    }
}

/// True when the lexical form is valid for the literal's datatype, for the
/// datatypes this crate understands. Unknown datatypes are accepted.
pub fn is_well_formed(lit: &Literal) -> bool {
    let dt = lit.datatype();
    if xsd::is_numeric(dt) || xsd::is_temporal(dt) {
        return ordered(lit).is_some() && integer_range_ok(dt, lit.lexical());
    }
    if dt == xsd::BOOLEAN {
        return matches!(lit.lexical(), "true" | "false" | "1" | "0");
    }
    true
}

fn integer_range_ok(dt: &str, lex: &str) -> bool {
    let Some(local) = dt.strip_prefix(xsd::NS) else { return true };
    let Some(v) = parse_integer(lex) else { return !xsd::is_integer(dt) };
    match local {
        "nonNegativeInteger" | "unsignedLong" => v >= 0,
        "positiveInteger" => v > 0,
        "nonPositiveInteger" => v <= 0,
        "negativeInteger" => v < 0,
        "int" => i32::try_from(v).is_ok(),
        "short" => i16::try_from(v).is_ok(),
        "byte" => i8::try_from(v).is_ok(),
        "unsignedInt" => u32::try_from(v).is_ok(),
        "unsignedShort" => u16::try_from(v).is_ok(),
        "unsignedByte" => u8::try_from(v).is_ok(),
        _ => true,
    }
}
