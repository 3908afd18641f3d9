//! Predicate-name heuristics and per-entity persona names.

use rand::seq::SliceRandom;
use rand::Rng;

use super::dictionary::{is_person_class, FIRST_NAMES, LAST_NAMES, STREET_NAMES};
use super::values::{generate_date, pattern_value, ValueContext};
use crate::constraints::ConstraintSet;
use crate::error::SynthError;
use crate::rdf::Term;
use crate::vocab::xsd;

pub const PHONE_PATTERN: &str = "[0-9]{3}-[0-9]{3}-[0-9]{4}";
pub const ISBN_PATTERN: &str = "97[89]-[0-9]{1,5}-[0-9]{1,7}-[0-9]{1,6}-[0-9]";
pub const EMAIL_DOMAIN: &str = "gmail.com";
const EMAIL_DELIMITERS: [&str; 3] = ["", "_", "."];

/// Names chosen so far for the entity being generated.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PersonaState {
    pub given_name: Option<String>,
    pub family_name: Option<String>,
    pub full_name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NameRole {
    Given,
    Family,
    Full,
}

/// Which persona name a property carries. An `sh:name` hint wins over the
/// path local name.
pub fn name_role(local: &str, sh_name: Option<&str>, class: Option<&str>) -> Option<NameRole> {
    if let Some(hint) = sh_name.map(str::to_ascii_lowercase) {
        if hint.contains("given") || hint.contains("first") {
            return Some(NameRole::Given);
        }
        if hint.contains("last") || hint.contains("family") || hint.contains("surname") {
            return Some(NameRole::Family);
        }
        if hint.contains("full") {
            return Some(NameRole::Full);
        }
    }
    match local.to_ascii_lowercase().as_str() {
        "givenname" | "firstname" => Some(NameRole::Given),
        "familyname" | "lastname" | "surname" => Some(NameRole::Family),
        "fullname" => Some(NameRole::Full),
        "name" if is_person_class(class) => Some(NameRole::Full),
        _ => None,
    }
}

fn draw(ctx: &mut ValueContext<'_>, file: &str, fallback: &str) -> String {
    ctx.dictionaries
        .file(file)
        .and_then(|v| v.choose(&mut ctx.rng))
        .cloned()
        .unwrap_or_else(|| fallback.to_owned())
}

fn email_part(s: &str) -> String {
    s.chars().filter(char::is_ascii_alphanumeric).collect::<String>().to_ascii_lowercase()
}

/// Email local part from the persona, with a random delimiter.
pub fn email_for(persona: &PersonaState, ctx: &mut ValueContext<'_>) -> String {
    let delim = *EMAIL_DELIMITERS.choose(&mut ctx.rng).unwrap();
    let local = if let Some(full) = &persona.full_name {
        full.split_whitespace().map(email_part).collect::<Vec<_>>().join(delim)
    } else {
        match (&persona.given_name, &persona.family_name) {
            (Some(g), Some(f)) => format!("{}{delim}{}", email_part(g), email_part(f)),
            (Some(one), None) | (None, Some(one)) => {
                format!("{}_{:03}", email_part(one), ctx.rng.gen_range(0..1000))
            }
            (None, None) => {
                let g = draw(ctx, FIRST_NAMES, "user");
                format!("{}_{:03}", email_part(&g), ctx.rng.gen_range(0..1000))
            }
        }
    };
    format!("{local}@{EMAIL_DOMAIN}")
}

/// A value suggested by the property's name, if any rule applies.
pub fn heuristic_value(
    cs: &ConstraintSet,
    class: Option<&str>,
    persona: &mut PersonaState,
    ctx: &mut ValueContext<'_>,
) -> Result<Option<Term>, SynthError> {
    let local = cs.local_name().to_ascii_lowercase();
    let hint = cs.name.as_deref().map(str::to_ascii_lowercase).unwrap_or_default();
    let has = |token: &str| local.contains(token) || hint.contains(token);

    if let Some(role) = name_role(cs.local_name(), cs.name.as_deref(), class) {
        let name = match role {
            NameRole::Given => persona
                .given_name
                .get_or_insert_with(|| draw(ctx, FIRST_NAMES, "Alex"))
                .clone(),
            NameRole::Family => persona
                .family_name
                .get_or_insert_with(|| draw(ctx, LAST_NAMES, "Smith"))
                .clone(),
            NameRole::Full => {
                if persona.full_name.is_none() {
                    let given = draw(ctx, FIRST_NAMES, "Alex");
                    let family = draw(ctx, LAST_NAMES, "Smith");
                    persona.full_name = Some(format!("{given} {family}"));
                }
                persona.full_name.clone().unwrap()
            }
        };
        return Ok(Some(Term::string(name)));
    }
    if has("date") {
        return generate_date(cs, ctx).map(|l| Some(Term::Literal(l)));
    }
    if has("telephone") || has("phone") {
        return pattern_value(PHONE_PATTERN, cs, ctx).map(Some);
    }
    if has("email") {
        return Ok(Some(Term::string(email_for(persona, ctx))));
    }
    if has("streetaddress") || hint.contains("street") {
        let street = draw(ctx, STREET_NAMES, "Main Street");
        let n = ctx.rng.gen_range(1..=99);
        return Ok(Some(Term::string(format!("no. {n} {street}"))));
    }
    if has("isbn") {
        return pattern_value(ISBN_PATTERN, cs, ctx).map(Some);
    }
    Ok(None)
}

/// True when a heuristic may produce a plain string for this datatype.
pub(crate) fn accepts_strings(datatype: Option<&str>) -> bool {
    datatype.is_none_or(|dt| dt == xsd::STRING)
}
