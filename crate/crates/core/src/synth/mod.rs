//! Value synthesis for literal-valued properties.

pub mod dictionary;
pub mod heuristics;
pub mod regex;
pub mod values;

pub use dictionary::{Dictionaries, Dictionary};
pub use heuristics::{heuristic_value, PersonaState};
pub use self::regex::{synthesize_from_regex, RegexProgram};
pub use values::{
    admissible, generate_date, generate_numeric, generate_object, relation_holds, resolve_pair_value,
    CompiledPattern, PatternCache, ValueContext, RETRY_BUDGET,
};
