//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use chrono::NaiveDate;
use clap::Parser;

use crate::error::{PipelineError, ShapeError};
use crate::generate::{generate_graph, GenContext, DEFAULT_BASE_IRI, DEFAULT_START_INDEX};
use crate::rdf::{parse_turtle, serialize_turtle};
use crate::shapes::extract_shape_maps;
use crate::synth::Dictionaries;
use crate::validate::Validator;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GENERATE: i32 = 3;
pub const EXIT_VIOLATIONS: i32 = 4;

/// Generate a synthetic RDF data graph from SHACL shapes.
#[derive(Debug, Clone, Parser)]
#[command(name = "rdfgen", version)]
pub struct CliConfig {
    /// Shapes graph in Turtle.
    pub input_path: PathBuf,
    /// Where to write the generated Turtle (overwritten).
    pub output_path: PathBuf,
    /// Entities per root shape.
    #[arg(value_parser = clap::value_parser!(u64).range(1..))]
    pub entity_count: u64,
    /// RNG seed; drawn at random and printed to stderr when absent.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Directory of dictionary files overriding the bundled ones.
    #[arg(long)]
    pub dict_dir: Option<PathBuf>,
    /// Prefix for generated node IRIs.
    #[arg(long, default_value = DEFAULT_BASE_IRI)]
    pub base_iri: String,
    /// Number of the first generated node.
    #[arg(long, default_value_t = DEFAULT_START_INDEX)]
    pub start_index: u64,
    /// Upper end of default date ranges (YYYY-MM-DD); defaults to the current date.
    #[arg(long)]
    pub today: Option<NaiveDate>,
    /// Validate the output against the input shapes.
    #[arg(long)]
    pub validate: bool,
    /// Write violations as tab-separated lines to this file (implies --validate).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

/// Runs the CLI, writing diagnostics to `err`. Returns the exit code.
pub fn run<I, T>(args: I, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    execute(&config, err)
}

pub fn execute(config: &CliConfig, err: &mut dyn Write) -> i32 {
    let source = match fs::read_to_string(&config.input_path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", config.input_path.display());
            return EXIT_INPUT;
        }
    };
    let dictionaries = match &config.dict_dir {
        Some(dir) => match Dictionaries::with_overrides(dir) {
            Ok(d) => d,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read dictionary directory {}: {e}", dir.display());
                return EXIT_USAGE;
            }
        },
        None => Dictionaries::builtin(),
    };
    let seed = config.seed.unwrap_or_else(|| {
        let s = rand::random();
        let _ = writeln!(err, "seed: {s}");
        s
    });

    let root = match parse_turtle(&source)
        .map_err(ShapeError::from)
        .and_then(|g| extract_shape_maps(&g))
    {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {}", config.input_path.display(), PipelineError::from(e));
            return EXIT_INPUT;
        }
    };
    let ctx = GenContext {
        seed,
        entity_count: config.entity_count as usize,
        base_iri: config.base_iri.clone(),
        start_index: config.start_index,
        today: config.today.unwrap_or_else(|| chrono::Local::now().date_naive()),
        dictionaries,
        ..GenContext::new(seed, config.entity_count as usize)
    };
    let generated = match generate_graph(&root, ctx) {
        Ok(g) => g,
        Err(e) => {
            let _ = writeln!(err, "error: {}", PipelineError::from(e));
            return EXIT_GENERATE;
        }
    };
    if let Err(e) = fs::write(&config.output_path, serialize_turtle(&generated.graph)) {
        let _ = writeln!(err, "error: cannot write {}: {e}", config.output_path.display());
        return EXIT_GENERATE;
    }

    if !(config.validate || config.report.is_some()) {
        return EXIT_OK;
    }
    let report = match Validator::new(&root) {
        Ok(v) => v.validate(&generated.graph),
        Err(e) => {
            let _ = writeln!(err, "error: {}", PipelineError::from(e));
            return EXIT_INPUT;
        }
    };
    let _ = write!(err, "{}", report.to_text());
    if let Some(path) = &config.report {
        if let Err(e) = fs::write(path, report.to_tsv()) {
            let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
            return EXIT_GENERATE;
        }
    }
    if report.conforms {
        EXIT_OK
    } else {
        EXIT_VIOLATIONS
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String) {
        let mut err = Vec::new();
        let code = run(std::iter::once("rdfgen").chain(args.iter().copied()), &mut err);
        (code, String::from_utf8(err).unwrap())
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run_args(&[]).0, EXIT_USAGE);
        assert_eq!(run_args(&["a.ttl", "b.ttl"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["a.ttl", "b.ttl", "0"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["a.ttl", "b.ttl", "two"]).0, EXIT_USAGE);
        assert_eq!(run_args(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn missing_input_names_the_path() {
        let (code, err) = run_args(&["/nonexistent/shapes.ttl", "/tmp/x.ttl", "1"]);
        assert_eq!(code, EXIT_INPUT);
        assert!(err.contains("/nonexistent/shapes.ttl"), "{err}");
    }

    #[test]
    fn parses_every_flag() {
        let c = CliConfig::try_parse_from([
            "rdfgen", "in.ttl", "out.ttl", "3", "--seed", "7", "--dict-dir", "d", "--base-iri", "http://x/",
            "--start-index", "0", "--today", "2020-01-02", "--validate", "--report", "r.tsv",
        ])
        .unwrap();
        assert_eq!(c.entity_count, 3);
        assert_eq!(c.seed, Some(7));
        assert_eq!(c.start_index, 0);
        assert_eq!(c.today, NaiveDate::from_ymd_opt(2020, 1, 2));
        assert!(c.validate);
        let d = CliConfig::try_parse_from(["rdfgen", "in.ttl", "out.ttl", "1"]).unwrap();
        assert_eq!(d.base_iri, DEFAULT_BASE_IRI);
        assert_eq!(d.start_index, 100);
    }
}
