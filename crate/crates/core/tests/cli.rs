use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_rdfgen");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn rdfgen(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generates_the_requested_entities() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ttl");
    let input = fixture("input-shape-person.ttl");
    let run = rdfgen(&[path(&input), path(&out), "2", "--seed", "7", "--today", "2026-10-15"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.matches("a schema:Person").count(), 2, "{text}");
}

#[test]
fn missing_arguments_are_a_usage_error() {
    let run = rdfgen(&[]);
    assert_eq!(run.status.code(), Some(1));
    assert!(!run.stderr.is_empty());
}

#[test]
fn same_seed_same_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = fixture("input-shape-tvseries.ttl");
    let outputs: Vec<String> = ["a.ttl", "b.ttl"]
        .iter()
        .map(|name| {
            let out = dir.path().join(name);
            let run = rdfgen(&[path(&input), path(&out), "3", "--seed", "11", "--today", "2026-10-15"]);
            assert_eq!(run.status.code(), Some(0));
            fs::read_to_string(out).unwrap()
        })
        .collect();
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn missing_seed_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ttl");
    let run = rdfgen(&[path(&fixture("input-shape-unknown.ttl")), path(&out), "1"]);
    assert_eq!(run.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&run.stderr).starts_with("seed: "));
}

#[test]
fn validation_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.ttl");
    let report = dir.path().join("report.tsv");
    let input = fixture("input-shape-books.ttl");
    let run = rdfgen(&[path(&input), path(&out), "4", "--seed", "3", "--report", path(&report)]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(report.exists());
    assert_eq!(fs::read_to_string(&report).unwrap(), "");
}

#[test]
fn malformed_shapes_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.ttl");
    fs::write(&input, "@prefix sh: <http://www.w3.org/ns/shacl#> .\nsh:Foo sh:path .\n").unwrap();
    let run = rdfgen(&[path(&input), path(&dir.path().join("out.ttl")), "1", "--seed", "1"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("bad.ttl"));
}

#[test]
fn unwritable_output_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("out.ttl");
    let run = rdfgen(&[path(&fixture("input-shape-person.ttl")), path(&out), "1", "--seed", "1"]);
    assert_eq!(run.status.code(), Some(3));
}

#[test]
fn dictionary_override_is_used() {
    let dir = tempfile::tempdir().unwrap();
    let dicts = dir.path().join("dicts");
    fs::create_dir(&dicts).unwrap();
    fs::write(dicts.join("genres.csv"), "Zydeco\n").unwrap();
    let out = dir.path().join("out.ttl");
    let input = fixture("input-shape-tvseries.ttl");
    let run = rdfgen(&[path(&input), path(&out), "1", "--seed", "5", "--dict-dir", path(&dicts), "--validate"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(fs::read_to_string(&out).unwrap().contains("\"Zydeco\""));
}

#[test]
fn custom_namespace_shapes_validate_clean() {
    let dir = tempfile::tempdir().unwrap();
    let shapes = dir.path().join("shapes.ttl");
    fs::write(
        &shapes,
        "@prefix sh: <http://www.w3.org/ns/shacl#> .\n\
         @prefix ex: <http://example.com/ns#> .\n\
         ex:S a sh:NodeShape ; sh:targetClass ex:Song ;\n\
         sh:property [ sh:path ex:genre ; sh:minCount 1 ] .\n",
    )
    .unwrap();
    let out = dir.path().join("out.ttl");
    let run = rdfgen(&[path(&shapes), path(&out), "1", "--seed", "1", "--validate"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
}
