//! Value dictionaries keyed by class and property local name.
//!
//! Dictionary files hold one value per line; blank lines and lines starting
//! with `#` are skipped. A directory given with [`Dictionaries::with_overrides`]
//! replaces bundled files of the same name and may carry a `routes.csv` whose
//! lines read `class-iri-or-*,property-local-name,file.csv`.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub const FIRST_NAMES: &str = "first_names.csv";
pub const LAST_NAMES: &str = "last_names.csv";
pub const STREET_NAMES: &str = "street_names.csv";
pub const ROUTES_FILE: &str = "routes.csv";

const SCHEMA: &str = "http://schema.org/";

const BUNDLED: &[(&str, &str)] = &[
    (FIRST_NAMES, include_str!("../../data/dictionaries/first_names.csv")),
    (LAST_NAMES, include_str!("../../data/dictionaries/last_names.csv")),
    (STREET_NAMES, include_str!("../../data/dictionaries/street_names.csv")),
    ("book_titles.csv", include_str!("../../data/dictionaries/book_titles.csv")),
    ("genres.csv", include_str!("../../data/dictionaries/genres.csv")),
    ("job_titles.csv", include_str!("../../data/dictionaries/job_titles.csv")),
    ("awards.csv", include_str!("../../data/dictionaries/awards.csv")),
    ("book_editions.csv", include_str!("../../data/dictionaries/book_editions.csv")),
    ("movie_titles.csv", include_str!("../../data/dictionaries/movie_titles.csv")),
];

/// Bundled routes: (class IRI or `*`, property local name, file).
const ROUTES: &[(&str, &str, &str)] = &[
    ("http://schema.org/Person", "jobTitle", "job_titles.csv"),
    ("http://schema.org/Book", "name", "book_titles.csv"),
    ("http://schema.org/Book", "bookEdition", "book_editions.csv"),
    ("http://schema.org/TVSeries", "name", "movie_titles.csv"),
    ("http://schema.org/Movie", "name", "movie_titles.csv"),
    ("*", "genre", "genres.csv"),
    ("*", "award", "awards.csv"),
];

/// One registry entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary {
    /// Class IRI or `*`, and property local name.
    pub key: (String, String),
    pub values: Arc<[String]>,
    pub source_file: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Dictionaries {
    files: BTreeMap<String, (Arc<[String]>, PathBuf)>,
    registry: BTreeMap<(String, String), Dictionary>,
}

pub fn parse_values(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_owned)
        .collect()
}

impl Default for Dictionaries {
    fn default() -> Self {
        Self::builtin()
    }
}

impl Dictionaries {
    pub fn builtin() -> Self {
        let files = BUNDLED
            .iter()
            .map(|(name, text)| {
                let values: Arc<[String]> = parse_values(text).into();
                (name.to_string(), (values, PathBuf::from(format!("builtin/{name}"))))
            })
            .collect();
        let mut dicts = Self {
            files,
            registry: BTreeMap::new(),
        };
        for (class, local, file) in ROUTES {
            dicts.route(class, local, file);
        }
        dicts
    }

    /// Bundled dictionaries with files from `dir` layered on top.
    pub fn with_overrides(dir: &Path) -> io::Result<Self> {
        let mut dicts = Self::builtin();
        let mut routes = None;
        let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
        entries.sort_by_key(|e| e.file_name());
        for entry in entries {
            let path = entry.path();
            if !path.is_file() {
                continue;
            }
            let name = entry.file_name().to_string_lossy().into_owned();
            let text = fs::read_to_string(&path)?;
            if name == ROUTES_FILE {
                routes = Some(text);
                continue;
            }
            dicts.files.insert(name, (parse_values(&text).into(), path));
        }
        // rebuild so overridden files propagate to existing routes
        let keys: Vec<_> = dicts
            .registry
            .values()
            .map(|d| (d.key.clone(), file_name(&d.source_file)))
            .collect();
        for ((class, local), file) in keys {
            dicts.route(&class, &local, &file);
        }
        if let Some(text) = routes {
            for line in parse_values(&text) {
                let parts: Vec<&str> = line.split(',').map(str::trim).collect();
                if let [class, local, file] = parts[..] {
                    if !dicts.route(class, local, file) {
                        log::warn!("route {line:?} names an unknown dictionary file");
                    }
                } else {
                    log::warn!("ignoring malformed route line {line:?}");
                }
            }
        }
        Ok(dicts)
    }

    /// Registers `(class, local) -> file`; false if the file is unknown.
    pub fn route(&mut self, class: &str, local: &str, file: &str) -> bool {
        let Some((values, path)) = self.files.get(file) else {
            return false;
        };
        let key = (class.to_owned(), local.to_owned());
        self.registry.insert(
            key.clone(),
            Dictionary {
                key,
                values: values.clone(),
                source_file: path.clone(),
            },
        );
        true
    }

    /// The dictionary for a property, preferring an exact class match over `*`.
    pub fn lookup(&self, class: Option<&str>, local: &str) -> Option<&Dictionary> {
        let exact = class.and_then(|c| self.registry.get(&(c.to_owned(), local.to_owned())));
        exact
            .or_else(|| self.registry.get(&("*".to_owned(), local.to_owned())))
            .filter(|d| !d.values.is_empty())
    }

    /// Values of a named file.
    pub fn file(&self, name: &str) -> Option<&[String]> {
        self.files.get(name).map(|(v, _)| &v[..]).filter(|v| !v.is_empty())
    }

    pub fn entries(&self) -> impl Iterator<Item = &Dictionary> {
        self.registry.values()
    }
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

/// True for classes treated as people by the name heuristics.
pub fn is_person_class(class: Option<&str>) -> bool {
    class.is_some_and(|c| c == format!("{SCHEMA}Person") || crate::rdf::local_name(c) == "Person")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_routes_resolve() {
        let d = Dictionaries::builtin();
        let jobs = d.lookup(Some("http://schema.org/Person"), "jobTitle").unwrap();
        assert!(jobs.values.iter().any(|v| v == "Professor"));
        assert!(d.lookup(Some("http://schema.org/Organization"), "jobTitle").is_none());
        let genre = d.lookup(Some("http://schema.org/Book"), "genre").unwrap();
        assert_eq!(genre.key.0, "*");
        assert!(d.lookup(None, "genre").is_some());
        assert!(d.file(FIRST_NAMES).unwrap().len() > 50);
        let editions = d.lookup(Some("http://schema.org/Book"), "bookEdition").unwrap();
        assert!(editions.values.iter().all(|v| v.starts_with("http://schema.org/")));
    }

    #[test]
    fn keys_are_unique() {
        let d = Dictionaries::builtin();
        let keys: Vec<_> = d.entries().map(|e| e.key.clone()).collect();
        let mut dedup = keys.clone();
        dedup.dedup();
        assert_eq!(keys, dedup);
    }

    #[test]
    fn comments_and_blanks_skipped() {
        assert_eq!(parse_values("# x\n\na\n  b  \n#c\n"), vec!["a", "b"]);
    }

    #[test]
    fn directory_overrides_and_routes() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("genres.csv"), "Only\n").unwrap();
        fs::write(dir.path().join("colors.csv"), "Red\nBlue\n").unwrap();
        fs::write(dir.path().join(ROUTES_FILE), "*,color,colors.csv\nbad line\n").unwrap();
        let d = Dictionaries::with_overrides(dir.path()).unwrap();
        assert_eq!(&d.lookup(None, "genre").unwrap().values[..], ["Only".to_owned()]);
        assert_eq!(d.lookup(None, "color").unwrap().values.len(), 2);
        assert!(d.lookup(Some("http://schema.org/Person"), "jobTitle").is_some());
    }
}
