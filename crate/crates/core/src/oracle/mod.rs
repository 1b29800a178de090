//! Coverage oracles: anything that maps a configuration to the set of
//! locations its test suite covers.
//!
//! Two implementations ship here. [`SubjectSpec`] is a synthetic program whose
//! locations carry guard formulas; [`ExternalOracle`] runs real test commands
//! and reads back a coverage sink file, memoizing results per configuration.

mod cache;
mod external;
mod subject;

use std::collections::BTreeSet;
use std::path::Path;

use crate::config_space::Configuration;
use crate::error::{Error, Result};

pub use cache::CoverageCache;
pub use external::{
    config_hash, external_coverage, read_coverage_sink, render_opts, ExternalOracle, RunnerDoc,
    RunnerSpec,
};
pub use subject::{synthetic_coverage, Location, SubjectDoc, SubjectSpec};

/// Location identifiers are opaque tokens such as `cat.c:462`.
pub type LocationSet = BTreeSet<String>;

/// Answers which locations a configuration covers. Must be deterministic per
/// configuration for the duration of a run.
pub trait CoverageOracle: Sync {
    fn coverage(&self, config: &Configuration) -> Result<LocationSet>;
}

impl<T: CoverageOracle + ?Sized> CoverageOracle for &T {
    fn coverage(&self, config: &Configuration) -> Result<LocationSet> {
        (**self).coverage(config)
    }
}

/// Adapts a closure into an oracle.
pub struct FnOracle<F>(pub F);

impl<F> CoverageOracle for FnOracle<F>
where
    F: Fn(&Configuration) -> Result<LocationSet> + Sync,
{
    fn coverage(&self, config: &Configuration) -> Result<LocationSet> {
        (self.0)(config)
    }
}

/// Either kind of subject document.
#[derive(Debug, Clone)]
pub enum Subject {
    Synthetic(SubjectSpec),
    Runner(RunnerSpec),
}

impl Subject {
    pub fn space(&self) -> &crate::config_space::ConfigSpace {
        match self {
            Subject::Synthetic(s) => &s.space,
            Subject::Runner(r) => &r.space,
        }
    }
}

/// Parses a subject document. Documents with `locations` are synthetic
/// subjects; documents with `tests` are runner specifications, whose
/// relative paths resolve against `base_dir`.
pub fn parse_subject(text: &str, base_dir: &Path) -> Result<Subject> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Invalid(vec!["subject document must be a JSON object".into()]))?;
    if obj.contains_key("locations") {
        let doc: SubjectDoc = serde_json::from_value(value)?;
        Ok(Subject::Synthetic(SubjectSpec::from_doc(&doc)?))
    } else if obj.contains_key("tests") {
        let doc: RunnerDoc = serde_json::from_value(value)?;
        Ok(Subject::Runner(RunnerSpec::from_doc(&doc, base_dir)?))
    } else {
        Err(Error::Invalid(vec![
            "subject document needs either `locations` (synthetic) or `tests` (runner)".into(),
        ]))
    }
}

pub fn load_subject(path: impl AsRef<Path>) -> Result<Subject> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_subject(&text, base)
}
