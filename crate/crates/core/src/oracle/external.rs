use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use wait_timeout::ChildExt;

use super::{CoverageCache, CoverageOracle, LocationSet};
use crate::config_space::{ConfigSpace, Configuration, SpaceDoc};
use crate::error::{Error, Result};

/// Environment variable holding the absolute coverage-sink path for each test run.
pub const SINK_ENV: &str = "OPTINFER_SINK";

fn default_timeout() -> f64 {
    30.0
}

/// `{"space":…, "render":{opt:{value:[args…]}}, "tests":[…], "coverage_sink":…, "timeout_sec":…}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunnerDoc {
    pub space: SpaceDoc,
    pub render: BTreeMap<String, BTreeMap<String, Vec<String>>>,
    pub tests: Vec<String>,
    pub coverage_sink: String,
    #[serde(default = "default_timeout")]
    pub timeout_sec: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub working_dir: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub env: BTreeMap<String, String>,
}

/// How to run a real test suite under a configuration.
#[derive(Debug, Clone)]
pub struct RunnerSpec {
    pub space: ConfigSpace,
    /// `render[option][value]` is the argument list that value contributes to `{OPTS}`.
    pub render: Vec<Vec<Vec<String>>>,
    pub tests: Vec<String>,
    /// Sink path template; `{HASH}` expands to the configuration hash.
    pub coverage_sink: String,
    pub working_dir: PathBuf,
    pub timeout: Duration,
    pub env: BTreeMap<String, String>,
}

impl RunnerSpec {
    /// Validates a runner document; relative `working_dir` resolves against `base_dir`.
    pub fn from_doc(doc: &RunnerDoc, base_dir: &Path) -> Result<RunnerSpec> {
        let mut errors = Vec::new();
        let space = match ConfigSpace::from_doc(&doc.space) {
            Ok(s) => Some(s),
            Err(Error::Invalid(errs)) => {
                errors.extend(errs);
                None
            }
            Err(e) => return Err(e),
        };
        if !(doc.timeout_sec > 0.0 && doc.timeout_sec.is_finite()) {
            errors.push(format!(
                "timeout_sec must be positive, got {}",
                doc.timeout_sec
            ));
        }
        if doc.tests.is_empty() {
            errors.push("at least one test command is required".into());
        }
        for t in &doc.tests {
            if !t.contains("{OPTS}") {
                errors.push(format!("test command `{t}` lacks the {{OPTS}} placeholder"));
            }
        }
        if doc.coverage_sink.trim().is_empty() {
            errors.push("coverage_sink must be nonempty".into());
        }
        let mut render = Vec::new();
        if let Some(space) = &space {
            for name in doc.render.keys() {
                if space.option_index(name).is_none() {
                    errors.push(format!("render lists unknown option `{name}`"));
                }
            }
            for opt in space.options() {
                let table = doc.render.get(&opt.name);
                let mut per_value = Vec::new();
                for value in &opt.values {
                    match table.and_then(|t| t.get(value)) {
                        Some(args) => per_value.push(args.clone()),
                        None => {
                            errors.push(format!("missing rendering for `{}={value}`", opt.name))
                        }
                    }
                }
                if let Some(t) = table {
                    for value in t.keys() {
                        if opt.value_index(value).is_none() {
                            errors
                                .push(format!("render lists unknown value `{}={value}`", opt.name));
                        }
                    }
                }
                render.push(per_value);
            }
        }
        match space {
            Some(space) if errors.is_empty() => {
                let working_dir = match &doc.working_dir {
                    Some(dir) => base_dir.join(dir),
                    None => base_dir.to_path_buf(),
                };
                // Absolute so the sink path handed to the child does not depend on its cwd.
                let working_dir =
                    std::path::absolute(&working_dir).map_err(|e| Error::io(&working_dir, e))?;
                Ok(RunnerSpec {
                    space,
                    render,
                    tests: doc.tests.clone(),
                    coverage_sink: doc.coverage_sink.clone(),
                    working_dir,
                    timeout: Duration::from_secs_f64(doc.timeout_sec),
                    env: doc.env.clone(),
                })
            }
            _ => Err(Error::Invalid(errors)),
        }
    }

    pub fn sink_path(&self, hash: &str) -> PathBuf {
        self.working_dir
            .join(self.coverage_sink.replace("{HASH}", hash))
    }
}

/// First 16 hex digits of the SHA-256 of the canonical configuration string.
pub fn config_hash(space: &ConfigSpace, config: &Configuration) -> String {
    let digest = Sha256::digest(space.canonical(config).as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

fn shell_quote(arg: &str) -> String {
    let safe = !arg.is_empty()
        && arg
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "-_./=:+@%,".contains(c));
    if safe {
        arg.to_string()
    } else {
        format!("'{}'", arg.replace('\'', "'\\''"))
    }
}

/// The `{OPTS}` expansion: argument fragments of every option in space order.
pub fn render_opts(spec: &RunnerSpec, config: &Configuration) -> String {
    spec.render
        .iter()
        .enumerate()
        .flat_map(|(o, per_value)| per_value[config.value(o) as usize].iter())
        .map(|a| shell_quote(a))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Reads a sink file: one location per line, blank lines and `#` comments skipped.
pub fn read_coverage_sink(path: &Path) -> std::io::Result<LocationSet> {
    let text = std::fs::read_to_string(path)?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect())
}

fn run_suite(
    spec: &RunnerSpec,
    config: &Configuration,
    spawned: &AtomicUsize,
) -> Result<LocationSet> {
    let canonical = spec.space.canonical(config);
    let hash = config_hash(&spec.space, config);
    let opts = render_opts(spec, config);
    let sink = spec.sink_path(&hash);
    let oracle_err = |test: &str, message: String| Error::Oracle {
        config: canonical.clone(),
        test: Some(test.to_string()),
        message,
    };
    let mut covered = LocationSet::new();
    for template in &spec.tests {
        let command = template
            .replace("{OPTS}", &opts)
            .replace("{HASH}", &hash)
            .replace("{SINK}", &shell_quote(&sink.to_string_lossy()));
        match std::fs::remove_file(&sink) {
            Ok(()) => {}
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                return Err(oracle_err(
                    template,
                    format!("cannot clear sink {}: {e}", sink.display()),
                ))
            }
        }
        let mut child = Command::new("sh")
            .arg("-c")
            .arg(&command)
            .current_dir(&spec.working_dir)
            .envs(&spec.env)
            .env(SINK_ENV, &sink)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| oracle_err(template, format!("cannot spawn: {e}")))?;
        spawned.fetch_add(1, Ordering::SeqCst);
        let status = child
            .wait_timeout(spec.timeout)
            .map_err(|e| oracle_err(template, format!("wait failed: {e}")))?;
        if status.is_none() {
            let _ = child.kill();
            let _ = child.wait();
            return Err(oracle_err(
                template,
                format!("timed out after {:.1}s", spec.timeout.as_secs_f64()),
            ));
        }
        // A nonzero exit is an ordinary outcome for some configurations.
        let lines = read_coverage_sink(&sink).map_err(|e| {
            oracle_err(
                template,
                format!("cannot read coverage sink {}: {e}", sink.display()),
            )
        })?;
        covered.extend(lines);
    }
    let _ = std::fs::remove_file(&sink);
    Ok(covered)
}

/// Coverage of `config` under the runner's test suite: the cached answer if
/// present, otherwise the union over all test commands, which is then cached.
pub fn external_coverage(
    spec: &RunnerSpec,
    config: &Configuration,
    cache: &mut CoverageCache,
) -> Result<LocationSet> {
    spec.space.validate_config(config)?;
    let key = spec.space.canonical(config);
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let covered = run_suite(spec, config, &AtomicUsize::new(0))?;
    cache.insert(key, covered.clone())?;
    Ok(covered)
}

/// A shareable oracle over a [`RunnerSpec`] with a memoizing cache.
///
/// Distinct configurations may be evaluated from several threads when the
/// sink template contains `{HASH}`; otherwise runs are serialized.
#[derive(Debug)]
pub struct ExternalOracle {
    spec: RunnerSpec,
    cache: Mutex<CoverageCache>,
    serial: Mutex<()>,
    spawned: AtomicUsize,
    verify: bool,
}

impl ExternalOracle {
    pub fn new(spec: RunnerSpec, cache: CoverageCache) -> Self {
        ExternalOracle {
            spec,
            cache: Mutex::new(cache),
            serial: Mutex::new(()),
            spawned: AtomicUsize::new(0),
            verify: false,
        }
    }

    /// Runs each uncached configuration twice and fails if coverage differs.
    pub fn with_verification(mut self, verify: bool) -> Self {
        self.verify = verify;
        self
    }

    pub fn spec(&self) -> &RunnerSpec {
        &self.spec
    }

    /// Number of test processes started so far.
    pub fn spawn_count(&self) -> usize {
        self.spawned.load(Ordering::SeqCst)
    }

    pub fn into_cache(self) -> CoverageCache {
        self.cache.into_inner().unwrap_or_else(|p| p.into_inner())
    }

    fn run(&self, config: &Configuration) -> Result<LocationSet> {
        let _guard = (!self.spec.coverage_sink.contains("{HASH}"))
            .then(|| self.serial.lock().unwrap_or_else(|p| p.into_inner()));
        let first = run_suite(&self.spec, config, &self.spawned)?;
        if self.verify {
            let second = run_suite(&self.spec, config, &self.spawned)?;
            if first != second {
                return Err(Error::Oracle {
                    config: self.spec.space.canonical(config),
                    test: None,
                    message: "coverage differs between two runs of the same configuration".into(),
                });
            }
        }
        Ok(first)
    }
}

impl CoverageOracle for ExternalOracle {
    fn coverage(&self, config: &Configuration) -> Result<LocationSet> {
        self.spec.space.validate_config(config)?;
        let key = self.spec.space.canonical(config);
        if let Some(hit) = self
            .cache
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .get(&key)
        {
            return Ok(hit.clone());
        }
        let covered = self.run(config)?;
        self.cache
            .lock()
            .unwrap_or_else(|p| p.into_inner())
            .insert(key, covered.clone())?;
        Ok(covered)
    }
}
