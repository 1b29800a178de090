//! Command-line front end.
//!
//! Every command prints its effective seed to the diagnostic stream and
//! writes one output document; rerunning with that seed reproduces the
//! document byte for byte. Exit codes: 0 success, 2 input or validation
//! problems, 3 oracle or runtime failures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config_space::{ConfigSpace, DEFAULT_ENUMERATION_CAP};
use crate::error::Error;
use crate::evaluation::{
    convergence_trajectory, exhaustive_infer, f_score, median, min_cover_best_of, random_baseline,
    siqr, DEFAULT_MIN_COVER_DRAWS,
};
use crate::inference::{
    self, InferenceParams, InferenceResult, DEFAULT_MAX_ITERATIONS, DEFAULT_PATIENCE,
};
use crate::interaction::{FinalResult, Predicate, DEFAULT_IMPLICATION_CAP};
use crate::oracle::{
    load_subject, CoverageCache, CoverageOracle, ExternalOracle, RunnerSpec, Subject, SubjectSpec,
};
use crate::report::{
    eval_json, eval_text, histogram_csv, histogram_text, interactions_text, length_histogram,
    result_text, trajectory_csv, ResultDoc,
};

/// Directory for persistent coverage caches of runner subjects. Defaults to
/// `.optinfer-cache` next to the subject file.
pub const CACHE_DIR_ENV: &str = "OPTINFER_CACHE_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "optinfer",
    version,
    about = "Infer configuration-option interactions from coverage"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the iterative inference loop on a subject.
    Infer(InferArgs),
    /// Evaluate every configuration and infer in one pass.
    Exhaustive(ExhaustiveArgs),
    /// Score one result document against another.
    Compare(CompareArgs),
    /// Derive a small set of configurations covering a result's interactions.
    Mincover(MincoverArgs),
    /// Walk through the bundled seven-option example end to end.
    Demo(DemoArgs),
    /// Count interactions and covered locations per interaction length.
    Histogram(HistogramArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    /// Write the document here instead of standard output.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    /// Bound on concurrent oracle evaluations.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Discard the coverage cache of a runner subject before starting.
    #[arg(long)]
    pub fresh: bool,
    /// Run every uncached configuration twice and fail if coverage differs.
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Args)]
pub struct InferArgs {
    pub subject: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutputArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: usize,
    /// Unchanged refinement attempts per core before it is set aside (0 stops at the first unchanged iteration).
    #[arg(long, default_value_t = DEFAULT_PATIENCE)]
    pub patience: usize,
    /// Largest option-domain product enumerated when comparing interactions.
    #[arg(long, default_value_t = DEFAULT_IMPLICATION_CAP)]
    pub cap: u64,
    /// Leave the space's default configuration out of the first batch.
    #[arg(long)]
    pub no_default: bool,
    /// Run this many seeds (seed, seed+1, ...) and report medians and semi-interquartile ranges.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub repeats: u64,
    /// Sample this many random configurations in one pass instead of iterating.
    #[arg(long)]
    pub baseline: Option<usize>,
    /// Reference result document for `--trajectory`.
    #[arg(long, requires = "trajectory")]
    pub exact: Option<PathBuf>,
    /// Write the per-iteration f-score against `--exact` as CSV.
    #[arg(long, requires = "exact")]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExhaustiveArgs {
    pub subject: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
    #[command(flatten)]
    pub oracle: OracleArgs,
    /// Refuse spaces with more configurations than this.
    #[arg(long, default_value_t = DEFAULT_ENUMERATION_CAP)]
    pub cap: u64,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub inferred: PathBuf,
    pub exact: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MincoverArgs {
    pub result: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Independent greedy draws; the smallest cover is reported.
    #[arg(long, default_value_t = DEFAULT_MIN_COVER_DRAWS)]
    pub draws: usize,
    #[arg(long, default_value_t = DEFAULT_IMPLICATION_CAP)]
    pub cap: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct HistogramArgs {
    pub result: PathBuf,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// A failed command with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Oracle { .. } => CliError::runtime(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Runs a parsed command, writing the document to `stdout` (or `--output`)
/// and diagnostics to `stderr`. Returns the process exit code.
pub fn execute(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let outcome = match &cli.command {
        Command::Infer(a) => cmd_infer(a, stderr),
        Command::Exhaustive(a) => cmd_exhaustive(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Mincover(a) => cmd_mincover(a, stderr),
        Command::Demo(a) => cmd_demo(a, stderr),
        Command::Histogram(a) => cmd_histogram(a),
    };
    let written = outcome.and_then(|(doc, target)| emit(&doc, target.as_deref(), stdout));
    match written {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message);
            e.code
        }
    }
}

fn emit(doc: &str, target: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    match target {
        Some(path) => std::fs::write(path, doc)
            .map_err(|e| CliError::runtime(format!("{}: {e}", path.display()))),
        None => stdout
            .write_all(doc.as_bytes())
            .map_err(|e| CliError::runtime(format!("writing output: {e}"))),
    }
}

type Document = (String, Option<PathBuf>);

fn effective_seed(seed: Option<u64>, stderr: &mut dyn Write) -> u64 {
    let seed = seed.unwrap_or_else(|| u64::from(rand::random::<u32>()));
    let _ = writeln!(stderr, "seed: {seed}");
    seed
}

fn require_format(format: Format, allowed: &[Format], command: &str) -> CliResult<()> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        Err(CliError::input(
            format!("`{command}` does not support --format {format:?}").to_lowercase(),
        ))
    }
}

fn cache_path(subject: &Path) -> PathBuf {
    let dir = std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| {
            subject
                .parent()
                .unwrap_or(Path::new("."))
                .join(".optinfer-cache")
        });
    let stem = subject
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("subject");
    dir.join(format!("{stem}.jsonl"))
}

/// A loaded subject ready to answer coverage queries.
enum LoadedOracle {
    Synthetic(SubjectSpec),
    External(ExternalOracle),
}

impl LoadedOracle {
    fn load(path: &Path, opts: &OracleArgs) -> CliResult<Self> {
        match load_subject(path)? {
            Subject::Synthetic(spec) => Ok(LoadedOracle::Synthetic(spec)),
            Subject::Runner(spec) => Ok(LoadedOracle::External(external(spec, path, opts)?)),
        }
    }

    fn space(&self) -> &ConfigSpace {
        match self {
            LoadedOracle::Synthetic(s) => &s.space,
            LoadedOracle::External(o) => &o.spec().space,
        }
    }

    fn oracle(&self) -> &dyn CoverageOracle {
        match self {
            LoadedOracle::Synthetic(s) => s,
            LoadedOracle::External(o) => o,
        }
    }
}

fn external(spec: RunnerSpec, subject: &Path, opts: &OracleArgs) -> CliResult<ExternalOracle> {
    let path = cache_path(subject);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::runtime(format!("{}: {e}", dir.display())))?;
    }
    let cache =
        CoverageCache::open(&path, opts.fresh).map_err(|e| CliError::runtime(e.to_string()))?;
    Ok(ExternalOracle::new(spec, cache).with_verification(opts.verify))
}

fn result_document(result: &InferenceResult, format: Format) -> String {
    match format {
        Format::Text => result_text(result),
        _ => ResultDoc::from_result(result).to_json(),
    }
}

fn load_result(path: &Path) -> CliResult<(ResultDoc, ConfigSpace, BTreeMap<String, FinalResult>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let doc = ResultDoc::from_json(&text)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    let (space, interactions) = doc
        .decode()
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok((doc, space, interactions))
}

fn cmd_infer(a: &InferArgs, stderr: &mut dyn Write) -> CliResult<Document> {
    require_format(a.out.format, &[Format::Json, Format::Text], "infer")?;
    let seed = effective_seed(a.seed, stderr);
    let loaded = LoadedOracle::load(&a.subject, &a.oracle)?;
    let space = loaded.space();
    let params = |seed: u64| InferenceParams {
        seed,
        max_iterations: a.max_iterations,
        implication_cap: a.cap,
        include_default: !a.no_default,
        jobs: a.oracle.jobs,
        patience: a.patience,
    };
    let run_one = |seed: u64| -> CliResult<InferenceResult> {
        Ok(match a.baseline {
            Some(n) => random_baseline(
                loaded.oracle(),
                space,
                n,
                !a.no_default,
                seed,
                a.oracle.jobs,
            )?,
            None => inference::run(loaded.oracle(), space, &params(seed))?,
        })
    };

    if a.repeats > 1 {
        let runs = (0..a.repeats)
            .map(|i| run_one(seed.wrapping_add(i)))
            .collect::<CliResult<Vec<_>>>()?;
        return Ok((repeats_document(&runs, a.out.format), a.out.output.clone()));
    }

    let result = run_one(seed)?;
    for w in &result.warnings {
        let _ = writeln!(stderr, "warning: {w}");
    }
    if let (Some(exact_path), Some(csv_path)) = (&a.exact, &a.trajectory) {
        let (_, exact_space, exact) = load_result(exact_path)?;
        if exact_space.to_doc() != space.to_doc() {
            return Err(CliError::input(
                "the --exact result was computed over a different space",
            ));
        }
        let csv = trajectory_csv(&convergence_trajectory(&result, &exact));
        std::fs::write(csv_path, csv)
            .map_err(|e| CliError::runtime(format!("{}: {e}", csv_path.display())))?;
    }
    Ok((result_document(&result, a.out.format), a.out.output.clone()))
}

#[derive(Serialize)]
struct RepeatRun {
    seed: u64,
    iterations: usize,
    configs_used: usize,
    locations: usize,
    fixpoint: bool,
}

#[derive(Serialize)]
struct Spread {
    median: f64,
    siqr: f64,
}

impl Spread {
    fn of(values: impl Iterator<Item = usize>) -> Spread {
        let v: Vec<f64> = values.map(|x| x as f64).collect();
        Spread {
            median: median(&v),
            siqr: siqr(&v),
        }
    }
}

#[derive(Serialize)]
struct RepeatSummary {
    repeats: usize,
    configs_used: Spread,
    iterations: Spread,
    locations: Spread,
    runs: Vec<RepeatRun>,
}

fn repeats_document(runs: &[InferenceResult], format: Format) -> String {
    let summary = RepeatSummary {
        repeats: runs.len(),
        configs_used: Spread::of(runs.iter().map(|r| r.configs_used)),
        iterations: Spread::of(runs.iter().map(|r| r.iterations)),
        locations: Spread::of(runs.iter().map(|r| r.interactions.len())),
        runs: runs
            .iter()
            .map(|r| RepeatRun {
                seed: r.seed,
                iterations: r.iterations,
                configs_used: r.configs_used,
                locations: r.interactions.len(),
                fixpoint: r.fixpoint,
            })
            .collect(),
    };
    if format == Format::Text {
        let mut out = String::new();
        let _ = writeln!(out, "runs: {}", summary.repeats);
        for (name, s) in [
            ("configurations", &summary.configs_used),
            ("iterations", &summary.iterations),
            ("locations", &summary.locations),
        ] {
            let _ = writeln!(out, "{name}: median {} siqr {}", s.median, s.siqr);
        }
        out
    } else {
        serde_json::to_string_pretty(&summary).expect("summaries always serialize") + "\n"
    }
}

fn cmd_exhaustive(a: &ExhaustiveArgs) -> CliResult<Document> {
    require_format(a.out.format, &[Format::Json, Format::Text], "exhaustive")?;
    let loaded = LoadedOracle::load(&a.subject, &a.oracle)?;
    let result = exhaustive_infer(loaded.oracle(), loaded.space(), a.cap, a.oracle.jobs)?;
    Ok((result_document(&result, a.out.format), a.out.output.clone()))
}

fn cmd_compare(a: &CompareArgs) -> CliResult<Document> {
    require_format(a.out.format, &[Format::Json, Format::Text], "compare")?;
    let (_, space_a, inferred) = load_result(&a.inferred)?;
    let (_, space_b, exact) = load_result(&a.exact)?;
    if space_a.to_doc() != space_b.to_doc() {
        return Err(CliError::input(
            "the two results were computed over different spaces",
        ));
    }
    let report = f_score(&inferred, &exact);
    let doc = match a.out.format {
        Format::Text => eval_text(&report),
        _ => eval_json(&report),
    };
    Ok((doc, a.out.output.clone()))
}

#[derive(Serialize)]
struct MinCoverDoc {
    seed: u64,
    configs: Vec<BTreeMap<String, String>>,
    /// Locations whose interaction each configuration was built for.
    groups: Vec<Vec<String>>,
    covered: Vec<String>,
}

fn cmd_mincover(a: &MincoverArgs, stderr: &mut dyn Write) -> CliResult<Document> {
    let seed = effective_seed(a.seed, stderr);
    let (_, space, interactions) = load_result(&a.result)?;
    let locations: Vec<&String> = interactions.keys().collect();
    let requirements: Vec<FinalResult> = interactions.values().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cover = min_cover_best_of(&requirements, &space, &mut rng, a.cap, a.draws)?;
    let covered: Vec<String> = interactions
        .iter()
        .filter(|(_, r)| cover.configs.iter().any(|c| r.holds(c)))
        .map(|(l, _)| l.clone())
        .collect();
    let doc = match a.out.format {
        Format::Json => {
            let d = MinCoverDoc {
                seed,
                configs: cover
                    .configs
                    .iter()
                    .map(|c| space.config_to_map(c))
                    .collect(),
                groups: cover
                    .groups
                    .iter()
                    .map(|g| g.iter().map(|&i| locations[i].clone()).collect())
                    .collect(),
                covered,
            };
            serde_json::to_string_pretty(&d).expect("documents always serialize") + "\n"
        }
        Format::Text => {
            let mut out = String::new();
            for c in &cover.configs {
                let _ = writeln!(out, "{}", space.canonical(c));
            }
            let _ = writeln!(
                out,
                "covers {} of {} locations",
                covered.len(),
                interactions.len()
            );
            out
        }
        Format::Csv => {
            let names: Vec<&str> = space.options().iter().map(|o| o.name.as_str()).collect();
            let mut out = names.join(",") + "\n";
            for c in &cover.configs {
                let row: Vec<&str> = (0..space.num_options())
                    .map(|o| space.value_name(o, c.value(o)))
                    .collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
            out
        }
    };
    Ok((doc, a.out.output.clone()))
}

fn cmd_histogram(a: &HistogramArgs) -> CliResult<Document> {
    let (_, _, interactions) = load_result(&a.result)?;
    let h = length_histogram(&interactions);
    let doc = match a.out.format {
        Format::Json => {
            serde_json::to_string_pretty(&h).expect("documents always serialize") + "\n"
        }
        Format::Text => histogram_text(&h),
        Format::Csv => histogram_csv(&h),
    };
    Ok((doc, a.out.output.clone()))
}

fn coverage_line(
    space: &ConfigSpace,
    spec: &SubjectSpec,
    c: &crate::config_space::Configuration,
) -> String {
    let covered = crate::oracle::synthetic_coverage(spec, c)
        .map(|s| s.into_iter().collect::<Vec<_>>().join(","))
        .unwrap_or_default();
    format!("  {}  ->  {covered}\n", space.canonical(c))
}

fn cmd_demo(a: &DemoArgs, stderr: &mut dyn Write) -> CliResult<Document> {
    let seed = effective_seed(a.seed, stderr);
    let spec = SubjectSpec::fig1();
    let space = &spec.space;
    let mut out = String::new();

    let _ = writeln!(
        out,
        "Subject: {} options, {} configurations",
        space.num_options(),
        space.size()
    );
    for loc in &spec.locations {
        let _ = writeln!(out, "  {}: {}", loc.id, loc.source);
    }

    let result = inference::run(&spec, space, &InferenceParams::with_seed(seed))?;
    let _ = writeln!(out, "\nIteration 1 evaluates a 1-way covering array:");
    for c in &result.history[0].new_configs {
        out.push_str(&coverage_line(space, &spec, c));
    }
    if let Some(second) = result.history.get(1) {
        let _ = writeln!(
            out,
            "\nIteration 2 mutates the longest candidate one setting at a time ({} new):",
            second.new_configs.len()
        );
        for c in &second.new_configs {
            out.push_str(&coverage_line(space, &spec, c));
        }
    }
    let _ = writeln!(
        out,
        "\nFinal interactions after {} iterations and {} of {} configurations:",
        result.iterations,
        result.configs_used,
        space.size()
    );
    out.push_str(&interactions_text(&result.interactions, space));

    let exact = exhaustive_infer(&spec, space, DEFAULT_ENUMERATION_CAP, 1)?;
    let report = f_score(&result.interactions, &exact.interactions);
    let _ = writeln!(
        out,
        "\nAgainst an exhaustive run over all {} configurations:",
        exact.configs_used
    );
    out.push_str(&eval_text(&report));

    let requirements: Vec<FinalResult> = result.interactions.values().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cover = min_cover_best_of(
        &requirements,
        space,
        &mut rng,
        DEFAULT_IMPLICATION_CAP,
        DEFAULT_MIN_COVER_DRAWS,
    )?;
    let _ = writeln!(
        out,
        "\n{} configurations cover every location:",
        cover.configs.len()
    );
    for c in &cover.configs {
        out.push_str(&coverage_line(space, &spec, c));
    }
    Ok((out, None))
}
