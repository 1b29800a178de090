//! On-disk documents and human-readable renderings of results.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config_space::{ConfigSpace, SpaceDoc};
use crate::error::{Error, Result};
use crate::evaluation::{EvalReport, TrajectoryPoint};
use crate::inference::InferenceResult;
use crate::interaction::{parse_final, FinalResult};

/// One loop iteration as stored in a result document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistoryDoc {
    pub iteration: usize,
    /// Canonical `name=value,...` strings.
    pub new_configs: Vec<String>,
    pub configs_total: usize,
    pub digest: String,
}

/// The result document written by `infer` and `exhaustive`.
///
/// Interactions are rendered in the ASCII grammar so the file is plain JSON
/// text that any tool can read and that [`ResultDoc::decode`] parses back.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultDoc {
    pub seed: u64,
    pub iterations: usize,
    pub configs_used: usize,
    #[serde(default)]
    pub fixpoint: bool,
    #[serde(default)]
    pub warnings: Vec<String>,
    pub space: SpaceDoc,
    pub interactions: BTreeMap<String, String>,
    #[serde(default)]
    pub history: Vec<HistoryDoc>,
}

impl ResultDoc {
    pub fn from_result(result: &InferenceResult) -> ResultDoc {
        let space = &result.space;
        ResultDoc {
            seed: result.seed,
            iterations: result.iterations,
            configs_used: result.configs_used,
            fixpoint: result.fixpoint,
            warnings: result.warnings.clone(),
            space: space.to_doc(),
            interactions: result
                .interactions
                .iter()
                .map(|(l, r)| (l.clone(), r.render_ascii(space)))
                .collect(),
            history: result
                .history
                .iter()
                .map(|h| HistoryDoc {
                    iteration: h.iteration,
                    new_configs: h.new_configs.iter().map(|c| space.canonical(c)).collect(),
                    configs_total: h.total_configs,
                    digest: h.digest.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<ResultDoc> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result documents always serialize") + "\n"
    }

    /// The space and the parsed interactions; every unreadable entry is reported.
    pub fn decode(&self) -> Result<(ConfigSpace, BTreeMap<String, FinalResult>)> {
        let space = ConfigSpace::from_doc(&self.space)?;
        let mut out = BTreeMap::new();
        let mut errors = Vec::new();
        for (loc, text) in &self.interactions {
            match parse_final(text, &space) {
                Ok(r) => {
                    out.insert(loc.clone(), r);
                }
                Err(e) => errors.push(format!("location `{loc}`: {e}")),
            }
        }
        if errors.is_empty() {
            Ok((space, out))
        } else {
            Err(Error::Invalid(errors))
        }
    }
}

/// Plain-text summary of a result with Unicode interactions.
pub fn result_text(result: &InferenceResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "seed: {}", result.seed);
    let stop = if result.fixpoint {
        "fix-point"
    } else {
        "stopped early"
    };
    let _ = writeln!(out, "iterations: {} ({stop})", result.iterations);
    let _ = writeln!(out, "configurations: {}", result.configs_used);
    for w in &result.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    out.push_str(&interactions_text(&result.interactions, &result.space));
    out
}

/// `location: interaction` lines, interaction column aligned.
pub fn interactions_text(
    interactions: &BTreeMap<String, FinalResult>,
    space: &ConfigSpace,
) -> String {
    let width = interactions
        .keys()
        .map(|l| l.chars().count() + 1)
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    for (loc, r) in interactions {
        let label = format!("{loc}:");
        let _ = writeln!(out, "{label:<width$} {}", r.render(space));
    }
    out
}

/// Evaluation report as JSON.
pub fn eval_json(report: &EvalReport) -> String {
    serde_json::to_string_pretty(report).expect("reports always serialize") + "\n"
}

/// Evaluation report as an aligned table.
pub fn eval_text(report: &EvalReport) -> String {
    let width = report
        .per_location_f
        .keys()
        .map(|l| l.chars().count())
        .chain(["location".len()])
        .max()
        .unwrap_or(0);
    let mut out = String::new();
    let _ = writeln!(out, "{:<width$}  f-score", "location");
    for (loc, f) in &report.per_location_f {
        let mark = if report.missing_locations.contains(loc) {
            "  (one side only)"
        } else {
            ""
        };
        let _ = writeln!(out, "{loc:<width$}  {f:.3}{mark}");
    }
    let _ = writeln!(out, "f-score: {:.3}", report.f_score);
    let _ = writeln!(out, "delta cov: {}", report.delta_cov);
    out
}

/// Trajectory as CSV with header `iteration,normalized_x,f_score`.
pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from("iteration,normalized_x,f_score\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6}",
            p.iteration, p.normalized_x, p.f_score
        );
    }
    out
}

/// Interactions grouped by length; lengths of 10 or more share the last bucket.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthHistogram {
    pub buckets: Vec<LengthBucket>,
    pub max_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthBucket {
    pub length: String,
    /// Distinct interactions of this length.
    pub interactions: usize,
    /// Locations whose interaction has this length.
    pub locations: usize,
}

pub const HISTOGRAM_BUCKETS: usize = 10;

pub fn length_histogram(interactions: &BTreeMap<String, FinalResult>) -> LengthHistogram {
    let mut distinct: Vec<BTreeSet<&FinalResult>> = vec![BTreeSet::new(); HISTOGRAM_BUCKETS + 1];
    let mut locations = [0usize; HISTOGRAM_BUCKETS + 1];
    let mut max_length = 0;
    for r in interactions.values() {
        let len = r.length();
        max_length = max_length.max(len);
        let b = len.min(HISTOGRAM_BUCKETS);
        distinct[b].insert(r);
        locations[b] += 1;
    }
    let buckets = (0..=HISTOGRAM_BUCKETS)
        .map(|b| LengthBucket {
            length: if b == HISTOGRAM_BUCKETS {
                format!("{b}+")
            } else {
                b.to_string()
            },
            interactions: distinct[b].len(),
            locations: locations[b],
        })
        .collect();
    LengthHistogram {
        buckets,
        max_length,
    }
}

pub fn histogram_text(h: &LengthHistogram) -> String {
    let mut out = String::from("length  interactions  locations\n");
    for b in &h.buckets {
        if b.interactions > 0 {
            let _ = writeln!(
                out,
                "{:>6}  {:>12}  {:>9}",
                b.length, b.interactions, b.locations
            );
        }
    }
    let _ = writeln!(out, "max length: {}", h.max_length);
    out
}

pub fn histogram_csv(h: &LengthHistogram) -> String {
    let mut out = String::from("length,interactions,locations\n");
    for b in &h.buckets {
        let _ = writeln!(out, "{},{},{}", b.length, b.interactions, b.locations);
    }
    out
}
