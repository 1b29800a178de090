use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::interaction::FinalResult;

/// Comparison of an inferred result against a reference result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub delta_cov: i64,
    pub f_score: f64,
    #[serde(rename = "per_location")]
    pub per_location_f: BTreeMap<String, f64>,
    /// Locations present in only one of the two results.
    pub missing_locations: BTreeSet<String>,
}

/// Harmonic mean of atom precision and recall for one location.
///
/// Atoms are `(slot, option, value set)` triples, so two interactions agree
/// exactly when they constrain the same options to the same sets in the same
/// template position. Both `true` scores 1; exactly one `true` scores 0.
pub fn location_f_score(inferred: &FinalResult, exact: &FinalResult) -> f64 {
    let a = inferred.atoms();
    let b = exact.atoms();
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let shared = a.intersection(&b).count() as f64;
    if shared == 0.0 {
        return 0.0;
    }
    let precision = shared / a.len() as f64;
    let recall = shared / b.len() as f64;
    2.0 * precision * recall / (precision + recall)
}

/// `|locations(inferred)| − |locations(exact)|`.
pub fn delta_cov(
    inferred: &BTreeMap<String, FinalResult>,
    exact: &BTreeMap<String, FinalResult>,
) -> i64 {
    inferred.len() as i64 - exact.len() as i64
}

/// Mean per-location f-score over the union of locations; a location on
/// one side only scores 0. Two empty results score 1.
pub fn f_score(
    inferred: &BTreeMap<String, FinalResult>,
    exact: &BTreeMap<String, FinalResult>,
) -> EvalReport {
    let locations: BTreeSet<&String> = inferred.keys().chain(exact.keys()).collect();
    let mut per_location_f = BTreeMap::new();
    let mut missing_locations = BTreeSet::new();
    for loc in locations {
        let f = match (inferred.get(loc), exact.get(loc)) {
            (Some(a), Some(b)) => location_f_score(a, b),
            _ => {
                missing_locations.insert(loc.clone());
                0.0
            }
        };
        per_location_f.insert(loc.clone(), f);
    }
    let f_score = if per_location_f.is_empty() {
        1.0
    } else {
        per_location_f.values().sum::<f64>() / per_location_f.len() as f64
    };
    EvalReport {
        delta_cov: delta_cov(inferred, exact),
        f_score,
        per_location_f,
        missing_locations,
    }
}
