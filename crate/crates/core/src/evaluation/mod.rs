//! Ground truth and comparison tooling: exhaustive runs, the random
//! baseline, f-scores, convergence trajectories and covering configurations.

mod fscore;
mod mincover;

use std::collections::{BTreeMap, HashSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config_space::{all_configurations, random_configuration, ConfigSpace, Configuration};
use crate::error::Result;
use crate::inference::{single_pass, InferenceResult};
use crate::interaction::{FinalResult, DEFAULT_IMPLICATION_CAP};
use crate::oracle::CoverageOracle;

pub use fscore::{delta_cov, f_score, location_f_score, EvalReport};
pub use mincover::{
    min_cover, min_cover_best_of, remove_implied, MinCoverResult, DEFAULT_MIN_COVER_DRAWS,
};

/// One inference pass over every configuration of the space.
pub fn exhaustive_infer<O: CoverageOracle + ?Sized>(
    oracle: &O,
    space: &ConfigSpace,
    cap: u64,
    jobs: usize,
) -> Result<InferenceResult> {
    let all = all_configurations(space, cap)?;
    single_pass(oracle, space, all, 0, DEFAULT_IMPLICATION_CAP, jobs)
}

/// One inference pass over `n_configs` distinct uniform configurations,
/// plus the default configuration when requested. A budget at or above the
/// space size evaluates the whole space in the same order as
/// [`exhaustive_infer`].
pub fn random_baseline<O: CoverageOracle + ?Sized>(
    oracle: &O,
    space: &ConfigSpace,
    n_configs: usize,
    include_default: bool,
    seed: u64,
    jobs: usize,
) -> Result<InferenceResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_configs.max(1);
    let size = space.size_u64();
    let mut warnings = Vec::new();
    let configs: Vec<Configuration> = match size {
        Some(total) if n as u64 >= total => {
            if n as u64 > total {
                warnings.push(format!(
                    "requested {n} configurations but the space has only {total}"
                ));
            }
            all_configurations(space, total)?
        }
        // Dense requests sample without replacement from the enumeration.
        Some(total) if (n as u64).saturating_mul(2) > total => {
            let all = all_configurations(space, total)?;
            all.choose_multiple(&mut rng, n).cloned().collect()
        }
        _ => {
            let mut seen = HashSet::new();
            let mut out = Vec::with_capacity(n);
            while out.len() < n {
                let c = random_configuration(space, &mut rng);
                if seen.insert(c.clone()) {
                    out.push(c);
                }
            }
            out
        }
    };
    let mut configs = configs;
    if include_default {
        if let Some(d) = space.default_config() {
            if !configs.contains(d) {
                configs.push(d.clone());
            }
        }
    }
    let mut result = single_pass(oracle, space, configs, seed, DEFAULT_IMPLICATION_CAP, jobs)?;
    result.warnings.extend(warnings);
    Ok(result)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    /// `iteration / total iterations`.
    pub normalized_x: f64,
    pub f_score: f64,
}

/// Scores every iteration's provisional answer against `exact`.
pub fn convergence_trajectory(
    result: &InferenceResult,
    exact: &BTreeMap<String, FinalResult>,
) -> Vec<TrajectoryPoint> {
    let total = result.history.len().max(1) as f64;
    result
        .history
        .iter()
        .map(|h| TrajectoryPoint {
            iteration: h.iteration,
            normalized_x: h.iteration as f64 / total,
            f_score: f_score(&h.provisional, exact).f_score,
        })
        .collect()
}

/// Median of a sample; `NaN` when empty.
pub fn median(values: &[f64]) -> f64 {
    quantile(values, 0.5)
}

/// Semi-interquartile range: half the distance between the quartiles.
pub fn siqr(values: &[f64]) -> f64 {
    (quantile(values, 0.75) - quantile(values, 0.25)) / 2.0
}

/// Linear-interpolated quantile.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    let pos = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
}
