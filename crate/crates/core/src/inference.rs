//! The iterative inference loop.
//!
//! Each iteration evaluates the configurations not seen before, rebuilds the
//! covering / non-covering sets of every location over all evaluated
//! configurations, and infers a [`CandidateTuple`] per location. Each
//! iteration then mutates the longest candidate core into a batch of new
//! configurations.
//!
//! An iteration that changes neither the covered locations nor any tuple
//! does not end the loop by itself: the core that produced it counts one
//! unchanged attempt, and after [`InferenceParams::patience`] such attempts it
//! is set aside. The loop reaches its fix-point when an unchanged iteration
//! leaves no core with fresh mutations to try. Any change resets all counts.
//!
//! All randomness comes from one ChaCha stream seeded by
//! [`InferenceParams::seed`]. It is consumed in a fixed order (covering
//! array, then per iteration: tie-break shuffle, then mutation fills in space
//! order), so a seed reproduces a run exactly.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::config_space::{
    all_configurations, complete_randomly, one_way_covering_array, random_configuration,
    ConfigSpace, Configuration, SettingSet,
};
use crate::error::Result;
use crate::interaction::{
    infer_candidates_unchecked, sel_strongest, CandidateTuple, FinalResult, DEFAULT_IMPLICATION_CAP,
};
use crate::oracle::{CoverageOracle, LocationSet};

pub const DEFAULT_MAX_ITERATIONS: usize = 100;
pub const DEFAULT_PATIENCE: usize = 4;

/// Largest space the fallback generator will enumerate to find an unseen configuration.
const FALLBACK_ENUMERATION_CAP: u64 = 1_000_000;
const FALLBACK_RANDOM_TRIES: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InferenceParams {
    pub seed: u64,
    pub max_iterations: usize,
    pub implication_cap: u64,
    /// Seed the first batch with the space's default configuration, if it has one.
    pub include_default: bool,
    /// Upper bound on concurrent oracle calls.
    pub jobs: usize,
    /// Unchanged refinement batches a core may produce before it is set aside
    /// until something changes. 0 stops at the first unchanged iteration.
    pub patience: usize,
}

impl Default for InferenceParams {
    fn default() -> Self {
        InferenceParams {
            seed: 0,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            implication_cap: DEFAULT_IMPLICATION_CAP,
            include_default: true,
            jobs: 1,
            patience: DEFAULT_PATIENCE,
        }
    }
}

impl InferenceParams {
    pub fn with_seed(seed: u64) -> Self {
        InferenceParams {
            seed,
            ..Default::default()
        }
    }
}

/// Evaluated configurations (with stable ids) and which of them cover each location.
#[derive(Debug, Clone)]
pub struct CoverageMap {
    universe: Vec<Configuration>,
    ids: HashMap<Configuration, usize>,
    cov: BTreeMap<String, BTreeSet<usize>>,
}

impl CoverageMap {
    fn new() -> Self {
        CoverageMap {
            universe: Vec::new(),
            ids: HashMap::new(),
            cov: BTreeMap::new(),
        }
    }

    pub fn universe(&self) -> &[Configuration] {
        &self.universe
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.ids.contains_key(config)
    }

    pub fn locations(&self) -> impl Iterator<Item = &str> {
        self.cov.keys().map(String::as_str)
    }

    pub fn covered_locations(&self) -> BTreeSet<String> {
        self.cov.keys().cloned().collect()
    }

    /// Ids of the configurations covering `location`.
    pub fn cov(&self, location: &str) -> Option<&BTreeSet<usize>> {
        self.cov.get(location)
    }

    /// Configurations covering `location`.
    pub fn covering(&self, location: &str) -> Vec<&Configuration> {
        self.cov
            .get(location)
            .map(|ids| ids.iter().map(|&i| &self.universe[i]).collect())
            .unwrap_or_default()
    }

    /// Configurations not covering `location`; derived from the universe.
    pub fn non_covering(&self, location: &str) -> Vec<&Configuration> {
        let empty = BTreeSet::new();
        let ids = self.cov.get(location).unwrap_or(&empty);
        self.universe
            .iter()
            .enumerate()
            .filter(|(i, _)| !ids.contains(i))
            .map(|(_, c)| c)
            .collect()
    }

    fn add(&mut self, config: Configuration, covered: LocationSet) {
        let id = self.universe.len();
        for loc in covered {
            self.cov.entry(loc).or_default().insert(id);
        }
        self.ids.insert(config.clone(), id);
        self.universe.push(config);
    }

    /// Evaluates the configurations not seen yet and records their coverage in
    /// input order. Returns the configurations that were new.
    pub(crate) fn evaluate<O: CoverageOracle + ?Sized>(
        &mut self,
        oracle: &O,
        configs: Vec<Configuration>,
        jobs: usize,
    ) -> Result<Vec<Configuration>> {
        let mut seen = HashSet::new();
        let fresh: Vec<Configuration> = configs
            .into_iter()
            .filter(|c| !self.contains(c) && seen.insert(c.clone()))
            .collect();
        let results = evaluate_all(oracle, &fresh, jobs);
        for (config, result) in fresh.iter().zip(results) {
            self.add(config.clone(), result?);
        }
        Ok(fresh)
    }

    /// Candidate tuple of every covered location.
    pub fn candidates(&self, space: &ConfigSpace) -> BTreeMap<String, CandidateTuple> {
        self.cov
            .keys()
            .map(|loc| {
                let cov = self.covering(loc);
                let ncov = self.non_covering(loc);
                (loc.clone(), infer_candidates_unchecked(&cov, &ncov, space))
            })
            .collect()
    }

    /// Checks each tuple against its covering configurations and keeps the strongest.
    pub fn finalize(
        &self,
        tuples: &BTreeMap<String, CandidateTuple>,
        space: &ConfigSpace,
        cap: u64,
    ) -> BTreeMap<String, FinalResult> {
        tuples
            .iter()
            .map(|(loc, t)| {
                let checked = t.checked(&self.covering(loc));
                (loc.clone(), sel_strongest(&checked, space, cap))
            })
            .collect()
    }
}

/// Runs the oracle over `configs`, with up to `jobs` calls in flight. Results
/// come back in input order whatever the completion order.
fn evaluate_all<O: CoverageOracle + ?Sized>(
    oracle: &O,
    configs: &[Configuration],
    jobs: usize,
) -> Vec<Result<LocationSet>> {
    let jobs = jobs.max(1).min(configs.len().max(1));
    if jobs == 1 {
        return configs.iter().map(|c| oracle.coverage(c)).collect();
    }
    let next = AtomicUsize::new(0);
    let mut slots: Vec<Option<Result<LocationSet>>> = (0..configs.len()).map(|_| None).collect();
    let collected: Vec<Vec<(usize, Result<LocationSet>)>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|_| {
                scope.spawn(|| {
                    let mut out = Vec::new();
                    loop {
                        let i = next.fetch_add(1, Ordering::SeqCst);
                        if i >= configs.len() {
                            break;
                        }
                        out.push((i, oracle.coverage(&configs[i])));
                    }
                    out
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("oracle worker panicked"))
            .collect()
    });
    for (i, r) in collected.into_iter().flatten() {
        slots[i] = Some(r);
    }
    slots
        .into_iter()
        .map(|s| s.expect("every configuration evaluated"))
        .collect()
}

/// Snapshot of one loop iteration.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Configurations evaluated for the first time in this iteration.
    pub new_configs: Vec<Configuration>,
    pub total_configs: usize,
    /// Hash of every location's candidate tuple, for cheap comparison across runs.
    pub digest: String,
    /// What the loop would answer if it stopped here.
    pub provisional: BTreeMap<String, FinalResult>,
}

#[derive(Debug, Clone)]
pub struct InferenceResult {
    pub space: ConfigSpace,
    pub seed: u64,
    pub iterations: usize,
    pub configs_used: usize,
    pub interactions: BTreeMap<String, FinalResult>,
    pub history: Vec<IterationRecord>,
    pub coverage: CoverageMap,
    /// True when the loop stopped because nothing changed.
    pub fixpoint: bool,
    pub warnings: Vec<String>,
}

/// Digest over the rendered components of every tuple.
pub fn tuples_digest(tuples: &BTreeMap<String, CandidateTuple>, space: &ConfigSpace) -> String {
    let mut hasher = Sha256::new();
    for (loc, t) in tuples {
        hasher.update(loc.as_bytes());
        for c in t.components() {
            hasher.update([0u8]);
            hasher.update(c.render_ascii(space).as_bytes());
        }
        hasher.update([1u8]);
    }
    hasher
        .finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// The loop has converged when the covered locations and every tuple's four
/// components are unchanged.
pub fn fixpoint_reached(
    prev_cov: &BTreeSet<String>,
    prev_tuples: &BTreeMap<String, CandidateTuple>,
    cur_cov: &BTreeSet<String>,
    cur_tuples: &BTreeMap<String, CandidateTuple>,
) -> bool {
    prev_cov == cur_cov && prev_tuples == cur_tuples
}

/// A batch of configurations that refine the longest candidate core.
///
/// Every distinct conj / disj / conj′ / disj′ core of every location
/// competes; ties for the longest are broken uniformly at random. Each value
/// outside the chosen core's set for each constrained option yields one
/// configuration with that single setting flipped and everything else drawn
/// to satisfy the core. Configurations already in `existing` are dropped. A
/// core whose mutations were all evaluated before is passed over for the
/// next longest; when every core is spent, one unseen random configuration
/// is returned instead (or nothing when the space is exhausted).
pub fn gen_new_configs<R: Rng + ?Sized>(
    tuples: &BTreeMap<String, CandidateTuple>,
    existing: &HashSet<Configuration>,
    space: &ConfigSpace,
    rng: &mut R,
) -> Vec<Configuration> {
    match refine_longest(tuples, existing, &BTreeSet::new(), space, rng) {
        Some((_, batch)) => batch,
        None => random_unseen(existing, space, rng).into_iter().collect(),
    }
}

/// The longest core outside `skip` that still has unseen mutations, with its batch.
fn refine_longest<R: Rng + ?Sized>(
    tuples: &BTreeMap<String, CandidateTuple>,
    existing: &HashSet<Configuration>,
    skip: &BTreeSet<SettingSet>,
    space: &ConfigSpace,
    rng: &mut R,
) -> Option<(SettingSet, Vec<Configuration>)> {
    let mut pool: Vec<&SettingSet> = tuples
        .values()
        .flat_map(CandidateTuple::refinement_cores)
        .filter(|c| !c.is_empty() && !skip.contains(*c))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    pool.shuffle(rng);
    pool.sort_by_key(|c| std::cmp::Reverse(c.len()));
    for core in pool {
        let mut seen = HashSet::new();
        let batch: Vec<Configuration> = mutations(core, space, rng)
            .into_iter()
            .filter(|c| !existing.contains(c) && seen.insert(c.clone()))
            .collect();
        if !batch.is_empty() {
            return Some((core.clone(), batch));
        }
    }
    None
}

/// One configuration per (constrained option, value outside its set).
pub(crate) fn mutations<R: Rng + ?Sized>(
    core: &SettingSet,
    space: &ConfigSpace,
    rng: &mut R,
) -> Vec<Configuration> {
    let mut out = Vec::new();
    for (o, values) in core.iter() {
        for v in 0..space.domain_size(o) as u32 {
            if values.contains(&v) {
                continue;
            }
            let mut flipped = core.clone();
            flipped.insert_raw(o, BTreeSet::from([v]));
            out.push(complete_randomly(&flipped, space, rng));
        }
    }
    out
}

fn random_unseen<R: Rng + ?Sized>(
    existing: &HashSet<Configuration>,
    space: &ConfigSpace,
    rng: &mut R,
) -> Option<Configuration> {
    for _ in 0..FALLBACK_RANDOM_TRIES {
        let c = random_configuration(space, rng);
        if !existing.contains(&c) {
            return Some(c);
        }
    }
    let all = all_configurations(space, FALLBACK_ENUMERATION_CAP).ok()?;
    let unseen: Vec<Configuration> = all.into_iter().filter(|c| !existing.contains(c)).collect();
    unseen.choose(rng).cloned()
}

/// Infers the interactions of every location the oracle ever reports.
pub fn run<O: CoverageOracle + ?Sized>(
    oracle: &O,
    space: &ConfigSpace,
    params: &InferenceParams,
) -> Result<InferenceResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let max_iterations = params.max_iterations.max(1);
    let mut coverage = CoverageMap::new();
    let mut known: HashSet<Configuration> = HashSet::new();

    let mut pending = one_way_covering_array(space, &mut rng);
    if params.include_default {
        if let Some(default) = space.default_config() {
            pending.push(default.clone());
        }
    }

    let mut history = Vec::new();
    let mut warnings = Vec::new();
    let mut previous: Option<(BTreeSet<String>, BTreeMap<String, CandidateTuple>)> = None;
    // Cores whose last batch left everything unchanged; cleared on any change.
    let mut tried: BTreeSet<SettingSet> = BTreeSet::new();
    let mut attempts: BTreeMap<SettingSet, usize> = BTreeMap::new();
    let mut refined: Option<SettingSet> = None;
    let mut fixpoint = false;

    let last_tuples = loop {
        let iteration = history.len() + 1;
        let added = coverage.evaluate(oracle, pending, params.jobs)?;
        known.extend(added.iter().cloned());
        let tuples = coverage.candidates(space);
        let covered = coverage.covered_locations();
        history.push(IterationRecord {
            iteration,
            new_configs: added,
            total_configs: coverage.universe().len(),
            digest: tuples_digest(&tuples, space),
            provisional: coverage.finalize(&tuples, space, params.implication_cap),
        });

        let unchanged = previous.as_ref().is_some_and(|(prev_cov, prev_tuples)| {
            fixpoint_reached(prev_cov, prev_tuples, &covered, &tuples)
        });
        if unchanged {
            match refined.take() {
                Some(_) if params.patience == 0 => {
                    fixpoint = true;
                    break tuples;
                }
                Some(core) => {
                    let n = attempts.entry(core.clone()).or_default();
                    *n += 1;
                    if *n >= params.patience {
                        tried.insert(core);
                    }
                }
                None => {
                    fixpoint = true;
                    break tuples;
                }
            }
        } else {
            tried.clear();
            attempts.clear();
        }
        if iteration == max_iterations {
            warnings.push(format!(
                "stopped after {max_iterations} iterations without reaching a fix-point"
            ));
            break tuples;
        }
        match refine_longest(&tuples, &known, &tried, space, &mut rng) {
            Some((core, batch)) => {
                refined = Some(core);
                pending = batch;
            }
            None if unchanged => {
                fixpoint = true;
                break tuples;
            }
            None => match random_unseen(&known, space, &mut rng) {
                Some(c) => {
                    refined = None;
                    pending = vec![c];
                }
                None => {
                    warnings.push("every configuration of the space has been evaluated".into());
                    break tuples;
                }
            },
        }
        previous = Some((covered, tuples));
    };

    let interactions = coverage.finalize(&last_tuples, space, params.implication_cap);
    Ok(InferenceResult {
        space: space.clone(),
        seed: params.seed,
        iterations: history.len(),
        configs_used: coverage.universe().len(),
        interactions,
        history,
        coverage,
        fixpoint,
        warnings,
    })
}

/// One inference pass over a fixed configuration set (no refinement loop).
pub fn single_pass<O: CoverageOracle + ?Sized>(
    oracle: &O,
    space: &ConfigSpace,
    configs: Vec<Configuration>,
    seed: u64,
    cap: u64,
    jobs: usize,
) -> Result<InferenceResult> {
    let mut coverage = CoverageMap::new();
    let added = coverage.evaluate(oracle, configs, jobs)?;
    let tuples = coverage.candidates(space);
    let interactions = coverage.finalize(&tuples, space, cap);
    let record = IterationRecord {
        iteration: 1,
        new_configs: added,
        total_configs: coverage.universe().len(),
        digest: tuples_digest(&tuples, space),
        provisional: interactions.clone(),
    };
    Ok(InferenceResult {
        space: space.clone(),
        seed,
        iterations: 1,
        configs_used: coverage.universe().len(),
        interactions,
        history: vec![record],
        coverage,
        fixpoint: true,
        warnings: Vec::new(),
    })
}
