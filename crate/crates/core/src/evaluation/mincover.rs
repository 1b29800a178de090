use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::config_space::{complete_randomly, ConfigSpace, Configuration, SettingSet};
use crate::error::{Error, Result};
use crate::interaction::{implies, FinalResult, Interaction, Predicate};

pub const DEFAULT_MIN_COVER_DRAWS: usize = 10;

/// Configurations jointly satisfying a set of interactions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinCoverResult {
    pub configs: Vec<Configuration>,
    /// Indices into the input, one group per emitted configuration.
    pub groups: Vec<Vec<usize>>,
}

/// Per-option allowed values; `None` means unconstrained.
type Cube = Vec<Option<BTreeSet<u32>>>;

fn restrict(cube: &Cube, set: &SettingSet) -> Option<Cube> {
    let mut out = cube.clone();
    for (o, values) in set.iter() {
        let next: BTreeSet<u32> = match &out[o] {
            Some(cur) => cur.intersection(values).copied().collect(),
            None => values.clone(),
        };
        if next.is_empty() {
            return None;
        }
        out[o] = Some(next);
    }
    Some(out)
}

fn single(option: usize, values: &BTreeSet<u32>) -> SettingSet {
    let mut s = SettingSet::new();
    s.insert_raw(option, values.clone());
    s
}

/// An interaction as a disjunction of cubes.
fn alternatives(phi: &Interaction) -> Vec<SettingSet> {
    match phi {
        Interaction::True => vec![SettingSet::new()],
        Interaction::Conj(core) => vec![core.clone()],
        Interaction::Disj(clauses) => clauses.iter().map(|(o, s)| single(o, s)).collect(),
        Interaction::ConjDisj { core, clauses } => clauses
            .iter()
            .map(|(o, s)| {
                let mut alt = core.clone();
                let merged = match core.get(o) {
                    Some(c) => c.intersection(s).copied().collect(),
                    None => s.clone(),
                };
                alt.insert_raw(o, merged);
                alt
            })
            .collect(),
        Interaction::DisjConj { clauses, core } => {
            let mut alts: Vec<SettingSet> = clauses.iter().map(|(o, s)| single(o, s)).collect();
            alts.push(core.clone());
            alts
        }
    }
}

/// Depth-first search for a cube satisfying every requirement. Gives up
/// (treats as unsatisfiable) after `budget` visited nodes.
fn solve(requirements: &[Vec<SettingSet>], cube: Cube, budget: &mut u64) -> Option<Cube> {
    let Some((first, rest)) = requirements.split_first() else {
        return Some(cube);
    };
    for alt in first {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        if let Some(next) = restrict(&cube, alt) {
            if let Some(found) = solve(rest, next, budget) {
                return Some(found);
            }
        }
    }
    None
}

fn requirement_cubes(group: &[&FinalResult]) -> Vec<Vec<SettingSet>> {
    let mut reqs: Vec<Vec<SettingSet>> = group
        .iter()
        .flat_map(|r| r.parts().iter().map(alternatives))
        .collect();
    // Fewest alternatives first prunes earliest.
    reqs.sort_by_key(Vec::len);
    reqs
}

fn model(group: &[&FinalResult], space: &ConfigSpace, cap: u64) -> Option<Cube> {
    let mut budget = cap;
    solve(
        &requirement_cubes(group),
        vec![None; space.num_options()],
        &mut budget,
    )
}

fn cube_to_settings(cube: &Cube, space: &ConfigSpace) -> SettingSet {
    let mut s = SettingSet::new();
    for (o, values) in cube.iter().enumerate() {
        if let Some(v) = values {
            s.constrain(space, o, v.clone())
                .expect("cube values come from valid interactions");
        }
    }
    s
}

/// Drops every interaction implied by another one; of two equivalent
/// interactions the earlier survives. Returns surviving indices.
pub fn remove_implied(requirements: &[FinalResult], space: &ConfigSpace, cap: u64) -> Vec<usize> {
    (0..requirements.len())
        .filter(|&i| {
            !(0..requirements.len()).any(|j| {
                j != i
                    && implies(&requirements[j], &requirements[i], space, cap).is_yes()
                    && (j < i || !implies(&requirements[i], &requirements[j], space, cap).is_yes())
            })
        })
        .collect()
}

/// Greedy covering configurations: drop implied interactions, conjoin the
/// rest in random order while the running conjunction stays satisfiable,
/// and emit one configuration per group.
pub fn min_cover<R: Rng + ?Sized>(
    requirements: &[FinalResult],
    space: &ConfigSpace,
    rng: &mut R,
    cap: u64,
) -> Result<MinCoverResult> {
    for r in requirements {
        if model(&[r], space, cap).is_none() {
            return Err(Error::Invalid(vec![format!(
                "interaction `{}` is unsatisfiable",
                r.render_ascii(space)
            )]));
        }
    }
    let mut order = remove_implied(requirements, space, cap);
    order.shuffle(rng);

    let mut groups: Vec<(Vec<usize>, Cube)> = Vec::new();
    for i in order {
        let mut placed = false;
        if let Some((members, cube)) = groups.last_mut() {
            let mut trial: Vec<&FinalResult> = members.iter().map(|&m| &requirements[m]).collect();
            trial.push(&requirements[i]);
            if let Some(found) = model(&trial, space, cap) {
                members.push(i);
                *cube = found;
                placed = true;
            }
        }
        if !placed {
            let cube = model(&[&requirements[i]], space, cap).expect("checked satisfiable above");
            groups.push((vec![i], cube));
        }
    }

    let mut configs = Vec::new();
    let mut out_groups = Vec::new();
    for (members, cube) in groups {
        let config = complete_randomly(&cube_to_settings(&cube, space), space, rng);
        debug_assert!(members.iter().all(|&m| requirements[m].holds(&config)));
        configs.push(config);
        out_groups.push(members);
    }
    Ok(MinCoverResult {
        configs,
        groups: out_groups,
    })
}

/// The smallest of `draws` independent greedy covers (earliest on ties).
pub fn min_cover_best_of<R: Rng + ?Sized>(
    requirements: &[FinalResult],
    space: &ConfigSpace,
    rng: &mut R,
    cap: u64,
    draws: usize,
) -> Result<MinCoverResult> {
    let mut best = min_cover(requirements, space, rng, cap)?;
    for _ in 1..draws.max(1) {
        let next = min_cover(requirements, space, rng, cap)?;
        if next.configs.len() < best.configs.len() {
            best = next;
        }
    }
    Ok(best)
}
