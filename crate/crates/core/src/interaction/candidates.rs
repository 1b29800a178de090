use std::collections::HashSet;

use super::{check, implies, negate_core, FinalResult, Implication, Interaction};
use crate::config_space::{
    pointwise_union, union_from_masks, ConfigSpace, Configuration, SettingSet,
};
use crate::error::{Error, Result};

/// The four per-location candidates plus the cores they were built from.
///
/// Only the four components take part in equality for the fix-point test;
/// the cores are kept so configuration generation can refine them.
#[derive(Debug, Clone)]
pub struct CandidateTuple {
    pub conj: Interaction,
    pub disj: Interaction,
    pub conjdisj: Interaction,
    pub disjconj: Interaction,
    /// Union of the covering configurations (`conj`'s core).
    pub conj_core: SettingSet,
    /// Union of the non-covering configurations; `disj` is its negation.
    pub disj_core: Option<SettingSet>,
    /// Union of covering configurations outside `disj`.
    pub conj_prime: Option<SettingSet>,
    /// Union of non-covering configurations inside `conj`; negated into `conjdisj`.
    pub disj_prime: Option<SettingSet>,
}

impl PartialEq for CandidateTuple {
    fn eq(&self, other: &Self) -> bool {
        self.components() == other.components()
    }
}

impl Eq for CandidateTuple {}

impl CandidateTuple {
    /// `conj`, `disj`, `conjdisj`, `disjconj`, in that order.
    pub fn components(&self) -> [&Interaction; 4] {
        [&self.conj, &self.disj, &self.conjdisj, &self.disjconj]
    }

    /// Applies [`check`] to every component.
    pub fn checked(&self, covering: &[&Configuration]) -> CandidateTuple {
        CandidateTuple {
            conj: check(&self.conj, covering.iter().copied()),
            disj: check(&self.disj, covering.iter().copied()),
            conjdisj: check(&self.conjdisj, covering.iter().copied()),
            disjconj: check(&self.disjconj, covering.iter().copied()),
            ..self.clone()
        }
    }

    /// The cores configuration generation may pick from.
    pub fn refinement_cores(&self) -> impl Iterator<Item = &SettingSet> {
        std::iter::once(&self.conj_core)
            .chain(self.disj_core.as_ref())
            .chain(self.conj_prime.as_ref())
            .chain(self.disj_prime.as_ref())
    }
}

/// Builds the candidate tuple for one location from its covering and
/// non-covering configurations.
pub fn infer_candidates(
    cov: &[&Configuration],
    ncov: &[&Configuration],
    space: &ConfigSpace,
) -> Result<CandidateTuple> {
    if cov.is_empty() {
        return Err(Error::Structural(
            "location has no covering configuration".into(),
        ));
    }
    for c in cov.iter().chain(ncov) {
        space.validate_config(c)?;
    }
    let covering: HashSet<&Configuration> = cov.iter().copied().collect();
    if ncov.iter().any(|c| covering.contains(c)) {
        return Err(Error::Structural(
            "a configuration appears as both covering and non-covering".into(),
        ));
    }
    Ok(infer_candidates_unchecked(cov, ncov, space))
}

fn union_of<'a>(
    space: &ConfigSpace,
    configs: impl IntoIterator<Item = &'a Configuration>,
) -> Option<SettingSet> {
    let mut seen: Vec<Vec<bool>> = space
        .options()
        .iter()
        .map(|o| vec![false; o.len()])
        .collect();
    let mut any = false;
    for c in configs {
        any = true;
        for (slot, &v) in seen.iter_mut().zip(c.values()) {
            slot[v as usize] = true;
        }
    }
    any.then(|| union_from_masks(seen))
}

pub(crate) fn infer_candidates_unchecked(
    cov: &[&Configuration],
    ncov: &[&Configuration],
    space: &ConfigSpace,
) -> CandidateTuple {
    let conj_core = pointwise_union(space, cov.iter().copied()).expect("nonempty covering set");
    let conj = Interaction::conj(conj_core.clone());

    let Some(disj_core) = union_of(space, ncov.iter().copied()) else {
        // Covered by everything seen so far.
        return CandidateTuple {
            conjdisj: conj.clone(),
            conj,
            disj: Interaction::True,
            disjconj: Interaction::True,
            conj_core,
            disj_core: None,
            conj_prime: None,
            disj_prime: None,
        };
    };
    let disj_clauses = negate_core(&disj_core, space);
    let disj = Interaction::disj(disj_clauses.clone()).unwrap_or(Interaction::True);

    let disj_prime = union_of(
        space,
        ncov.iter().copied().filter(|c| conj_core.holds_all(c)),
    );
    let conjdisj = match &disj_prime {
        Some(core) => Interaction::conj_disj(conj_core.clone(), negate_core(core, space))
            .unwrap_or(Interaction::True),
        None => conj.clone(),
    };

    // Covering configurations that `disj` misses are exactly those inside its
    // non-covering core.
    let conj_prime = union_of(
        space,
        cov.iter().copied().filter(|c| disj_core.holds_all(c)),
    );
    let disjconj = match &conj_prime {
        Some(core) => {
            Interaction::disj_conj(disj_clauses, core.clone(), space).unwrap_or(Interaction::True)
        }
        None => disj.clone(),
    };

    CandidateTuple {
        conj,
        disj,
        conjdisj,
        disjconj,
        conj_core,
        disj_core: Some(disj_core),
        conj_prime,
        disj_prime,
    }
}

/// The logically strongest components of an already checked tuple.
///
/// A component is dropped when another one is strictly stronger, or
/// equivalent and earlier in `conj, disj, conjdisj, disjconj` order.
/// `Unknown` implications count as incomparable.
pub fn sel_strongest(tuple: &CandidateTuple, space: &ConfigSpace, cap: u64) -> FinalResult {
    let comps: Vec<&Interaction> = tuple
        .components()
        .into_iter()
        .filter(|c| !c.is_true())
        .collect();
    let n = comps.len();
    let mut imp = vec![vec![Implication::Yes; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                imp[i][j] = if comps[i] == comps[j] {
                    Implication::Yes
                } else {
                    implies(comps[i], comps[j], space, cap)
                };
            }
        }
    }
    let survivors: Vec<Interaction> = (0..n)
        .filter(|&i| {
            !(0..n).any(|j| j != i && imp[j][i].is_yes() && (!imp[i][j].is_yes() || j < i))
        })
        .map(|i| comps[i].clone())
        .collect();
    FinalResult::from_parts(survivors)
}
