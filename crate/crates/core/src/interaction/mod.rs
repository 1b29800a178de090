//! The interaction algebra.
//!
//! An [`Interaction`] is one of four template shapes over membership
//! constraints `o ∈ S`, or `true`. Constructors normalize, so structural
//! equality of two interactions built through them is a stable, decidable
//! stand-in for "same inferred formula".

mod candidates;
mod implication;
mod text;

use std::collections::{BTreeSet, HashSet};

use crate::config_space::{ConfigSpace, Configuration, SettingSet};
use crate::error::{Error, Result};

pub(crate) use candidates::infer_candidates_unchecked;
pub use candidates::{infer_candidates, sel_strongest, CandidateTuple};
pub use implication::{
    equivalent, find_model, implies, satisfiable, Implication, DEFAULT_IMPLICATION_CAP,
};
pub use text::{parse_final, parse_interaction};

/// Anything that can be evaluated on a configuration and names the options it reads.
pub trait Predicate {
    fn mentioned_options(&self) -> BTreeSet<usize>;

    /// Evaluates on `config`, which must assign every mentioned option.
    fn holds(&self, config: &Configuration) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Interaction {
    True,
    /// `⋀ o ∈ core[o]`
    Conj(SettingSet),
    /// `⋁ o ∈ clauses[o]`
    Disj(SettingSet),
    /// `Conj(core) ∧ Disj(clauses)`
    ConjDisj {
        core: SettingSet,
        clauses: SettingSet,
    },
    /// `Disj(clauses) ∨ Conj(core)`
    DisjConj {
        clauses: SettingSet,
        core: SettingSet,
    },
}

impl Interaction {
    pub fn conj(core: SettingSet) -> Interaction {
        if core.is_empty() {
            Interaction::True
        } else {
            Interaction::Conj(core)
        }
    }

    /// A disjunction of membership clauses. `None` when there are no clauses
    /// (the empty disjunction is unsatisfiable). A single clause is a conjunction.
    pub fn disj(clauses: SettingSet) -> Option<Interaction> {
        match clauses.len() {
            0 => None,
            1 => Some(Interaction::Conj(clauses)),
            _ => Some(Interaction::Disj(clauses)),
        }
    }

    /// Normalized `Conj(core) ∧ Disj(clauses)`; `None` when unsatisfiable.
    ///
    /// A clause on a core option is intersected with the core set (dropped if
    /// that is empty); if it contains the whole core set the disjunction is
    /// implied and the result is `Conj(core)`.
    pub fn conj_disj(core: SettingSet, clauses: SettingSet) -> Option<Interaction> {
        if clauses
            .iter()
            .any(|(o, s)| core.get(o).is_some_and(|c| c.is_subset(s)))
        {
            return Some(Interaction::conj(core));
        }
        let mut kept = SettingSet::new();
        for (o, s) in clauses.iter() {
            match core.get(o) {
                Some(c) => {
                    let both: BTreeSet<u32> = s.intersection(c).copied().collect();
                    if !both.is_empty() {
                        kept.insert_raw(o, both);
                    }
                }
                None => kept.insert_raw(o, s.clone()),
            }
        }
        match kept.len() {
            0 => None,
            1 => {
                let (o, s) = kept.iter().next().map(|(o, s)| (o, s.clone())).unwrap();
                let mut merged = core;
                let values = match merged.get(o) {
                    Some(c) => c.intersection(&s).copied().collect(),
                    None => s,
                };
                merged.insert_raw(o, values);
                Some(Interaction::Conj(merged))
            }
            _ if core.is_empty() => Some(Interaction::Disj(kept)),
            _ => Some(Interaction::ConjDisj {
                core,
                clauses: kept,
            }),
        }
    }

    /// Normalized `Disj(clauses) ∨ Conj(core)`; `None` when unsatisfiable.
    ///
    /// Where a core option also has a clause, the clause values are folded
    /// into the core set (they are already accepted by the disjunction); a core
    /// set that reaches the full domain is dropped.
    pub fn disj_conj(
        clauses: SettingSet,
        core: SettingSet,
        space: &ConfigSpace,
    ) -> Option<Interaction> {
        if clauses.is_empty() {
            return Some(Interaction::conj(core));
        }
        if core.is_empty() {
            return Some(Interaction::True);
        }
        if core
            .iter()
            .any(|(o, c)| clauses.get(o).is_some_and(|s| c.is_subset(s)))
        {
            return Interaction::disj(clauses);
        }
        let mut widened = SettingSet::new();
        for (o, c) in core.iter() {
            let values: BTreeSet<u32> = match clauses.get(o) {
                Some(s) => c.union(s).copied().collect(),
                None => c.clone(),
            };
            if values.len() < space.domain_size(o) {
                widened.insert_raw(o, values);
            }
        }
        match widened.len() {
            0 => Some(Interaction::True),
            1 => {
                let (o, c) = widened.iter().next().map(|(o, c)| (o, c.clone())).unwrap();
                let mut merged = clauses;
                let values: BTreeSet<u32> = match merged.get(o) {
                    Some(s) => s.union(&c).copied().collect(),
                    None => c,
                };
                if values.len() == space.domain_size(o) {
                    return Some(Interaction::True);
                }
                merged.insert_raw(o, values);
                Interaction::disj(merged)
            }
            _ => Some(Interaction::DisjConj {
                clauses,
                core: widened,
            }),
        }
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Interaction::True)
    }

    /// Number of distinct options mentioned.
    pub fn length(&self) -> usize {
        self.mentioned_options().len()
    }

    pub fn core(&self) -> Option<&SettingSet> {
        match self {
            Interaction::Conj(core)
            | Interaction::ConjDisj { core, .. }
            | Interaction::DisjConj { core, .. } => Some(core),
            _ => None,
        }
    }

    pub fn clauses(&self) -> Option<&SettingSet> {
        match self {
            Interaction::Disj(clauses)
            | Interaction::ConjDisj { clauses, .. }
            | Interaction::DisjConj { clauses, .. } => Some(clauses),
            _ => None,
        }
    }

    /// Checks that every set is a nonempty proper subset of a domain of `space`.
    pub fn validate(&self, space: &ConfigSpace) -> Result<()> {
        if let Some(core) = self.core() {
            core.validate(space)?;
        }
        if let Some(clauses) = self.clauses() {
            clauses.validate(space)?;
        }
        Ok(())
    }

    /// Membership atoms, tagged by the slot they occur in.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        if let Some(core) = self.core() {
            out.extend(core.iter().map(|(o, s)| Atom {
                slot: Slot::Core,
                option: o,
                values: s.clone(),
            }));
        }
        if let Some(clauses) = self.clauses() {
            out.extend(clauses.iter().map(|(o, s)| Atom {
                slot: Slot::Clauses,
                option: o,
                values: s.clone(),
            }));
        }
        out
    }

    pub fn render(&self, space: &ConfigSpace) -> String {
        text::render(self, space, text::Style::Unicode)
    }

    pub fn render_ascii(&self, space: &ConfigSpace) -> String {
        text::render(self, space, text::Style::Ascii)
    }
}

impl Predicate for Interaction {
    fn mentioned_options(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if let Some(core) = self.core() {
            out.extend(core.options());
        }
        if let Some(clauses) = self.clauses() {
            out.extend(clauses.options());
        }
        out
    }

    fn holds(&self, config: &Configuration) -> bool {
        match self {
            Interaction::True => true,
            Interaction::Conj(core) => core.holds_all(config),
            Interaction::Disj(clauses) => clauses.holds_any(config),
            Interaction::ConjDisj { core, clauses } => {
                core.holds_all(config) && clauses.holds_any(config)
            }
            Interaction::DisjConj { clauses, core } => {
                clauses.holds_any(config) || core.holds_all(config)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Core,
    Clauses,
}

/// One membership constraint and the slot of the template it sits in.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub slot: Slot,
    pub option: usize,
    pub values: BTreeSet<u32>,
}

/// `c ⇒ φ`, with a structural check that `phi` fits `config`.
pub fn satisfies(config: &Configuration, phi: &Interaction) -> Result<bool> {
    if let Some(&o) = phi.mentioned_options().iter().find(|&&o| o >= config.len()) {
        return Err(Error::Structural(format!(
            "interaction mentions option #{o} but the configuration has {} options",
            config.len()
        )));
    }
    Ok(phi.holds(config))
}

/// Per-option complement: `Disj(negate_core(S)) ⇔ ¬Conj(S)`.
pub fn negate_core(core: &SettingSet, space: &ConfigSpace) -> SettingSet {
    let mut out = SettingSet::new();
    for (o, s) in core.iter() {
        let rest: BTreeSet<u32> = (0..space.domain_size(o) as u32)
            .filter(|v| !s.contains(v))
            .collect();
        out.insert_raw(o, rest);
    }
    out
}

/// Normalized `Conj(core) ∧ Disj(clauses)`; an unsatisfiable combination is
/// eliminated to `true`.
pub fn normalize_conjdisj(core: SettingSet, clauses: SettingSet) -> Interaction {
    Interaction::conj_disj(core, clauses).unwrap_or(Interaction::True)
}

/// Keeps `phi` only if every covering configuration satisfies it.
pub fn check<'a>(
    phi: &Interaction,
    covering: impl IntoIterator<Item = &'a Configuration>,
) -> Interaction {
    if covering.into_iter().all(|c| phi.holds(c)) {
        phi.clone()
    } else {
        Interaction::True
    }
}

/// The final answer for a location: the conjunction of pairwise-incomparable parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FinalResult {
    parts: Vec<Interaction>,
}

impl FinalResult {
    pub fn single(phi: Interaction) -> Self {
        FinalResult { parts: vec![phi] }
    }

    /// Drops `true` parts (unless nothing else remains) and duplicates.
    pub fn from_parts(parts: Vec<Interaction>) -> Self {
        let mut seen = HashSet::new();
        let mut kept: Vec<Interaction> = parts
            .into_iter()
            .filter(|p| !p.is_true() && seen.insert(p.clone()))
            .collect();
        if kept.is_empty() {
            kept.push(Interaction::True);
        }
        FinalResult { parts: kept }
    }

    pub fn parts(&self) -> &[Interaction] {
        &self.parts
    }

    pub fn is_true(&self) -> bool {
        self.parts.iter().all(Interaction::is_true)
    }

    /// The single part, when there is exactly one.
    pub fn as_single(&self) -> Option<&Interaction> {
        match self.parts.as_slice() {
            [one] => Some(one),
            _ => None,
        }
    }

    pub fn length(&self) -> usize {
        self.mentioned_options().len()
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.parts.iter().flat_map(Interaction::atoms).collect()
    }

    pub fn render(&self, space: &ConfigSpace) -> String {
        text::render_final(self, space, text::Style::Unicode)
    }

    pub fn render_ascii(&self, space: &ConfigSpace) -> String {
        text::render_final(self, space, text::Style::Ascii)
    }
}

impl From<Interaction> for FinalResult {
    fn from(phi: Interaction) -> Self {
        FinalResult::single(phi)
    }
}

impl Predicate for FinalResult {
    fn mentioned_options(&self) -> BTreeSet<usize> {
        self.parts
            .iter()
            .flat_map(|p| p.mentioned_options())
            .collect()
    }

    fn holds(&self, config: &Configuration) -> bool {
        self.parts.iter().all(|p| p.holds(config))
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::config_space::{all_configurations, OptionDomain};

    pub(crate) fn fig1_space() -> ConfigSpace {
        let mut opts: Vec<OptionDomain> = ["s", "t", "u", "v", "x", "y"]
            .iter()
            .map(|n| OptionDomain::boolean(*n))
            .collect();
        opts.push(OptionDomain::new("z", ["0", "1", "2", "3", "4"]));
        ConfigSpace::new(opts, None).unwrap()
    }

    pub(crate) fn set(space: &ConfigSpace, pairs: &[(&str, &[&str])]) -> SettingSet {
        SettingSet::from_names(space, pairs.iter().copied()).unwrap()
    }

    #[test]
    fn negation_of_l1_core() {
        let space = fig1_space();
        let core = set(&space, &[("x", &["1"]), ("y", &["1"]), ("z", &["0", "3"])]);
        let neg = negate_core(&core, &space);
        assert_eq!(
            neg,
            set(
                &space,
                &[("x", &["0"]), ("y", &["0"]), ("z", &["1", "2", "4"])]
            )
        );
        assert_eq!(
            Interaction::disj(neg.clone()).unwrap().render(&space),
            "¬x ∨ ¬y ∨ z∈{1,2,4}"
        );
        assert_eq!(negate_core(&neg, &space), core);
    }

    #[test]
    fn negation_of_l5_noncovering_core() {
        let space = fig1_space();
        let core = set(
            &space,
            &[
                ("s", &["0"]),
                ("t", &["0"]),
                ("u", &["1"]),
                ("v", &["1"]),
                ("z", &["1", "2", "3"]),
            ],
        );
        let neg = Interaction::disj(negate_core(&core, &space)).unwrap();
        assert_eq!(neg.render(&space), "s ∨ t ∨ ¬u ∨ ¬v ∨ z∈{0,4}");
    }

    #[test]
    fn negation_is_sound_on_every_configuration() {
        let space = fig1_space();
        let core = set(&space, &[("x", &["1"]), ("z", &["0", "3"])]);
        let d = Interaction::Disj(negate_core(&core, &space));
        for c in all_configurations(&space, 1000).unwrap() {
            assert_eq!(d.holds(&c), !core.holds_all(&c));
        }
    }

    #[test]
    fn satisfies_examples() {
        let space = fig1_space();
        let c4 = space
            .parse_canonical("s=0,t=0,u=1,v=1,x=1,y=1,z=3")
            .unwrap();
        let c2 = space
            .parse_canonical("s=1,t=1,u=0,v=0,x=1,y=1,z=0")
            .unwrap();
        let core = set(&space, &[("x", &["1"]), ("y", &["1"]), ("z", &["0", "3"])]);
        assert!(satisfies(&c4, &Interaction::Conj(core.clone())).unwrap());
        assert!(satisfies(&c4, &Interaction::True).unwrap());
        let d = Interaction::disj(negate_core(&core, &space)).unwrap();
        // brute-force truth table over x, y, z: ¬(x ∧ y ∧ z∈{0,3})
        let x = c2.value(4) == 1;
        let y = c2.value(5) == 1;
        let z = c2.value(6);
        let expected = !(x && y && (z == 0 || z == 3));
        assert_eq!(satisfies(&c2, &d).unwrap(), expected);
        assert!(!expected);
    }

    #[test]
    fn satisfies_rejects_foreign_options() {
        let space = fig1_space();
        let phi = Interaction::Conj(set(&space, &[("z", &["1"])]));
        let short = Configuration::from_indices(vec![0, 1]);
        assert!(matches!(satisfies(&short, &phi), Err(Error::Structural(_))));
    }

    #[test]
    fn conjdisj_normalization_matches_l5() {
        let space = fig1_space();
        let core = set(&space, &[("u", &["1"]), ("v", &["1"])]);
        let clauses = set(
            &space,
            &[
                ("s", &["1"]),
                ("t", &["1"]),
                ("u", &["0"]),
                ("v", &["0"]),
                ("z", &["0", "4"]),
            ],
        );
        let phi = normalize_conjdisj(core, clauses);
        assert_eq!(phi.render(&space), "u ∧ v ∧ (s ∨ t ∨ z∈{0,4})");
    }

    #[test]
    fn conjdisj_collapses_when_clause_implied() {
        let space = fig1_space();
        let core = set(&space, &[("u", &["1"]), ("z", &["0", "1"])]);
        let clauses = set(&space, &[("s", &["1"]), ("z", &["0", "1", "2"])]);
        assert_eq!(
            normalize_conjdisj(core.clone(), clauses),
            Interaction::Conj(core)
        );
    }

    #[test]
    fn conjdisj_contradiction_is_eliminated() {
        let space = fig1_space();
        let core = set(&space, &[("x", &["1"])]);
        let clauses = set(&space, &[("x", &["0"])]);
        // x ∈ {0,1}: no value satisfies both x=1 and x=0
        let sat = (0..2u32)
            .any(|x| core.get(4).unwrap().contains(&x) && clauses.get(4).unwrap().contains(&x));
        assert!(!sat);
        assert_eq!(normalize_conjdisj(core, clauses), Interaction::True);
    }

    #[test]
    fn disjconj_widening_folds_clause_values() {
        let space = fig1_space();
        let clauses = set(&space, &[("x", &["0"])]);
        let core = set(&space, &[("x", &["1"]), ("u", &["1"]), ("v", &["1"])]);
        let phi = Interaction::disj_conj(clauses, core, &space).unwrap();
        assert_eq!(phi.render(&space), "¬x ∨ (u ∧ v)");
    }

    #[test]
    fn normalized_forms_are_equivalent_to_their_inputs() {
        let space = fig1_space();
        let all = all_configurations(&space, 1000).unwrap();
        let core = set(&space, &[("x", &["1"]), ("z", &["0", "1", "2"])]);
        let clauses = set(&space, &[("z", &["0", "3"]), ("s", &["1"])]);
        let cd = normalize_conjdisj(core.clone(), clauses.clone());
        let dc = Interaction::disj_conj(clauses.clone(), core.clone(), &space).unwrap();
        for c in &all {
            assert_eq!(cd.holds(c), core.holds_all(c) && clauses.holds_any(c));
            assert_eq!(dc.holds(c), clauses.holds_any(c) || core.holds_all(c));
        }
    }

    #[test]
    fn check_eliminates_unsupported() {
        let space = fig1_space();
        let xy = Interaction::Conj(set(&space, &[("x", &["1"]), ("y", &["1"])]));
        let cov: Vec<Configuration> =
            ["s=0,t=0,u=0,v=0,x=1,y=1,z=0", "s=1,t=0,u=1,v=0,x=1,y=1,z=4"]
                .iter()
                .map(|t| space.parse_canonical(t).unwrap())
                .collect();
        assert_eq!(check(&xy, &cov), xy);
        let d = Interaction::Disj(set(&space, &[("x", &["0"]), ("y", &["0"])]));
        assert_eq!(check(&d, &cov), Interaction::True);
        assert_eq!(check(&Interaction::True, &cov), Interaction::True);
    }

    #[test]
    fn lengths_and_atoms() {
        let space = fig1_space();
        let phi = Interaction::conj_disj(
            set(&space, &[("u", &["1"]), ("v", &["1"])]),
            set(&space, &[("s", &["1"]), ("t", &["1"])]),
        )
        .unwrap();
        assert_eq!(phi.length(), 4);
        assert_eq!(phi.atoms().len(), 4);
        assert_eq!(Interaction::True.length(), 0);
    }
}
