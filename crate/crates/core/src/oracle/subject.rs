use std::collections::{BTreeSet, HashSet};
use std::ops::RangeInclusive;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{CoverageOracle, LocationSet};
use crate::config_space::{ConfigSpace, Configuration, OptionDomain, SettingSet, SpaceDoc};
use crate::error::{Error, Result};
use crate::formula::FormulaAst;
use crate::interaction::Interaction;

const FIG1_SUBJECT: &str = include_str!("../../subjects/fig1.subject");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocationDoc {
    pub id: String,
    pub guard: String,
}

/// `{"name":…, "space":{…}, "locations":[{"id":…, "guard":…}, …]}`
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubjectDoc {
    #[serde(default)]
    pub name: String,
    pub space: SpaceDoc,
    pub locations: Vec<LocationDoc>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Location {
    pub id: String,
    pub guard: FormulaAst,
    /// Guard as written in the source document.
    pub source: String,
}

/// A synthetic program: each location is covered exactly when its guard holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SubjectSpec {
    pub name: String,
    pub space: ConfigSpace,
    pub locations: Vec<Location>,
}

impl SubjectSpec {
    pub fn from_doc(doc: &SubjectDoc) -> Result<SubjectSpec> {
        let mut errors = Vec::new();
        let space = match ConfigSpace::from_doc(&doc.space) {
            Ok(space) => Some(space),
            Err(Error::Invalid(errs)) => {
                errors.extend(errs);
                None
            }
            Err(e) => return Err(e),
        };
        let mut ids = HashSet::new();
        let mut locations = Vec::new();
        for loc in &doc.locations {
            if loc.id.trim().is_empty() {
                errors.push("location id must be nonempty".into());
            }
            if !ids.insert(loc.id.as_str()) {
                errors.push(format!("duplicate location id `{}`", loc.id));
            }
            if let Some(space) = &space {
                match FormulaAst::parse(&loc.guard, space) {
                    Ok(guard) => locations.push(Location {
                        id: loc.id.clone(),
                        guard,
                        source: loc.guard.clone(),
                    }),
                    Err(e) => errors.push(format!("guard of `{}`: {e}", loc.id)),
                }
            }
        }
        match space {
            Some(space) if errors.is_empty() => Ok(SubjectSpec {
                name: doc.name.clone(),
                space,
                locations,
            }),
            _ => Err(Error::Invalid(errors)),
        }
    }

    pub fn from_json(text: &str) -> Result<SubjectSpec> {
        SubjectSpec::from_doc(&serde_json::from_str(text)?)
    }

    pub fn to_doc(&self) -> SubjectDoc {
        SubjectDoc {
            name: self.name.clone(),
            space: self.space.to_doc(),
            locations: self
                .locations
                .iter()
                .map(|l| LocationDoc {
                    id: l.id.clone(),
                    guard: l.source.clone(),
                })
                .collect(),
        }
    }

    /// Source text of the bundled seven-option example program.
    pub fn fig1_source() -> &'static str {
        FIG1_SUBJECT
    }

    /// The bundled seven-option example program (locations L0–L5).
    pub fn fig1() -> SubjectSpec {
        SubjectSpec::from_json(FIG1_SUBJECT).expect("bundled subject is valid")
    }

    /// Builds a subject whose guards are the given interactions.
    pub fn from_interactions(
        name: &str,
        space: ConfigSpace,
        guards: &[(String, Interaction)],
    ) -> SubjectSpec {
        let locations = guards
            .iter()
            .map(|(id, phi)| Location {
                id: id.clone(),
                guard: FormulaAst::from(phi),
                source: phi.render_ascii(&space),
            })
            .collect();
        SubjectSpec {
            name: name.to_string(),
            space,
            locations,
        }
    }

    /// A random subject with a number of options drawn from `options` (at
    /// least 2), domains of 2 to `max_domain` values, and 1 to
    /// `max_locations` locations whose guards are normalized template
    /// instances. Returns the subject and the guard of every location.
    pub fn random_templates<R: Rng + ?Sized>(
        rng: &mut R,
        options: RangeInclusive<usize>,
        max_domain: usize,
        max_locations: usize,
    ) -> (SubjectSpec, Vec<(String, Interaction)>) {
        let n = rng.gen_range((*options.start()).max(2)..=(*options.end()).max(2));
        let options: Vec<OptionDomain> = (0..n)
            .map(|i| {
                let size = rng.gen_range(2..=max_domain.max(2));
                OptionDomain::new(format!("o{i}"), (0..size).map(|v| v.to_string()))
            })
            .collect();
        let space = ConfigSpace::new(options, None).expect("generated space is valid");
        let count = rng.gen_range(1..=max_locations.max(1));
        let guards: Vec<(String, Interaction)> = (0..count)
            .map(|i| (format!("L{i}"), random_template(rng, &space)))
            .collect();
        (
            SubjectSpec::from_interactions("random", space.clone(), &guards),
            guards,
        )
    }
}

fn random_proper_subset<R: Rng + ?Sized>(rng: &mut R, size: usize) -> BTreeSet<u32> {
    let k = rng.gen_range(1..size);
    let mut values: Vec<u32> = (0..size as u32).collect();
    values.shuffle(rng);
    values.into_iter().take(k).collect()
}

fn random_set<R: Rng + ?Sized>(rng: &mut R, space: &ConfigSpace, options: &[usize]) -> SettingSet {
    let mut set = SettingSet::new();
    for &o in options {
        set.insert_raw(o, random_proper_subset(rng, space.domain_size(o)));
    }
    set
}

/// One normalized template instance: a conjunction, a disjunction of at
/// least two clauses, or a mixed form whose parts use disjoint options and
/// cannot be shortened to a simpler template.
fn random_template<R: Rng + ?Sized>(rng: &mut R, space: &ConfigSpace) -> Interaction {
    let n = space.num_options();
    let mut opts: Vec<usize> = (0..n).collect();
    opts.shuffle(rng);
    let kind = rng.gen_range(0..10);
    match kind {
        0 => Interaction::True,
        5 | 6 if n >= 2 => {
            let k = rng.gen_range(2..=n.min(3));
            Interaction::Disj(random_set(rng, space, &opts[..k]))
        }
        7 if n >= 3 => {
            let c = rng.gen_range(1..=(n - 2).min(2));
            let d = rng.gen_range(2..=(n - c).min(3));
            Interaction::ConjDisj {
                core: random_set(rng, space, &opts[..c]),
                clauses: random_set(rng, space, &opts[c..c + d]),
            }
        }
        8 if n >= 3 => {
            let d = rng.gen_range(1..=(n - 2).min(2));
            let c = rng.gen_range(2..=(n - d).min(3));
            Interaction::DisjConj {
                clauses: random_set(rng, space, &opts[..d]),
                core: random_set(rng, space, &opts[d..d + c]),
            }
        }
        _ => {
            let k = rng.gen_range(1..=n.min(3));
            Interaction::Conj(random_set(rng, space, &opts[..k]))
        }
    }
}

/// The locations whose guard holds under `config`.
pub fn synthetic_coverage(spec: &SubjectSpec, config: &Configuration) -> Result<LocationSet> {
    spec.space.validate_config(config)?;
    Ok(spec
        .locations
        .iter()
        .filter(|l| l.guard.eval(config))
        .map(|l| l.id.clone())
        .collect())
}

impl CoverageOracle for SubjectSpec {
    fn coverage(&self, config: &Configuration) -> Result<LocationSet> {
        synthetic_coverage(self, config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::{implies, parse_interaction, Predicate, DEFAULT_IMPLICATION_CAP};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn row(spec: &SubjectSpec, text: &str) -> Vec<String> {
        let c = spec.space.parse_canonical(text).unwrap();
        synthetic_coverage(spec, &c).unwrap().into_iter().collect()
    }

    #[test]
    fn fig1_covering_array_rows() {
        let spec = SubjectSpec::fig1();
        assert_eq!(spec.locations.len(), 6);
        assert_eq!(
            row(&spec, "s=0,t=0,u=1,v=1,x=1,y=0,z=1"),
            ["L2", "L3", "L4"]
        );
        assert_eq!(
            row(&spec, "s=1,t=1,u=0,v=0,x=1,y=1,z=0"),
            ["L0", "L1", "L3"]
        );
        assert_eq!(
            row(&spec, "s=0,t=0,u=1,v=1,x=0,y=0,z=2"),
            ["L2", "L3", "L4"]
        );
        assert_eq!(
            row(&spec, "s=0,t=0,u=1,v=1,x=1,y=1,z=3"),
            ["L0", "L1", "L3", "L4"]
        );
        assert_eq!(
            row(&spec, "s=0,t=1,u=1,v=1,x=1,y=0,z=4"),
            ["L2", "L3", "L4", "L5"]
        );
    }

    #[test]
    fn fig1_refinement_rows() {
        let spec = SubjectSpec::fig1();
        assert_eq!(row(&spec, "s=1,t=0,u=1,v=0,x=0,y=1,z=0"), ["L2", "L3"]);
        assert_eq!(row(&spec, "s=0,t=0,u=0,v=1,x=1,y=0,z=3"), ["L2", "L3"]);
        assert_eq!(row(&spec, "s=1,t=1,u=0,v=1,x=1,y=1,z=1"), ["L0", "L3"]);
        assert_eq!(row(&spec, "s=1,t=0,u=1,v=0,x=1,y=1,z=2"), ["L0", "L3"]);
        assert_eq!(
            row(&spec, "s=1,t=0,u=0,v=1,x=1,y=1,z=4"),
            ["L0", "L1", "L3"]
        );
    }

    #[test]
    fn l3_always_and_u_off_blocks_l4_l5() {
        let spec = SubjectSpec::fig1();
        for c in crate::config_space::all_configurations(&spec.space, 1000).unwrap() {
            let cov = synthetic_coverage(&spec, &c).unwrap();
            assert!(cov.contains("L3"));
            if spec.space.config_to_map(&c)["u"] == "0" {
                assert!(!cov.contains("L4") && !cov.contains("L5"));
            }
        }
    }

    #[test]
    fn load_errors_name_the_problem() {
        let err = SubjectSpec::from_json(
            r#"{"name":"bad","space":{"options":[{"name":"x","values":["0","1"]}]},
                "locations":[{"id":"A","guard":"x && w"},{"id":"A","guard":"x"}]}"#,
        )
        .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`w`"), "{msg}");
        assert!(msg.contains("duplicate location id `A`"), "{msg}");
    }

    #[test]
    fn zero_locations_is_valid() {
        let spec = SubjectSpec::from_json(
            r#"{"name":"empty","space":{"options":[{"name":"x","values":["0","1"]}]},"locations":[]}"#,
        )
        .unwrap();
        assert!(spec.locations.is_empty());
    }

    #[test]
    fn guards_agree_with_template_semantics() {
        let spec = SubjectSpec::fig1();
        let all = crate::config_space::all_configurations(&spec.space, 1000).unwrap();
        let annotations = [
            "x ∧ y",
            "x ∧ y ∧ z∈{0,3,4}",
            "¬x ∨ ¬y",
            "true",
            "u ∧ v",
            "u ∧ v ∧ (s ∨ t)",
        ];
        for (loc, text) in spec.locations.iter().zip(annotations) {
            let phi = parse_interaction(text, &spec.space).unwrap();
            for c in &all {
                assert_eq!(
                    phi.holds(c),
                    loc.guard.eval(c),
                    "{} on {}",
                    loc.id,
                    spec.space.canonical(c)
                );
            }
        }
    }

    #[test]
    fn random_templates_are_satisfiable_and_canonical() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let (spec, guards) = SubjectSpec::random_templates(&mut rng, 2..=6, 4, 6);
            for (_, phi) in &guards {
                phi.validate(&spec.space).unwrap();
                let reparsed = parse_interaction(&phi.render(&spec.space), &spec.space).unwrap();
                assert_eq!(&reparsed, phi);
                assert!(implies(phi, phi, &spec.space, DEFAULT_IMPLICATION_CAP).is_yes());
            }
        }
    }
}
