mod common;

use std::collections::BTreeSet;

use optinfer::config_space::{one_way_covering_array, pointwise_union, random_configuration};
use optinfer::inference::{run, InferenceParams};
use optinfer::interaction::{
    implies, parse_final, parse_interaction, Implication, DEFAULT_IMPLICATION_CAP,
};
use optinfer::oracle::{synthetic_coverage, SubjectSpec};
use optinfer::FinalResult;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{eval, eval_final, every_config, models};

fn subject(seed: u64) -> (SubjectSpec, Vec<(String, optinfer::Interaction)>) {
    SubjectSpec::random_templates(&mut ChaCha8Rng::seed_from_u64(seed), 2..=5, 4, 6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pointwise_union_matches_per_option_values(seed in any::<u64>(), n in 1usize..8) {
        let (spec, _) = subject(seed);
        let space = &spec.space;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let configs: Vec<_> = (0..n).map(|_| random_configuration(space, &mut rng)).collect();
        let union = pointwise_union(space, &configs).unwrap();
        for o in 0..space.num_options() {
            let values: BTreeSet<u32> = configs.iter().map(|c| c.value(o)).collect();
            if values.len() == space.domain_size(o) {
                prop_assert!(union.get(o).is_none());
            } else {
                prop_assert_eq!(union.get(o), Some(&values));
            }
        }
        prop_assert!(configs.iter().all(|c| union.holds_all(c)));
    }

    #[test]
    fn covering_array_hits_every_value(seed in any::<u64>()) {
        let (spec, _) = subject(seed);
        let space = &spec.space;
        let rows = one_way_covering_array(space, &mut ChaCha8Rng::seed_from_u64(seed));
        for o in 0..space.num_options() {
            let seen: BTreeSet<u32> = rows.iter().map(|c| c.value(o)).collect();
            prop_assert_eq!(seen.len(), space.domain_size(o));
        }
    }

    #[test]
    fn rendering_parses_back(seed in any::<u64>()) {
        let (spec, guards) = subject(seed);
        let space = &spec.space;
        for (_, g) in &guards {
            prop_assert_eq!(&parse_interaction(&g.render_ascii(space), space).unwrap(), g);
            prop_assert_eq!(&parse_interaction(&g.render(space), space).unwrap(), g);
            let single = FinalResult::single(g.clone());
            prop_assert_eq!(parse_final(&single.render_ascii(space), space).unwrap(), single);
        }
    }

    #[test]
    fn implication_is_sound(seed in any::<u64>()) {
        let (spec, guards) = subject(seed);
        let space = &spec.space;
        let configs = every_config(space);
        for (_, a) in &guards {
            for (_, b) in &guards {
                let truth = models(&configs, |c| eval(a, c)).is_subset(&models(&configs, |c| eval(b, c)));
                let answer = implies(a, b, space, DEFAULT_IMPLICATION_CAP);
                prop_assert_ne!(answer, Implication::Unknown);
                prop_assert_eq!(answer.is_yes(), truth);
            }
        }
    }

    #[test]
    fn iterative_results_cover_their_evaluated_configs(seed in any::<u64>()) {
        let (spec, _) = subject(seed);
        let space = &spec.space;
        let r = run(&spec, space, &InferenceParams::with_seed(seed)).unwrap();
        let mut seen = BTreeSet::new();
        for record in &r.history {
            for c in &record.new_configs {
                prop_assert!(seen.insert(c.clone()), "configuration evaluated twice");
            }
        }
        prop_assert_eq!(seen.len(), r.configs_used);
        // Every evaluated configuration that satisfies an interaction covers its location.
        for c in &seen {
            let covered = synthetic_coverage(&spec, c).unwrap();
            for (loc, phi) in &r.interactions {
                if eval_final(phi, c) {
                    prop_assert!(covered.contains(loc), "{} satisfies {}'s interaction but misses it", space.canonical(c), loc);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_result(seed in any::<u64>()) {
        let (spec, _) = subject(seed);
        let params = InferenceParams::with_seed(seed);
        let a = run(&spec, &spec.space, &params).unwrap();
        let b = run(&spec, &spec.space, &InferenceParams { jobs: 3, ..params }).unwrap();
        prop_assert_eq!(a.interactions, b.interactions);
        prop_assert_eq!(a.configs_used, b.configs_used);
    }
}
