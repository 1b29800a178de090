//! Infers interactions and then picks a handful of configurations that
//! together reach every location.

use optinfer::evaluation::{min_cover_best_of, remove_implied, DEFAULT_MIN_COVER_DRAWS};
use optinfer::inference::{run, InferenceParams};
use optinfer::interaction::DEFAULT_IMPLICATION_CAP;
use optinfer::oracle::{synthetic_coverage, SubjectSpec};
use optinfer::FinalResult;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> optinfer::Result<()> {
    let spec = SubjectSpec::fig1();
    let space = &spec.space;
    let result = run(&spec, space, &InferenceParams::with_seed(11))?;
    let requirements: Vec<FinalResult> = result.interactions.values().cloned().collect();

    let kept = remove_implied(&requirements, space, DEFAULT_IMPLICATION_CAP);
    println!(
        "{} interactions, {} after dropping implied ones",
        requirements.len(),
        kept.len()
    );

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cover = min_cover_best_of(
        &requirements,
        space,
        &mut rng,
        DEFAULT_IMPLICATION_CAP,
        DEFAULT_MIN_COVER_DRAWS,
    )?;
    for c in &cover.configs {
        let covered: Vec<String> = synthetic_coverage(&spec, c)?.into_iter().collect();
        println!("{}  ->  {}", space.canonical(c), covered.join(" "));
    }
    Ok(())
}
