//! Compares the iterative loop with random sampling at the same budget on
//! randomly generated subjects, scoring both against exhaustive runs.
//!
//! cargo run --release --example baseline_comparison -- [subjects]

use optinfer::config_space::DEFAULT_ENUMERATION_CAP;
use optinfer::evaluation::{
    convergence_trajectory, exhaustive_infer, f_score, median, random_baseline,
};
use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::SubjectSpec;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> optinfer::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(50);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut iterative, mut baseline) = (Vec::new(), Vec::new());

    for i in 0..n {
        let (spec, _) = SubjectSpec::random_templates(&mut rng, 6..=6, 4, 8);
        let space = &spec.space;
        let exact = exhaustive_infer(&spec, space, DEFAULT_ENUMERATION_CAP, 1)?;
        let result = run(&spec, space, &InferenceParams::with_seed(i as u64))?;
        let random = random_baseline(&spec, space, result.configs_used, false, i as u64, 1)?;
        iterative.push(f_score(&result.interactions, &exact.interactions).f_score);
        baseline.push(f_score(&random.interactions, &exact.interactions).f_score);

        if i == 0 {
            println!(
                "convergence on the first subject ({} configurations):",
                space.size()
            );
            for p in convergence_trajectory(&result, &exact.interactions) {
                println!(
                    "  iteration {:>2}  x={:.3}  f={:.3}",
                    p.iteration, p.normalized_x, p.f_score
                );
            }
        }
    }
    println!(
        "median f-score over {n} subjects: iterative {:.3}, random {:.3}",
        median(&iterative),
        median(&baseline)
    );
    Ok(())
}
