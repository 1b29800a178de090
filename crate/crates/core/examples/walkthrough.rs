//! Runs the iterative loop on the bundled seven-option subject and prints
//! each iteration's batch, then the final interactions.
//!
//! cargo run --example walkthrough -- [seed]

use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::{synthetic_coverage, SubjectSpec};
use optinfer::report::interactions_text;

fn main() -> optinfer::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(7);
    let spec = SubjectSpec::fig1();
    let space = &spec.space;

    let result = run(&spec, space, &InferenceParams::with_seed(seed))?;
    for record in &result.history {
        println!(
            "iteration {} (+{} configs, {} total, tuples {})",
            record.iteration,
            record.new_configs.len(),
            record.total_configs,
            record.digest
        );
        for c in &record.new_configs {
            let covered: Vec<String> = synthetic_coverage(&spec, c)?.into_iter().collect();
            println!("    {}  ->  {}", space.canonical(c), covered.join(" "));
        }
    }
    println!(
        "\n{} of {} configurations, fix-point: {}",
        result.configs_used,
        space.size(),
        result.fixpoint
    );
    print!("{}", interactions_text(&result.interactions, space));
    Ok(())
}
