//! Scores an iterative result against the exhaustive one, location by
//! location, and round-trips both through the on-disk result document.

use optinfer::config_space::DEFAULT_ENUMERATION_CAP;
use optinfer::evaluation::{exhaustive_infer, f_score};
use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::SubjectSpec;
use optinfer::report::{eval_text, ResultDoc};

fn main() -> optinfer::Result<()> {
    let spec = SubjectSpec::fig1();
    let space = &spec.space;
    let exact = exhaustive_infer(&spec, space, DEFAULT_ENUMERATION_CAP, 1)?;

    // A deliberately small budget so the comparison has something to show.
    let params = InferenceParams {
        max_iterations: 2,
        ..InferenceParams::with_seed(4)
    };
    let partial = run(&spec, space, &params)?;

    let json = ResultDoc::from_result(&partial).to_json();
    let (_, reloaded) = ResultDoc::from_json(&json)?.decode()?;
    println!(
        "after {} iterations ({} configurations):",
        partial.iterations, partial.configs_used
    );
    print!("{}", eval_text(&f_score(&reloaded, &exact.interactions)));
    Ok(())
}
