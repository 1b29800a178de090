//! Summarizes an inferred result by interaction length.

use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::SubjectSpec;
use optinfer::report::{histogram_text, length_histogram};

fn main() -> optinfer::Result<()> {
    let spec = SubjectSpec::fig1();
    let result = run(&spec, &spec.space, &InferenceParams::with_seed(5))?;
    print!(
        "{}",
        histogram_text(&length_histogram(&result.interactions))
    );
    Ok(())
}
