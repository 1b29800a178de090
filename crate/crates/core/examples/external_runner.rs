//! Drives the bundled shell-script fixture through a runner document. The
//! first run spawns the script once per new configuration; the second run
//! reuses the on-disk cache and spawns nothing.

use std::path::Path;

use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::{load_subject, CoverageCache, ExternalOracle, Subject};
use optinfer::report::interactions_text;

fn main() -> optinfer::Result<()> {
    let runner = Path::new(env!("CARGO_MANIFEST_DIR")).join("subjects/prog/prog.runner");
    let Subject::Runner(spec) = load_subject(&runner)? else {
        unreachable!("prog.runner is a runner document")
    };
    let cache_file = std::env::temp_dir().join("optinfer-example-prog.jsonl");
    let params = InferenceParams::with_seed(3);

    let cold = ExternalOracle::new(spec.clone(), CoverageCache::open(&cache_file, true)?);
    let result = run(&cold, &spec.space, &params)?;
    println!(
        "cold: {} configurations, {} script runs",
        result.configs_used,
        cold.spawn_count()
    );
    print!("{}", interactions_text(&result.interactions, &spec.space));

    let warm = ExternalOracle::new(spec.clone(), CoverageCache::open(&cache_file, false)?);
    let again = run(&warm, &spec.space, &params)?;
    println!(
        "warm: {} script runs, same interactions: {}",
        warm.spawn_count(),
        again.interactions == result.interactions
    );
    Ok(())
}
