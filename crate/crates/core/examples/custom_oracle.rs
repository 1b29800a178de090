//! Plugs an in-process closure in as the coverage oracle. The "program" here
//! is a tiny request router whose branches depend on three options.

use std::collections::BTreeSet;

use optinfer::inference::{run, InferenceParams};
use optinfer::oracle::FnOracle;
use optinfer::report::interactions_text;
use optinfer::{ConfigSpace, OptionDomain};

fn main() -> optinfer::Result<()> {
    let space = ConfigSpace::new(
        vec![
            OptionDomain::boolean("tls"),
            OptionDomain::new("proto", ["http1", "http2", "http3"]),
            OptionDomain::new("cache", ["off", "memory", "disk"]),
            OptionDomain::boolean("gzip"),
        ],
        None,
    )?;
    let (tls, proto, cache, gzip) = (0, 1, 2, 3);

    let router = FnOracle(|c: &optinfer::Configuration| {
        let mut hit = BTreeSet::new();
        hit.insert("router.rs:12".to_string());
        if c.value(tls) == 1 {
            hit.insert("tls.rs:40".to_string());
            if c.value(proto) != 0 {
                hit.insert("alpn.rs:8".to_string());
            }
        }
        if c.value(cache) != 0 || c.value(gzip) == 1 {
            hit.insert("middleware.rs:77".to_string());
        }
        if c.value(cache) == 2 {
            hit.insert("disk.rs:5".to_string());
        }
        Ok(hit)
    });

    let result = run(&router, &space, &InferenceParams::with_seed(1))?;
    println!("{} of {} configurations", result.configs_used, space.size());
    print!("{}", interactions_text(&result.interactions, &space));
    Ok(())
}
