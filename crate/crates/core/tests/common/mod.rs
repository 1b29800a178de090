//! Brute-force helpers shared by the integration tests. They deliberately
//! avoid the library's own enumeration and evaluation code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use optinfer::config_space::SettingSet;
use optinfer::{ConfigSpace, Configuration, FinalResult, Interaction};

/// Every configuration of `space`, odometer order, last option fastest.
pub fn every_config(space: &ConfigSpace) -> Vec<Configuration> {
    let sizes: Vec<u32> = (0..space.num_options())
        .map(|o| space.domain_size(o) as u32)
        .collect();
    let mut out = Vec::new();
    let mut current = vec![0u32; sizes.len()];
    loop {
        out.push(Configuration::from_indices(current.clone()));
        let mut i = sizes.len();
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            current[i] += 1;
            if current[i] < sizes[i] {
                break;
            }
            current[i] = 0;
        }
    }
}

fn all_of(set: &SettingSet, c: &Configuration) -> bool {
    set.iter().all(|(o, vals)| vals.contains(&c.value(o)))
}

fn any_of(set: &SettingSet, c: &Configuration) -> bool {
    set.iter().any(|(o, vals)| vals.contains(&c.value(o)))
}

pub fn eval(phi: &Interaction, c: &Configuration) -> bool {
    match phi {
        Interaction::True => true,
        Interaction::Conj(core) => all_of(core, c),
        Interaction::Disj(clauses) => any_of(clauses, c),
        Interaction::ConjDisj { core, clauses } => all_of(core, c) && any_of(clauses, c),
        Interaction::DisjConj { clauses, core } => any_of(clauses, c) || all_of(core, c),
    }
}

pub fn eval_final(r: &FinalResult, c: &Configuration) -> bool {
    r.parts().iter().all(|p| eval(p, c))
}

/// Indices of configurations satisfying `pred`.
pub fn models(configs: &[Configuration], pred: impl Fn(&Configuration) -> bool) -> BTreeSet<usize> {
    configs
        .iter()
        .enumerate()
        .filter(|(_, c)| pred(c))
        .map(|(i, _)| i)
        .collect()
}

/// The fixture script's behaviour written out by hand. Options in space
/// order: a, b, mode (fast, slow, auto), level (0, 1, 2).
pub fn prog_truth(a: u32, b: u32, mode: u32, level: u32) -> BTreeSet<String> {
    let mut hit = vec!["main.c:1"];
    if a == 1 {
        hit.push("opt.c:10");
    }
    if a == 1 && b == 1 {
        hit.push("opt.c:20");
    }
    if mode == 0 {
        hit.push("fast.c:3");
    } else {
        if b == 1 || level == 2 {
            hit.push("cat.c:462");
        }
        if mode == 1 && level != 0 {
            hit.push("slow.c:7");
        }
        if mode == 2 && a == 0 {
            hit.push("auto.c:9");
        }
    }
    hit.into_iter().map(String::from).collect()
}
