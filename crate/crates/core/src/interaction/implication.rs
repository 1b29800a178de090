//! Finite-domain decision procedures.
//!
//! Formulas only read the options they mention, so validity and
//! satisfiability are decided by enumerating the product of those options'
//! domains. When that product exceeds the cap the answer is `Unknown`.

use std::collections::BTreeSet;

use super::Predicate;
use crate::config_space::{ConfigSpace, Configuration};

/// Largest mentioned-option product enumerated before giving up.
pub const DEFAULT_IMPLICATION_CAP: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Implication {
    Yes,
    No,
    Unknown,
}

impl Implication {
    pub fn is_yes(self) -> bool {
        self == Implication::Yes
    }
}

/// Visits every assignment of `options` (others fixed at value 0). Stops
/// early when `visit` returns `false`. Returns `None` if the product exceeds `cap`.
fn enumerate(
    options: &BTreeSet<usize>,
    space: &ConfigSpace,
    cap: u64,
    mut visit: impl FnMut(&Configuration) -> bool,
) -> Option<bool> {
    let opts: Vec<usize> = options.iter().copied().collect();
    let mut product: u64 = 1;
    for &o in &opts {
        product = product.checked_mul(space.domain_size(o) as u64)?;
        if product > cap {
            return None;
        }
    }
    let mut config = Configuration::from_indices(vec![0; space.num_options()]);
    loop {
        if !visit(&config) {
            return Some(false);
        }
        let mut advanced = false;
        for &o in opts.iter().rev() {
            let next = config.value(o) + 1;
            if (next as usize) < space.domain_size(o) {
                config.set(o, next);
                advanced = true;
                break;
            }
            config.set(o, 0);
        }
        if !advanced {
            return Some(true);
        }
    }
}

/// Decides `phi ⇒ psi` over `space`.
pub fn implies<P, Q>(phi: &P, psi: &Q, space: &ConfigSpace, cap: u64) -> Implication
where
    P: Predicate + ?Sized,
    Q: Predicate + ?Sized,
{
    let mut options = phi.mentioned_options();
    options.extend(psi.mentioned_options());
    match enumerate(&options, space, cap, |c| !phi.holds(c) || psi.holds(c)) {
        Some(true) => Implication::Yes,
        Some(false) => Implication::No,
        None => Implication::Unknown,
    }
}

/// Mutual implication.
pub fn equivalent<P, Q>(phi: &P, psi: &Q, space: &ConfigSpace, cap: u64) -> Implication
where
    P: Predicate + ?Sized,
    Q: Predicate + ?Sized,
{
    match (implies(phi, psi, space, cap), implies(psi, phi, space, cap)) {
        (Implication::Yes, Implication::Yes) => Implication::Yes,
        (Implication::No, _) | (_, Implication::No) => Implication::No,
        _ => Implication::Unknown,
    }
}

fn mentioned_product(options: &BTreeSet<usize>, space: &ConfigSpace) -> String {
    options
        .iter()
        .map(|&o| num_bigint::BigUint::from(space.domain_size(o)))
        .product::<num_bigint::BigUint>()
        .to_string()
}

/// An assignment of the mentioned options satisfying `phi` (other options at
/// their first value), `Ok(None)` if there is none, `SpaceTooLarge` past the cap.
pub fn find_model<P: Predicate + ?Sized>(
    phi: &P,
    space: &ConfigSpace,
    cap: u64,
) -> crate::Result<Option<Configuration>> {
    let mut found = None;
    let done = enumerate(&phi.mentioned_options(), space, cap, |c| {
        if phi.holds(c) {
            found = Some(c.clone());
            false
        } else {
            true
        }
    });
    match done {
        None => Err(crate::Error::SpaceTooLarge {
            size: mentioned_product(&phi.mentioned_options(), space),
            cap,
        }),
        Some(_) => Ok(found),
    }
}

pub fn satisfiable<P: Predicate + ?Sized>(phi: &P, space: &ConfigSpace, cap: u64) -> Implication {
    match find_model(phi, space, cap) {
        Ok(Some(_)) => Implication::Yes,
        Ok(None) => Implication::No,
        Err(_) => Implication::Unknown,
    }
}
