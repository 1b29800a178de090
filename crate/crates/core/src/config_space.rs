//! Option domains, configurations, and the per-option value sets that every
//! interaction template is built from.
//!
//! Values are opaque string tokens. Internally a [`Configuration`] stores the
//! index of each option's value in its domain, in space order, so equality,
//! hashing and lookups stay cheap. [`ConfigSpace`] translates back to names.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default upper bound on the number of configurations enumerated exhaustively.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000;

/// A named option and its ordered, finite list of admissible values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptionDomain {
    pub name: String,
    pub values: Vec<String>,
}

impl OptionDomain {
    pub fn new(
        name: impl Into<String>,
        values: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        OptionDomain {
            name: name.into(),
            values: values.into_iter().map(Into::into).collect(),
        }
    }

    /// A `{0,1}`-valued option.
    pub fn boolean(name: impl Into<String>) -> Self {
        OptionDomain::new(name, ["0", "1"])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Boolean options render as `x` / `¬x` instead of `x∈{1}` / `x∈{0}`.
    pub fn is_boolean(&self) -> bool {
        self.values.len() == 2
            && self.values.iter().any(|v| v == "0")
            && self.values.iter().any(|v| v == "1")
    }

    pub fn value_index(&self, value: &str) -> Option<u32> {
        self.values
            .iter()
            .position(|v| v == value)
            .map(|i| i as u32)
    }
}

/// On-disk form of a space: `{"options":[...], "default":{...}}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub options: Vec<OptionDomain>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub default: Option<BTreeMap<String, String>>,
}

/// The finite product of option domains, optionally with a default configuration.
#[derive(Debug, Clone)]
pub struct ConfigSpace {
    options: Vec<OptionDomain>,
    default_config: Option<Configuration>,
    by_name: HashMap<String, usize>,
}

impl PartialEq for ConfigSpace {
    fn eq(&self, other: &Self) -> bool {
        self.options == other.options && self.default_config == other.default_config
    }
}

impl Eq for ConfigSpace {}

/// Characters allowed in option names and value tokens, so both survive the
/// textual interaction grammar unquoted.
pub(crate) fn is_token_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | ':' | '+' | '/' | '@')
}

pub(crate) const RESERVED_WORDS: [&str; 3] = ["true", "false", "in"];

fn check_token(kind: &str, token: &str, errors: &mut Vec<String>) {
    if token.is_empty() {
        errors.push(format!("{kind} must be nonempty"));
    } else if !token.chars().all(is_token_char) {
        errors.push(format!(
            "{kind} `{token}` contains characters outside [A-Za-z0-9_.:+/@-]"
        ));
    }
}

impl ConfigSpace {
    /// Builds a space, collecting every validation problem before failing.
    pub fn new(
        options: Vec<OptionDomain>,
        default: Option<&BTreeMap<String, String>>,
    ) -> Result<Self> {
        let mut errors = Vec::new();
        let mut by_name = HashMap::new();
        for (i, opt) in options.iter().enumerate() {
            check_token("option name", &opt.name, &mut errors);
            if RESERVED_WORDS.contains(&opt.name.as_str()) {
                errors.push(format!("option name `{}` is a reserved word", opt.name));
            }
            if by_name.insert(opt.name.clone(), i).is_some() {
                errors.push(format!("duplicate option `{}`", opt.name));
            }
            if opt.values.len() < 2 {
                errors.push(format!("option `{}` needs at least 2 values", opt.name));
            }
            let mut seen = HashSet::new();
            for v in &opt.values {
                check_token(&format!("value of option `{}`", opt.name), v, &mut errors);
                if !seen.insert(v) {
                    errors.push(format!("option `{}` lists value `{v}` twice", opt.name));
                }
            }
        }
        if !errors.is_empty() {
            return Err(Error::Invalid(errors));
        }
        let mut space = ConfigSpace {
            options,
            default_config: None,
            by_name,
        };
        if let Some(default) = default {
            space.default_config = Some(space.config_from_map(default)?);
        }
        Ok(space)
    }

    pub fn from_doc(doc: &SpaceDoc) -> Result<Self> {
        ConfigSpace::new(doc.options.clone(), doc.default.as_ref())
    }

    pub fn to_doc(&self) -> SpaceDoc {
        SpaceDoc {
            options: self.options.clone(),
            default: self.default_config.as_ref().map(|c| self.config_to_map(c)),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpaceDoc = serde_json::from_str(text)?;
        ConfigSpace::from_doc(&doc)
    }

    pub fn options(&self) -> &[OptionDomain] {
        &self.options
    }

    pub fn option(&self, index: usize) -> &OptionDomain {
        &self.options[index]
    }

    pub fn num_options(&self) -> usize {
        self.options.len()
    }

    pub fn option_index(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn domain_size(&self, option: usize) -> usize {
        self.options[option].values.len()
    }

    pub fn default_config(&self) -> Option<&Configuration> {
        self.default_config.as_ref()
    }

    /// Number of configurations, exactly.
    pub fn size(&self) -> BigUint {
        self.options.iter().fold(BigUint::from(1u32), |acc, o| {
            acc * BigUint::from(o.values.len())
        })
    }

    /// Number of configurations when it fits in a `u64`.
    pub fn size_u64(&self) -> Option<u64> {
        self.options
            .iter()
            .try_fold(1u64, |acc, o| acc.checked_mul(o.values.len() as u64))
    }

    pub fn max_domain_size(&self) -> usize {
        self.options
            .iter()
            .map(OptionDomain::len)
            .max()
            .unwrap_or(0)
    }

    /// Builds a configuration from a name → value map that must be total.
    pub fn config_from_map(&self, assignment: &BTreeMap<String, String>) -> Result<Configuration> {
        let mut errors = Vec::new();
        let mut values = vec![u32::MAX; self.options.len()];
        for (name, value) in assignment {
            match self.option_index(name) {
                None => errors.push(format!("configuration assigns unknown option `{name}`")),
                Some(i) => match self.options[i].value_index(value) {
                    None => {
                        errors.push(format!("value `{value}` is not in the domain of `{name}`"))
                    }
                    Some(v) => values[i] = v,
                },
            }
        }
        for (i, v) in values.iter().enumerate() {
            if *v == u32::MAX {
                errors.push(format!(
                    "configuration leaves option `{}` unassigned",
                    self.options[i].name
                ));
            }
        }
        if errors.is_empty() {
            Ok(Configuration(values))
        } else {
            Err(Error::Invalid(errors))
        }
    }

    pub fn config_to_map(&self, config: &Configuration) -> BTreeMap<String, String> {
        self.options
            .iter()
            .zip(&config.0)
            .map(|(o, &v)| (o.name.clone(), o.values[v as usize].clone()))
            .collect()
    }

    /// Checks that `config` assigns a legal value to every option of this space.
    pub fn validate_config(&self, config: &Configuration) -> Result<()> {
        if config.0.len() != self.options.len() {
            return Err(Error::Structural(format!(
                "configuration has {} settings but the space has {} options",
                config.0.len(),
                self.options.len()
            )));
        }
        for (i, &v) in config.0.iter().enumerate() {
            if v as usize >= self.options[i].values.len() {
                return Err(Error::Structural(format!(
                    "value index {v} out of range for option `{}`",
                    self.options[i].name
                )));
            }
        }
        Ok(())
    }

    /// Canonical `name=value,...` form in space order.
    pub fn canonical(&self, config: &Configuration) -> String {
        let mut out = String::new();
        for (i, (o, &v)) in self.options.iter().zip(&config.0).enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&o.name);
            out.push('=');
            out.push_str(&o.values[v as usize]);
        }
        out
    }

    /// Inverse of [`ConfigSpace::canonical`].
    pub fn parse_canonical(&self, text: &str) -> Result<Configuration> {
        let mut map = BTreeMap::new();
        if !text.is_empty() {
            for pair in text.split(',') {
                let (name, value) = pair.split_once('=').ok_or_else(|| {
                    Error::Structural(format!("`{pair}` is not a name=value pair"))
                })?;
                if map.insert(name.to_string(), value.to_string()).is_some() {
                    return Err(Error::Structural(format!("option `{name}` assigned twice")));
                }
            }
        }
        self.config_from_map(&map)
    }

    pub fn value_name(&self, option: usize, value: u32) -> &str {
        &self.options[option].values[value as usize]
    }
}

/// A total assignment: entry `i` is the value index of option `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration(pub(crate) Vec<u32>);

impl Configuration {
    /// Builds a configuration from raw value indices (space order).
    pub fn from_indices(values: Vec<u32>) -> Self {
        Configuration(values)
    }

    pub fn value(&self, option: usize) -> u32 {
        self.0[option]
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub(crate) fn set(&mut self, option: usize, value: u32) {
        self.0[option] = value;
    }
}

/// Per-option value subsets; options absent from the map are unconstrained (⊤).
///
/// Read as a conjunction, the empty map is `true`. Every stored set is a
/// nonempty proper subset of its domain; builders drop sets that reach the
/// full domain.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SettingSet(BTreeMap<usize, BTreeSet<u32>>);

impl SettingSet {
    pub fn new() -> Self {
        SettingSet(BTreeMap::new())
    }

    /// Adds (or replaces) the constraint on `option`. A full-domain set is
    /// dropped; an empty set is rejected.
    pub fn constrain(
        &mut self,
        space: &ConfigSpace,
        option: usize,
        values: BTreeSet<u32>,
    ) -> Result<()> {
        if option >= space.num_options() {
            return Err(Error::Structural(format!(
                "option index {option} out of range"
            )));
        }
        if values.is_empty() {
            return Err(Error::Structural(format!(
                "empty value set for option `{}`",
                space.option(option).name
            )));
        }
        if let Some(&bad) = values
            .iter()
            .find(|&&v| v as usize >= space.domain_size(option))
        {
            return Err(Error::Structural(format!(
                "value index {bad} out of range for option `{}`",
                space.option(option).name
            )));
        }
        if values.len() == space.domain_size(option) {
            self.0.remove(&option);
        } else {
            self.0.insert(option, values);
        }
        Ok(())
    }

    /// Convenience builder from names, used mostly by tests and examples.
    pub fn from_names<'a>(
        space: &ConfigSpace,
        pairs: impl IntoIterator<Item = (&'a str, &'a [&'a str])>,
    ) -> Result<Self> {
        let mut set = SettingSet::new();
        for (name, values) in pairs {
            let opt = space
                .option_index(name)
                .ok_or_else(|| Error::Structural(format!("unknown option `{name}`")))?;
            let mut idx = BTreeSet::new();
            for v in values {
                idx.insert(space.option(opt).value_index(v).ok_or_else(|| {
                    Error::Structural(format!("value `{v}` is not in the domain of `{name}`"))
                })?);
            }
            set.constrain(space, opt, idx)?;
        }
        Ok(set)
    }

    /// Inserts without domain checks; `values` must already be a nonempty proper subset.
    pub(crate) fn insert_raw(&mut self, option: usize, values: BTreeSet<u32>) {
        self.0.insert(option, values);
    }

    /// Number of constrained options.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True when nothing is constrained.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, option: usize) -> Option<&BTreeSet<u32>> {
        self.0.get(&option)
    }

    pub fn contains_option(&self, option: usize) -> bool {
        self.0.contains_key(&option)
    }

    /// Constrained options in space order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, &BTreeSet<u32>)> {
        self.0.iter().map(|(&o, s)| (o, s))
    }

    pub fn options(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.keys().copied()
    }

    /// Every constraint holds (conjunctive reading).
    pub fn holds_all(&self, config: &Configuration) -> bool {
        self.0.iter().all(|(&o, s)| s.contains(&config.0[o]))
    }

    /// Some constraint holds (disjunctive reading).
    pub fn holds_any(&self, config: &Configuration) -> bool {
        self.0.iter().any(|(&o, s)| s.contains(&config.0[o]))
    }

    /// Checks the sets against `space`: known options, nonempty proper subsets.
    pub fn validate(&self, space: &ConfigSpace) -> Result<()> {
        for (&o, s) in &self.0 {
            if o >= space.num_options() {
                return Err(Error::Structural(format!("option index {o} out of range")));
            }
            let n = space.domain_size(o);
            if s.is_empty() || s.len() >= n || s.iter().any(|&v| v as usize >= n) {
                return Err(Error::Structural(format!(
                    "constraint on `{}` is not a nonempty proper subset of its domain",
                    space.option(o).name
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for SettingSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(o, s)| format!("#{o}:{:?}", s.iter().collect::<Vec<_>>()))
            .collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Per-option union of the values assigned by `configs`; options whose union
/// reaches the full domain are dropped.
pub fn pointwise_union<'a>(
    space: &ConfigSpace,
    configs: impl IntoIterator<Item = &'a Configuration>,
) -> Result<SettingSet> {
    let mut seen: Vec<Vec<bool>> = space.options.iter().map(|o| vec![false; o.len()]).collect();
    let mut any = false;
    for c in configs {
        if c.0.len() != seen.len() {
            return Err(Error::Structural(
                "configuration does not match the space".into(),
            ));
        }
        any = true;
        for (slot, &v) in seen.iter_mut().zip(&c.0) {
            slot[v as usize] = true;
        }
    }
    if !any {
        return Err(Error::Usage(
            "pointwise union of an empty configuration set".into(),
        ));
    }
    Ok(union_from_masks(seen))
}

pub(crate) fn union_from_masks(seen: Vec<Vec<bool>>) -> SettingSet {
    let mut set = SettingSet::new();
    for (o, mask) in seen.into_iter().enumerate() {
        if mask.iter().all(|&b| b) {
            continue;
        }
        let values: BTreeSet<u32> = mask
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(v, _)| v as u32)
            .collect();
        set.insert_raw(o, values);
    }
    set
}

/// A 1-way covering array with as many rows as the largest domain.
///
/// Each column holds every value of its option once, pads the remaining
/// rows with uniform draws, and is then shuffled independently of the other
/// columns, so every (option, value) pair appears at least once.
pub fn one_way_covering_array<R: Rng + ?Sized>(
    space: &ConfigSpace,
    rng: &mut R,
) -> Vec<Configuration> {
    let rows = space.max_domain_size();
    let mut table = vec![vec![0u32; space.num_options()]; rows];
    for (o, opt) in space.options.iter().enumerate() {
        let mut column: Vec<u32> = (0..opt.len() as u32).collect();
        while column.len() < rows {
            column.push(rng.gen_range(0..opt.len() as u32));
        }
        column.shuffle(rng);
        for (row, v) in table.iter_mut().zip(column) {
            row[o] = v;
        }
    }
    let mut seen = HashSet::new();
    table
        .into_iter()
        .map(Configuration)
        .filter(|c| seen.insert(c.clone()))
        .collect()
}

/// Every configuration, lexicographic over option order then value order.
pub fn all_configurations(space: &ConfigSpace, cap: u64) -> Result<Vec<Configuration>> {
    let size = match space.size_u64() {
        Some(n) if n <= cap => n,
        _ => {
            return Err(Error::SpaceTooLarge {
                size: space.size().to_string(),
                cap,
            })
        }
    };
    let mut out = Vec::with_capacity(size as usize);
    let mut current = vec![0u32; space.num_options()];
    for _ in 0..size {
        out.push(Configuration(current.clone()));
        // odometer increment, last option fastest
        for o in (0..current.len()).rev() {
            current[o] += 1;
            if (current[o] as usize) < space.domain_size(o) {
                break;
            }
            current[o] = 0;
        }
    }
    Ok(out)
}

/// Fills every option at random, drawing constrained options from their sets.
/// Draws once per option, in space order.
pub fn complete_randomly<R: Rng + ?Sized>(
    partial: &SettingSet,
    space: &ConfigSpace,
    rng: &mut R,
) -> Configuration {
    let values = (0..space.num_options())
        .map(|o| match partial.get(o) {
            Some(set) => *set
                .iter()
                .nth(rng.gen_range(0..set.len()))
                .expect("nonempty constraint"),
            None => rng.gen_range(0..space.domain_size(o)) as u32,
        })
        .collect();
    Configuration(values)
}

pub fn random_configuration<R: Rng + ?Sized>(space: &ConfigSpace, rng: &mut R) -> Configuration {
    complete_randomly(&SettingSet::new(), space, rng)
}
