use std::collections::BTreeSet;

use super::{FinalResult, Interaction};
use crate::config_space::{ConfigSpace, SettingSet};
use crate::error::{Error, Result};
use crate::formula::{parse_expr, Expr};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Style {
    Unicode,
    Ascii,
}

impl Style {
    fn not(self) -> &'static str {
        match self {
            Style::Unicode => "¬",
            Style::Ascii => "!",
        }
    }

    fn and(self) -> &'static str {
        match self {
            Style::Unicode => " ∧ ",
            Style::Ascii => " && ",
        }
    }

    fn or(self) -> &'static str {
        match self {
            Style::Unicode => " ∨ ",
            Style::Ascii => " || ",
        }
    }

    fn member(self) -> &'static str {
        match self {
            Style::Unicode => "∈",
            Style::Ascii => " in ",
        }
    }
}

fn literal(space: &ConfigSpace, option: usize, values: &BTreeSet<u32>, style: Style) -> String {
    let domain = space.option(option);
    if domain.is_boolean() && values.len() == 1 {
        let v = values.iter().next().unwrap();
        return if domain.values[*v as usize] == "1" {
            domain.name.clone()
        } else {
            format!("{}{}", style.not(), domain.name)
        };
    }
    let listed: Vec<&str> = values
        .iter()
        .map(|&v| domain.values[v as usize].as_str())
        .collect();
    format!("{}{}{{{}}}", domain.name, style.member(), listed.join(","))
}

fn join(space: &ConfigSpace, set: &SettingSet, sep: &str, style: Style) -> String {
    set.iter()
        .map(|(o, s)| literal(space, o, s, style))
        .collect::<Vec<_>>()
        .join(sep)
}

pub(crate) fn render(phi: &Interaction, space: &ConfigSpace, style: Style) -> String {
    match phi {
        Interaction::True => "true".to_string(),
        Interaction::Conj(core) => join(space, core, style.and(), style),
        Interaction::Disj(clauses) => join(space, clauses, style.or(), style),
        Interaction::ConjDisj { core, clauses } => format!(
            "{}{}({})",
            join(space, core, style.and(), style),
            style.and(),
            join(space, clauses, style.or(), style)
        ),
        Interaction::DisjConj { clauses, core } => format!(
            "{}{}({})",
            join(space, clauses, style.or(), style),
            style.or(),
            join(space, core, style.and(), style)
        ),
    }
}

/// A single part renders bare; several parts are each parenthesized.
pub(crate) fn render_final(result: &FinalResult, space: &ConfigSpace, style: Style) -> String {
    match result.parts() {
        [one] => render(one, space, style),
        parts => parts
            .iter()
            .map(|p| format!("({})", render(p, space, style)))
            .collect::<Vec<_>>()
            .join(style.and()),
    }
}

fn as_literal(e: &Expr, space: &ConfigSpace) -> Option<(usize, BTreeSet<u32>)> {
    match e.unparen() {
        Expr::Member { option, values } => Some((*option, values.clone())),
        Expr::Not(inner) => match inner.unparen() {
            Expr::Member { option, values } => {
                let rest = (0..space.domain_size(*option) as u32)
                    .filter(|v| !values.contains(v))
                    .collect();
                Some((*option, rest))
            }
            _ => None,
        },
        _ => None,
    }
}

fn not_template() -> Error {
    Error::parse(0, "formula is not one of the interaction templates")
}

/// Intersects `values` into the conjunctive set; `false` when it empties.
fn meet(set: &mut SettingSet, space: &ConfigSpace, option: usize, values: BTreeSet<u32>) -> bool {
    let merged: BTreeSet<u32> = match set.get(option) {
        Some(old) => old.intersection(&values).copied().collect(),
        None => values,
    };
    if merged.is_empty() {
        return false;
    }
    if merged.len() < space.domain_size(option) {
        set.insert_raw(option, merged);
    }
    true
}

/// Unions `values` into the disjunctive set; `false` when it fills the domain.
fn join_into(
    set: &mut SettingSet,
    space: &ConfigSpace,
    option: usize,
    values: BTreeSet<u32>,
) -> bool {
    let merged: BTreeSet<u32> = match set.get(option) {
        Some(old) => old.union(&values).copied().collect(),
        None => values,
    };
    if merged.len() >= space.domain_size(option) {
        return false;
    }
    if !merged.is_empty() {
        set.insert_raw(option, merged);
    }
    true
}

fn conj_of(children: &[Expr], space: &ConfigSpace) -> Result<Option<SettingSet>> {
    let mut core = SettingSet::new();
    for c in children {
        let (o, s) = as_literal(c, space).ok_or_else(not_template)?;
        if !meet(&mut core, space, o, s) {
            return Ok(None);
        }
    }
    Ok(Some(core))
}

/// `None` means the disjunction is trivially true.
fn disj_of(children: &[Expr], space: &ConfigSpace) -> Result<Option<SettingSet>> {
    let mut clauses = SettingSet::new();
    for c in children {
        let (o, s) = as_literal(c, space).ok_or_else(not_template)?;
        if !join_into(&mut clauses, space, o, s) {
            return Ok(None);
        }
    }
    Ok(Some(clauses))
}

fn unsatisfiable() -> Error {
    Error::parse(0, "interaction is unsatisfiable")
}

fn to_interaction(e: &Expr, space: &ConfigSpace) -> Result<Interaction> {
    let e = e.unparen();
    if let Some((o, s)) = as_literal(e, space) {
        let mut core = SettingSet::new();
        if !meet(&mut core, space, o, s) {
            return Err(unsatisfiable());
        }
        return Ok(Interaction::conj(core));
    }
    match e {
        Expr::Const(true) => Ok(Interaction::True),
        Expr::Const(false) => Err(unsatisfiable()),
        Expr::And(children) => {
            let (lits, rest): (Vec<&Expr>, Vec<&Expr>) = children
                .iter()
                .partition(|c| as_literal(c, space).is_some());
            let lits: Vec<Expr> = lits.into_iter().cloned().collect();
            let core = conj_of(&lits, space)?.ok_or_else(unsatisfiable)?;
            match rest.as_slice() {
                [] => Ok(Interaction::conj(core)),
                [group] => match group.unparen() {
                    Expr::Or(alts) => match disj_of(alts, space)? {
                        None => Ok(Interaction::conj(core)),
                        Some(clauses) => {
                            Interaction::conj_disj(core, clauses).ok_or_else(unsatisfiable)
                        }
                    },
                    _ => Err(not_template()),
                },
                _ => Err(not_template()),
            }
        }
        Expr::Or(children) => {
            let (lits, rest): (Vec<&Expr>, Vec<&Expr>) = children
                .iter()
                .partition(|c| as_literal(c, space).is_some());
            let lits: Vec<Expr> = lits.into_iter().cloned().collect();
            let Some(clauses) = disj_of(&lits, space)? else {
                return Ok(Interaction::True);
            };
            match rest.as_slice() {
                [] => Interaction::disj(clauses).ok_or_else(unsatisfiable),
                [group] => match group.unparen() {
                    Expr::And(parts) => match conj_of(parts, space)? {
                        None => Interaction::disj(clauses).ok_or_else(unsatisfiable),
                        Some(core) => {
                            Interaction::disj_conj(clauses, core, space).ok_or_else(unsatisfiable)
                        }
                    },
                    _ => Err(not_template()),
                },
                _ => Err(not_template()),
            }
        }
        _ => Err(not_template()),
    }
}

/// Reads a single interaction (Unicode or ASCII operators).
pub fn parse_interaction(text: &str, space: &ConfigSpace) -> Result<Interaction> {
    to_interaction(&parse_expr(text, space)?, space)
}

/// Reads a location result: a single interaction, or several parenthesized
/// parts joined by `∧`.
pub fn parse_final(text: &str, space: &ConfigSpace) -> Result<FinalResult> {
    let expr = parse_expr(text, space)?;
    if let Expr::And(children) = &expr {
        if children.len() >= 2 && children.iter().all(|c| matches!(c, Expr::Paren(_))) {
            let parts = children
                .iter()
                .map(|c| to_interaction(c, space))
                .collect::<Result<Vec<_>>>()?;
            return Ok(FinalResult::from_parts(parts));
        }
    }
    Ok(FinalResult::single(to_interaction(&expr, space)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interaction::tests::{fig1_space, set};

    #[test]
    fn render_l1() {
        let space = fig1_space();
        let phi = Interaction::Conj(set(
            &space,
            &[("x", &["1"]), ("y", &["1"]), ("z", &["0", "3", "4"])],
        ));
        assert_eq!(phi.render(&space), "x ∧ y ∧ z∈{0,3,4}");
        assert_eq!(phi.render_ascii(&space), "x && y && z in {0,3,4}");
        assert_eq!(Interaction::True.render(&space), "true");
    }

    #[test]
    fn parse_each_template() {
        let space = fig1_space();
        for text in [
            "true",
            "x ∧ y ∧ z∈{0,3,4}",
            "¬x ∨ ¬y",
            "u ∧ v ∧ (s ∨ t)",
            "¬x ∨ ¬y ∨ (u ∧ v)",
            "u && v && (s || t || z in {0,4})",
        ] {
            let phi = parse_interaction(text, &space).unwrap();
            let again = parse_interaction(&phi.render(&space), &space).unwrap();
            assert_eq!(phi, again, "{text}");
        }
        assert!(matches!(
            parse_interaction("u ∧ v ∧ (s ∨ t)", &space).unwrap(),
            Interaction::ConjDisj { .. }
        ));
        assert!(matches!(
            parse_interaction("¬x ∨ ¬y ∨ (u ∧ v)", &space).unwrap(),
            Interaction::DisjConj { .. }
        ));
    }

    #[test]
    fn non_templates_are_rejected() {
        let space = fig1_space();
        assert!(parse_interaction("(x ∨ y) ∧ (u ∨ v)", &space).is_err());
        assert!(parse_interaction("x ∧ ¬x", &space).is_err());
        assert!(parse_interaction("false", &space).is_err());
    }

    #[test]
    fn multi_part_results() {
        let space = fig1_space();
        let r = parse_final("(x) ∧ (¬x ∨ y ∨ u)", &space).unwrap();
        assert_eq!(r.parts().len(), 2);
        assert_eq!(parse_final(&r.render(&space), &space).unwrap(), r);
        let single = parse_final("x ∧ (y ∨ u)", &space).unwrap();
        assert_eq!(single.parts().len(), 1);
    }
}
