//! Arbitrarily nested formulas over membership constraints, and the parser
//! for the textual grammar shared with interactions:
//!
//! ```text
//! or    := and (('∨' | '||') and)*
//! and   := unary (('∧' | '&&') unary)*
//! unary := ('¬' | '!') unary | primary
//! prim  := 'true' | 'false' | '(' or ')' | name [('∈' | 'in') '{' value (',' value)* '}']
//! ```
//!
//! A bare `name` is only allowed for `{0,1}` options and means `name ∈ {1}`.

use std::collections::BTreeSet;

use crate::config_space::{is_token_char, ConfigSpace, Configuration};
use crate::error::{Error, Result};
use crate::interaction::{Interaction, Predicate};

/// Guard formula of a synthetic subject location.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormulaAst {
    Const(bool),
    Member {
        option: usize,
        values: BTreeSet<u32>,
    },
    Not(Box<FormulaAst>),
    And(Vec<FormulaAst>),
    Or(Vec<FormulaAst>),
}

impl FormulaAst {
    pub fn parse(text: &str, space: &ConfigSpace) -> Result<FormulaAst> {
        Ok(parse_expr(text, space)?.into_ast())
    }

    pub fn eval(&self, config: &Configuration) -> bool {
        match self {
            FormulaAst::Const(b) => *b,
            FormulaAst::Member { option, values } => values.contains(&config.value(*option)),
            FormulaAst::Not(inner) => !inner.eval(config),
            FormulaAst::And(children) => children.iter().all(|c| c.eval(config)),
            FormulaAst::Or(children) => children.iter().any(|c| c.eval(config)),
        }
    }

    fn collect_options(&self, out: &mut BTreeSet<usize>) {
        match self {
            FormulaAst::Const(_) => {}
            FormulaAst::Member { option, .. } => {
                out.insert(*option);
            }
            FormulaAst::Not(inner) => inner.collect_options(out),
            FormulaAst::And(children) | FormulaAst::Or(children) => {
                children.iter().for_each(|c| c.collect_options(out))
            }
        }
    }
}

impl Predicate for FormulaAst {
    fn mentioned_options(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_options(&mut out);
        out
    }

    fn holds(&self, config: &Configuration) -> bool {
        self.eval(config)
    }
}

impl From<&Interaction> for FormulaAst {
    fn from(phi: &Interaction) -> Self {
        fn members(set: &crate::config_space::SettingSet) -> Vec<FormulaAst> {
            set.iter()
                .map(|(option, values)| FormulaAst::Member {
                    option,
                    values: values.clone(),
                })
                .collect()
        }
        match phi {
            Interaction::True => FormulaAst::Const(true),
            Interaction::Conj(core) => FormulaAst::And(members(core)),
            Interaction::Disj(clauses) => FormulaAst::Or(members(clauses)),
            Interaction::ConjDisj { core, clauses } => {
                let mut parts = members(core);
                parts.push(FormulaAst::Or(members(clauses)));
                FormulaAst::And(parts)
            }
            Interaction::DisjConj { clauses, core } => {
                let mut parts = members(clauses);
                parts.push(FormulaAst::And(members(core)));
                FormulaAst::Or(parts)
            }
        }
    }
}

/// Parse tree that still remembers explicit parentheses, which the
/// interaction reader uses to tell multi-part results apart.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Expr {
    Const(bool),
    Member {
        option: usize,
        values: BTreeSet<u32>,
    },
    Not(Box<Expr>),
    And(Vec<Expr>),
    Or(Vec<Expr>),
    Paren(Box<Expr>),
}

impl Expr {
    pub(crate) fn into_ast(self) -> FormulaAst {
        match self {
            Expr::Const(b) => FormulaAst::Const(b),
            Expr::Member { option, values } => FormulaAst::Member { option, values },
            Expr::Not(inner) => FormulaAst::Not(Box::new(inner.into_ast())),
            Expr::And(children) => {
                FormulaAst::And(children.into_iter().map(Expr::into_ast).collect())
            }
            Expr::Or(children) => {
                FormulaAst::Or(children.into_iter().map(Expr::into_ast).collect())
            }
            Expr::Paren(inner) => inner.into_ast(),
        }
    }

    pub(crate) fn unparen(&self) -> &Expr {
        match self {
            Expr::Paren(inner) => inner.unparen(),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    In,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut out = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            continue;
        }
        let two =
            |chars: &mut std::iter::Peekable<std::str::CharIndices>, second: char| -> Result<()> {
                chars.next();
                match chars.next() {
                    Some((_, c2)) if c2 == second => Ok(()),
                    _ => Err(Error::parse(pos, format!("expected `{c}{second}`"))),
                }
            };
        let tok = match c {
            '¬' | '!' => {
                chars.next();
                Tok::Not
            }
            '∧' => {
                chars.next();
                Tok::And
            }
            '∨' => {
                chars.next();
                Tok::Or
            }
            '∈' => {
                chars.next();
                Tok::In
            }
            '&' => {
                two(&mut chars, '&')?;
                Tok::And
            }
            '|' => {
                two(&mut chars, '|')?;
                Tok::Or
            }
            '(' => {
                chars.next();
                Tok::LParen
            }
            ')' => {
                chars.next();
                Tok::RParen
            }
            '{' => {
                chars.next();
                Tok::LBrace
            }
            '}' => {
                chars.next();
                Tok::RBrace
            }
            ',' => {
                chars.next();
                Tok::Comma
            }
            c if is_token_char(c) => {
                let mut word = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_token_char(c) {
                        break;
                    }
                    word.push(c);
                    chars.next();
                }
                if word == "in" {
                    Tok::In
                } else {
                    Tok::Ident(word)
                }
            }
            other => return Err(Error::parse(pos, format!("unexpected character `{other}`"))),
        };
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    space: &'a ConfigSpace,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(o, _)| *o)
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(Error::parse(self.offset(), format!("expected {what}")))
        }
    }

    fn or(&mut self) -> Result<Expr> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(&Tok::Or) {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::Or(parts)
        })
    }

    fn and(&mut self) -> Result<Expr> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.pos += 1;
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Expr::And(parts)
        })
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Tok::Not) {
            self.pos += 1;
            let inner = self.unary()?;
            return Ok(match inner {
                // `¬x` on a boolean option is the literal x ∈ {0}
                Expr::Member { option, values }
                    if self.space.option(option).is_boolean() && values.len() == 1 =>
                {
                    let one = self.space.option(option).value_index("1").unwrap();
                    if values.contains(&one) {
                        Expr::Member {
                            option,
                            values: BTreeSet::from([self
                                .space
                                .option(option)
                                .value_index("0")
                                .unwrap()]),
                        }
                    } else {
                        Expr::Not(Box::new(Expr::Member { option, values }))
                    }
                }
                other => Expr::Not(Box::new(other)),
            });
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.or()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::Paren(Box::new(inner)))
            }
            Some(Tok::Ident(word)) if word == "true" => {
                self.pos += 1;
                Ok(Expr::Const(true))
            }
            Some(Tok::Ident(word)) if word == "false" => {
                self.pos += 1;
                Ok(Expr::Const(false))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                let option = self
                    .space
                    .option_index(&name)
                    .ok_or_else(|| Error::parse(at, format!("unknown option `{name}`")))?;
                let domain = self.space.option(option);
                if self.peek() == Some(&Tok::In) {
                    self.pos += 1;
                    self.expect(Tok::LBrace, "`{`")?;
                    let mut values = BTreeSet::new();
                    loop {
                        let vat = self.offset();
                        match self.peek().cloned() {
                            Some(Tok::Ident(v)) => {
                                self.pos += 1;
                                let idx = domain.value_index(&v).ok_or_else(|| {
                                    Error::parse(
                                        vat,
                                        format!("value `{v}` is not in the domain of `{name}`"),
                                    )
                                })?;
                                values.insert(idx);
                            }
                            _ => return Err(Error::parse(vat, "expected a value")),
                        }
                        match self.peek() {
                            Some(Tok::Comma) => self.pos += 1,
                            Some(Tok::RBrace) => {
                                self.pos += 1;
                                break;
                            }
                            _ => return Err(Error::parse(self.offset(), "expected `,` or `}`")),
                        }
                    }
                    Ok(Expr::Member { option, values })
                } else if domain.is_boolean() {
                    Ok(Expr::Member {
                        option,
                        values: BTreeSet::from([domain.value_index("1").unwrap()]),
                    })
                } else {
                    Err(Error::parse(
                        at,
                        format!("option `{name}` is not boolean; write `{name} in {{...}}`"),
                    ))
                }
            }
            Some(_) => Err(Error::parse(
                at,
                "expected an option, `true`, `false` or `(`",
            )),
            None => Err(Error::parse(at, "unexpected end of input")),
        }
    }
}

pub(crate) fn parse_expr(text: &str, space: &ConfigSpace) -> Result<Expr> {
    let toks = tokenize(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
        space,
    };
    let expr = parser.or()?;
    if parser.pos != parser.toks.len() {
        return Err(Error::parse(parser.offset(), "trailing input"));
    }
    Ok(expr)
}
