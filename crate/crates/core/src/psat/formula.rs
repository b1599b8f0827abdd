//! Propositional formulas over named atoms.
//!
//! Grammar, loosest binding first: `f -> f` (right associative), `f | f`,
//! `f & f`, `!f`, atoms and parentheses. `~`, `¬`, `∧`, `∨` and `→` are
//! accepted as alternative spellings.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::sat::{Lit, Solver};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula<A = String> {
    Atom(A),
    Not(Box<Formula<A>>),
    And(Box<Formula<A>>, Box<Formula<A>>),
    Or(Box<Formula<A>>, Box<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
}

impl<A> Formula<A> {
    pub fn atom(a: impl Into<A>) -> Self {
        Formula::Atom(a.into())
    }

    pub fn negate(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, other: Self) -> Self {
        Formula::And(Box::new(self), Box::new(other))
    }

    pub fn or(self, other: Self) -> Self {
        Formula::Or(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: Self) -> Self {
        Formula::Implies(Box::new(self), Box::new(other))
    }

    /// Left-nested conjunction; `None` for an empty list.
    pub fn conjunction(parts: impl IntoIterator<Item = Self>) -> Option<Self> {
        parts.into_iter().reduce(Self::and)
    }

    pub fn disjunction(parts: impl IntoIterator<Item = Self>) -> Option<Self> {
        parts.into_iter().reduce(Self::or)
    }

    pub fn is_atom(&self) -> bool {
        matches!(self, Formula::Atom(_))
    }

    /// Atoms in order of first occurrence, without repetition.
    pub fn atoms(&self) -> Vec<&A>
    where
        A: PartialEq,
    {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a A>)
    where
        A: PartialEq,
    {
        match self {
            Formula::Atom(a) => {
                if !out.contains(&a) {
                    out.push(a);
                }
            }
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    pub fn try_map_atoms<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Formula<B>, E> {
        Ok(match self {
            Formula::Atom(a) => Formula::Atom(f(a)?),
            Formula::Not(x) => Formula::Not(Box::new(x.try_map_atoms(f)?)),
            Formula::And(l, r) => Formula::And(Box::new(l.try_map_atoms(f)?), Box::new(r.try_map_atoms(f)?)),
            Formula::Or(l, r) => Formula::Or(Box::new(l.try_map_atoms(f)?), Box::new(r.try_map_atoms(f)?)),
            Formula::Implies(l, r) => Formula::Implies(Box::new(l.try_map_atoms(f)?), Box::new(r.try_map_atoms(f)?)),
        })
    }

    /// Truth value with `lookup` resolving atoms.
    pub fn eval_by(&self, lookup: &impl Fn(&A) -> bool) -> bool {
        match self {
            Formula::Atom(a) => lookup(a),
            Formula::Not(f) => !f.eval_by(lookup),
            Formula::And(l, r) => l.eval_by(lookup) && r.eval_by(lookup),
            Formula::Or(l, r) => l.eval_by(lookup) || r.eval_by(lookup),
            Formula::Implies(l, r) => !l.eval_by(lookup) || r.eval_by(lookup),
        }
    }
}

impl Formula<String> {
    /// Evaluates under a partial map from atom names to truth values.
    pub fn eval(&self, valuation: &HashMap<String, bool>) -> Result<bool> {
        if let Some(missing) = self.atoms().into_iter().find(|a| !valuation.contains_key(*a)) {
            return Err(Error::UnknownAtom(missing.clone()));
        }
        Ok(self.eval_by(&|a| valuation[a]))
    }

    /// Replaces atom names by indices.
    pub fn resolve(&self, index: &impl Fn(&str) -> Option<usize>) -> Result<Formula<usize>> {
        self.try_map_atoms(&mut |a: &String| index(a).ok_or_else(|| Error::UnknownAtom(a.clone())))
    }
}

impl Formula<usize> {
    pub fn eval_indexed(&self, values: &[bool]) -> bool {
        self.eval_by(&|&i| values[i])
    }
}

/// Adds clauses making the returned literal equivalent to `formula`; atom `i`
/// is the solver variable `atom_var(i)`.
pub fn tseitin(formula: &Formula<usize>, solver: &mut Solver, atom_var: &impl Fn(usize) -> Lit) -> Lit {
    match formula {
        Formula::Atom(i) => atom_var(*i),
        Formula::Not(f) => -tseitin(f, solver, atom_var),
        Formula::And(l, r) => {
            let (a, b) = (tseitin(l, solver, atom_var), tseitin(r, solver, atom_var));
            let x = solver.new_var();
            solver.add_clause(&[-x, a]);
            solver.add_clause(&[-x, b]);
            solver.add_clause(&[x, -a, -b]);
            x
        }
        Formula::Or(l, r) => {
            let (a, b) = (tseitin(l, solver, atom_var), tseitin(r, solver, atom_var));
            let x = solver.new_var();
            solver.add_clause(&[-x, a, b]);
            solver.add_clause(&[x, -a]);
            solver.add_clause(&[x, -b]);
            x
        }
        Formula::Implies(l, r) => {
            let (a, b) = (tseitin(l, solver, atom_var), tseitin(r, solver, atom_var));
            let x = solver.new_var();
            solver.add_clause(&[-x, -a, b]);
            solver.add_clause(&[x, a]);
            solver.add_clause(&[x, -b]);
            x
        }
    }
}

fn precedence<A>(f: &Formula<A>) -> u8 {
    match f {
        Formula::Implies(..) => 0,
        Formula::Or(..) => 1,
        Formula::And(..) => 2,
        Formula::Not(_) | Formula::Atom(_) => 3,
    }
}

impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let child = |f: &mut fmt::Formatter<'_>, c: &Formula<A>, min: u8| {
            if precedence(c) < min {
                write!(f, "({c})")
            } else {
                write!(f, "{c}")
            }
        };
        match self {
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => {
                f.write_str("!")?;
                child(f, x, 3)
            }
            Formula::And(l, r) => {
                child(f, l, 2)?;
                f.write_str(" & ")?;
                child(f, r, 3)
            }
            Formula::Or(l, r) => {
                child(f, l, 1)?;
                f.write_str(" | ")?;
                child(f, r, 2)
            }
            Formula::Implies(l, r) => {
                child(f, l, 1)?;
                f.write_str(" -> ")?;
                child(f, r, 0)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Token {
    Atom(String),
    Not,
    And,
    Or,
    Implies,
    Open,
    Close,
}

pub(crate) fn is_atom_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '\'' | '.')
}

fn tokenize(text: &str, line: usize, column: usize) -> Result<Vec<(Token, usize)>> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        let col = column + text[..pos].chars().count();
        let token = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '!' | '~' | '¬' => Token::Not,
            '&' | '∧' => Token::And,
            '|' | '∨' => Token::Or,
            '→' => Token::Implies,
            '(' => Token::Open,
            ')' => Token::Close,
            '-' if chars.get(i + 1).map(|p| p.1) == Some('>') => {
                i += 1;
                Token::Implies
            }
            c if is_atom_char(c) => {
                let start = pos;
                while i + 1 < chars.len() && is_atom_char(chars[i + 1].1) {
                    i += 1;
                }
                let end = chars.get(i + 1).map_or(text.len(), |p| p.0);
                Token::Atom(text[start..end].to_string())
            }
            other => {
                return Err(Error::Syntax {
                    line,
                    column: col,
                    message: format!("unexpected character {other:?} in formula"),
                })
            }
        };
        tokens.push((token, col));
        i += 1;
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    line: usize,
    end_column: usize,
}

impl Parser {
    fn error(&self, message: impl Into<String>) -> Error {
        let column = self.tokens.get(self.pos).map_or(self.end_column, |t| t.1);
        Error::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|t| &t.0)
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Implies) {
            Ok(lhs.implies(self.implication()?))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut f = self.conjunction()?;
        while self.eat(&Token::Or) {
            f = f.or(self.conjunction()?);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut f = self.unary()?;
        while self.eat(&Token::And) {
            f = f.and(self.unary()?);
        }
        Ok(f)
    }

    fn unary(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Token::Not) => {
                self.pos += 1;
                Ok(self.unary()?.negate())
            }
            Some(Token::Open) => {
                self.pos += 1;
                let f = self.implication()?;
                if !self.eat(&Token::Close) {
                    return Err(self.error("expected ')'"));
                }
                Ok(f)
            }
            Some(Token::Atom(a)) => {
                self.pos += 1;
                Ok(Formula::Atom(a))
            }
            Some(_) => Err(self.error("expected an atom, '!' or '('")),
            None => Err(self.error("unexpected end of formula")),
        }
    }
}

/// Parses a formula; `line` and `column` locate `text` in its source for
/// error messages.
pub fn parse_formula_at(text: &str, line: usize, column: usize) -> Result<Formula> {
    let tokens = tokenize(text, line, column)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        line,
        end_column: column + text.chars().count(),
    };
    let f = parser.implication()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(f)
}

pub fn parse_formula(text: &str) -> Result<Formula> {
    parse_formula_at(text, 1, 1)
}
