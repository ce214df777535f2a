//! Concrete syntax: tokenizer, precedence-climbing parser and minimal-paren printer.
//!
//! | operator | ASCII | also accepted |
//! |----------|-------|---------------|
//! | not      | `~`   | `¬`           |
//! | box      | `[]`  | `□`           |
//! | diamond  | `<>`  | `◇`           |
//! | or       | `\|`  | `∨`           |
//! | and      | `&`   | `∧`           |
//! | implies  | `->`  | `→`           |
//!
//! Unary operators bind tightest, `|`/`&` share one level and associate to
//! the left, `->` is lowest and associates to the right.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Formula, MetaFormula};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SyntaxErrorKind {
    EmptyInput,
    UnknownToken(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    UnclosedParen,
    UnmatchedCloseParen,
    MetavariableNotAllowed(String),
}

/// A syntax error with the byte offset where it was detected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyntaxError {
    pub position: usize,
    pub kind: SyntaxErrorKind,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SyntaxErrorKind::EmptyInput => write!(f, "empty input"),
            SyntaxErrorKind::UnknownToken(c) => {
                write!(f, "unknown token {c:?} at position {}", self.position)
            }
            SyntaxErrorKind::UnexpectedToken(t) => {
                write!(f, "unexpected `{t}` at position {}", self.position)
            }
            SyntaxErrorKind::UnexpectedEnd => {
                write!(f, "unexpected end of input at position {}", self.position)
            }
            SyntaxErrorKind::UnclosedParen => {
                write!(f, "unbalanced parentheses: `(` at position {} is never closed", self.position)
            }
            SyntaxErrorKind::UnmatchedCloseParen => {
                write!(f, "unbalanced parentheses: unmatched `)` at position {}", self.position)
            }
            SyntaxErrorKind::MetavariableNotAllowed(name) => {
                write!(f, "metavariable `{name}` at position {} is not allowed here", self.position)
            }
        }
    }
}

impl core::error::Error for SyntaxError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Meta(String),
    Not,
    Box,
    Diamond,
    Or,
    And,
    Implies,
    LParen,
    RParen,
}

impl Tok {
    fn text(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::Meta(s) => alloc::format!("${s}"),
            Tok::Not => "~".into(),
            Tok::Box => "[]".into(),
            Tok::Diamond => "<>".into(),
            Tok::Or => "|".into(),
            Tok::And => "&".into(),
            Tok::Implies => "->".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, SyntaxError> {
    let mut out = Vec::new();
    let mut it = text.char_indices().peekable();
    let unknown = |pos: usize, c: char| SyntaxError { position: pos, kind: SyntaxErrorKind::UnknownToken(c) };
    while let Some((pos, c)) = it.next() {
        let tok = match c {
            c if c.is_whitespace() => continue,
            '~' | '¬' => Tok::Not,
            '□' => Tok::Box,
            '◇' => Tok::Diamond,
            '|' | '∨' => Tok::Or,
            '&' | '∧' => Tok::And,
            '→' => Tok::Implies,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            'φ' => Tok::Meta("phi".into()),
            'ψ' => Tok::Meta("psi".into()),
            '[' => match it.next() {
                Some((_, ']')) => Tok::Box,
                _ => return Err(unknown(pos, c)),
            },
            '<' => match it.next() {
                Some((_, '>')) => Tok::Diamond,
                _ => return Err(unknown(pos, c)),
            },
            '-' => match it.next() {
                Some((_, '>')) => Tok::Implies,
                _ => return Err(unknown(pos, c)),
            },
            '$' => {
                let mut name = String::new();
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                if name.is_empty() {
                    return Err(unknown(pos, c));
                }
                Tok::Meta(name)
            }
            c if c.is_ascii_lowercase() => {
                let mut name = String::from(c);
                while let Some(&(_, d)) = it.peek() {
                    if d.is_ascii_lowercase() || d.is_ascii_digit() || d == '_' {
                        name.push(d);
                        it.next();
                    } else {
                        break;
                    }
                }
                Tok::Ident(name)
            }
            other => return Err(unknown(pos, other)),
        };
        out.push((pos, tok));
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    end: usize,
    open_parens: Vec<usize>,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn unexpected(&self) -> SyntaxError {
        match self.toks.get(self.idx) {
            Some((p, Tok::RParen)) if self.open_parens.is_empty() => SyntaxError {
                position: *p,
                kind: SyntaxErrorKind::UnmatchedCloseParen,
            },
            Some((p, t)) => SyntaxError { position: *p, kind: SyntaxErrorKind::UnexpectedToken(t.text()) },
            None => match self.open_parens.last() {
                Some(&p) => SyntaxError { position: p, kind: SyntaxErrorKind::UnclosedParen },
                None => SyntaxError { position: self.end, kind: SyntaxErrorKind::UnexpectedEnd },
            },
        }
    }

    // implication := binary ('->' implication)?
    fn implication(&mut self) -> Result<MetaFormula, SyntaxError> {
        let lhs = self.binary()?;
        if self.peek() == Some(&Tok::Implies) {
            self.bump();
            let rhs = self.implication()?;
            return Ok(MetaFormula::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    // binary := unary (('|' | '&') unary)*
    fn binary(&mut self) -> Result<MetaFormula, SyntaxError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Tok::Or) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = MetaFormula::Or(Box::new(lhs), Box::new(rhs));
                }
                Some(Tok::And) => {
                    self.bump();
                    let rhs = self.unary()?;
                    lhs = MetaFormula::And(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<MetaFormula, SyntaxError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(MetaFormula::Not(Box::new(self.unary()?)))
            }
            Some(Tok::Box) => {
                self.bump();
                Ok(MetaFormula::Box(Box::new(self.unary()?)))
            }
            Some(Tok::Diamond) => {
                self.bump();
                Ok(MetaFormula::Diamond(Box::new(self.unary()?)))
            }
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(name)) => Ok(MetaFormula::Atom(name)),
                _ => unreachable!(),
            },
            Some(Tok::Meta(_)) => match self.bump() {
                Some(Tok::Meta(name)) => Ok(MetaFormula::Var(name)),
                _ => unreachable!(),
            },
            Some(Tok::LParen) => {
                let open = self.pos();
                self.bump();
                self.open_parens.push(open);
                let inner = self.implication()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(match self.peek() {
                        None => SyntaxError { position: open, kind: SyntaxErrorKind::UnclosedParen },
                        Some(_) => self.unexpected(),
                    });
                }
                self.bump();
                self.open_parens.pop();
                Ok(inner)
            }
            _ => Err(self.unexpected()),
        }
    }
}

/// Parse a template that may contain metavariables.
pub fn parse_meta(text: &str) -> Result<MetaFormula, SyntaxError> {
    let toks = tokenize(text)?;
    if toks.is_empty() {
        return Err(SyntaxError { position: 0, kind: SyntaxErrorKind::EmptyInput });
    }
    let mut p = Parser { toks, idx: 0, end: text.len(), open_parens: Vec::new() };
    let f = p.implication()?;
    if p.idx < p.toks.len() {
        return Err(p.unexpected());
    }
    Ok(f)
}

/// Parse a closed formula; metavariables are rejected.
pub fn parse_formula(text: &str) -> Result<Formula, SyntaxError> {
    let meta = parse_meta(text)?;
    // Recover the position of the first metavariable for the error message.
    fn close(m: MetaFormula) -> Result<Formula, String> {
        Ok(match m {
            MetaFormula::Atom(a) => Formula::Atom(a),
            MetaFormula::Var(v) => return Err(v),
            MetaFormula::Not(a) => Formula::not(close(*a)?),
            MetaFormula::Box(a) => Formula::boxed(close(*a)?),
            MetaFormula::Diamond(a) => Formula::diamond(close(*a)?),
            MetaFormula::Or(a, b) => Formula::or(close(*a)?, close(*b)?),
            MetaFormula::And(a, b) => Formula::and(close(*a)?, close(*b)?),
            MetaFormula::Implies(a, b) => Formula::implies(close(*a)?, close(*b)?),
        })
    }
    close(meta).map_err(|name| {
        let position = text
            .find('$')
            .or_else(|| text.find(['φ', 'ψ']))
            .unwrap_or(0);
        SyntaxError { position, kind: SyntaxErrorKind::MetavariableNotAllowed(name) }
    })
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Prec {
    Implies = 0,
    Binary = 1,
    Unary = 2,
}

trait Node {
    fn view(&self) -> View<'_, Self>
    where
        Self: Sized;
}

enum View<'a, N> {
    Leaf(String),
    Unary(&'static str, &'a N),
    Binary(&'static str, &'a N, &'a N),
    Implies(&'a N, &'a N),
}

impl Node for Formula {
    fn view(&self) -> View<'_, Self> {
        match self {
            Formula::Atom(a) => View::Leaf(a.clone()),
            Formula::Not(a) => View::Unary("~", a),
            Formula::Box(a) => View::Unary("[]", a),
            Formula::Diamond(a) => View::Unary("<>", a),
            Formula::Or(a, b) => View::Binary(" | ", a, b),
            Formula::And(a, b) => View::Binary(" & ", a, b),
            Formula::Implies(a, b) => View::Implies(a, b),
        }
    }
}

impl Node for MetaFormula {
    fn view(&self) -> View<'_, Self> {
        match self {
            MetaFormula::Atom(a) => View::Leaf(a.clone()),
            MetaFormula::Var(v) => View::Leaf(alloc::format!("${v}")),
            MetaFormula::Not(a) => View::Unary("~", a),
            MetaFormula::Box(a) => View::Unary("[]", a),
            MetaFormula::Diamond(a) => View::Unary("<>", a),
            MetaFormula::Or(a, b) => View::Binary(" | ", a, b),
            MetaFormula::And(a, b) => View::Binary(" & ", a, b),
            MetaFormula::Implies(a, b) => View::Implies(a, b),
        }
    }
}

fn prec<N: Node>(n: &N) -> Prec {
    match n.view() {
        View::Leaf(_) | View::Unary(..) => Prec::Unary,
        View::Binary(..) => Prec::Binary,
        View::Implies(..) => Prec::Implies,
    }
}

fn write_node<N: Node>(n: &N, out: &mut String) {
    match n.view() {
        View::Leaf(s) => out.push_str(&s),
        View::Unary(op, a) => {
            out.push_str(op);
            write_wrapped(a, prec(a) < Prec::Unary, out);
        }
        View::Binary(op, a, b) => {
            write_wrapped(a, prec(a) < Prec::Binary, out);
            out.push_str(op);
            // left-associative: a binary right operand needs parentheses
            write_wrapped(b, prec(b) <= Prec::Binary, out);
        }
        View::Implies(a, b) => {
            write_wrapped(a, prec(a) <= Prec::Implies, out);
            out.push_str(" -> ");
            write_wrapped(b, false, out);
        }
    }
}

fn write_wrapped<N: Node>(n: &N, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_node(n, out);
        out.push(')');
    } else {
        write_node(n, out);
    }
}

pub fn render(f: &Formula) -> String {
    let mut out = String::new();
    write_node(f, &mut out);
    out
}

pub fn render_meta(f: &MetaFormula) -> String {
    let mut out = String::new();
    write_node(f, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> Formula {
        Formula::atom("p")
    }
    fn q() -> Formula {
        Formula::atom("q")
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse_formula("p | q").unwrap(), Formula::or(p(), q()));
        assert_eq!(
            parse_formula("~[]p -> <>q").unwrap(),
            Formula::implies(Formula::not(Formula::boxed(p())), Formula::diamond(q()))
        );
        assert_eq!(
            parse_formula("p -> q -> r").unwrap(),
            Formula::implies(p(), Formula::implies(q(), Formula::atom("r")))
        );
    }

    #[test]
    fn binary_level_is_left_associative() {
        assert_eq!(
            parse_formula("p | q & r").unwrap(),
            Formula::and(Formula::or(p(), q()), Formula::atom("r"))
        );
    }

    #[test]
    fn unicode_operators() {
        assert_eq!(
            parse_formula("¬□p → ◇q").unwrap(),
            parse_formula("~[]p -> <>q").unwrap()
        );
        assert_eq!(parse_formula("p ∨ q ∧ r").unwrap(), parse_formula("p | q & r").unwrap());
    }

    #[test]
    fn render_examples() {
        assert_eq!(render(&Formula::or(p(), q())), "p | q");
        assert_eq!(
            render(&Formula::implies(Formula::not(Formula::boxed(p())), Formula::diamond(q()))),
            "~[]p -> <>q"
        );
        assert_eq!(render(&Formula::boxed(Formula::or(p(), q()))), "[](p | q)");
        assert_eq!(
            render(&Formula::implies(Formula::implies(p(), q()), p())),
            "(p -> q) -> p"
        );
        assert_eq!(render(&Formula::or(p(), Formula::and(q(), p()))), "p | (q & p)");
    }

    #[test]
    fn errors_carry_positions() {
        assert_eq!(parse_formula("").unwrap_err().kind, SyntaxErrorKind::EmptyInput);
        assert_eq!(parse_formula("   ").unwrap_err().kind, SyntaxErrorKind::EmptyInput);

        let e = parse_formula("(p | q").unwrap_err();
        assert_eq!(e, SyntaxError { position: 0, kind: SyntaxErrorKind::UnclosedParen });

        let e = parse_formula("p | q)").unwrap_err();
        assert_eq!(e, SyntaxError { position: 5, kind: SyntaxErrorKind::UnmatchedCloseParen });

        let e = parse_formula("p # q").unwrap_err();
        assert_eq!(e, SyntaxError { position: 2, kind: SyntaxErrorKind::UnknownToken('#') });

        let e = parse_formula("P").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnknownToken('P'));

        let e = parse_formula("p ->").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::UnexpectedEnd);

        let e = parse_formula("p q").unwrap_err();
        assert_eq!(e, SyntaxError { position: 2, kind: SyntaxErrorKind::UnexpectedToken("q".into()) });

        let e = parse_formula("$phi | q").unwrap_err();
        assert_eq!(e.kind, SyntaxErrorKind::MetavariableNotAllowed("phi".into()));
    }

    #[test]
    fn meta_round_trip() {
        let m = parse_meta("[]($phi | $psi) -> ~$phi").unwrap();
        assert_eq!(render_meta(&m), "[]($phi | $psi) -> ~$phi");
    }
}
