//! Recursive-descent parser for the textual formula syntax:
//!
//! ```text
//! formula  := or
//! or       := and ('|' and)*
//! and      := until ('&' until)*
//! until    := unary ('U[' num ',' num ']' unary)?
//! unary    := '!' unary | 'F[' num ',' num ']' unary
//!           | 'G[' num ',' num ']' unary | atom
//! atom     := 'TRUE' | IDENT | '(' formula ')'
//! ```
//!
//! Whitespace is insignificant. `F` and `G` are desugared while parsing.

use crate::error::{Error, Result};

use super::formula::Formula;
use super::predicate::PredicateTable;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Bang,
    Amp,
    Pipe,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let simple = match c {
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b'[' => Some(Tok::LBrack),
            b']' => Some(Tok::RBrack),
            b',' => Some(Tok::Comma),
            b'!' => Some(Tok::Bang),
            b'&' => Some(Tok::Amp),
            b'|' => Some(Tok::Pipe),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((start, tok));
            i += 1;
        } else if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(text[start..i].to_string())));
        } else if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' {
            i += 1;
            while i < bytes.len() {
                let d = bytes[i];
                let exp_sign = (d == b'-' || d == b'+') && matches!(bytes[i - 1], b'e' | b'E');
                if d.is_ascii_digit() || d == b'.' || d == b'e' || d == b'E' || exp_sign {
                    i += 1;
                } else {
                    break;
                }
            }
            let lit = &text[start..i];
            let value = lit
                .parse::<f64>()
                .map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number `{lit}`") })?;
            out.push((start, Tok::Num(value)));
        } else {
            let ch = text[start..].chars().next().unwrap_or('?');
            let msg = if ch == '∞' {
                "unbounded intervals are not supported".to_string()
            } else {
                format!("unexpected character `{ch}`")
            };
            return Err(Error::Syntax { pos: start, msg });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    table: &'a PredicateTable,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|(_, t)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.offset(), msg: msg.into() })
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn temporal_keyword(&self) -> Option<char> {
        match (self.peek(), self.peek2()) {
            (Some(Tok::Ident(id)), Some(Tok::LBrack)) if id.len() == 1 => {
                let c = id.chars().next()?;
                matches!(c, 'U' | 'F' | 'G').then_some(c)
            }
            _ => None,
        }
    }

    fn number(&mut self) -> Result<f64> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Ident(id)) if id.eq_ignore_ascii_case("inf") || id.eq_ignore_ascii_case("infinity") => {
                self.error("unbounded intervals are not supported")
            }
            _ => self.error("expected a number"),
        }
    }

    /// Parses `[a, b]` after the operator letter.
    fn interval(&mut self) -> Result<(f64, f64)> {
        self.pos += 1; // operator letter
        self.expect(Tok::LBrack, "`[`")?;
        let a = self.number()?;
        self.expect(Tok::Comma, "`,`")?;
        let b = self.number()?;
        self.expect(Tok::RBrack, "`]`")?;
        Ok((a, b))
    }

    fn formula(&mut self) -> Result<Formula> {
        let mut lhs = self.and()?;
        while self.peek() == Some(&Tok::Pipe) {
            self.pos += 1;
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula> {
        let mut lhs = self.until()?;
        while self.peek() == Some(&Tok::Amp) {
            self.pos += 1;
            lhs = Formula::and(lhs, self.until()?);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula> {
        let lhs = self.unary()?;
        if self.temporal_keyword() == Some('U') {
            let (a, b) = self.interval()?;
            let rhs = self.unary()?;
            return Formula::until(a, b, lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.peek() == Some(&Tok::Bang) {
            self.pos += 1;
            return Ok(Formula::not(self.unary()?));
        }
        match self.temporal_keyword() {
            Some('F') => {
                let (a, b) = self.interval()?;
                Formula::eventually(a, b, self.unary()?)
            }
            Some('G') => {
                let (a, b) = self.interval()?;
                Formula::always(a, b, self.unary()?)
            }
            Some(_) => self.error("`U` needs a left operand"),
            None => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula> {
        match self.peek().cloned() {
            Some(Tok::LParen) => {
                self.pos += 1;
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Some(Tok::Ident(id)) if id == "TRUE" => {
                self.pos += 1;
                Ok(Formula::True)
            }
            Some(Tok::Ident(id)) => match self.table.get(&id) {
                Some(p) => {
                    self.pos += 1;
                    Ok(Formula::atom(p.clone()))
                }
                None => Err(Error::UndeclaredPredicate(id)),
            },
            Some(_) => self.error("expected a predicate, `TRUE` or `(`"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses `text` against the declared predicates.
pub fn parse(text: &str, predicates: &PredicateTable) -> Result<Formula> {
    let mut parser = Parser { toks: lex(text)?, pos: 0, end: text.len(), table: predicates };
    let f = parser.formula()?;
    if parser.pos != parser.toks.len() {
        return parser.error("unexpected trailing input");
    }
    if let Some(dim) = f.dim() {
        f.check_dims(dim)?;
    }
    Ok(f)
}
