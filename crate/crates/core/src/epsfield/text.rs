//! Recursive-descent parser for the text form of Q(e) elements.
//!
//! Grammar (whitespace ignored):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary | atom)*     juxtaposition multiplies: "5e"
//! unary  := '-' unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | 'e' | 'ε' | '(' expr ')'
//! ```

use super::EpsRational;
use crate::error::{Error, Result};
use crate::Rational;
use num_bigint::BigInt;

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    src: &'a str,
}

fn err<T>(column: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        column,
        message: message.into(),
    })
}

pub(super) fn parse(src: &str) -> Result<EpsRational> {
    let mut p = Parser {
        chars: src
            .chars()
            .enumerate()
            .filter(|(_, c)| !c.is_whitespace())
            .collect(),
        pos: 0,
        src,
    };
    if p.chars.is_empty() {
        return err(1, "empty expression");
    }
    let v = p.expr()?;
    if let Some(&(col, c)) = p.chars.get(p.pos) {
        return err(col + 1, format!("unexpected {c:?}"));
    }
    Ok(v)
}

impl Parser<'_> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn column(&self) -> usize {
        self.chars
            .get(self.pos)
            .map(|&(i, _)| i + 1)
            .unwrap_or(self.src.chars().count() + 1)
    }

    fn expr(&mut self) -> Result<EpsRational> {
        let mut acc = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if c == '+' { &acc + &rhs } else { &acc - &rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<EpsRational> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some('*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some('/') => {
                    self.pos += 1;
                    let col = self.column();
                    let rhs = self.unary()?;
                    acc = match acc.checked_div(&rhs) {
                        Ok(v) => v,
                        Err(_) => return err(col, "division by zero"),
                    };
                }
                Some('e' | 'ε' | '(') => acc = &acc * &self.power()?,
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<EpsRational> {
        if self.peek() == Some('-') {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        if self.peek() == Some('+') {
            self.pos += 1;
        }
        self.power()
    }

    fn power(&mut self) -> Result<EpsRational> {
        let base = self.atom()?;
        if self.peek() == Some('^') {
            self.pos += 1;
            let col = self.column();
            let k = self.integer()?;
            let k: u32 = match u32::try_from(&k) {
                Ok(k) if k <= 4096 => k,
                _ => return err(col, "exponent must be a small nonnegative integer"),
            };
            return Ok(base.pow(k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<EpsRational> {
        let col = self.column();
        match self.peek() {
            Some('e' | 'ε') => {
                self.pos += 1;
                Ok(EpsRational::eps())
            }
            Some('(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(')') {
                    return err(self.column(), "expected ')'");
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                Ok(EpsRational::from_rational(&Rational::from_integer(n)))
            }
            Some(c) => err(col, format!("unexpected {c:?}")),
            None => err(col, "unexpected end of input"),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        let col = self.column();
        let mut digits = String::new();
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            digits.push(c);
            self.pos += 1;
        }
        if digits.is_empty() {
            return err(col, "expected an integer");
        }
        Ok(digits.parse().expect("ascii digits"))
    }
}
