//! Term grammar.
//!
//! ```text
//! expr    := product (('+' | '-') product)*
//! product := unary ('*' unary)*
//! unary   := '-' unary | postfix
//! postfix := atom '\''*
//! atom    := 'g' N | 'e' N? | '1' | N | scalar | '(' expr ')'
//! scalar  := '(' Z '/' N (('+' | '-') Z '/' N 'i')? ')'
//! ```
//! Whitespace is ignored. `e` is only accepted when the signature carries
//! Jones projections.

use num_bigint::BigInt;
use num_traits::Zero;

use super::{Signature, Term};
use crate::scalar::{Gauss, Rational};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    One,
    Gen(usize),
    Scalar(Gauss),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Adj(Box<Expr>),
}

impl Expr {
    pub fn flatten(&self, arity: usize) -> Term {
        match self {
            Expr::One => Term::one(arity),
            Expr::Gen(i) => Term::gen(arity, *i),
            Expr::Scalar(c) => Term::scalar(arity, c.clone()),
            Expr::Add(a, b) => a.flatten(arity).add(&b.flatten(arity)),
            Expr::Sub(a, b) => a.flatten(arity).sub(&b.flatten(arity)),
            Expr::Mul(a, b) => a.flatten(arity).mul(&b.flatten(arity)),
            Expr::Neg(a) => a.flatten(arity).scale(&-Gauss::one()),
            Expr::Adj(a) => a.flatten(arity).adjoint(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    sig: Signature,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            pos: self.pos,
            msg: msg.into(),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected '{}'", c as char))
        }
    }

    fn digits(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        (self.pos > start).then(|| std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("0"))
    }

    fn integer(&mut self) -> Result<BigInt> {
        let neg = self.eat(b'-');
        match self.digits() {
            Some(d) => {
                let v: BigInt = d.parse().map_err(|_| Error::Syntax {
                    pos: self.pos,
                    msg: "bad integer".into(),
                })?;
                Ok(if neg { -v } else { v })
            }
            None => self.err("expected integer"),
        }
    }

    fn fraction(&mut self) -> Result<Rational> {
        let a = self.integer()?;
        self.expect(b'/')?;
        let b = self.integer()?;
        if b.is_zero() {
            return self.err("zero denominator");
        }
        Ok(Rational::new(a, b))
    }

    /// After '(' : does a scalar literal follow?
    fn looks_like_scalar(&self) -> bool {
        let mut p = self.pos;
        let s = self.src;
        let ws = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_whitespace() {
                *p += 1;
            }
        };
        ws(&mut p);
        if p < s.len() && s[p] == b'-' {
            p += 1;
            ws(&mut p);
        }
        let start = p;
        while p < s.len() && s[p].is_ascii_digit() {
            p += 1;
        }
        if p == start {
            return false;
        }
        ws(&mut p);
        p < s.len() && s[p] == b'/'
    }

    fn scalar_body(&mut self) -> Result<Gauss> {
        let re = self.fraction()?;
        let mut im = Rational::zero();
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            let neg = self.eat(b'-');
            if !neg {
                self.expect(b'+')?;
            }
            let v = self.fraction()?;
            self.expect(b'i')?;
            im = if neg { -v } else { v };
        }
        self.expect(b')')?;
        Ok(Gauss::new(re, im))
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.product()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.product()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(b'*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let mut a = self.atom()?;
        while self.eat(b'\'') {
            a = Expr::Adj(Box::new(a));
        }
        Ok(a)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'g') => {
                self.pos += 1;
                let at = self.pos;
                let n: usize = match self.digits() {
                    Some(d) => d.parse().unwrap_or(usize::MAX),
                    None => return self.err("expected generator number after 'g'"),
                };
                if n == 0 || n > self.sig.base {
                    return Err(Error::GeneratorOutOfRange {
                        index: n,
                        arity: self.sig.base,
                    })
                    .map_err(|e| match e {
                        Error::GeneratorOutOfRange { .. } if n == 0 => Error::Syntax {
                            pos: at,
                            msg: "generators are numbered from 1".into(),
                        },
                        e => e,
                    });
                }
                Ok(Expr::Gen(n - 1))
            }
            Some(b'e') => {
                if self.sig.jones == 0 {
                    return self.err("'e' is reserved for extended terms");
                }
                self.pos += 1;
                let j = match self.digits() {
                    Some(d) => d.parse::<usize>().unwrap_or(usize::MAX),
                    None => 1,
                };
                if j == 0 || j > self.sig.jones {
                    return self.err(format!("Jones projection e{j} out of range"));
                }
                Ok(Expr::Gen(self.sig.base + j - 1))
            }
            Some(b'(') => {
                self.pos += 1;
                if self.looks_like_scalar() {
                    Ok(Expr::Scalar(self.scalar_body()?))
                } else {
                    let e = self.expr()?;
                    self.expect(b')')?;
                    Ok(e)
                }
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits().unwrap_or("0");
                if d == "1" {
                    Ok(Expr::One)
                } else {
                    let v: BigInt = d.parse().unwrap_or_default();
                    Ok(Expr::Scalar(Gauss::real(Rational::from_integer(v))))
                }
            }
            Some(c) => self.err(format!("unexpected '{}'", c as char)),
            None => self.err("unexpected end of input"),
        }
    }
}

pub fn parse_expr(text: &str, sig: Signature) -> Result<Expr> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        sig,
    };
    let e = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(e)
}

pub fn parse_with(text: &str, sig: Signature) -> Result<Term> {
    Ok(parse_expr(text, sig)?.flatten(sig.arity()))
}

pub fn parse_term(text: &str, arity: usize) -> Result<Term> {
    parse_with(text, Signature::plain(arity))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::{Letter, Word};

    #[test]
    fn spec_examples() {
        let t = parse_term("g1*g1' + (1/2)*1", 1).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.coefficient(&Word::empty()), Gauss::ratio(1, 2));
        let u = parse_term("g1*(g2+g2')", 2).unwrap();
        let words: Vec<_> = u.monomials().map(|(w, _)| w.clone()).collect();
        assert_eq!(
            words,
            vec![
                Word(vec![Letter::new(0, false), Letter::new(1, false)]),
                Word(vec![Letter::new(0, false), Letter::new(1, true)]),
            ]
        );
        assert!(matches!(
            parse_term("g3", 2),
            Err(Error::GeneratorOutOfRange { index: 3, arity: 2 })
        ));
    }

    #[test]
    fn complex_literals_and_errors() {
        let t = parse_term("(1/2 + -3/4 i) * g1'", 1).unwrap();
        assert_eq!(t.len(), 1);
        assert!(matches!(parse_term("g1 +", 1), Err(Error::Syntax { pos: 4, .. })));
        assert!(matches!(parse_term("(1/0)", 1), Err(Error::Syntax { .. })));
        assert!(parse_term("e", 1).is_err());
        let x = parse_with("e*g1*e", Signature::extended(1)).unwrap();
        assert_eq!(x.degree(), 3);
    }

    #[test]
    fn display_round_trip() {
        let sig = Signature::extended(2);
        for s in ["g1*g1' + (1/2)*1", "-g2 + (0/1 + 1/3 i)*e*g1 - 1", "(-7/5)*e*g2'*e"] {
            let t = parse_with(s, sig).unwrap();
            assert_eq!(parse_with(&t.display(sig), sig).unwrap(), t);
            assert_eq!(parse_with(&t.to_canonical_text(sig), sig).unwrap(), t);
        }
    }
}
