//! Text syntax for jet polynomials.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := power ('*' power)*
//! power  := atom ('^' uint)*
//! atom   := uint | var | '(' expr ')'
//! var    := ('x' uint? | 'y' | 'z') ("'"* | '^(' uint ')')
//! ```
//!
//! `x3` is base variable 3, `y` and `z` abbreviate `x1` and `x2`. The jet order
//! is written with primes (`x0''`) or as `x0^(2)`; a bare `^2` is a power.

use num_bigint::BigInt;

use super::{JetAlgebra, JetPolynomial, JetVar};
use crate::error::{Error, Result};
use crate::rings::DeltaRing;

pub fn parse_polynomial<R: DeltaRing>(
    alg: &JetAlgebra<R>,
    text: &str,
) -> Result<JetPolynomial<R::Elem>> {
    let mut parser = Parser {
        alg,
        chars: text.chars().filter(|c| !c.is_whitespace()).collect(),
        pos: 0,
    };
    let f = parser.expr()?;
    if parser.pos != parser.chars.len() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(f)
}

struct Parser<'a, R> {
    alg: &'a JetAlgebra<R>,
    chars: Vec<char>,
    pos: usize,
}

impl<R: DeltaRing> Parser<'_, R> {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn error(&self, msg: &str) -> Error {
        let text: String = self.chars.iter().collect();
        Error::Input(format!("{msg} at offset {} in {text:?}", self.pos))
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {c:?}")))
        }
    }

    fn digits(&mut self) -> Option<String> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| self.chars[start..self.pos].iter().collect())
    }

    fn small_uint(&mut self) -> Result<u32> {
        let d = self.digits().ok_or_else(|| self.error("expected an integer"))?;
        d.parse().map_err(|_| self.error("integer out of range"))
    }

    fn expr(&mut self) -> Result<JetPolynomial<R::Elem>> {
        let alg = self.alg;
        let negate = match self.peek() {
            Some('-') => {
                self.pos += 1;
                true
            }
            Some('+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        let first = self.term()?;
        let mut acc = if negate { alg.neg(&first) } else { first };
        while let Some(op @ ('+' | '-')) = self.peek() {
            self.pos += 1;
            let t = self.term()?;
            acc = if op == '+' {
                alg.add(&acc, &t)?
            } else {
                alg.sub(&acc, &t)?
            };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<JetPolynomial<R::Elem>> {
        let mut acc = self.power()?;
        while self.peek() == Some('*') {
            self.pos += 1;
            let f = self.power()?;
            acc = self.alg.mul(&acc, &f)?;
        }
        Ok(acc)
    }

    fn power(&mut self) -> Result<JetPolynomial<R::Elem>> {
        let mut base = self.atom()?;
        while self.peek() == Some('^') {
            self.pos += 1;
            let e = self.small_uint()?;
            base = self.alg.pow(&base, e)?;
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<JetPolynomial<R::Elem>> {
        let ring = self.alg.ring();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let d = self.digits().unwrap();
                let n: BigInt = d.parse().map_err(|_| self.error("bad integer"))?;
                Ok(self.alg.constant(ring.from_bigint(&n)))
            }
            Some('x' | 'y' | 'z') => {
                let v = self.var()?;
                Ok(self.alg.var(v))
            }
            _ => Err(self.error("expected a number, variable or '('")),
        }
    }

    fn var(&mut self) -> Result<JetVar> {
        let letter = self.peek().unwrap();
        self.pos += 1;
        let base = match letter {
            'x' => match self.digits() {
                Some(d) => d.parse().map_err(|_| self.error("variable index out of range"))?,
                None => 0,
            },
            'y' => 1,
            _ => 2,
        };
        let mut order = 0;
        while self.peek() == Some('\'') {
            self.pos += 1;
            order += 1;
        }
        if order == 0 && self.peek() == Some('^') && self.peek_at(1) == Some('(') {
            self.pos += 2;
            order = self.small_uint()?;
            self.expect(')')?;
        }
        Ok(JetVar::new(base, order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Monomial;
    use crate::rings::{RingParams, WittRing};

    fn alg() -> JetAlgebra<WittRing> {
        JetAlgebra::new(WittRing::new(RingParams::prime_field(5, 3)).unwrap())
    }

    #[test]
    fn orders_and_powers() {
        let a = alg();
        let f = parse_polynomial(&a, "x0^(2)^3").unwrap();
        let g = parse_polynomial(&a, "x'' ^ 3").unwrap();
        assert_eq!(f, g);
        let m = Monomial::from_pairs([(JetVar::new(0, 2), 3)]);
        assert!(f.coefficient(&m).is_some());
    }

    #[test]
    fn aliases_and_signs() {
        let a = alg();
        let f = parse_polynomial(&a, "-(x*y) + x0*x1 + 2").unwrap();
        assert_eq!(f, a.constant(a.ring().from_integer(2)));
        let z = parse_polynomial(&a, "z").unwrap();
        assert_eq!(z, a.var(JetVar::new(2, 0)));
    }

    #[test]
    fn rejects_garbage() {
        let a = alg();
        for bad in ["", "x +", "x^", "(x", "x0^(1", "q", "2)"] {
            assert_eq!(parse_polynomial(&a, bad).unwrap_err().name(), "invalid-input", "{bad:?}");
        }
    }

    #[test]
    fn render_parse_roundtrip_for_prime_field() {
        let a = alg();
        let f = parse_polynomial(&a, "3*x0^2*x1' - x1 + 5*x2^(3)").unwrap();
        let text = a.render(&f);
        let body = text.rsplit_once(" (mod").unwrap().0;
        assert_eq!(parse_polynomial(&a, body).unwrap(), f);
    }
}
