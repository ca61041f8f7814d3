//! Exact field-element expressions: integer literals, `sqrt(k)`, `+ - * /`,
//! parentheses and unary minus.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := ('-' | '+') unary | atom
//! atom  := INT | 'sqrt' '(' expr ')' | '(' expr ')'
//! ```
//!
//! `sqrt` takes any rational argument without square roots. `sqrt(s²·d)` is
//! `s·√d` with `d` squarefree, so `sqrt(8)` is `2*sqrt(2)` and `sqrt(4)` is
//! just `2`. Every irrational `sqrt` in one expression must reduce to the
//! same `d`. An expression with no irrational `sqrt` evaluates to a rational.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::arith::{square_decomposition, ExactRational, FieldElem, QuadElem, Radicand};
use crate::error::{Error, Result};

/// Parses and evaluates `text`.
pub fn parse_elem(text: &str) -> Result<FieldElem> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        radicand: None,
    };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    radicand: Option<(Radicand, usize)>,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        Error::Parse {
            pos,
            message: message.into(),
        }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(self.error(format!("expected '{}', found '{}'", c as char, x as char))),
            None => Err(self.error(format!("expected '{}', found end of input", c as char))),
        }
    }

    fn expr(&mut self) -> Result<FieldElem> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == b'+' { acc.try_add(&rhs)? } else { acc.try_sub(&rhs)? };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<FieldElem> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' {
                acc.try_mul(&rhs)?
            } else {
                if rhs.is_zero() {
                    return Err(self.error_at(at, "division by zero"));
                }
                acc.try_div(&rhs)?
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<FieldElem> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<FieldElem> {
        let start = match self.peek() {
            Some(_) => self.pos,
            None => return Err(self.error("unexpected end of input")),
        };
        let c = self.src[start];
        if c.is_ascii_digit() {
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
            let n: BigInt = digits.parse().expect("digits");
            return Ok(FieldElem::Rational(ExactRational::from_integer(n)));
        }
        if c == b'(' {
            self.pos += 1;
            let v = self.expr()?;
            self.expect(b')')?;
            return Ok(v);
        }
        if self.src[start..].starts_with(b"sqrt") {
            self.pos += 4;
            self.expect(b'(')?;
            let arg_at = self.peek().map(|_| self.pos).unwrap_or(self.pos);
            let arg = self.expr()?;
            self.expect(b')')?;
            let q = arg
                .to_rational()
                .filter(|_| matches!(arg, FieldElem::Rational(_)))
                .ok_or_else(|| self.error_at(arg_at, "sqrt argument must be rational"))?;
            return self.sqrt(&q, start);
        }
        Err(self.error(format!("unexpected '{}'", c as char)))
    }

    /// `√(n/m) = √(n·m) / m`, then `√(s²·d) = s·√d`.
    fn sqrt(&mut self, q: &ExactRational, at: usize) -> Result<FieldElem> {
        if q.is_zero() {
            return Ok(FieldElem::zero());
        }
        let (n, m) = (q.numer(), q.denom());
        let prod: BigInt = n * m;
        let (s, f) = square_decomposition(&prod.abs());
        let d = if prod.is_negative() { -f } else { f };
        let coeff = ExactRational::new(s, m.clone());
        if d.is_one() {
            return Ok(FieldElem::Rational(coeff));
        }
        let d = Radicand::new(d).map_err(|e| self.error_at(at, e.to_string()))?;
        match &self.radicand {
            Some((seen, first)) if *seen != d => {
                return Err(self.error_at(
                    at,
                    format!("mixed discriminants: sqrt({seen}) at {first} and sqrt({d})"),
                ))
            }
            Some(_) => {}
            None => self.radicand = Some((d.clone(), at)),
        }
        Ok(FieldElem::Quadratic(QuadElem::new(ExactRational::zero(), coeff, d)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rational;
    use proptest::prelude::*;

    fn quad(a: ExactRational, b: ExactRational, d: i64) -> FieldElem {
        FieldElem::Quadratic(QuadElem::new(a, b, Radicand::from_i64(d).unwrap()))
    }

    #[test]
    fn literals_and_precedence() {
        assert_eq!(
            parse_elem("3/4 + 5*sqrt(2)").unwrap(),
            quad(rational(3, 4), rational(5, 1), 2)
        );
        assert_eq!(parse_elem("1 + 2 * 3").unwrap(), FieldElem::Rational(rational(7, 1)));
        assert_eq!(parse_elem("-2 * -3").unwrap(), FieldElem::Rational(rational(6, 1)));
        assert_eq!(parse_elem("1 - 2 - 3").unwrap(), FieldElem::Rational(rational(-4, 1)));
        assert_eq!(parse_elem("12/4/3").unwrap(), FieldElem::Rational(rational(1, 1)));
        assert_eq!(parse_elem("(1+2)*3").unwrap(), FieldElem::Rational(rational(9, 1)));
        assert!(matches!(parse_elem("5").unwrap(), FieldElem::Rational(_)));
    }

    #[test]
    fn inverse_is_exact() {
        assert_eq!(
            parse_elem("1/(1+sqrt(2))").unwrap(),
            quad(rational(-1, 1), rational(1, 1), 2)
        );
    }

    #[test]
    fn sqrt_reduces_square_factors() {
        assert_eq!(parse_elem("sqrt(8)").unwrap(), quad(rational(0, 1), rational(2, 1), 2));
        assert_eq!(parse_elem("sqrt(4)").unwrap(), FieldElem::Rational(rational(2, 1)));
        assert_eq!(parse_elem("sqrt(1/2)").unwrap(), quad(rational(0, 1), rational(1, 2), 2));
        assert_eq!(parse_elem("sqrt(-7)").unwrap(), quad(rational(0, 1), rational(1, 1), -7));
        assert_eq!(
            parse_elem("sqrt(2) + sqrt(8)").unwrap(),
            quad(rational(0, 1), rational(3, 1), 2)
        );
    }

    #[test]
    fn errors_carry_positions() {
        match parse_elem("sqrt(2)+sqrt(3)") {
            Err(Error::Parse { pos, message }) => {
                assert_eq!(pos, 8);
                assert!(message.contains("mixed"), "{message}");
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_elem("1/0"), Err(Error::Parse { pos: 1, .. })));
        assert!(matches!(parse_elem("1/(2-2)"), Err(Error::Parse { pos: 1, .. })));
        assert!(matches!(parse_elem("1 +"), Err(Error::Parse { pos: 3, .. })));
        assert!(matches!(parse_elem("(1"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_elem("1 2"), Err(Error::Parse { pos: 2, .. })));
        assert!(matches!(parse_elem("x"), Err(Error::Parse { pos: 0, .. })));
        assert!(matches!(parse_elem("sqrt(sqrt(2))"), Err(Error::Parse { pos: 5, .. })));
        assert!(parse_elem("").is_err());
    }

    fn small_rational() -> impl Strategy<Value = ExactRational> {
        (-50i64..=50, 1i64..=30).prop_map(|(n, d)| rational(n, d))
    }

    proptest! {
        #[test]
        fn display_round_trips(a in small_rational(), b in small_rational(),
                               d in prop::sample::select(vec![-7i64, -1, 2, 3, 5, 6, 10])) {
            let x = quad(a.clone(), b, d);
            prop_assert_eq!(parse_elem(&x.to_string()).unwrap(), x);
            let q = FieldElem::Rational(a);
            prop_assert_eq!(parse_elem(&q.to_string()).unwrap(), q);
        }
    }
}
