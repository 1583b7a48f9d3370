//! Infix text format: `+ - * /`, `^` with integer or `(p/q)` exponents,
//! function calls `tanh(..)` etc., decimal literals and identifiers.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use super::{Expr, Func};
use crate::rational::Rational;

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            let mut integral = true;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                integral &= bytes[i] != b'.';
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                integral = false;
                i += 1;
                if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                    i += 1;
                }
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| ParseError {
                position: start,
                message: alloc::format!("bad number `{text}`"),
            })?;
            out.push((start, Tok::Num(v, integral)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Tok::Ident(src[start..i].to_string())));
        } else if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
        } else {
            return Err(ParseError {
                position: i,
                message: alloc::format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn err<T>(&self, message: &str) -> Result<T, ParseError> {
        Err(ParseError {
            position: self.here(),
            message: message.to_string(),
        })
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(&alloc::format!("expected `{c}`"))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut terms = alloc::vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(-self.term()?);
            } else {
                break;
            }
        }
        Ok(Expr::sum(terms))
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc * self.unary()?;
            } else if self.eat('/') {
                acc = acc / self.unary()?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            Ok(-self.unary()?)
        } else if self.eat('+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.exponent()?;
            Ok(base.powr(e))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let neg = self.eat('-');
        match self.peek() {
            Some(Tok::Num(v, true)) if *v <= i64::MAX as f64 => {
                let n = *v as i64;
                self.pos += 1;
                Ok(if neg { -n } else { n })
            }
            _ => self.err("expected an integer exponent"),
        }
    }

    fn exponent(&mut self) -> Result<Rational, ParseError> {
        if self.eat('(') {
            let p = self.integer()?;
            let q = if self.eat('/') { self.integer()? } else { 1 };
            self.expect(')')?;
            Rational::new(p, q).or_else(|_| self.err("zero denominator in exponent"))
        } else {
            Ok(Rational::integer(self.integer()?))
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Num(v, _)) => {
                self.pos += 1;
                Ok(Expr::c(v))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.peek() == Some(&Tok::Op('(')) {
                    let Some(f) = Func::from_name(&name) else {
                        self.pos -= 1;
                        return self.err(&alloc::format!("unknown function `{name}`"));
                    };
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    Ok(Expr::apply(f, arg))
                } else {
                    Ok(Expr::Var(name))
                }
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            _ => self.err("expected a number, variable, function or `(`"),
        }
    }
}

/// Parse an expression from its infix text form.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn parses_rational_powers_and_functions() {
        let e = parse("(-8)^(2/3) + tanh(0)").unwrap();
        assert_relative_eq!(e.eval(&[]).unwrap(), 4.0, epsilon = 1e-14);
        let e = parse("t^(-2/9)*(3/2 + ((x + 2/3)*t^(-1/3))^(-2/3))").unwrap();
        let v = e.eval(&[("x", 1.0), ("t", 1.0)]).unwrap();
        let expect = 1.5 + libm::cbrt(5.0 / 3.0).powi(-2);
        assert_relative_eq!(v, expect, epsilon = 1e-14);
    }

    #[test]
    fn precedence() {
        let e = parse("2 + 3*x^2 - -1").unwrap();
        assert_relative_eq!(e.eval(&[("x", 2.0)]).unwrap(), 15.0);
        let e = parse("-x^2").unwrap();
        assert_relative_eq!(e.eval(&[("x", 3.0)]).unwrap(), -9.0);
    }

    #[test]
    fn errors_point_at_offender() {
        let err = parse("x^(1/0)").unwrap_err();
        assert!(err.message.contains("zero denominator"));
        let err = parse("foo(x)").unwrap_err();
        assert_eq!(err.position, 0);
        assert!(parse("x^1.5").is_err());
        assert!(parse("x +").is_err());
        assert!(parse("x $ y").is_err());
    }

    #[test]
    fn display_round_trips() {
        for src in [
            "tanh(0.5*x)^(2/3) - 1.5*x^(-2/3)",
            "exp(-3*t)*(x - 2)^3 + cot(x)/t",
            "sqrt(x) + ln(t)*coth(x*t)",
        ] {
            let e = parse(src).unwrap();
            let back = parse(&alloc::format!("{e}")).unwrap();
            let env = [("x", 0.7), ("t", 1.3)];
            assert_relative_eq!(e.eval(&env).unwrap(), back.eval(&env).unwrap(), max_relative = 1e-14);
        }
    }
}
