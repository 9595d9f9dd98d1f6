//! Recursive-descent parser for the polynomial text syntax.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary ('*' unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer ('/' integer)? | decimal | 'x' index | '(' expr ')'
//! ```

use num_bigint::BigInt;
use num_traits::Zero;

use super::polynomial::Polynomial;
use super::rational::Rational;
use super::PolyError;

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    nvars: usize,
}

pub fn parse_polynomial(text: &str, nvars: usize) -> Result<Polynomial, PolyError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        nvars,
    };
    parser.skip_ws();
    if parser.at_end() {
        return Err(parser.error("empty expression"));
    }
    let p = parser.expr()?;
    parser.skip_ws();
    if !parser.at_end() {
        return Err(parser.error("unexpected trailing input"));
    }
    Ok(p)
}

impl Parser<'_> {
    fn error(&self, message: &str) -> PolyError {
        PolyError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, b: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = &acc + &self.term()?;
            } else if self.eat(b'-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, PolyError> {
        let mut acc = self.unary()?;
        while self.eat(b'*') {
            acc = &acc * &self.unary()?;
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Polynomial, PolyError> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial, PolyError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                self.pos = start;
                return Err(self.error("expected non-negative integer exponent"));
            }
            let e: u32 = digits
                .parse()
                .map_err(|_| PolyError::Syntax {
                    offset: start,
                    message: "exponent too large".into(),
                })?;
            return Ok(base.pow(e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> String {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        String::from_utf8_lossy(&self.src[start..self.pos]).into_owned()
    }

    fn atom(&mut self) -> Result<Polynomial, PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(inner)
            }
            Some(b'x') => {
                let start = self.pos;
                self.pos += 1;
                let digits = self.digits();
                if digits.is_empty() {
                    return Err(self.error("expected variable index after 'x'"));
                }
                let index: usize = digits.parse().map_err(|_| PolyError::Syntax {
                    offset: start,
                    message: "variable index too large".into(),
                })?;
                if index >= self.nvars {
                    return Err(PolyError::VariableOutOfRange {
                        index,
                        nvars: self.nvars,
                    });
                }
                Ok(Polynomial::var(self.nvars, index))
            }
            Some(b) if b.is_ascii_digit() => self.number(),
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Polynomial, PolyError> {
        let start = self.pos;
        let int_digits = self.digits();
        let numer: BigInt = int_digits.parse().expect("digits");
        if self.peek() == Some(b'.') {
            self.pos += 1;
            let frac = self.digits();
            if frac.is_empty() {
                return Err(self.error("expected digits after '.'"));
            }
            let n: BigInt = format!("{int_digits}{frac}").parse().expect("digits");
            let d = num_traits::pow(BigInt::from(10), frac.len());
            return Ok(Polynomial::constant(self.nvars, Rational::new(n, d)));
        }
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.pos += 1;
            self.skip_ws();
            let den_digits = self.digits();
            if den_digits.is_empty() {
                return Err(self.error("expected integer denominator"));
            }
            let denom: BigInt = den_digits.parse().expect("digits");
            if denom.is_zero() {
                return Err(PolyError::Syntax {
                    offset: start,
                    message: "zero denominator".into(),
                });
            }
            return Ok(Polynomial::constant(self.nvars, Rational::new(numer, denom)));
        }
        self.pos = save;
        Ok(Polynomial::constant(self.nvars, Rational::from_integer(numer)))
    }
}
