//! Recursive-descent parser for the polynomial string grammar used by task
//! files: integer literals, roster variables, the ring generator `u`,
//! `+ - * ^`, and parentheses. Multiplication is always explicit and `^`
//! binds tighter than unary minus.

use std::sync::Arc;

use super::{LaurentPoly, PolyError, VarSet};
use crate::rings::Ring;

pub fn parse_poly(src: &str, ring: &Ring, vars: &Arc<VarSet>) -> Result<LaurentPoly, PolyError> {
    let mut p = Parser { src: src.as_bytes(), pos: 0, ring, vars };
    p.skip_ws();
    let value = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("trailing input"));
    }
    Ok(value)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ring: &'a Ring,
    vars: &'a Arc<VarSet>,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> PolyError {
        PolyError::Parse(self.pos, msg.to_string())
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<LaurentPoly, PolyError> {
        let mut acc = if self.eat(b'-') {
            self.term()?.neg()
        } else {
            self.term()?
        };
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<LaurentPoly, PolyError> {
        let mut acc = self.factor()?;
        while self.eat(b'*') {
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LaurentPoly, PolyError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            let e = self.exponent()?;
            return base.pow_i(e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64, PolyError> {
        let parened = self.eat(b'(');
        let neg = self.eat(b'-');
        let n = self.integer()?;
        if parened && !self.eat(b')') {
            return Err(self.err("expected ) after exponent"));
        }
        let n = i64::try_from(n).map_err(|_| self.err("exponent too large"))?;
        Ok(if neg { -n } else { n })
    }

    fn integer(&mut self) -> Result<i128, PolyError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let value: i128 = text.parse().map_err(|_| self.err("integer literal too large"))?;
        self.skip_ws();
        Ok(value)
    }

    fn atom(&mut self) -> Result<LaurentPoly, PolyError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected )"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() => {
                let n = self.integer()?;
                // Huge literals reduce into the modulus (which fits i64).
                let reduced = (n % self.ring.modulus() as i128) as i64;
                Ok(LaurentPoly::int(self.ring, self.vars, reduced))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap().to_string();
                self.skip_ws();
                if let Some(i) = self.vars.index_of(&name) {
                    return Ok(LaurentPoly::var(self.ring, self.vars, i));
                }
                if name == "u" {
                    if let Ok(g) = self.ring.gen_u() {
                        return Ok(LaurentPoly::constant(&g, self.vars));
                    }
                }
                Err(PolyError::UnknownVariable(name))
            }
            _ => Err(self.err("expected atom")),
        }
    }
}
