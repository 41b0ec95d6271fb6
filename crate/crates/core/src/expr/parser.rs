use super::{Expr, Func};
use crate::error::ParseError;

/// Parses `text` into an [`Expr`]. Identifiers must be one of `coords`
/// (resolved to their position) or `params`; anything else is rejected.
pub fn parse_expr(text: &str, coords: &[String], params: &[String]) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0, coords, params };
    let e = p.sum()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(format!("unexpected `{}`", p.src[p.pos] as char)));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    coords: &'a [String],
    params: &'a [String],
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError::Syntax { position: self.pos, message: message.into() }
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

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                acc = Expr::add(&acc, &rhs);
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                acc = Expr::sub(&acc, &rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.term()?.neg());
        }
        if self.eat(b'+') {
            return self.term();
        }
        self.product()
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.power()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.factor()?;
                acc = Expr::mul(&acc, &rhs);
            } else if self.eat(b'/') {
                let rhs = self.factor()?;
                acc = Expr::div(&acc, &rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.factor()?.neg());
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat(b'^') {
            return Ok(base);
        }
        let at = self.pos;
        let exponent = self.exponent()?;
        match exponent.as_const() {
            Some(k) => Ok(base.powf(k)),
            None => Err(ParseError::Syntax { position: at, message: "exponent must be a constant".into() }),
        }
    }

    fn exponent(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(self.exponent()?.neg());
        }
        self.power()
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(format!("unexpected `{}`", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut n = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            self.pos = start;
            return Err(self.error("malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::constant)
            .map_err(|_| ParseError::Syntax { position: start, message: format!("malformed number `{text}`") })
    }

    fn identifier(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if let Some(func) = Func::from_name(name) {
            if self.peek() == Some(b'(') {
                self.pos += 1;
                let arg = self.sum()?;
                if !self.eat(b')') {
                    return Err(self.error("expected `)`"));
                }
                return Ok(arg.apply(func));
            }
        }
        if let Some(index) = self.coords.iter().position(|c| c == name) {
            return Ok(Expr::coord(index, name));
        }
        if self.params.iter().any(|p| p == name) {
            return Ok(Expr::param(name));
        }
        Err(ParseError::UnknownIdentifier { name: name.to_string(), position: start })
    }
}
