//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' uint)?
//! base   := number | 'i' | 'p' | 'q' | '(' expr ')' | 'exp' '(' expr ')'
//! ```

use num_complex::Complex64 as C64;

use super::{QuadExponent, Symbol};
use crate::error::{Error, Result};

const MAX_POWER: u32 = 512;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num { value: f64, uint: bool },
    I,
    P,
    Q,
    Exp,
    LParen,
    RParen,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    End,
}

fn syntax(position: usize, message: impl Into<String>) -> Error {
    Error::Syntax { position, message: message.into() }
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == b'.' {
            let mut uint = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                uint = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    uint = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let value: f64 = lit.parse().map_err(|_| syntax(start, format!("bad number '{lit}'")))?;
            out.push((Tok::Num { value, uint }, start));
            continue;
        }
        if c.is_ascii_alphabetic() {
            while i < bytes.len() && bytes[i].is_ascii_alphabetic() {
                i += 1;
            }
            let tok = match &text[start..i] {
                "i" => Tok::I,
                "p" => Tok::P,
                "q" => Tok::Q,
                "exp" => Tok::Exp,
                other => return Err(syntax(start, format!("unknown identifier '{other}'"))),
            };
            out.push((tok, start));
            continue;
        }
        let tok = match c {
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err(syntax(start, format!("unexpected character '{ch}'")));
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn at(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(syntax(self.at(), format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> Result<Symbol> {
        let negate = match self.peek() {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        let first = self.term()?;
        let mut acc = if negate { -first } else { first };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc + self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc - self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Symbol> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc * self.factor()?;
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.at();
                    let divisor = self.factor()?;
                    match divisor.as_constant() {
                        Some(c) if c != C64::new(0.0, 0.0) => acc = acc.scale(c.inv()),
                        Some(_) => return Err(syntax(at, "division by zero")),
                        None => return Err(syntax(at, "division only by nonzero numeric constants")),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Symbol> {
        let base = self.base()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.at();
        match self.bump() {
            Tok::Num { value, uint: true } => {
                if value > MAX_POWER as f64 {
                    return Err(syntax(at, format!("power exceeds {MAX_POWER}")));
                }
                Ok(base.pow(value as u32))
            }
            Tok::Num { .. } | Tok::Minus => Err(Error::Power { position: at }),
            _ => Err(syntax(at, "expected an unsigned integer power")),
        }
    }

    fn base(&mut self) -> Result<Symbol> {
        let at = self.at();
        match self.bump() {
            Tok::Num { value, .. } => Ok(Symbol::constant(value)),
            Tok::I => Ok(Symbol::constant(C64::i())),
            Tok::P => Ok(Symbol::p()),
            Tok::Q => Ok(Symbol::q()),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Exp => {
                self.expect(Tok::LParen, "'(' after exp")?;
                let arg = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                exponentiate(&arg).ok_or(Error::Degree { position: at })
            }
            Tok::End => Err(syntax(at, "unexpected end of input")),
            other => Err(syntax(at, format!("unexpected token {other:?}"))),
        }
    }
}

/// `exp(arg)` for a polynomial argument of degree at most two.
fn exponentiate(arg: &Symbol) -> Option<Symbol> {
    if !arg.is_polynomial() || arg.degree() > 2 {
        return None;
    }
    let mut expo = QuadExponent::ZERO;
    let mut constant = C64::new(0.0, 0.0);
    for t in arg.terms() {
        match (t.pow_p, t.pow_q) {
            (0, 0) => constant += t.coeff,
            (2, 0) => expo.app += t.coeff,
            (0, 2) => expo.aqq += t.coeff,
            (1, 1) => expo.apq += t.coeff,
            (1, 0) => expo.bp += t.coeff,
            (0, 1) => expo.bq += t.coeff,
            _ => return None,
        }
    }
    Some(Symbol::gaussian(constant.exp(), expo))
}

/// Parses an expression into a symbol.
pub fn parse(text: &str) -> Result<Symbol> {
    let mut parser = Parser { toks: tokenize(text)?, pos: 0 };
    let out = parser.expr()?;
    if *parser.peek() != Tok::End {
        return Err(syntax(parser.at(), "trailing input"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::approx_equal;

    #[test]
    fn parses_commutator_like_sum() {
        let s = parse("q*p + (i/2)").unwrap();
        let want = Symbol::monomial(1.0, 1, 1) + Symbol::constant(C64::new(0.0, 0.5));
        assert_eq!(s, want);
    }

    #[test]
    fn parses_gaussian() {
        let s = parse("2*exp(-(p^2+q^2))").unwrap();
        assert_eq!(s.len(), 1);
        let t = s.terms()[0];
        assert_eq!(t.coeff, C64::new(2.0, 0.0));
        assert_eq!(t.expo.app, C64::new(-1.0, 0.0));
        assert_eq!(t.expo.aqq, C64::new(-1.0, 0.0));
    }

    #[test]
    fn constant_in_exponent_moves_to_coefficient() {
        let s = parse("exp(1 + q)").unwrap();
        assert!((s.terms()[0].coeff.re - std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn cubic_exponent_is_rejected() {
        assert!(matches!(parse("exp(p^3)"), Err(Error::Degree { position: 0 })));
        assert!(matches!(parse("exp(exp(q))"), Err(Error::Degree { .. })));
    }

    #[test]
    fn bad_powers_are_rejected() {
        assert!(matches!(parse("p^-1"), Err(Error::Power { position: 2 })));
        assert!(matches!(parse("q^1.5"), Err(Error::Power { .. })));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        match parse("q * * p") {
            Err(Error::Syntax { position, .. }) => assert_eq!(position, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("(q"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("q/p"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("q/0"), Err(Error::Syntax { .. })));
        assert!(matches!(parse("x"), Err(Error::Syntax { position: 0, .. })));
        assert!(matches!(parse(""), Err(Error::Syntax { .. })));
    }

    #[test]
    fn whitespace_insensitive() {
        let a = parse("  3 * q ^ 2 - p/4 ").unwrap();
        let b = parse("3*q^2-p/4").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn scientific_literals_are_accepted() {
        let s = parse("1.5e-3*q").unwrap();
        assert!(approx_equal(&s, &Symbol::monomial(1.5e-3, 0, 1), 1e-15).unwrap().equal);
    }
}
