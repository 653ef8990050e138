//! Text form of expression trees.
//!
//! ```text
//! expr    := factor { "*" factor }
//! factor  := atom { "^" INT }
//! atom    := "const" COMPLEX | "z" "[" INT "]" | "blaschke" "(" COMPLEX "," REAL ")" "[" INT "]"
//!          | "compose" "(" expr "," autospec ")" | "(" expr ")"
//! autospec:= "auto" "{" "p=" INTLIST "," "a=" COMPLEXLIST "," "t=" REALLIST "}"
//! COMPLEX := REAL ("+"|"-") REAL "i"
//! ```
//!
//! Whitespace is insignificant. Coordinates and permutation entries are
//! 1-based. [`to_dsl`] writes floats in shortest round-trip form and
//! parenthesizes nested products, so parsing its output rebuilds the same tree.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::automorphisms::{MobiusFactor, Permutation, PolydiskAutomorphism};
use crate::error::{Error, Result};
use crate::holo::{Expr, HoloFunction};

/// Parses `text` into a function on 𝔻ⁿ, applying construction-time checks.
pub fn parse_function_dsl(text: &str, n: usize) -> Result<HoloFunction> {
    let mut p = Parser::new(text, n);
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    HoloFunction::from_expr(n, expr)
}

/// Serializes a function so that `parse_function_dsl(to_dsl(f), n) == f`.
pub fn to_dsl(f: &HoloFunction) -> String {
    let mut out = String::new();
    write_expr(&mut out, f.expr(), true);
    out
}

/// Shortest decimal that reads back to the same binary64.
pub fn fmt_real(x: f64) -> String {
    format!("{x:?}")
}

pub fn fmt_complex(c: Complex64) -> String {
    let sign = if c.im.is_sign_negative() { '-' } else { '+' };
    format!("{}{}{}i", fmt_real(c.re), sign, fmt_real(c.im.abs()))
}

fn write_expr(out: &mut String, e: &Expr, top: bool) {
    match e {
        Expr::Product(children) => {
            if !top {
                out.push('(');
            }
            for (i, c) in children.iter().enumerate() {
                if i > 0 {
                    out.push_str(" * ");
                }
                write_expr(out, c, false);
            }
            if !top {
                out.push(')');
            }
        }
        Expr::Constant(c) => {
            let _ = write!(out, "const {}", fmt_complex(*c));
        }
        Expr::Coordinate(j) => {
            let _ = write!(out, "z[{}]", j + 1);
        }
        Expr::Blaschke { factor, coord } => {
            let _ = write!(
                out,
                "blaschke({}, {})[{}]",
                fmt_complex(factor.alpha()),
                fmt_real(factor.theta()),
                coord + 1
            );
        }
        Expr::Composed { inner, outer } => {
            out.push_str("compose(");
            write_expr(out, outer, true);
            out.push_str(", ");
            out.push_str(&auto_to_dsl(inner));
            out.push(')');
        }
        Expr::Power(child, m) => {
            // a power binds tighter than `*`, so only products need grouping
            write_expr(out, child, false);
            let _ = write!(out, "^{m}");
        }
    }
}

/// `auto{p=[..], a=[..], t=[..]}` with a 1-based permutation.
pub fn auto_to_dsl(phi: &PolydiskAutomorphism) -> String {
    let p: Vec<String> = phi.permutation().one_based().iter().map(|k| k.to_string()).collect();
    let a: Vec<String> = phi.factors().iter().map(|f| fmt_complex(f.alpha())).collect();
    let t: Vec<String> = phi.factors().iter().map(|f| fmt_real(f.theta())).collect();
    format!("auto{{p=[{}], a=[{}], t=[{}]}}", p.join(","), a.join(","), t.join(","))
}

/// Parses a standalone `auto{...}` automorphism specification.
pub fn parse_auto_dsl(text: &str, n: usize) -> Result<PolydiskAutomorphism> {
    let mut p = Parser::new(text, n);
    let phi = p.autospec()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(phi)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, n: usize) -> Self {
        Parser {
            src: text.as_bytes(),
            pos: 0,
            n,
        }
    }

    fn location(&self, pos: usize) -> (usize, usize) {
        let before = &self.src[..pos.min(self.src.len())];
        let line = 1 + before.iter().filter(|&&b| b == b'\n').count();
        let start = before.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        let column = 1 + String::from_utf8_lossy(&before[start..]).chars().count();
        (line, column)
    }

    fn error_at(&self, pos: usize, message: impl Into<String>) -> Error {
        let (line, column) = self.location(pos);
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    fn error(&self, message: impl Into<String>) -> Error {
        self.error_at(self.pos, message)
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
            Err(self.error(format!("expected '{}'", c as char)))
        }
    }

    fn keyword(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        while end < self.src.len() && self.src[end].is_ascii_alphabetic() {
            end += 1;
        }
        if end == start {
            return None;
        }
        self.pos = end;
        std::str::from_utf8(&self.src[start..end]).ok()
    }

    fn expect_keyword(&mut self, word: &str) -> Result<()> {
        let at = {
            self.skip_ws();
            self.pos
        };
        match self.keyword() {
            Some(w) if w == word => Ok(()),
            _ => Err(self.error_at(at, format!("expected '{word}'"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut factors = vec![self.factor()?];
        while self.eat(b'*') {
            factors.push(self.factor()?);
        }
        Ok(if factors.len() == 1 {
            factors.pop().expect("one factor")
        } else {
            Expr::Product(factors)
        })
    }

    fn factor(&mut self) -> Result<Expr> {
        let mut e = self.atom()?;
        while self.eat(b'^') {
            let at = self.pos;
            let m = self.int()?;
            if m == 0 {
                return Err(Error::Validity(format!(
                    "power exponent must be ≥ 1 (at column {})",
                    self.location(at).1
                )));
            }
            let m = u32::try_from(m).map_err(|_| self.error_at(at, "exponent too large"))?;
            e = Expr::Power(Box::new(e), m);
        }
        Ok(e)
    }

    fn coord(&mut self) -> Result<usize> {
        self.expect(b'[')?;
        self.skip_ws();
        let at = self.pos;
        let j = self.int()?;
        self.expect(b']')?;
        if j == 0 || j > self.n as u64 {
            let (line, column) = self.location(at);
            return Err(Error::Validity(format!(
                "coordinate index {j} outside 1..={} (line {line}, column {column})",
                self.n
            )));
        }
        Ok(j as usize - 1)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let at = self.pos;
                match self.keyword() {
                    Some("const") => Ok(Expr::Constant(self.complex()?)),
                    Some("z") => Ok(Expr::Coordinate(self.coord()?)),
                    Some("blaschke") => {
                        self.expect(b'(')?;
                        let alpha = self.complex()?;
                        self.expect(b',')?;
                        let theta = self.real()?;
                        self.expect(b')')?;
                        let coord = self.coord()?;
                        Ok(Expr::Blaschke {
                            factor: MobiusFactor::new(alpha, theta)?,
                            coord,
                        })
                    }
                    Some("compose") => {
                        self.expect(b'(')?;
                        let outer = self.expr()?;
                        self.expect(b',')?;
                        let inner = self.autospec()?;
                        self.expect(b')')?;
                        Ok(Expr::Composed {
                            inner,
                            outer: Box::new(outer),
                        })
                    }
                    Some(w) => Err(self.error_at(at, format!("unknown keyword '{w}'"))),
                    None => Err(self.error_at(at, "expected a factor")),
                }
            }
            Some(_) => Err(self.error("expected a factor")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn autospec(&mut self) -> Result<PolydiskAutomorphism> {
        self.expect_keyword("auto")?;
        self.expect(b'{')?;
        self.expect_keyword("p")?;
        self.expect(b'=')?;
        let p_at = self.pos;
        let p = self.list(Self::int)?;
        self.expect(b',')?;
        self.expect_keyword("a")?;
        self.expect(b'=')?;
        let a = self.list(Self::complex)?;
        self.expect(b',')?;
        self.expect_keyword("t")?;
        self.expect(b'=')?;
        let t = self.list(Self::real)?;
        self.expect(b'}')?;
        if p.len() != self.n || a.len() != self.n || t.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: if p.len() != self.n {
                    p.len()
                } else if a.len() != self.n {
                    a.len()
                } else {
                    t.len()
                },
            });
        }
        let p: Vec<usize> = p.into_iter().map(|k| k as usize).collect();
        let perm = Permutation::from_one_based(&p).map_err(|e| match e {
            Error::Validity(m) => {
                let (line, column) = self.location(p_at);
                Error::Validity(format!("{m} (line {line}, column {column})"))
            }
            other => other,
        })?;
        let factors = a
            .into_iter()
            .zip(t)
            .map(|(a, t)| MobiusFactor::new(a, t))
            .collect::<Result<Vec<_>>>()?;
        PolydiskAutomorphism::new(perm, factors)
    }

    fn list<T>(&mut self, item: fn(&mut Self) -> Result<T>) -> Result<Vec<T>> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        if self.eat(b']') {
            return Ok(out);
        }
        loop {
            out.push(item(self)?);
            if self.eat(b']') {
                return Ok(out);
            }
            self.expect(b',')?;
        }
    }

    fn int(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected an integer"));
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii digits")
            .parse()
            .map_err(|_| self.error_at(start, "integer out of range"))
    }

    /// Unsigned decimal with optional fraction and exponent.
    fn unsigned_real(&mut self) -> Result<f64> {
        let start = self.pos;
        let digits = |s: &mut Self| {
            let d0 = s.pos;
            while s.pos < s.src.len() && s.src[s.pos].is_ascii_digit() {
                s.pos += 1;
            }
            s.pos - d0
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            self.pos = start;
            return Err(self.error("expected a number"));
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
        std::str::from_utf8(&self.src[start..self.pos])
            .expect("ascii number")
            .parse()
            .map_err(|_| self.error_at(start, "malformed number"))
    }

    fn real(&mut self) -> Result<f64> {
        self.skip_ws();
        let neg = match self.src.get(self.pos) {
            Some(b'-') => {
                self.pos += 1;
                true
            }
            Some(b'+') => {
                self.pos += 1;
                false
            }
            _ => false,
        };
        self.skip_ws();
        let v = self.unsigned_real()?;
        Ok(if neg { -v } else { v })
    }

    fn complex(&mut self) -> Result<Complex64> {
        let re = self.real()?;
        let neg = match self.peek() {
            Some(b'+') => false,
            Some(b'-') => true,
            _ => return Err(self.error("expected '+' or '-' before the imaginary part")),
        };
        self.pos += 1;
        self.skip_ws();
        let im = self.unsigned_real()?;
        self.expect(b'i')?;
        Ok(Complex64::new(re, if neg { -im } else { im }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn grammar_examples() {
        let k = parse_function_dsl("const 0.5+0i", 1).unwrap();
        assert_eq!(k, HoloFunction::constant(1, c(0.5, 0.0)).unwrap());

        let f = parse_function_dsl("blaschke(0.5+0i, 0.0)[1] * z[2]", 2).unwrap();
        let want = HoloFunction::product(vec![
            HoloFunction::blaschke(2, 1, c(0.5, 0.0), 0.0).unwrap(),
            HoloFunction::coordinate(2, 2).unwrap(),
        ])
        .unwrap();
        assert_eq!(f, want);

        let s = parse_function_dsl(
            "compose(z[1], auto{p=[2,1], a=[0+0i,0+0i], t=[3.141592653589793,3.141592653589793]})",
            2,
        )
        .unwrap();
        for k in 0..20 {
            let z = [
                Complex64::from_polar(0.9 * (k as f64 / 20.0), k as f64),
                Complex64::from_polar(0.8, -0.3 * k as f64),
            ];
            assert!((s.eval(&z).unwrap() - z[1]).norm() <= 1e-15);
        }
    }

    #[test]
    fn powers_and_whitespace() {
        let f = parse_function_dsl(" z [ 1 ] ^ 5 ", 1).unwrap();
        assert!((f.eval(&[c(0.5, 0.0)]).unwrap() - c(0.03125, 0.0)).norm() < 1e-16);
        let g = parse_function_dsl("(z[1] * const 0-1i)^2", 1).unwrap();
        assert!((g.eval(&[c(0.5, 0.0)]).unwrap() - c(-0.25, 0.0)).norm() < 1e-16);
        let h = parse_function_dsl("const -2.5e-1-1E-1i", 1).unwrap();
        assert_eq!(h.eval(&[c(0.0, 0.0)]).unwrap(), c(-0.25, -0.1));
    }

    #[test]
    fn parse_errors_carry_location() {
        match parse_function_dsl("z[1] *\n  blaschke(0.5+0i 0.0)[1]", 1) {
            Err(Error::Parse { line, column, .. }) => assert_eq!((line, column), (2, 19)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_function_dsl("zz[1]", 1), Err(Error::Parse { line: 1, column: 1, .. })));
        assert!(matches!(parse_function_dsl("z[1] z[1]", 1), Err(Error::Parse { .. })));
        assert!(matches!(parse_function_dsl("const 0.5", 1), Err(Error::Parse { .. })));
        assert!(matches!(parse_function_dsl("", 1), Err(Error::Parse { .. })));
    }

    #[test]
    fn validity_errors() {
        assert!(matches!(parse_function_dsl("const 1.5+0i", 1), Err(Error::Validity(_))));
        assert!(matches!(parse_function_dsl("blaschke(1+0i, 0)[1]", 1), Err(Error::Validity(_))));
        assert!(matches!(parse_function_dsl("z[3]", 2), Err(Error::Validity(_))));
        assert!(matches!(parse_function_dsl("z[0]", 2), Err(Error::Validity(_))));
        assert!(matches!(parse_function_dsl("z[1]^0", 1), Err(Error::Validity(_))));
        assert!(matches!(
            parse_function_dsl("compose(z[1], auto{p=[1,1], a=[0+0i,0+0i], t=[0,0]})", 2),
            Err(Error::Validity(_))
        ));
    }

    #[test]
    fn round_trip_nested() {
        let phi = PolydiskAutomorphism::new(
            Permutation::from_one_based(&[2, 1]).unwrap(),
            vec![
                MobiusFactor::new(c(0.1, -0.2), 0.3).unwrap(),
                MobiusFactor::new(c(1.0 / 3.0, 0.0), -PI / 7.0).unwrap(),
            ],
        )
        .unwrap();
        let inner = HoloFunction::product(vec![
            HoloFunction::coordinate(2, 1).unwrap(),
            HoloFunction::constant(2, c(-0.0, -0.7)).unwrap(),
        ])
        .unwrap();
        let f = HoloFunction::product(vec![
            inner.compose(&phi).unwrap(),
            inner.power(3).unwrap(),
            HoloFunction::blaschke(2, 2, c(0.999999999999, 1e-13), 2.5).unwrap(),
            inner.clone(),
        ])
        .unwrap();
        let text = to_dsl(&f);
        let back = parse_function_dsl(&text, 2).unwrap();
        assert_eq!(back, f, "{text}");
        assert_eq!(to_dsl(&back), text);
    }
}
