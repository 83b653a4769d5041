//! Text format: sums of `coeff*x1^e1*x2*...` terms.
//!
//! Coefficients are integers, `num/den` rationals and the imaginary unit `i`,
//! combined with `*`, `+`, `-` and parentheses, e.g. `(1/2-3/4*i)*x1*x3^2`.
//! Variables are `x1, x2, …` (1-based).

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::monomial::{Monomial, MonomialOrder};
use super::polynomial::Polynomial;
use crate::error::{QsatError, Result};
use crate::field::{Field, GaussianRational};

type Raw = BTreeMap<BTreeMap<usize, u32>, GaussianRational>;

fn raw_add(mut a: Raw, b: Raw, sign: bool) -> Raw {
    for (m, c) in b {
        let c = if sign { c } else { c.neg() };
        let e = a.entry(m).or_insert_with(GaussianRational::zero);
        *e = e.add(&c);
    }
    a.retain(|_, c| !c.is_zero());
    a
}

fn raw_mul(a: &Raw, b: &Raw) -> Raw {
    let mut out = Raw::new();
    for (ma, ca) in a {
        for (mb, cb) in b {
            let mut m = ma.clone();
            for (&v, &e) in mb {
                *m.entry(v).or_insert(0) += e;
            }
            out = raw_add(out, Raw::from([(m, ca.mul(cb))]), true);
        }
    }
    out
}

fn raw_const(c: GaussianRational) -> Raw {
    if c.is_zero() {
        Raw::new()
    } else {
        Raw::from([(BTreeMap::new(), c)])
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(QsatError::Parse(format!("{msg} at byte {}", self.pos)))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an integer");
        }
        let txt = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
        Ok(txt.parse().expect("digits parse"))
    }

    fn expr(&mut self) -> Result<Raw> {
        let mut sign = true;
        if let Some(c @ (b'+' | b'-')) = self.peek() {
            sign = c == b'+';
            self.pos += 1;
        }
        let mut acc = raw_add(Raw::new(), self.term()?, sign);
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            acc = raw_add(acc, self.term()?, c == b'+');
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Raw> {
        // unary signs, as printed in `a + -b*x1`
        let mut negative = false;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            negative ^= c == b'-';
            self.pos += 1;
        }
        let mut acc = self.factor()?;
        if negative {
            acc = raw_add(Raw::new(), acc, false);
        }
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = raw_mul(&acc, &self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Raw> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e: u32 = self.integer()?.try_into().map_err(|_| QsatError::Parse("exponent too large".into()))?;
            let mut acc = raw_const(GaussianRational::one());
            for _ in 0..e {
                acc = raw_mul(&acc, &base);
            }
            return Ok(acc);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Raw> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err("expected ')'");
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b'i') => {
                self.pos += 1;
                Ok(raw_const(GaussianRational::i()))
            }
            Some(b'x') => {
                self.pos += 1;
                let idx: usize = self.integer()?.try_into().map_err(|_| QsatError::Parse("variable index too large".into()))?;
                if idx == 0 {
                    return self.err("variables are numbered from x1");
                }
                Ok(Raw::from([(BTreeMap::from([(idx - 1, 1)]), GaussianRational::one())]))
            }
            Some(c) if c.is_ascii_digit() => {
                let num = self.integer()?;
                let mut den = BigInt::from(1);
                if self.peek() == Some(b'/') {
                    self.pos += 1;
                    den = self.integer()?;
                    if den == BigInt::from(0) {
                        return self.err("zero denominator");
                    }
                }
                Ok(raw_const(GaussianRational::real(BigRational::new(num, den))))
            }
            _ => self.err("unexpected input"),
        }
    }
}

fn parse_raw(text: &str) -> Result<Raw> {
    let mut p = Parser { s: text.as_bytes(), pos: 0 };
    let r = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(r)
}

fn max_var(r: &Raw) -> usize {
    r.keys().flat_map(|m| m.keys().map(|&v| v + 1)).max().unwrap_or(0)
}

fn to_poly(r: Raw, order: &Arc<MonomialOrder>) -> Result<Polynomial<GaussianRational>> {
    let n = order.nvars();
    if max_var(&r) > n {
        return Err(QsatError::Parse(format!("variable x{} exceeds the {n} system variables", max_var(&r))));
    }
    Ok(Polynomial::from_terms(
        order,
        r.into_iter().map(|(m, c)| {
            let mut e = vec![0; n];
            for (v, x) in m {
                e[v] = x;
            }
            (Monomial(e), c)
        }),
    ))
}

/// Parse one polynomial in the variables of `order`.
pub fn parse_polynomial(text: &str, order: &Arc<MonomialOrder>) -> Result<Polynomial<GaussianRational>> {
    to_poly(parse_raw(text)?, order)
}

/// Parse a system: one polynomial per non-empty line (or `;`-separated).
/// Lines starting with `#` are comments. The variable count is the largest
/// index seen unless `nvars` is given.
pub fn parse_system(text: &str, nvars: Option<usize>) -> Result<(Arc<MonomialOrder>, Vec<Polynomial<GaussianRational>>)> {
    let raws = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .flat_map(|l| l.split(';'))
        .filter(|l| !l.trim().is_empty())
        .map(parse_raw)
        .collect::<Result<Vec<_>>>()?;
    let n = nvars.unwrap_or_else(|| raws.iter().map(max_var).max().unwrap_or(0));
    let order = Arc::new(MonomialOrder::grevlex(n));
    let polys = raws.into_iter().map(|r| to_poly(r, &order)).collect::<Result<Vec<_>>>()?;
    Ok((order, polys))
}
