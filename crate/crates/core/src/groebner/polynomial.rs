use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::monomial::{Monomial, MonomialOrder};
use crate::error::{invalid, Result};
use crate::field::Field;

/// Sparse polynomial; terms are kept sorted by decreasing monomial under `order`.
#[derive(Clone)]
pub struct Polynomial<F: Field> {
    order: Arc<MonomialOrder>,
    terms: Vec<(Monomial, F)>,
}

impl<F: Field> PartialEq for Polynomial<F> {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl<F: Field> Polynomial<F> {
    pub fn zero(order: &Arc<MonomialOrder>) -> Self {
        Self { order: order.clone(), terms: Vec::new() }
    }

    pub fn constant(order: &Arc<MonomialOrder>, c: F) -> Self {
        Self::monomial(order, Monomial::one(order.nvars()), c)
    }

    pub fn one(order: &Arc<MonomialOrder>) -> Self {
        Self::constant(order, F::one())
    }

    pub fn var(order: &Arc<MonomialOrder>, i: usize) -> Self {
        Self::monomial(order, Monomial::var(order.nvars(), i), F::one())
    }

    pub fn monomial(order: &Arc<MonomialOrder>, m: Monomial, c: F) -> Self {
        assert_eq!(m.nvars(), order.nvars(), "monomial arity");
        if c.is_zero() {
            return Self::zero(order);
        }
        Self { order: order.clone(), terms: vec![(m, c)] }
    }

    /// Collects like terms, drops zeros and sorts.
    pub fn from_terms(order: &Arc<MonomialOrder>, terms: impl IntoIterator<Item = (Monomial, F)>) -> Self {
        let mut t: Vec<(Monomial, F)> = terms.into_iter().collect();
        t.sort_by(|a, b| order.cmp(&b.0, &a.0));
        let mut out: Vec<(Monomial, F)> = Vec::with_capacity(t.len());
        for (m, c) in t {
            assert_eq!(m.nvars(), order.nvars(), "monomial arity");
            match out.last_mut() {
                Some((lm, lc)) if *lm == m => *lc = lc.add(&c),
                _ => out.push((m, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Self { order: order.clone(), terms: out }
    }

    pub fn order(&self) -> &Arc<MonomialOrder> {
        &self.order
    }

    pub fn nvars(&self) -> usize {
        self.order.nvars()
    }

    pub fn terms(&self) -> &[(Monomial, F)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero constant.
    pub fn is_nonzero_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.is_one()
    }

    pub fn leading_term(&self) -> Option<&(Monomial, F)> {
        self.terms.first()
    }

    pub fn lm(&self) -> &Monomial {
        &self.terms.first().expect("leading monomial of zero").0
    }

    pub fn lc(&self) -> &F {
        &self.terms.first().expect("leading coefficient of zero").1
    }

    /// Exponent vector of the leading monomial.
    pub fn multideg(&self) -> &[u32] {
        &self.lm().0
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(m, _)| m.degree()).max().unwrap_or(0)
    }

    pub fn coeff(&self, m: &Monomial) -> F {
        self.terms.iter().find(|(t, _)| t == m).map_or_else(F::zero, |(_, c)| c.clone())
    }

    /// Re-sorts under another order on the same variables.
    pub fn with_order(&self, order: &Arc<MonomialOrder>) -> Self {
        assert_eq!(order.nvars(), self.nvars());
        Self::from_terms(order, self.terms.iter().cloned())
    }

    fn merge(&self, other: &Self, negate_other: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let ord = if i == a.len() {
                Ordering::Less
            } else if j == b.len() {
                Ordering::Greater
            } else {
                self.order.cmp(&a[i].0, &b[j].0)
            };
            match ord {
                Ordering::Greater => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    let c = if negate_other { b[j].1.neg() } else { b[j].1.clone() };
                    out.push((b[j].0.clone(), c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate_other { a[i].1.sub(&b[j].1) } else { a[i].1.add(&b[j].1) };
                    if !c.is_zero() {
                        out.push((a[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { order: self.order.clone(), terms: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.merge(other, false)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.merge(other, true)
    }

    pub fn neg(&self) -> Self {
        Self { order: self.order.clone(), terms: self.terms.iter().map(|(m, c)| (m.clone(), c.neg())).collect() }
    }

    pub fn scale(&self, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.order);
        }
        Self { order: self.order.clone(), terms: self.terms.iter().map(|(m, a)| (m.clone(), a.mul(c))).collect() }
    }

    /// `c·x^m·self`; order is preserved by multiplication compatibility.
    pub fn mul_term(&self, m: &Monomial, c: &F) -> Self {
        if c.is_zero() {
            return Self::zero(&self.order);
        }
        Self {
            order: self.order.clone(),
            terms: self.terms.iter().map(|(t, a)| (t.mul(m), a.mul(c))).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut acc = Self::zero(&self.order);
        for (m, c) in &other.terms {
            acc = acc.add(&self.mul_term(m, c));
        }
        acc
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::one(&self.order), |acc, _| acc.mul(self))
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Self {
        match self.terms.first() {
            None => self.clone(),
            Some((_, lc)) if lc.is_one() => self.clone(),
            Some((_, lc)) => self.scale(&lc.inv()),
        }
    }

    pub fn eval(&self, x: &[F]) -> F {
        self.terms.iter().fold(F::zero(), |acc, (m, c)| {
            let mut t = c.clone();
            for (xi, &e) in x.iter().zip(&m.0) {
                for _ in 0..e {
                    t = t.mul(xi);
                }
            }
            acc.add(&t)
        })
    }

    pub fn eval_complex(&self, x: &[Complex64]) -> Complex64 {
        self.terms.iter().map(|(m, c)| {
            m.0.iter().zip(x).fold(c.to_complex(), |t, (&e, xi)| t * xi.powu(e))
        }).sum()
    }

    /// Partial derivative in variable `i`, evaluated numerically.
    pub fn eval_partial_complex(&self, i: usize, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .filter(|(m, _)| m.0[i] > 0)
            .map(|(m, c)| {
                m.0.iter().zip(x).enumerate().fold(c.to_complex() * m.0[i] as f64, |t, (j, (&e, xj))| {
                    if j == i {
                        t * xj.powu(e - 1)
                    } else {
                        t * xj.powu(e)
                    }
                })
            })
            .sum()
    }

    /// Image under a field map; terms mapping to zero are dropped.
    pub fn map_coeffs<G: Field>(&self, f: impl Fn(&F) -> G) -> Polynomial<G> {
        Polynomial::from_terms(&self.order, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Substitute `x_i = 0` for every `i` with `zero[i]`.
    pub fn set_zero(&self, zero: &[bool]) -> Self {
        Self {
            order: self.order.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0.iter().zip(zero).all(|(&e, &z)| !z || e == 0))
                .cloned()
                .collect(),
        }
    }

    /// Rename variables: old variable `i` becomes `map[i]` in an `order` with
    /// `order.nvars()` variables. Variables must not collide.
    pub fn relabel(&self, order: &Arc<MonomialOrder>, map: &[Option<usize>]) -> Self {
        Self::from_terms(
            order,
            self.terms.iter().map(|(m, c)| {
                let mut e = vec![0; order.nvars()];
                for (i, &x) in m.0.iter().enumerate() {
                    if x > 0 {
                        let j = map[i].expect("relabel drops a variable that occurs");
                        e[j] += x;
                    }
                }
                (Monomial(e), c.clone())
            }),
        )
    }
}

/// Writes `coeff*x1^e1*...` terms separated by ` + `.
impl<F: Field + fmt::Display> fmt::Display for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{m:?}")?;
            }
        }
        Ok(())
    }
}

impl<F: Field> fmt::Debug for Polynomial<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "{c:?}*{m:?}")?;
        }
        Ok(())
    }
}

/// `LCM/LT(f)·f − LCM/LT(g)·g`, with `LCM = lcm(LM f, LM g)·LC(f)·LC(g)`.
pub fn s_polynomial<F: Field>(f: &Polynomial<F>, g: &Polynomial<F>) -> Result<Polynomial<F>> {
    if f.is_zero() || g.is_zero() {
        return invalid("S-polynomial of a zero polynomial");
    }
    let l = f.lm().lcm(g.lm());
    // LCM/LT(f) = (l / LM f)·LC(g), and symmetrically.
    let a = f.mul_term(&l.div(f.lm()), g.lc());
    let b = g.mul_term(&l.div(g.lm()), f.lc());
    Ok(a.sub(&b))
}

/// Quotients and remainder of multivariate division.
#[derive(Debug, Clone, PartialEq)]
pub struct Division<F: Field> {
    pub quotients: Vec<Polynomial<F>>,
    pub remainder: Polynomial<F>,
}

/// Multivariate division by an ordered list: the first divisor whose leading
/// term divides the current leading term is used.
pub fn divide<F: Field>(p: &Polynomial<F>, divisors: &[Polynomial<F>]) -> Result<Division<F>> {
    if divisors.iter().any(Polynomial::is_zero) {
        return invalid("division by the zero polynomial");
    }
    let order = p.order().clone();
    let mut quotients = vec![Vec::new(); divisors.len()];
    let mut rem = Vec::new();
    let mut cur = p.clone();
    while let Some((lm, lc)) = cur.leading_term().cloned() {
        match divisors.iter().position(|f| f.lm().divides(&lm)) {
            Some(i) => {
                let m = lm.div(divisors[i].lm());
                let c = lc.div(divisors[i].lc());
                cur = cur.sub(&divisors[i].mul_term(&m, &c));
                quotients[i].push((m, c));
            }
            None => {
                rem.push((lm, lc));
                cur.terms.remove(0);
            }
        }
    }
    Ok(Division {
        quotients: quotients.into_iter().map(|q| Polynomial::from_terms(&order, q)).collect(),
        remainder: Polynomial { order, terms: rem },
    })
}

/// Remainder only. Leading-term divisibility is checked with a reducer
/// lookup that prefers earlier divisors, as in [`divide`].
pub fn normal_form<F: Field>(p: &Polynomial<F>, divisors: &[Polynomial<F>]) -> Polynomial<F> {
    let mut rem = Vec::new();
    let mut cur = p.clone();
    while let Some((lm, lc)) = cur.terms.first().cloned() {
        match divisors.iter().find(|f| f.lm().divides(&lm)) {
            Some(f) => {
                let c = lc.div(f.lc());
                cur = cur.sub(&f.mul_term(&lm.div(f.lm()), &c));
            }
            None => {
                rem.push((lm, lc));
                cur.terms.remove(0);
            }
        }
    }
    Polynomial { order: p.order.clone(), terms: rem }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::GaussianRational as Q;

    fn lex2() -> Arc<MonomialOrder> {
        Arc::new(MonomialOrder::lex(2))
    }

    fn p(order: &Arc<MonomialOrder>, terms: &[(i64, &[u32])]) -> Polynomial<Q> {
        Polynomial::from_terms(order, terms.iter().map(|(c, e)| (Monomial(e.to_vec()), Q::from_i64(*c))))
    }

    #[test]
    fn arithmetic_and_order() {
        let o = lex2();
        let a = p(&o, &[(1, &[1, 1]), (1, &[0, 0])]);
        let b = p(&o, &[(1, &[0, 1]), (1, &[0, 0])]);
        let prod = a.mul(&b);
        assert_eq!(prod, p(&o, &[(1, &[1, 2]), (1, &[1, 1]), (1, &[0, 1]), (1, &[0, 0])]));
        assert!(a.sub(&a).is_zero());
        assert_eq!(prod.lm(), &Monomial(vec![1, 2]));
        assert_eq!(a.to_string(), "1*x1*x2 + 1");
    }

    #[test]
    fn division_identity_spot_check() {
        let o = lex2();
        let f1 = p(&o, &[(1, &[1, 1]), (1, &[0, 0])]);
        let f2 = p(&o, &[(1, &[0, 1]), (1, &[0, 0])]);
        let target = p(&o, &[(1, &[1, 2]), (1, &[0, 0])]);
        let d = divide(&target, &[f1.clone(), f2.clone()]).unwrap();
        let back = d.quotients[0].mul(&f1).add(&d.quotients[1].mul(&f2)).add(&d.remainder);
        assert_eq!(back, target);
        assert_eq!(normal_form(&target, &[f1, f2]), d.remainder);
    }
}
