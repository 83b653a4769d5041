use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector `x^α`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `self | other`.
    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        debug_assert!(other.divides(self));
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Variable index if this is a pure power `x_i^e` with `e ≥ 1`.
    pub fn pure_power(&self) -> Option<(usize, u32)> {
        let mut found = None;
        for (i, &e) in self.0.iter().enumerate() {
            if e > 0 {
                if found.is_some() {
                    return None;
                }
                found = Some((i, e));
            }
        }
        found
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderKind {
    Lex,
    Grlex,
    Grevlex,
}

/// A monomial order plus a variable priority: `priority[0]` is the most
/// significant variable (`x > y > …` in the textbook notation).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialOrder {
    pub kind: OrderKind,
    pub priority: Vec<usize>,
}

impl MonomialOrder {
    pub fn new(kind: OrderKind, n: usize) -> Self {
        Self { kind, priority: (0..n).collect() }
    }

    pub fn lex(n: usize) -> Self {
        Self::new(OrderKind::Lex, n)
    }

    pub fn grlex(n: usize) -> Self {
        Self::new(OrderKind::Grlex, n)
    }

    pub fn grevlex(n: usize) -> Self {
        Self::new(OrderKind::Grevlex, n)
    }

    /// Panics unless `priority` is a permutation of `0..n`.
    pub fn with_priority(kind: OrderKind, priority: Vec<usize>) -> Self {
        let mut seen = vec![false; priority.len()];
        for &p in &priority {
            assert!(p < seen.len() && !seen[p], "priority must be a permutation");
            seen[p] = true;
        }
        Self { kind, priority }
    }

    pub fn nvars(&self) -> usize {
        self.priority.len()
    }

    fn lex_cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        for &v in &self.priority {
            match a.0[v].cmp(&b.0[v]) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self.kind {
            OrderKind::Lex => self.lex_cmp(a, b),
            OrderKind::Grlex => a.degree().cmp(&b.degree()).then_with(|| self.lex_cmp(a, b)),
            OrderKind::Grevlex => a.degree().cmp(&b.degree()).then_with(|| {
                for &v in self.priority.iter().rev() {
                    match a.0[v].cmp(&b.0[v]) {
                        Ordering::Equal => continue,
                        o => return o.reverse(),
                    }
                }
                Ordering::Equal
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mono(n: usize) -> impl Strategy<Value = Monomial> {
        proptest::collection::vec(0u32..4, n).prop_map(Monomial)
    }

    fn order() -> impl Strategy<Value = MonomialOrder> {
        (prop_oneof![Just(OrderKind::Lex), Just(OrderKind::Grlex), Just(OrderKind::Grevlex)], Just((0..4).collect::<Vec<usize>>()).prop_shuffle())
            .prop_map(|(k, p)| MonomialOrder::with_priority(k, p))
    }

    proptest! {
        #[test]
        fn total_and_antisymmetric(o in order(), a in mono(4), b in mono(4)) {
            let ab = o.cmp(&a, &b);
            prop_assert_eq!(ab, o.cmp(&b, &a).reverse());
            prop_assert_eq!(ab == Ordering::Equal, a == b);
        }

        #[test]
        fn transitive(o in order(), a in mono(4), b in mono(4), c in mono(4)) {
            if o.cmp(&a, &b) != Ordering::Greater && o.cmp(&b, &c) != Ordering::Greater {
                prop_assert!(o.cmp(&a, &c) != Ordering::Greater);
            }
        }

        #[test]
        fn multiplication_compatible(o in order(), a in mono(4), b in mono(4), c in mono(4)) {
            prop_assert_eq!(o.cmp(&a, &b), o.cmp(&a.mul(&c), &b.mul(&c)));
        }

        #[test]
        fn one_is_minimal(o in order(), a in mono(4)) {
            // with totality and compatibility this is equivalent to well-ordering
            prop_assert!(o.cmp(&Monomial::one(4), &a) != Ordering::Greater);
        }
    }

    #[test]
    fn textbook_examples() {
        // x = x1, y = x2, z = x3
        let a = Monomial(vec![1, 2, 0]);
        let b = Monomial(vec![0, 3, 4]);
        assert_eq!(MonomialOrder::lex(3).cmp(&a, &b), Ordering::Greater);
        assert_eq!(MonomialOrder::grlex(3).cmp(&a, &b), Ordering::Less);
        // grevlex: x^4 y^7 z > x^4 y^2 z^3 (degree), xy^5z^2 > x^4yz^3
        let c = Monomial(vec![1, 5, 2]);
        let d = Monomial(vec![4, 1, 3]);
        assert_eq!(MonomialOrder::grevlex(3).cmp(&c, &d), Ordering::Greater);
        assert_eq!(MonomialOrder::grlex(3).cmp(&c, &d), Ordering::Less);
        let y_first = MonomialOrder::with_priority(OrderKind::Lex, vec![1, 0]);
        assert_eq!(y_first.cmp(&Monomial(vec![1, 0]), &Monomial(vec![0, 1])), Ordering::Less);
    }
}
