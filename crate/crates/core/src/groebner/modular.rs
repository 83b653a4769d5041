//! Multi-modular reduced Gröbner bases over the Gaussian rationals.
//!
//! Each prime `p ≡ 1 (mod 4)` is used twice, once for each square root of −1,
//! so the two images of `a + b·i` determine `a` and `b` modulo `p`. Residues
//! are combined by CRT and lifted by rational reconstruction; a candidate is
//! accepted once a fresh prime agrees with it. With `verify` set, a candidate
//! other than `{1}` is also checked exactly: every input reduces to zero and
//! every S-pair outside the coprime and strict chain criteria reduces to zero.
//! This certifies `⟨F⟩ ⊆ ⟨G⟩ ≠ ⟨1⟩`, hence a common zero. A `{1}` answer
//! rests on agreement across primes.

use std::cell::Cell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::fglm::fglm;
use super::monomial::{Monomial, MonomialOrder, OrderKind};
use super::polynomial::{normal_form, s_polynomial, Polynomial};
use super::{buchberger, reduce_basis, GroebnerBasis, GroebnerOptions, GroebnerStats};
use crate::error::{QsatError, Result};
use crate::field::{Field, GaussianRational};

thread_local! {
    /// Active modulus and image of `i` for [`ModP`].
    static MODULUS: Cell<(u64, u64)> = const { Cell::new((0, 0)) };
}

fn modulus() -> u64 {
    MODULUS.with(|m| m.get().0)
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    (u128::from(a) * u128::from(b) % u128::from(p)) as u64
}

fn pow_mod(mut b: u64, mut e: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, b, p);
        }
        b = mul_mod(b, b, p);
        e >>= 1;
    }
    acc
}

/// Residue modulo the prime installed by [`with_prime`].
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) struct ModP(u64);

impl fmt::Debug for ModP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn bigint_mod(b: &BigInt, p: u64) -> u64 {
    b.mod_floor(&BigInt::from(p)).to_u64().expect("reduced residue fits")
}

impl Field for ModP {
    const EXACT: bool = true;

    fn zero() -> Self {
        ModP(0)
    }
    fn one() -> Self {
        ModP(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, o: &Self) -> Self {
        let p = modulus();
        let s = self.0 + o.0;
        ModP(if s >= p { s - p } else { s })
    }
    fn sub(&self, o: &Self) -> Self {
        let p = modulus();
        ModP(if self.0 >= o.0 { self.0 - o.0 } else { self.0 + p - o.0 })
    }
    fn mul(&self, o: &Self) -> Self {
        ModP(mul_mod(self.0, o.0, modulus()))
    }
    fn neg(&self) -> Self {
        ModP(if self.0 == 0 { 0 } else { modulus() - self.0 })
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "inverse of zero");
        let p = modulus();
        ModP(pow_mod(self.0, p - 2, p))
    }
    fn from_i64(v: i64) -> Self {
        ModP(i128::from(v).rem_euclid(i128::from(modulus())) as u64)
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.0 as f64, 0.0)
    }
    fn from_gaussian(g: &GaussianRational) -> Option<Self> {
        let (p, iota) = MODULUS.with(Cell::get);
        let part = |r: &BigRational| -> Option<u64> {
            let d = bigint_mod(r.denom(), p);
            (d != 0).then(|| mul_mod(bigint_mod(r.numer(), p), pow_mod(d, p - 2, p), p))
        };
        let (a, b) = (part(&g.re)?, part(&g.im)?);
        Some(ModP((a + mul_mod(b, iota, p)) % p))
    }
}

/// Runs `f` with `ModP` arithmetic modulo `p`, where `i ↦ iota`.
fn with_prime<T>(p: u64, iota: u64, f: impl FnOnce() -> T) -> T {
    let saved = MODULUS.with(|m| m.replace((p, iota)));
    let out = f();
    MODULUS.with(|m| m.set(saved));
    out
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes `≡ 1 (mod 4)` below `2^62`, descending, with a square root of −1.
fn primes() -> impl Iterator<Item = (u64, u64)> {
    let start = (1u64 << 62) - 3; // ≡ 1 (mod 4)
    (0..).map(move |i| start - 4 * i).filter(|&p| is_prime(p)).map(|p| {
        let g = (2..).find(|&g| pow_mod(g, (p - 1) / 2, p) == p - 1).expect("non-residue exists");
        (p, pow_mod(g, (p - 1) / 4, p))
    })
}

type Signature = Vec<Vec<Monomial>>;

struct Image {
    sig: Signature,
    /// `(a, b)` residues of `a + b·i`, generator-major.
    coeffs: Vec<(u64, u64)>,
    stats: GroebnerStats,
}

fn image_basis(f: &[Polynomial<GaussianRational>], iota: u64, p: u64, opts: &GroebnerOptions) -> Result<Option<GroebnerBasis<ModP>>> {
    with_prime(p, iota, || {
        let mut fp = Vec::with_capacity(f.len());
        for q in f {
            let mut terms = Vec::with_capacity(q.len());
            for (m, c) in q.terms() {
                match ModP::from_gaussian(c) {
                    Some(v) if !v.is_zero() => terms.push((m.clone(), v)),
                    // denominator or coefficient vanishes: the support changes
                    _ => return Ok(None),
                }
            }
            fp.push(Polynomial::from_terms(q.order(), terms));
        }
        let mut inner = opts.clone();
        inner.strict = false;
        // other orders go through grevlex and an order change when the ideal is zero-dimensional
        let target = f[0].order();
        if target.kind != OrderKind::Grevlex {
            let grevlex = Arc::new(MonomialOrder::with_priority(OrderKind::Grevlex, target.priority.clone()));
            let fg: Vec<Polynomial<ModP>> = fp.iter().map(|q| q.with_order(&grevlex)).collect();
            if let Some(g) = fglm(&reduce_basis(&buchberger(&fg, &inner)?), target) {
                return Ok(Some(g));
            }
        }
        Ok(Some(reduce_basis(&buchberger(&fp, &inner)?)))
    })
}

fn prime_image(f: &[Polynomial<GaussianRational>], p: u64, iota: u64, opts: &GroebnerOptions) -> Result<Option<Image>> {
    let Some(plus) = image_basis(f, iota, p, opts)? else { return Ok(None) };
    let Some(minus) = image_basis(f, p - iota, p, opts)? else { return Ok(None) };
    let sig = |g: &GroebnerBasis<ModP>| -> Signature {
        g.generators.iter().map(|q| q.terms().iter().map(|(m, _)| m.clone()).collect()).collect()
    };
    let s = sig(&plus);
    if s != sig(&minus) {
        return Ok(None);
    }
    // u = a + bι, v = a − bι
    let half = pow_mod(2, p - 2, p);
    let inv_2iota = pow_mod(mul_mod(2, iota, p), p - 2, p);
    let coeffs = plus
        .generators
        .iter()
        .zip(&minus.generators)
        .flat_map(|(x, y)| x.terms().iter().zip(y.terms()).map(|((_, u), (_, v))| (u.0, v.0)))
        .map(|(u, v)| (mul_mod((u + v) % p, half, p), mul_mod((u + p - v) % p, inv_2iota, p)))
        .collect();
    Ok(Some(Image { sig: s, coeffs, stats: plus.stats }))
}

/// `a/b ≡ u (mod m)` with `|a|, b ≤ √(m/2)`.
fn rational_reconstruction(u: &BigInt, m: &BigInt) -> Option<BigRational> {
    let bound = (m / 2u32).sqrt();
    let (mut r0, mut r1) = (m.clone(), u.mod_floor(m));
    let (mut t0, mut t1) = (BigInt::zero(), BigInt::one());
    while r1 > bound {
        let q = &r0 / &r1;
        (r0, r1) = (r1.clone(), &r0 - &q * &r1);
        (t0, t1) = (t1.clone(), &t0 - &q * &t1);
    }
    if t1.is_zero() || t1.abs() > bound || !r1.gcd(&t1).is_one() {
        return None;
    }
    Some(BigRational::new(r1, t1))
}

fn rational_mod(r: &BigRational, p: u64) -> Option<u64> {
    let d = bigint_mod(r.denom(), p);
    (d != 0).then(|| mul_mod(bigint_mod(r.numer(), p), pow_mod(d, p - 2, p), p))
}

struct Accumulator {
    sig: Signature,
    modulus: BigInt,
    residues: Vec<(BigInt, BigInt)>,
    primes: usize,
}

impl Accumulator {
    fn new(img: Image, p: u64) -> Self {
        Accumulator {
            sig: img.sig,
            modulus: BigInt::from(p),
            residues: img.coeffs.iter().map(|&(a, b)| (BigInt::from(a), BigInt::from(b))).collect(),
            primes: 1,
        }
    }

    /// Garner step: `x ← x + M·((r − x)·M⁻¹ mod p)`.
    fn merge(&mut self, img: &Image, p: u64) {
        let minv = pow_mod(bigint_mod(&self.modulus, p), p - 2, p);
        let lift = |x: &BigInt, r: u64| -> BigInt {
            let diff = (r + p - bigint_mod(x, p)) % p;
            x + &self.modulus * BigInt::from(mul_mod(diff, minv, p))
        };
        self.residues = self.residues.iter().zip(&img.coeffs).map(|((a, b), &(ra, rb))| (lift(a, ra), lift(b, rb))).collect();
        self.modulus *= p;
        self.primes += 1;
    }

    fn reconstruct(&self) -> Option<Vec<GaussianRational>> {
        self.residues
            .iter()
            .map(|(a, b)| Some(GaussianRational::new(rational_reconstruction(a, &self.modulus)?, rational_reconstruction(b, &self.modulus)?)))
            .collect()
    }
}

fn matches(candidate: &[GaussianRational], img: &Image, p: u64) -> bool {
    candidate.iter().zip(&img.coeffs).all(|(c, &(a, b))| rational_mod(&c.re, p) == Some(a) && rational_mod(&c.im, p) == Some(b))
}

fn assemble(order: &Arc<MonomialOrder>, sig: &Signature, coeffs: Vec<GaussianRational>) -> Vec<Polynomial<GaussianRational>> {
    let mut it = coeffs.into_iter();
    sig.iter()
        .map(|monos| Polynomial::from_terms(order, monos.iter().map(|m| (m.clone(), it.next().expect("one coefficient per term")))))
        .collect()
}

/// Exact check that `G` is a Gröbner basis containing every input.
pub(crate) fn verify_basis(f: &[Polynomial<GaussianRational>], g: &[Polynomial<GaussianRational>], deadline: Option<Instant>) -> Result<bool> {
    let timed_out = || deadline.is_some_and(|d| Instant::now() > d);
    for q in f {
        if timed_out() {
            return Err(QsatError::ResourceLimit("time budget exceeded during verification".into()));
        }
        if !normal_form(q, g).is_zero() {
            return Ok(false);
        }
    }
    let lms: Vec<&Monomial> = g.iter().map(Polynomial::lm).collect();
    for j in 0..g.len() {
        for i in 0..j {
            if lms[i].coprime(lms[j]) {
                continue;
            }
            let l = lms[i].lcm(lms[j]);
            // strict chain: both sub-lcms are proper divisors of l
            let chain = (0..g.len()).any(|k| k != i && k != j && lms[k].divides(&l) && lms[i].lcm(lms[k]) != l && lms[j].lcm(lms[k]) != l);
            if chain {
                continue;
            }
            if timed_out() {
                return Err(QsatError::ResourceLimit("time budget exceeded during verification".into()));
            }
            if !normal_form(&s_polynomial(&g[i], &g[j])?, g).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Primes that must agree on `1 ∈ ⟨F⟩` before [`is_unit_ideal`] answers.
pub const DECISION_PRIMES: usize = 3;

/// Whether the ideal is the unit ideal, judged from the images modulo
/// [`DECISION_PRIMES`] primes; a split vote falls back to the full basis.
pub(crate) fn is_unit_ideal(f: &[Polynomial<GaussianRational>], order: &Arc<MonomialOrder>, opts: &GroebnerOptions) -> Result<bool> {
    let f: Vec<Polynomial<GaussianRational>> = f.iter().filter(|p| !p.is_zero()).map(|p| p.with_order(order)).collect();
    if f.is_empty() {
        return Ok(false);
    }
    let mut votes = Vec::with_capacity(DECISION_PRIMES);
    for (p, iota) in primes().take(MAX_PRIMES) {
        if votes.len() == DECISION_PRIMES {
            break;
        }
        if let Some(g) = image_basis(&f, iota, p, opts)? {
            votes.push(g.is_one());
        }
    }
    if votes.iter().all(|&v| v == votes[0]) {
        return Ok(votes[0]);
    }
    Ok(modular_reduced_basis(&f, order, opts)?.is_one())
}

/// Hard cap on the primes tried before giving up.
pub const MAX_PRIMES: usize = 4000;

/// Reduced Gröbner basis of `f` under `order`, computed modulo many primes.
pub fn modular_reduced_basis(
    f: &[Polynomial<GaussianRational>],
    order: &Arc<MonomialOrder>,
    opts: &GroebnerOptions,
) -> Result<GroebnerBasis<GaussianRational>> {
    let f: Vec<Polynomial<GaussianRational>> = f.iter().filter(|p| !p.is_zero()).map(|p| p.with_order(order)).collect();
    if f.is_empty() {
        return Err(QsatError::InvalidParameters("all input polynomials are zero".into()));
    }
    let mut acc: Option<Accumulator> = None;
    let mut candidate: Option<Vec<GaussianRational>> = None;
    let mut rivals: HashMap<Signature, usize> = HashMap::new();
    let mut next_attempt = 1;
    let mut stats;
    for (p, iota) in primes().take(MAX_PRIMES) {
        if opts.deadline.is_some_and(|d| Instant::now() > d) {
            return Err(QsatError::ResourceLimit("time budget exceeded in modular basis".into()));
        }
        let Some(img) = prime_image(&f, p, iota, opts)? else { continue };
        stats = img.stats.clone();
        let Some(a) = acc.as_mut() else {
            acc = Some(Accumulator::new(img, p));
            continue;
        };
        if img.sig != a.sig {
            let votes = rivals.entry(img.sig.clone()).or_insert(0);
            *votes += 1;
            if *votes > a.primes {
                // the earlier primes were the unlucky ones
                rivals.clear();
                candidate = None;
                next_attempt = 1;
                acc = Some(Accumulator::new(img, p));
            }
            continue;
        }
        if let Some(c) = &candidate {
            if matches(c, &img, p) {
                let generators = assemble(order, &a.sig, c.clone());
                let is_one = generators.len() == 1 && generators[0].is_nonzero_constant();
                if !opts.verify || is_one || verify_basis(&f, &generators, opts.deadline)? {
                    return Ok(GroebnerBasis { generators, order: order.clone(), reduced: true, stats });
                }
            }
            candidate = None;
        }
        a.merge(&img, p);
        if a.primes >= next_attempt {
            candidate = a.reconstruct();
            next_attempt = (a.primes + 1).max(a.primes * 4 / 3);
        }
    }
    Err(QsatError::ResourceLimit(format!("no stable reconstruction after {MAX_PRIMES} primes")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groebner::{parse_polynomial, reduced_groebner_basis};

    fn sys(text: &str, order: MonomialOrder) -> (Arc<MonomialOrder>, Vec<Polynomial<GaussianRational>>) {
        let o = Arc::new(order);
        let ps = text.split(';').map(|t| parse_polynomial(t, &o).unwrap()).collect();
        (o, ps)
    }

    #[test]
    fn primes_and_roots_of_minus_one() {
        for (p, iota) in primes().take(5) {
            assert_eq!(p % 4, 1);
            assert!(p < 1 << 62);
            assert_eq!(mul_mod(iota, iota, p), p - 1);
        }
        assert!(is_prime(998_244_353));
        assert!(!is_prime(998_244_353 * 3));
    }

    #[test]
    fn reconstruction() {
        let m = BigInt::from(1_000_000_007u64) * BigInt::from(998_244_353u64);
        for (a, b) in [(3i64, 7i64), (-22, 5), (0, 1), (123_456, 789)] {
            let r = BigRational::new(a.into(), b.into());
            let u = (BigInt::from(a) * BigInt::from(b).modinv(&m).unwrap()).mod_floor(&m);
            assert_eq!(rational_reconstruction(&u, &m), Some(r));
        }
    }

    #[test]
    fn agrees_with_classical() {
        let cases = [
            ("x1*x2 + 1; x2 + 1", MonomialOrder::lex(2)),
            ("x1^2 + x2^2 - 1; x1 - x2", MonomialOrder::grevlex(2)),
            ("(1/2+1/3*i)*x1*x2 + 2*x1 - 3*i; x2^2 + (1-1*i)*x1 + 5/7", MonomialOrder::grevlex(2)),
            ("x1*x2*x3 + 2*x1 - x3 + 1/3*i; x2*x3 - 4*x1 + 1; x1*x3 + x2 - 2/5", MonomialOrder::grevlex(3)),
            ("x1 + x2; x1 - x2 + 1; x1*x2 - 7", MonomialOrder::grevlex(2)),
        ];
        for (text, order) in cases {
            let (o, f) = sys(text, order);
            let classical = reduced_groebner_basis(&f, &o, &GroebnerOptions::default()).unwrap();
            let modular = modular_reduced_basis(&f, &o, &GroebnerOptions::default()).unwrap();
            assert_eq!(classical.generators, modular.generators, "{text}");
        }
    }

    #[test]
    fn verification_rejects_a_wrong_basis() {
        let (_, f) = sys("x1*x2 + 1; x2 + 1", MonomialOrder::lex(2));
        let (_, good) = sys("x2 + 1; x1 - 1", MonomialOrder::lex(2));
        let (_, bad) = sys("x2 + 1; x1 - 2", MonomialOrder::lex(2));
        assert!(verify_basis(&f, &good, None).unwrap());
        assert!(!verify_basis(&f, &bad, None).unwrap());
    }
}
