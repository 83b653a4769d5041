//! Coefficient fields for the exact algebra.
//!
//! [`GaussianRational`] is the default exact field: it is a subfield of the
//! complex numbers, so an ideal containing 1 over it contains 1 over ℂ as well.
//! [`PrimeField`] is a fast modular stand-in for experiments; it contains a
//! square root of −1, so Gaussian rationals with denominators prime to the
//! modulus map into it homomorphically. `Complex64` is provided for float
//! polynomial systems (evaluation only; exact zero tests are meaningless there).

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;
    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }
    fn from_i64(v: i64) -> Self;
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    /// Numerical value, where the field embeds in ℂ.
    fn to_complex(&self) -> Complex64;
    /// Image of a Gaussian rational, `None` if a denominator is not invertible.
    fn from_gaussian(g: &GaussianRational) -> Option<Self>;
    /// The value as a Gaussian rational, where the field is one.
    fn to_gaussian(&self) -> Option<GaussianRational> {
        None
    }
    /// True for fields where `is_zero` is an exact test.
    const EXACT: bool;
}

/// `re + im·i` with arbitrary-precision rational parts.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_ratios(re: (i64, i64), im: (i64, i64)) -> Self {
        Self {
            re: BigRational::new(re.0.into(), re.1.into()),
            im: BigRational::new(im.0.into(), im.1.into()),
        }
    }

    pub fn real(r: BigRational) -> Self {
        Self { re: r, im: BigRational::zero() }
    }

    pub fn i() -> Self {
        Self { re: BigRational::zero(), im: BigRational::one() }
    }

    pub fn conj(&self) -> Self {
        Self { re: self.re.clone(), im: -self.im.clone() }
    }

    /// Largest bit length among numerators and denominators; a coefficient-swell gauge.
    pub fn bit_size(&self) -> u64 {
        [self.re.numer(), self.re.denom(), self.im.numer(), self.im.denom()]
            .iter()
            .map(|b| b.bits())
            .max()
            .unwrap_or(0)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out-of-range ratios: scale by bit lengths.
        let shift = r.numer().bits() as i64 - r.denom().bits() as i64;
        let n = r.numer() >> (r.numer().bits().saturating_sub(60) as usize);
        let d = r.denom() >> (r.denom().bits().saturating_sub(60) as usize);
        let base = n.to_f64().unwrap_or(0.0) / d.to_f64().unwrap_or(1.0);
        let adj = shift - ((n.bits() as i64) - (d.bits() as i64));
        base * 2f64.powi(adj.clamp(-1100, 1100) as i32)
    })
}

impl Field for GaussianRational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Self { re: BigRational::zero(), im: BigRational::zero() }
    }
    fn one() -> Self {
        Self { re: BigRational::one(), im: BigRational::zero() }
    }
    fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
    fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }
    fn add(&self, o: &Self) -> Self {
        Self { re: &self.re + &o.re, im: &self.im + &o.im }
    }
    fn sub(&self, o: &Self) -> Self {
        Self { re: &self.re - &o.re, im: &self.im - &o.im }
    }
    fn mul(&self, o: &Self) -> Self {
        if self.im.is_zero() && o.im.is_zero() {
            return Self::real(&self.re * &o.re);
        }
        Self {
            re: &self.re * &o.re - &self.im * &o.im,
            im: &self.re * &o.im + &self.im * &o.re,
        }
    }
    fn neg(&self) -> Self {
        Self { re: -self.re.clone(), im: -self.im.clone() }
    }
    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        if self.im.is_zero() {
            return Self::real(self.re.recip());
        }
        let n = &self.re * &self.re + &self.im * &self.im;
        Self { re: &self.re / &n, im: -(&self.im / &n) }
    }
    fn from_i64(v: i64) -> Self {
        Self::real(BigRational::from_integer(v.into()))
    }
    fn to_complex(&self) -> Complex64 {
        Complex64::new(rational_to_f64(&self.re), rational_to_f64(&self.im))
    }
    fn from_gaussian(g: &GaussianRational) -> Option<Self> {
        Some(g.clone())
    }
    fn to_gaussian(&self) -> Option<GaussianRational> {
        Some(self.clone())
    }
}

impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rat = |r: &BigRational| {
            if r.denom().is_one() {
                format!("{}", r.numer())
            } else {
                format!("{}/{}", r.numer(), r.denom())
            }
        };
        match (self.re.is_zero(), self.im.is_zero()) {
            (_, true) => write!(f, "{}", rat(&self.re)),
            (true, false) => write!(f, "{}*i", rat(&self.im)),
            (false, false) => {
                let sign = if self.im.is_negative() { '-' } else { '+' };
                write!(f, "({}{}{}*i)", rat(&self.re), sign, rat(&self.im.abs()))
            }
        }
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Integers modulo the NTT prime 998244353 (≡ 1 mod 4).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct PrimeField(u64);

impl PrimeField {
    pub const MODULUS: u64 = 998_244_353;

    pub fn new(v: u64) -> Self {
        Self(v % Self::MODULUS)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn pow(self, mut e: u64) -> Self {
        let mut base = self.0;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % Self::MODULUS;
            }
            base = base * base % Self::MODULUS;
            e >>= 1;
        }
        Self(acc)
    }

    /// A fixed square root of −1; 3 is a primitive root of the modulus.
    pub fn sqrt_minus_one() -> Self {
        Self(3).pow((Self::MODULUS - 1) / 4)
    }

    fn from_bigint(b: &BigInt) -> Self {
        let m = BigInt::from(Self::MODULUS);
        let r = ((b % &m) + &m) % &m;
        Self(r.to_u64().expect("reduced residue fits"))
    }
}

impl Field for PrimeField {
    const EXACT: bool = true;

    fn zero() -> Self {
        Self(0)
    }
    fn one() -> Self {
        Self(1)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, o: &Self) -> Self {
        Self((self.0 + o.0) % Self::MODULUS)
    }
    fn sub(&self, o: &Self) -> Self {
        Self((self.0 + Self::MODULUS - o.0) % Self::MODULUS)
    }
    fn mul(&self, o: &Self) -> Self {
        Self(self.0 * o.0 % Self::MODULUS)
    }
    fn neg(&self) -> Self {
        Self((Self::MODULUS - self.0) % Self::MODULUS)
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "inverse of zero");
        self.pow(Self::MODULUS - 2)
    }
    fn from_i64(v: i64) -> Self {
        Self(v.rem_euclid(Self::MODULUS as i64) as u64)
    }
    /// Residues do not embed in ℂ; the representative is returned as a real number.
    fn to_complex(&self) -> Complex64 {
        Complex64::new(self.0 as f64, 0.0)
    }
    fn from_gaussian(g: &GaussianRational) -> Option<Self> {
        let part = |r: &BigRational| -> Option<Self> {
            let d = Self::from_bigint(r.denom());
            if d.is_zero() {
                return None;
            }
            Some(Self::from_bigint(r.numer()).div(&d))
        };
        let re = part(&g.re)?;
        let im = part(&g.im)?;
        Some(re.add(&im.mul(&Self::sqrt_minus_one())))
    }
}

impl fmt::Debug for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for PrimeField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Field for Complex64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_zero(&self) -> bool {
        self.re == 0.0 && self.im == 0.0
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        assert!(!Field::is_zero(self), "inverse of zero");
        Complex64::new(1.0, 0.0) / self
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
    fn from_gaussian(g: &GaussianRational) -> Option<Self> {
        Some(g.to_complex())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_inverse_and_display() {
        let z = GaussianRational::from_ratios((1, 2), (-3, 4));
        assert!(z.mul(&z.inv()).is_one());
        assert_eq!(z.to_string(), "(1/2-3/4*i)");
        assert_eq!(GaussianRational::i().to_string(), "1*i");
        assert_eq!(GaussianRational::from_i64(-5).to_string(), "-5");
    }

    #[test]
    fn prime_field_has_imaginary_unit() {
        let i = PrimeField::sqrt_minus_one();
        assert_eq!(i.mul(&i), PrimeField::one().neg());
        let g = GaussianRational::from_ratios((1, 3), (2, 5));
        let h = GaussianRational::from_ratios((-7, 2), (1, 1));
        let lhs = PrimeField::from_gaussian(&g.mul(&h)).unwrap();
        let rhs = PrimeField::from_gaussian(&g).unwrap().mul(&PrimeField::from_gaussian(&h).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn huge_rationals_convert_to_finite_floats() {
        let big = BigInt::from(3) << 2000usize;
        let r = BigRational::new(big.clone(), (BigInt::from(2) << 1999usize) + 1);
        let v = rational_to_f64(&r);
        assert!((v - 3.0).abs() < 1e-9, "{v}");
    }
}
