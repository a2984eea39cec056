//! Complex coefficient rings used by the Fourier calculus.
//!
//! Exact computations run over [`Symbolic`], the ring `Q(i)[π, π⁻¹, √2, √3, ...]`.
//! Elements are stored as sparse sums `Σ c · π^k · √r` with Gaussian-rational
//! coefficients `c`, integer exponents `k` and squarefree radicals `r`. Since π is transcendental and
//! square roots of distinct squarefree integers are linearly independent over
//! `Q`, this representation is canonical and equality is structural.
//!
//! Floating-point computations run over [`Complex64`].

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Coefficient field of a trigonometric polynomial.
pub trait Coeff:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    /// The imaginary unit.
    fn i() -> Self;
    fn pi() -> Self;
    /// `π^k` for any integer `k`.
    fn pi_pow(k: i32) -> Self;
    fn from_i64(v: i64) -> Self;
    fn conj(&self) -> Self;
    /// Exact zero test for exact rings; `|z| <= tol` otherwise.
    fn is_zero_tol(&self, tol: f64) -> bool;
    fn to_complex(&self) -> Complex64;
    /// Magnitude estimate used to scale relative tolerances.
    fn magnitude(&self) -> f64 {
        self.to_complex().norm()
    }
}

impl Coeff for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn i() -> Self {
        Complex64::new(0.0, 1.0)
    }
    fn pi() -> Self {
        Complex64::new(std::f64::consts::PI, 0.0)
    }
    fn pi_pow(k: i32) -> Self {
        Complex64::new(std::f64::consts::PI.powi(k), 0.0)
    }
    fn from_i64(v: i64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
    fn conj(&self) -> Self {
        Complex::conj(self)
    }
    fn is_zero_tol(&self, tol: f64) -> bool {
        self.norm() <= tol
    }
    fn to_complex(&self) -> Complex64 {
        *self
    }
}

/// A monomial `π^pi · √radical`, `radical` squarefree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct Monomial {
    pi: i32,
    radical: u64,
}

type Gauss = Complex<BigRational>;

fn gauss_is_zero(c: &Gauss) -> bool {
    c.re.is_zero() && c.im.is_zero()
}

/// Exact element of `Q(i)[π, π⁻¹, √r : r squarefree]`.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct Symbolic {
    terms: BTreeMap<Monomial, Gauss>,
}

impl Symbolic {
    pub fn from_rational(q: BigRational) -> Self {
        Self::from_gauss(Complex::new(q, BigRational::zero()))
    }

    pub fn from_gaussian(re: BigRational, im: BigRational) -> Self {
        Self::from_gauss(Complex::new(re, im))
    }

    fn from_gauss(c: Gauss) -> Self {
        let mut terms = BTreeMap::new();
        if !gauss_is_zero(&c) {
            terms.insert(Monomial { pi: 0, radical: 1 }, c);
        }
        Symbolic { terms }
    }

    /// `π^k`.
    pub fn pi_pow(k: i32) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(
            Monomial { pi: k, radical: 1 },
            Complex::new(BigRational::one(), BigRational::zero()),
        );
        Symbolic { terms }
    }

    /// Exact square root of a nonnegative rational.
    pub fn sqrt_rational(q: &BigRational) -> Result<Self> {
        if q.is_negative() {
            return Err(Error::NonRealInput);
        }
        if q.is_zero() {
            return Ok(Symbolic::default());
        }
        // √(p/q) = √(p q) / q
        let prod = q.numer() * q.denom();
        let prod = prod.to_u64().ok_or(Error::RadicalTooLarge)?;
        let (square_root_part, radical) = squarefree_split(prod)?;
        let coeff = BigRational::new(BigInt::from(square_root_part), q.denom().clone());
        let mut terms = BTreeMap::new();
        terms.insert(
            Monomial { pi: 0, radical },
            Complex::new(coeff, BigRational::zero()),
        );
        Ok(Symbolic { terms })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True when every coefficient has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.terms.values().all(|c| c.im.is_zero())
    }

    /// The value as a rational, when it has no π or radical content.
    pub fn as_rational(&self) -> Option<Gauss> {
        match self.terms.len() {
            0 => Some(Complex::new(BigRational::zero(), BigRational::zero())),
            1 => {
                let (m, c) = self.terms.iter().next()?;
                (m.pi == 0 && m.radical == 1).then(|| c.clone())
            }
            _ => None,
        }
    }

    fn insert_term(terms: &mut BTreeMap<Monomial, Gauss>, m: Monomial, c: Gauss) {
        if gauss_is_zero(&c) {
            return;
        }
        let remove = match terms.get_mut(&m) {
            Some(existing) => {
                *existing = existing.clone() + c;
                gauss_is_zero(existing)
            }
            None => {
                terms.insert(m, c);
                false
            }
        };
        if remove {
            terms.remove(&m);
        }
    }
}

/// Splits `v = s² · r` with `r` squarefree; returns `(s, r)`.
fn squarefree_split(mut v: u64) -> Result<(u64, u64)> {
    if v > 1 << 52 {
        return Err(Error::RadicalTooLarge);
    }
    let mut square = 1u64;
    let mut radical = 1u64;
    let mut p = 2u64;
    while p * p <= v {
        let mut e = 0;
        while v % p == 0 {
            v /= p;
            e += 1;
        }
        for _ in 0..e / 2 {
            square *= p;
        }
        if e % 2 == 1 {
            radical *= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    radical *= v;
    Ok((square, radical))
}

impl Add for Symbolic {
    type Output = Symbolic;
    fn add(mut self, rhs: Symbolic) -> Symbolic {
        for (m, c) in rhs.terms {
            Symbolic::insert_term(&mut self.terms, m, c);
        }
        self
    }
}

impl Sub for Symbolic {
    type Output = Symbolic;
    fn sub(self, rhs: Symbolic) -> Symbolic {
        self + (-rhs)
    }
}

impl Neg for Symbolic {
    type Output = Symbolic;
    fn neg(self) -> Symbolic {
        Symbolic {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl Mul for Symbolic {
    type Output = Symbolic;
    fn mul(self, rhs: Symbolic) -> Symbolic {
        &self * &rhs
    }
}

impl Mul for &Symbolic {
    type Output = Symbolic;
    fn mul(self, rhs: &Symbolic) -> Symbolic {
        let mut terms = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                let g = ma.radical.gcd(&mb.radical);
                let radical = (ma.radical / g)
                    .checked_mul(mb.radical / g)
                    .expect("radical overflow");
                let mut c = ca * cb;
                if g != 1 {
                    let g = BigRational::from_integer(BigInt::from(g));
                    c = Complex::new(c.re * g.clone(), c.im * g);
                }
                Symbolic::insert_term(
                    &mut terms,
                    Monomial {
                        pi: ma.pi + mb.pi,
                        radical,
                    },
                    c,
                );
            }
        }
        Symbolic { terms }
    }
}

impl Coeff for Symbolic {
    fn zero() -> Self {
        Symbolic::default()
    }
    fn one() -> Self {
        Symbolic::from_rational(BigRational::one())
    }
    fn i() -> Self {
        Symbolic::from_gaussian(BigRational::zero(), BigRational::one())
    }
    fn pi() -> Self {
        Symbolic::pi_pow(1)
    }
    fn pi_pow(k: i32) -> Self {
        Symbolic::pi_pow(k)
    }
    fn from_i64(v: i64) -> Self {
        Symbolic::from_rational(BigRational::from_integer(BigInt::from(v)))
    }
    fn conj(&self) -> Self {
        Symbolic {
            terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect(),
        }
    }
    fn is_zero_tol(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn to_complex(&self) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let scale = std::f64::consts::PI.powi(m.pi) * (m.radical as f64).sqrt();
            let re = c.re.to_f64().unwrap_or(f64::NAN);
            let im = c.im.to_f64().unwrap_or(f64::NAN);
            acc += Complex64::new(re, im) * scale;
        }
        acc
    }
}

fn fmt_gauss(c: &Gauss) -> String {
    match (c.re.is_zero(), c.im.is_zero()) {
        (_, true) => format!("{}", c.re),
        (true, false) => {
            if c.im.is_one() {
                "i".to_string()
            } else if (-c.im.clone()).is_one() {
                "-i".to_string()
            } else {
                format!("{}i", c.im)
            }
        }
        (false, false) => format!("({} + {}i)", c.re, c.im),
    }
}

impl fmt::Display for Symbolic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mut s = fmt_gauss(c);
                if m.pi == 1 {
                    s.push_str("·π");
                } else if m.pi != 0 {
                    s.push_str(&format!("·π^{}", m.pi));
                }
                if m.radical != 1 {
                    s.push_str(&format!("·√{}", m.radical));
                }
                s
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for Symbolic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Symbolic({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn radicals_multiply_and_reduce() {
        let s2 = Symbolic::sqrt_rational(&q(2, 1)).unwrap();
        let s6 = Symbolic::sqrt_rational(&q(6, 1)).unwrap();
        // √2 · √6 = 2√3
        let prod = &s2 * &s6;
        let two_s3 = Symbolic::from_i64(2) * Symbolic::sqrt_rational(&q(3, 1)).unwrap();
        assert_eq!(prod, two_s3);
        assert_eq!(&s2 * &s2, Symbolic::from_i64(2));
    }

    #[test]
    fn sqrt_of_fraction() {
        // √(2/8) = 1/2
        let h = Symbolic::sqrt_rational(&q(2, 8)).unwrap();
        assert_eq!(h, Symbolic::from_rational(q(1, 2)));
        let r = Symbolic::sqrt_rational(&q(2, 3)).unwrap();
        assert!((r.to_complex().re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(&r * &r, Symbolic::from_rational(q(2, 3)));
    }

    #[test]
    fn cancellation_is_exact() {
        let a = Symbolic::pi_pow(2) * Symbolic::from_i64(4) + Symbolic::i();
        let b = a.clone() - a;
        assert!(b.is_zero());
        assert_eq!(format!("{b}"), "0");
    }

    #[test]
    fn conjugation_flips_i() {
        let z = Symbolic::i() * Symbolic::pi();
        assert_eq!(z.conj(), -z.clone());
        assert!(!z.is_real());
        assert!((z.clone() * z.conj()).is_real());
    }

    #[test]
    fn squarefree_split_values() {
        assert_eq!(squarefree_split(72).unwrap(), (6, 2));
        assert_eq!(squarefree_split(1).unwrap(), (1, 1));
        assert_eq!(squarefree_split(30).unwrap(), (1, 30));
        assert_eq!(squarefree_split(49).unwrap(), (7, 1));
    }
}
