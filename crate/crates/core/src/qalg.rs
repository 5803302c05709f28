//! Rational quaternion algebras `(a, b)` and their local invariants.
//!
//! Elements are stored as exact rational coordinates in the basis `1, i, j, k`
//! with `i² = a`, `j² = b`, `k = ij = −ji`. All arithmetic is exact.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::arith::{self, legendre};
use crate::error::{invalid, Error, Result};

/// A place of `ℚ`: a finite prime or the real place.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Place {
    Prime(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Prime(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

impl Serialize for Place {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// An element `x₀ + x₁i + x₂j + x₃k`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QuatElement(pub [BigRational; 4]);

impl QuatElement {
    pub fn new(c: [BigRational; 4]) -> Self {
        QuatElement(c)
    }

    pub fn from_ints(c: [i64; 4]) -> Self {
        QuatElement(c.map(|x| BigRational::from_integer(BigInt::from(x))))
    }

    /// Coordinates `c / den`.
    pub fn from_fraction(c: [i64; 4], den: i64) -> Self {
        QuatElement(c.map(|x| BigRational::new(BigInt::from(x), BigInt::from(den))))
    }

    pub fn scalar(s: BigRational) -> Self {
        let z = BigRational::zero();
        QuatElement([s, z.clone(), z.clone(), z])
    }

    pub fn zero() -> Self {
        Self::from_ints([0; 4])
    }

    pub fn one() -> Self {
        Self::from_ints([1, 0, 0, 0])
    }

    pub fn coords(&self) -> &[BigRational; 4] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn add(&self, o: &Self) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] + &o.0[t]))
    }

    pub fn sub(&self, o: &Self) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] - &o.0[t]))
    }

    pub fn neg(&self) -> Self {
        QuatElement(std::array::from_fn(|t| -&self.0[t]))
    }

    pub fn scale(&self, s: &BigRational) -> Self {
        QuatElement(std::array::from_fn(|t| &self.0[t] * s))
    }

    pub fn conj(&self) -> Self {
        let c = &self.0;
        QuatElement([c[0].clone(), -&c[1], -&c[2], -&c[3]])
    }

    /// Reduced trace `x + x̄ = 2x₀`; independent of the structure constants.
    pub fn tr(&self) -> BigRational {
        &self.0[0] * BigRational::from_integer(BigInt::from(2))
    }
}

impl fmt::Display for QuatElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = ["", "i", "j", "k"];
        let mut first = true;
        for (c, name) in self.0.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if name.is_empty() {
                write!(f, "{c}")?;
            } else if c.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "({c}){name}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The quaternion algebra `(a, b)_ℚ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuaternionAlgebra {
    a: BigRational,
    b: BigRational,
    ramification: Vec<Place>,
}

impl QuaternionAlgebra {
    pub fn new(a: BigRational, b: BigRational) -> Result<Self> {
        if a.is_zero() || b.is_zero() {
            return Err(invalid("structure constants must be nonzero"));
        }
        let ramification = compute_ramification(&a, &b);
        Ok(QuaternionAlgebra { a, b, ramification })
    }

    pub fn from_ints(a: i64, b: i64) -> Result<Self> {
        Self::new(rat(a), rat(b))
    }

    /// The standard definite presentation of the algebra ramified exactly at `{q, ∞}`:
    /// `(−1,−1)` for `q = 2`, `(−1,−q)` for `q ≡ 3 mod 4`, `(−2,−q)` for `q ≡ 5 mod 8`
    /// and `(−q,−r)` for `q ≡ 1 mod 8`, with `r ≡ 3 mod 4` a prime that is a
    /// non-residue modulo `q`.
    pub fn definite_of_prime_discriminant(q: u64) -> Result<Self> {
        if !arith::is_prime(q) {
            return Err(Error::UnsupportedDiscriminant(format!("{q} is not prime")));
        }
        let qi = q as i64;
        let alg = match (q, q % 8) {
            (2, _) => Self::from_ints(-1, -1)?,
            (_, 3) | (_, 7) => Self::from_ints(-1, -qi)?,
            (_, 5) => Self::from_ints(-2, -qi)?,
            _ => {
                let r = (3..)
                    .step_by(4)
                    .find(|&r| arith::is_prime(r) && legendre(q as i128, r) == -1)
                    .expect("a suitable auxiliary prime exists");
                Self::from_ints(-qi, -(r as i64))?
            }
        };
        debug_assert_eq!(alg.ramification, vec![Place::Prime(q), Place::Infinity]);
        Ok(alg)
    }

    pub fn a(&self) -> &BigRational {
        &self.a
    }

    pub fn b(&self) -> &BigRational {
        &self.b
    }

    pub fn ramification(&self) -> &[Place] {
        &self.ramification
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> u64 {
        self.ramification
            .iter()
            .filter_map(|p| match p {
                Place::Prime(p) => Some(*p),
                Place::Infinity => None,
            })
            .product()
    }

    pub fn is_definite(&self) -> bool {
        self.ramification.contains(&Place::Infinity)
    }

    pub fn is_matrix_algebra(&self) -> bool {
        self.ramification.is_empty()
    }

    pub fn mul(&self, x: &QuatElement, y: &QuatElement) -> QuatElement {
        let (a, b) = (&self.a, &self.b);
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        let ab = a * b;
        let c0 = x0 * y0 + a * x1 * y1 + b * x2 * y2 - &ab * x3 * y3;
        let c1 = x0 * y1 + x1 * y0 - b * x2 * y3 + b * x3 * y2;
        let c2 = x0 * y2 + x2 * y0 + a * x1 * y3 - a * x3 * y1;
        let c3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
        QuatElement([c0, c1, c2, c3])
    }

    pub fn nr(&self, x: &QuatElement) -> BigRational {
        let [x0, x1, x2, x3] = &x.0;
        x0 * x0 - &self.a * x1 * x1 - &self.b * x2 * x2 + &self.a * &self.b * x3 * x3
    }

    pub fn tr(&self, x: &QuatElement) -> BigRational {
        x.tr()
    }

    /// The bilinear form `tr(x ȳ)`; `nr(x) = tr(x x̄)/2`.
    pub fn trace_pairing(&self, x: &QuatElement, y: &QuatElement) -> BigRational {
        let [x0, x1, x2, x3] = &x.0;
        let [y0, y1, y2, y3] = &y.0;
        let two = rat(2);
        two * (x0 * y0 - &self.a * x1 * y1 - &self.b * x2 * y2 + &self.a * &self.b * x3 * y3)
    }

    pub fn inverse(&self, x: &QuatElement) -> Result<QuatElement> {
        let n = self.nr(x);
        if n.is_zero() {
            return Err(Error::ZeroDivisor);
        }
        Ok(x.conj().scale(&n.recip()))
    }

    /// Coefficients `(t, n)` of the reduced characteristic polynomial `X² − tX + n`.
    pub fn char_poly(&self, x: &QuatElement) -> (BigRational, BigRational) {
        (x.tr(), self.nr(x))
    }
}

impl fmt::Display for QuaternionAlgebra {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

pub(crate) fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Replace a rational by an integer in the same square class: `n/d ↦ n·d`.
fn square_class_integer(x: &BigRational) -> BigInt {
    x.numer() * x.denom()
}

/// Hilbert symbol `(a, b)_v`: `+1` iff `ax² + by² = z²` has a nontrivial solution over `ℚ_v`.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: Place) -> Result<i32> {
    if a.is_zero() || b.is_zero() {
        return Err(invalid("hilbert symbol needs nonzero arguments"));
    }
    let p = match place {
        Place::Infinity => {
            return Ok(if a.is_negative() && b.is_negative() { -1 } else { 1 });
        }
        Place::Prime(p) => p,
    };
    if !arith::is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    let a = square_class_integer(a);
    let b = square_class_integer(b);
    let (alpha, u) = split_power(&a, p);
    let (beta, v) = split_power(&b, p);
    if p == 2 {
        let u8 = residue(&u, 8);
        let v8 = residue(&v, 8);
        let eps = |x: i64| ((x - 1) / 2) & 1;
        let omega = |x: i64| ((x * x - 1) / 8) & 1;
        let e = eps(u8) * eps(v8) + alpha as i64 * omega(v8) + beta as i64 * omega(u8);
        Ok(if e % 2 == 0 { 1 } else { -1 })
    } else {
        let mut s = if (alpha as u64 * beta as u64 * ((p - 1) / 2)) % 2 == 0 {
            1
        } else {
            -1
        };
        if beta % 2 == 1 {
            s *= legendre(residue(&u, p) as i128, p);
        }
        if alpha % 2 == 1 {
            s *= legendre(residue(&v, p) as i128, p);
        }
        Ok(s)
    }
}

fn split_power(n: &BigInt, p: u64) -> (u32, BigInt) {
    let v = arith::valuation_big(n, p);
    (v, n / BigInt::from(p).pow(v))
}

fn residue(n: &BigInt, m: u64) -> i64 {
    let m = BigInt::from(m);
    (((n % &m) + &m) % &m).to_i64().unwrap()
}

/// Places where `(a, b)` ramifies, sorted with `∞` last.
pub fn ramification_set(alg: &QuaternionAlgebra) -> Vec<Place> {
    alg.ramification.clone()
}

/// Places that can possibly ramify: `∞` and the primes dividing `2ab`.
pub fn candidate_places(a: &BigRational, b: &BigRational) -> Vec<Place> {
    let mut primes = vec![2u64];
    for x in [a, b] {
        primes.extend(arith::prime_divisors_big(x.numer()));
        primes.extend(arith::prime_divisors_big(x.denom()));
    }
    primes.sort_unstable();
    primes.dedup();
    let mut places: Vec<Place> = primes.into_iter().map(Place::Prime).collect();
    places.push(Place::Infinity);
    places
}

fn compute_ramification(a: &BigRational, b: &BigRational) -> Vec<Place> {
    candidate_places(a, b)
        .into_iter()
        .filter(|&v| hilbert_symbol(a, b, v).expect("nonzero arguments") == -1)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn identity_and_hamilton_relations() {
        let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        let one = QuatElement::one();
        assert_eq!(one.conj(), one);
        assert_eq!(h.nr(&one), rat(1));
        let i = QuatElement::from_ints([0, 1, 0, 0]);
        let j = QuatElement::from_ints([0, 0, 1, 0]);
        let k = QuatElement::from_ints([0, 0, 0, 1]);
        assert_eq!(h.mul(&i, &j), k);
        assert_eq!(h.mul(&j, &i), k.neg());
        assert_eq!(h.nr(&QuatElement::from_ints([1, 1, 1, 1])), rat(4));
    }

    #[test]
    fn relations_in_general_algebra() {
        let alg = QuaternionAlgebra::new(q(-3, 2), q(5, 7)).unwrap();
        let i = QuatElement::from_ints([0, 1, 0, 0]);
        let j = QuatElement::from_ints([0, 0, 1, 0]);
        assert_eq!(alg.mul(&i, &i), QuatElement::scalar(alg.a().clone()));
        assert_eq!(alg.mul(&j, &j), QuatElement::scalar(alg.b().clone()));
        assert_eq!(alg.mul(&i, &j), alg.mul(&j, &i).neg());
    }

    #[test]
    fn inverse_and_zero_divisor() {
        let split = QuaternionAlgebra::from_ints(1, 1).unwrap();
        let x = QuatElement::from_ints([1, 1, 0, 0]);
        assert_eq!(split.inverse(&x), Err(Error::ZeroDivisor));
        let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        let y = QuatElement::from_ints([1, 2, -1, 3]);
        let inv = h.inverse(&y).unwrap();
        assert_eq!(h.mul(&y, &inv), QuatElement::one());
    }

    #[test]
    fn hilbert_symbol_examples() {
        let s = |a: i64, b: i64, v: Place| hilbert_symbol(&rat(a), &rat(b), v).unwrap();
        assert_eq!(s(1, 7, Place::Prime(7)), 1);
        assert_eq!(s(-1, -1, Place::Infinity), -1);
        assert_eq!(s(-1, -1, Place::Prime(2)), -1);
        assert_eq!(s(-1, -1, Place::Prime(3)), 1);
        assert!(hilbert_symbol(&rat(0), &rat(1), Place::Prime(2)).is_err());
    }

    #[test]
    fn ramification_examples() {
        let r = |a, b| ramification_set(&QuaternionAlgebra::from_ints(a, b).unwrap());
        assert!(r(1, 1).is_empty());
        assert_eq!(r(-1, -1), vec![Place::Prime(2), Place::Infinity]);
        assert_eq!(r(-1, -11), vec![Place::Prime(11), Place::Infinity]);
        assert_eq!(r(-1, -3), vec![Place::Prime(3), Place::Infinity]);
    }

    #[test]
    fn standard_definite_presentations() {
        for q in [2, 3, 5, 7, 11, 13, 17, 41] {
            let alg = QuaternionAlgebra::definite_of_prime_discriminant(q).unwrap();
            assert_eq!(alg.ramification(), &[Place::Prime(q), Place::Infinity]);
            assert_eq!(alg.discriminant(), q);
        }
        assert!(QuaternionAlgebra::definite_of_prime_discriminant(6).is_err());
    }
}
