//! Rendering of exact rationals: `num/den` plus a 12-significant-digit decimal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub const SIGNIFICANT_DIGITS: u32 = 12;

pub fn fraction(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal rendering with [`SIGNIFICANT_DIGITS`] significant digits, rounded half away from zero.
pub fn decimal(r: &BigRational) -> String {
    if r.is_zero() {
        return "0".into();
    }
    let neg = r.is_negative();
    let a = r.abs();
    let ten = BigInt::from(10);
    // exponent e with 10^e <= a < 10^(e+1)
    let mut e: i64 = (a.numer().to_string().len() as i64) - (a.denom().to_string().len() as i64);
    let pow = |k: i64| -> BigRational {
        if k >= 0 {
            BigRational::from_integer(ten.pow(k as u32))
        } else {
            BigRational::new(BigInt::one(), ten.pow((-k) as u32))
        }
    };
    while pow(e) > a {
        e -= 1;
    }
    while pow(e + 1) <= a {
        e += 1;
    }
    let shift = SIGNIFICANT_DIGITS as i64 - 1 - e;
    let scaled = &a * pow(shift);
    let (q, rem) = scaled.numer().div_rem(scaled.denom());
    let mut digits = if BigRational::new(rem * 2, scaled.denom().clone()) >= BigRational::one() { q + 1 } else { q };
    let mut shift = shift;
    if digits.to_string().len() as u32 > SIGNIFICANT_DIGITS {
        digits /= 10;
        shift -= 1;
    }
    let s = digits.to_string();
    let body = if shift <= 0 {
        format!("{}{}", s, "0".repeat((-shift) as usize))
    } else if (shift as usize) < s.len() {
        let (int, frac) = s.split_at(s.len() - shift as usize);
        format!("{int}.{frac}")
    } else {
        format!("0.{}{}", "0".repeat(shift as usize - s.len()), s)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}
