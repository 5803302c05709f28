//! Elementary integer arithmetic shared by the other modules.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factor(n).into_iter().map(|(p, _)| p).collect()
}

/// Prime divisors of a nonzero big integer. Only used on desk-sized inputs.
pub fn prime_divisors_big(n: &BigInt) -> Vec<u64> {
    let n = n.abs().to_u64().expect("integer too large to factor");
    prime_divisors(n)
}

pub fn is_squarefree(n: u64) -> bool {
    factor(n).iter().all(|&(_, e)| e == 1)
}

pub fn valuation(n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn valuation_big(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let p = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    loop {
        let (q, r) = n.div_rem(&p);
        if !r.is_zero() {
            return v;
        }
        n = q;
        v += 1;
    }
}

pub fn isqrt(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

pub fn is_square(n: i128) -> Option<i128> {
    if n < 0 {
        return None;
    }
    let r = isqrt(n as u128) as i128;
    (r * r == n).then_some(r)
}

pub fn pow_u64(base: u64, exp: u32) -> u64 {
    base.checked_pow(exp).expect("integer overflow in power")
}

pub fn mod_pow(base: i128, mut exp: u64, m: i128) -> i128 {
    let mut b = base.rem_euclid(m);
    let mut acc = 1 % m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m;
        }
        b = b * b % m;
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn mod_inv(a: i128, m: i128) -> Option<i128> {
    let (g, x, _) = egcd(a.rem_euclid(m), m);
    (g == 1).then(|| x.rem_euclid(m))
}

pub fn egcd(a: i128, b: i128) -> (i128, i128, i128) {
    if b == 0 {
        if a < 0 {
            (-a, -1, 0)
        } else {
            (a, 1, 0)
        }
    } else {
        let (g, x, y) = egcd(b, a.rem_euclid(b));
        (g, y, x - a.div_euclid(b) * y)
    }
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    a.gcd(&b)
}

/// Legendre symbol (a/p) for an odd prime p.
pub fn legendre(a: i128, p: u64) -> i32 {
    let p = p as i128;
    let a = a.rem_euclid(p);
    if a == 0 {
        return 0;
    }
    if mod_pow(a, ((p - 1) / 2) as u64, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol (d/n) for n > 0.
pub fn kronecker(d: i64, n: u64) -> i32 {
    assert!(n > 0);
    let mut result = 1;
    for (p, e) in factor(n) {
        let s = kronecker_prime(d, p);
        if e % 2 == 1 {
            result *= s;
        } else if s == 0 {
            result = 0;
        }
    }
    result
}

fn kronecker_prime(d: i64, p: u64) -> i32 {
    if p == 2 {
        if d % 2 == 0 {
            0
        } else if d.rem_euclid(8) == 1 || d.rem_euclid(8) == 7 {
            1
        } else {
            -1
        }
    } else {
        legendre(d as i128, p)
    }
}

/// How a rational prime decomposes in an imaginary quadratic field.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Inert,
    Ramified,
}

impl Splitting {
    pub fn of(d_k: i64, p: u64) -> Self {
        match kronecker(d_k, p) {
            1 => Splitting::Split,
            -1 => Splitting::Inert,
            _ => Splitting::Ramified,
        }
    }

    pub fn is_split(self) -> bool {
        self == Splitting::Split
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    match d.rem_euclid(4) {
        1 => is_squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && is_squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

pub fn big(n: i64) -> BigInt {
    BigInt::from(n)
}

pub fn big_to_i64(n: &BigInt) -> Option<i64> {
    n.to_i64()
}

pub fn lcm_big(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::zero();
    }
    a.lcm(b)
}

pub fn gcd_big(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

pub fn one() -> BigInt {
    BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes_and_factors() {
        assert!(is_prime(2) && is_prime(13) && !is_prime(1) && !is_prime(91));
        assert_eq!(factor(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_divisors(1), Vec::<u64>::new());
    }

    #[test]
    fn kronecker_matches_splitting() {
        // 2 is inert in Q(sqrt(-3)), ramified in Q(i), split in Q(sqrt(-7)).
        assert_eq!(Splitting::of(-3, 2), Splitting::Inert);
        assert_eq!(Splitting::of(-4, 2), Splitting::Ramified);
        assert_eq!(Splitting::of(-7, 2), Splitting::Split);
        assert_eq!(Splitting::of(-11, 5), Splitting::Split);
        assert_eq!(Splitting::of(-4, 5), Splitting::Split);
        assert_eq!(Splitting::of(-3, 5), Splitting::Inert);
        assert_eq!(kronecker(-47, 9), 1);
    }

    #[test]
    fn fundamental_discriminants() {
        for d in [-3, -4, -7, -8, -11, -15, -20, -24, -47] {
            assert!(is_fundamental_discriminant(d), "{d}");
        }
        for d in [-12, -16, -27, -2, -5, 0, 1] {
            assert!(!is_fundamental_discriminant(d), "{d}");
        }
    }

    #[test]
    fn modular_helpers() {
        assert_eq!(mod_inv(3, 7), Some(5));
        assert_eq!(mod_inv(3, 9), None);
        assert_eq!(isqrt(99), 9);
        assert_eq!(is_square(144), Some(12));
        assert_eq!(valuation(-54, 3), 3);
    }
}
