//! Imaginary quadratic orders `O_c = ℤ + c·O_K` and their class numbers.

use serde::Serialize;

use crate::arith::{self, gcd_i128, is_fundamental_discriminant, Splitting};
use crate::error::{invalid, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ImagQuadOrder {
    d_k: i64,
    conductor: u64,
    disc: i64,
}

impl ImagQuadOrder {
    pub fn new(d_k: i64, conductor: u64) -> Result<Self> {
        if d_k >= 0 {
            return Err(Error::NotImaginaryQuadratic(d_k));
        }
        if !is_fundamental_discriminant(d_k) {
            return Err(invalid(format!("{d_k} is not a fundamental discriminant")));
        }
        if conductor == 0 {
            return Err(invalid("conductor must be positive"));
        }
        let disc = (conductor as i64)
            .checked_mul(conductor as i64)
            .and_then(|c2| c2.checked_mul(d_k))
            .ok_or_else(|| Error::Overflow(format!("discriminant of conductor {conductor}")))?;
        Ok(ImagQuadOrder { d_k, conductor, disc })
    }

    pub fn maximal(d_k: i64) -> Result<Self> {
        Self::new(d_k, 1)
    }

    pub fn fundamental_discriminant(&self) -> i64 {
        self.d_k
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn discriminant(&self) -> i64 {
        self.disc
    }

    /// Trace and norm of `ω_D = (D + √D)/2`.
    pub fn generator_trace_norm(&self) -> (i128, i128) {
        let d = self.disc as i128;
        (d, (d * d - d) / 4)
    }

    /// Number of roots of unity.
    pub fn roots_of_unity(&self) -> u64 {
        match self.disc {
            -3 => 6,
            -4 => 4,
            _ => 2,
        }
    }

    pub fn splitting(&self, p: u64) -> Splitting {
        Splitting::of(self.d_k, p)
    }

    pub fn class_number(&self) -> u64 {
        class_number(self.disc)
    }
}

/// Number of reduced primitive positive-definite forms `ax² + bxy + cy²` of discriminant `d`.
pub fn class_number(d: i64) -> u64 {
    assert!(d < 0 && d.rem_euclid(4) <= 1, "not a negative discriminant: {d}");
    let d = d as i128;
    let mut h = 0;
    let mut a: i128 = 1;
    while 3 * a * a <= -d {
        for b in -a + 1..=a {
            let num = b * b - d;
            if num % (4 * a) != 0 {
                continue;
            }
            let c = num / (4 * a);
            if c < a || (c == a && b < 0) {
                continue;
            }
            if gcd_i128(gcd_i128(a, b), c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

/// The orders `O_{c₀ p^n}`, `n = 0..=n_max`.
pub fn conductor_tower(d_k: i64, c0: u64, p: u64, n_max: u32) -> Result<Vec<ImagQuadOrder>> {
    if !arith::is_prime(p) {
        return Err(invalid(format!("{p} is not prime")));
    }
    if c0 == 0 || c0 % p == 0 {
        return Err(invalid(format!("base conductor {c0} must be positive and prime to {p}")));
    }
    (0..=n_max)
        .map(|n| {
            let c = p
                .checked_pow(n)
                .and_then(|pn| pn.checked_mul(c0))
                .ok_or_else(|| Error::Overflow("conductor".into()))?;
            ImagQuadOrder::new(d_k, c)
        })
        .collect()
}
