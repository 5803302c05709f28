//! Truncated unramified quadratic ring `W = (ℤ/p^k)[t]/(t² − ε)` and the maximal
//! order `O = W ⊕ ΠW` of the local division algebra, with `Π² = p`, `Πa = σ(a)Π`.

use super::zpk::Mat;
use crate::arith::{is_prime, legendre, mod_inv};
use crate::error::{invalid, Error, Result};

/// `x₀ + x₁t`.
pub type WElt = [i128; 2];

/// `a + Πb` as `[a₀, a₁, b₀, b₁]`.
pub type QElt = [i128; 4];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Witt {
    pub p: u64,
    pub k: u32,
    pub modulus: i128,
    /// The smallest positive non-square mod `p`.
    pub eps: i128,
}

impl Witt {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        if p == 2 {
            return Err(Error::WildRamification);
        }
        if !is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(invalid("precision must be positive"));
        }
        let modulus = (p as i128)
            .checked_pow(k)
            .filter(|m| *m < 1i128 << 40)
            .ok_or_else(|| Error::TooLarge(format!("{p}^{k}")))?;
        let eps = (2..p as i128).find(|&e| legendre(e, p) == -1).expect("odd prime has a non-residue");
        Ok(Witt { p, k, modulus, eps })
    }

    fn r(&self, x: i128) -> i128 {
        x.rem_euclid(self.modulus)
    }

    pub fn mul(&self, x: WElt, y: WElt) -> WElt {
        let m = self.modulus;
        [self.r(x[0] * y[0] % m + self.eps * (x[1] * y[1] % m)), self.r(x[0] * y[1] + x[1] * y[0])]
    }

    pub fn add(&self, x: WElt, y: WElt) -> WElt {
        [self.r(x[0] + y[0]), self.r(x[1] + y[1])]
    }

    pub fn sigma(&self, x: WElt) -> WElt {
        [self.r(x[0]), self.r(-x[1])]
    }

    pub fn norm(&self, x: WElt) -> i128 {
        self.r(x[0] * x[0] % self.modulus - self.eps * (x[1] * x[1] % self.modulus))
    }

    pub fn inv(&self, x: WElt) -> Option<WElt> {
        let n = mod_inv(self.norm(x), self.modulus)?;
        let c = self.sigma(x);
        Some([self.r(c[0] * n), self.r(c[1] * n)])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocalQuatOrder {
    pub w: Witt,
}

impl LocalQuatOrder {
    pub fn new(p: u64, k: u32) -> Result<Self> {
        Ok(LocalQuatOrder { w: Witt::new(p, k)? })
    }

    pub fn p(&self) -> u64 {
        self.w.p
    }

    pub fn precision(&self) -> u32 {
        self.w.k
    }

    pub fn modulus(&self) -> i128 {
        self.w.modulus
    }

    pub fn one() -> QElt {
        [1, 0, 0, 0]
    }

    pub fn zeta() -> QElt {
        [0, 1, 0, 0]
    }

    pub fn pi() -> QElt {
        [0, 0, 1, 0]
    }

    pub fn scalar(&self, c: i128) -> QElt {
        [c.rem_euclid(self.modulus()), 0, 0, 0]
    }

    pub fn from_parts(a: WElt, b: WElt) -> QElt {
        [a[0], a[1], b[0], b[1]]
    }

    pub fn parts(x: &QElt) -> (WElt, WElt) {
        ([x[0], x[1]], [x[2], x[3]])
    }

    /// `(a₁ + Πb₁)(a₂ + Πb₂) = (a₁a₂ + p σ(b₁)b₂) + Π(σ(a₁)b₂ + b₁a₂)`.
    pub fn mul(&self, x: &QElt, y: &QElt) -> QElt {
        let w = &self.w;
        let (a1, b1) = Self::parts(x);
        let (a2, b2) = Self::parts(y);
        let p = [self.p() as i128, 0];
        let a = w.add(w.mul(a1, a2), w.mul(p, w.mul(w.sigma(b1), b2)));
        let b = w.add(w.mul(w.sigma(a1), b2), w.mul(b1, a2));
        Self::from_parts(a, b)
    }

    pub fn add(&self, x: &QElt, y: &QElt) -> QElt {
        std::array::from_fn(|i| (x[i] + y[i]).rem_euclid(self.modulus()))
    }

    /// Matrix of `v ↦ x·v` on coordinate columns.
    pub fn left_matrix(&self, x: &QElt) -> Mat {
        self.matrix(|e| self.mul(x, e))
    }

    /// Matrix of `v ↦ v·x` on coordinate columns.
    pub fn right_matrix(&self, x: &QElt) -> Mat {
        self.matrix(|e| self.mul(e, x))
    }

    fn matrix(&self, f: impl Fn(&QElt) -> QElt) -> Mat {
        let cols: Vec<QElt> = (0..4)
            .map(|j| {
                let mut e = [0; 4];
                e[j] = 1;
                f(&e)
            })
            .collect();
        (0..4).map(|i| (0..4).map(|j| cols[j][i]).collect()).collect()
    }

    /// `Π⁻¹ x Π = σ(a) + Πσ(b)`.
    pub fn pi_conjugate(&self, x: &QElt) -> QElt {
        let (a, b) = Self::parts(x);
        Self::from_parts(self.w.sigma(a), self.w.sigma(b))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::localmod::zpk::{mul, same_image};

    #[test]
    fn relations() {
        for p in [3, 5, 7, 13] {
            let o = LocalQuatOrder::new(p, 4).unwrap();
            let pi = LocalQuatOrder::pi();
            assert_eq!(o.mul(&pi, &pi), o.scalar(p as i128));
            for a in [[1, 2], [3, 5], [0, 1], [7, 11]] {
                let a = LocalQuatOrder::from_parts(a, [0, 0]);
                let lhs = o.mul(&pi, &a);
                let rhs = o.mul(&o.pi_conjugate(&a), &pi);
                assert_eq!(lhs, rhs);
            }
            // 𝔟² = pO
            let lp = o.left_matrix(&pi);
            let b2 = mul(&lp, &lp, o.modulus());
            let pid = o.left_matrix(&o.scalar(p as i128));
            assert!(same_image(&b2, &pid, p as i128, 4));
            // 𝔟 is two-sided
            assert!(same_image(&lp, &o.right_matrix(&pi), p as i128, 4));
        }
        assert_eq!(LocalQuatOrder::new(2, 4), Err(Error::WildRamification));
    }

    #[test]
    fn associative() {
        let o = LocalQuatOrder::new(5, 3).unwrap();
        let xs = [[1, 2, 3, 4], [0, 7, 1, 9], [11, 0, 5, 2]];
        for x in &xs {
            for y in &xs {
                for z in &xs {
                    assert_eq!(o.mul(&o.mul(x, y), z), o.mul(x, &o.mul(y, z)));
                }
            }
        }
    }
}
