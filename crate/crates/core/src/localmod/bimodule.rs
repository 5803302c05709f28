//! Bimodules over the local maximal order, admissibility and the `(r, s)` type.

use serde::Serialize;

use super::order::{LocalQuatOrder, QElt};
use super::zpk::{self, Mat};
use crate::arith::legendre;
use crate::error::{Error, Result};

/// A finite free `ℤ/p^k`-module with commuting left and right `O`-actions,
/// given by the matrices of the generators `ζ` and `Π` on coordinate columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalBimodule {
    pub order: LocalQuatOrder,
    pub left_zeta: Mat,
    pub left_pi: Mat,
    pub right_zeta: Mat,
    pub right_pi: Mat,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BimoduleReport {
    pub p: u64,
    pub admissible: bool,
    #[serde(rename = "type")]
    pub kind: Option<[usize; 2]>,
}

/// Which ramified quadratic extension `ℚ_p(√(pu))` to embed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RamifiedChoice {
    /// `u = 1`.
    SqrtP,
    /// `u` a non-square unit.
    SqrtPU,
}

impl LocalBimodule {
    pub fn rank(&self) -> usize {
        self.left_zeta.len()
    }

    fn m(&self) -> i128 {
        self.order.modulus()
    }

    fn p(&self) -> i128 {
        self.order.p() as i128
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rank();
        let m = self.m();
        for a in [&self.left_zeta, &self.left_pi, &self.right_zeta, &self.right_pi] {
            if a.len() != n || a.iter().any(|r| r.len() != n) {
                return Err(Error::InvalidInput("action matrices must be square of equal size".into()));
            }
        }
        for l in [&self.left_zeta, &self.left_pi] {
            for r in [&self.right_zeta, &self.right_pi] {
                if zpk::mul(l, r, m) != zpk::mul(r, l, m) {
                    return Err(Error::InvalidInput("left and right actions do not commute".into()));
                }
            }
        }
        Ok(())
    }

    /// Whether `𝔟M = M𝔟`, i.e. `Π·M` and `M·Π` are the same submodule.
    pub fn is_admissible(&self) -> bool {
        zpk::same_image(&self.left_pi, &self.right_pi, self.p(), self.order.precision())
    }

    /// `(r, s)` with `M ≅ O^r ⊕ 𝔟^s`, read off from the residue bimodule `M/M𝔟`:
    /// `2r` is the dimension where left and right `ζ` agree, `2s` where they differ by `σ`.
    pub fn bimodule_type(&self) -> Result<(usize, usize)> {
        if !self.is_admissible() {
            return Err(Error::NotAdmissible("Π·M differs from M·Π".into()));
        }
        let n = self.rank();
        if n % 4 != 0 {
            return Err(Error::NotAdmissible(format!("rank {n} is not a multiple of 4")));
        }
        let p = self.p();
        let mp = |a: &Mat| zpk::reduce(a, p);
        let s_basis = mp(&self.right_pi);
        let kernel_dim = |a: &Mat| n - zpk::rank_mod_p(&zpk::hcat(&mp(a), &s_basis), p);
        let same = kernel_dim(&zpk::sub(&self.left_zeta, &self.right_zeta, self.m()));
        let twisted = kernel_dim(&zpk::add(&self.left_zeta, &self.right_zeta, self.m()));
        let quotient = n - zpk::rank_mod_p(&s_basis, p);
        if same % 2 != 0 || twisted % 2 != 0 || same + twisted != quotient || quotient != n / 2 {
            return Err(Error::NotAdmissible(format!(
                "residue bimodule does not decompose (dims {same} + {twisted} of {quotient})"
            )));
        }
        Ok((same / 2, twisted / 2))
    }

    pub fn report(&self) -> BimoduleReport {
        BimoduleReport {
            p: self.order.p(),
            admissible: self.is_admissible(),
            kind: self.bimodule_type().ok().map(|(r, s)| [r, s]),
        }
    }

    pub fn direct_sum(&self, other: &LocalBimodule) -> LocalBimodule {
        let d = |a: &Mat, b: &Mat| zpk::block_diag(&[a, b]);
        LocalBimodule {
            order: self.order,
            left_zeta: d(&self.left_zeta, &other.left_zeta),
            left_pi: d(&self.left_pi, &other.left_pi),
            right_zeta: d(&self.right_zeta, &other.right_zeta),
            right_pi: d(&self.right_pi, &other.right_pi),
        }
    }

    /// The same bimodule in the basis given by the columns of `change`.
    pub fn change_basis(&self, change: &Mat) -> Option<LocalBimodule> {
        let m = self.m();
        let inv = zpk::inverse(change, m)?;
        let conj = |a: &Mat| zpk::mul(&zpk::mul(&inv, a, m), change, m);
        Some(LocalBimodule {
            order: self.order,
            left_zeta: conj(&self.left_zeta),
            left_pi: conj(&self.left_pi),
            right_zeta: conj(&self.right_zeta),
            right_pi: conj(&self.right_pi),
        })
    }
}

/// `O` acting on itself.
pub fn regular(order: &LocalQuatOrder) -> LocalBimodule {
    let z = LocalQuatOrder::zeta();
    let pi = LocalQuatOrder::pi();
    LocalBimodule {
        order: *order,
        left_zeta: order.left_matrix(&z),
        left_pi: order.left_matrix(&pi),
        right_zeta: order.right_matrix(&z),
        right_pi: order.right_matrix(&pi),
    }
}

/// The two-sided ideal `𝔟 = ΠO`, modeled on `O` through `Πx ↔ x`, so the left
/// action is twisted by `x ↦ Π⁻¹xΠ`.
pub fn uniformizer_ideal(order: &LocalQuatOrder) -> LocalBimodule {
    let z = order.pi_conjugate(&LocalQuatOrder::zeta());
    let pi = order.pi_conjugate(&LocalQuatOrder::pi());
    LocalBimodule { left_zeta: order.left_matrix(&z), left_pi: order.left_matrix(&pi), ..regular(order) }
}

/// `O ⊗_W O`; the two `Π`-images differ, so this is not admissible.
pub fn tensor_over_unramified(order: &LocalQuatOrder) -> LocalBimodule {
    let w = order.w;
    // a + Πb = a + σ(b)Π
    tensor_over(order, LocalQuatOrder::pi(), move |z: &QElt| {
        let (a, b) = LocalQuatOrder::parts(z);
        (LocalQuatOrder::from_parts(a, [0, 0]), LocalQuatOrder::from_parts(w.sigma(b), [0, 0]))
    })
}

/// `O ⊗_R O` for a commutative subring `R ⊂ O` over which `O` is left free on `{1, e}`;
/// `split(z)` writes `z = a + b·e` with `a, b ∈ R`. Realized as `O ⊕ O` via `x ⊗ (a + be) ↦ (xa, xb)`.
fn tensor_over(
    order: &LocalQuatOrder,
    e: QElt,
    split: impl Fn(&QElt) -> (QElt, QElt),
) -> LocalBimodule {
    let act_left = |y: &QElt| -> Mat {
        let l = order.left_matrix(y);
        zpk::block_diag(&[&l, &l])
    };
    let act_right = |y: &QElt| -> Mat {
        let (a, b) = split(y);
        let (c, d) = split(&order.mul(&e, y));
        let ra = order.right_matrix(&a);
        let rb = order.right_matrix(&b);
        let rc = order.right_matrix(&c);
        let rd = order.right_matrix(&d);
        let mut out = zpk::zeros(8, 8);
        for i in 0..4 {
            for j in 0..4 {
                out[i][j] = ra[i][j];
                out[i][j + 4] = rc[i][j];
                out[i + 4][j] = rb[i][j];
                out[i + 4][j + 4] = rd[i][j];
            }
        }
        out
    };
    let z = LocalQuatOrder::zeta();
    let pi = LocalQuatOrder::pi();
    LocalBimodule {
        order: *order,
        left_zeta: act_left(&z),
        left_pi: act_left(&pi),
        right_zeta: act_right(&z),
        right_pi: act_right(&pi),
    }
}

/// `O ⊗_{O_K} O` for the ramified quadratic `O_K = ℤ_p[Πw₀] ⊂ O`, `(Πw₀)² = p·N(w₀)`.
pub fn cm_reduction_bimodule(order: &LocalQuatOrder, choice: RamifiedChoice) -> Result<LocalBimodule> {
    let w = order.w;
    let p = order.p();
    let w0 = match choice {
        RamifiedChoice::SqrtP => [1, 0],
        RamifiedChoice::SqrtPU => (0..p as i128)
            .flat_map(|x| (1..p as i128).map(move |y| [x, y]))
            .find(|&v| legendre(w.norm(v), p) == -1)
            .ok_or_else(|| Error::InvalidInput("no element of non-square norm".into()))?,
    };
    let w0_inv = w.inv(w0).expect("unit");
    // z = (u + Πv) = a₀ + b₀t + Πw₀(a₁ + b₁t)  with a = a₀ + a₁πK, b = b₀ + b₁πK
    let split = move |z: &QElt| -> (QElt, QElt) {
        let (u, v) = LocalQuatOrder::parts(z);
        let c = w.mul(w0_inv, v);
        let pik = |s: i128, r: i128| LocalQuatOrder::from_parts([s, 0], w.mul(w0, [r, 0]));
        (pik(u[0], c[0]), pik(u[1], c[1]))
    };
    let m = tensor_over(order, LocalQuatOrder::zeta(), split);
    m.validate()?;
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_types() {
        let o = LocalQuatOrder::new(3, 4).unwrap();
        let reg = regular(&o);
        let b = uniformizer_ideal(&o);
        reg.validate().unwrap();
        b.validate().unwrap();
        assert!(reg.is_admissible());
        assert_eq!(reg.direct_sum(&reg).bimodule_type().unwrap(), (2, 0));
        assert_eq!(b.direct_sum(&b).bimodule_type().unwrap(), (0, 2));
        assert_eq!(reg.direct_sum(&b).bimodule_type().unwrap(), (1, 1));
    }

    #[test]
    fn tensor_over_w_is_not_admissible() {
        let o = LocalQuatOrder::new(5, 4).unwrap();
        let m = tensor_over_unramified(&o);
        m.validate().unwrap();
        assert!(!m.is_admissible());
        assert!(matches!(m.bimodule_type(), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn cm_bimodule() {
        for p in [3, 5, 7, 13] {
            for k in [4, 6] {
                let o = LocalQuatOrder::new(p, k).unwrap();
                for c in [RamifiedChoice::SqrtP, RamifiedChoice::SqrtPU] {
                    let m = cm_reduction_bimodule(&o, c).unwrap();
                    assert_eq!(m.rank(), 8);
                    assert!(m.is_admissible(), "p={p} k={k} {c:?}");
                    assert_eq!(m.bimodule_type().unwrap(), (1, 1));
                }
            }
        }
    }
}
