//! Full-rank ℤ-lattices in ℚ⁴ (coordinates with respect to `1, i, j, k`).
//!
//! A lattice is stored as `H / den` with `H` an integer matrix in row Hermite
//! normal form and `den` the smallest positive integer making `den·L` integral.
//! The representation is canonical, so structural equality is lattice equality.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qalg::{QuatElement, QuaternionAlgebra};

pub type Row = [BigInt; 4];
pub type RatMatrix = [[BigRational; 4]; 4];

#[derive(Clone, Debug)]
pub struct Lattice {
    hnf: [Row; 4],
    den: BigInt,
    basis: RatMatrix,
    inverse: RatMatrix,
}

impl PartialEq for Lattice {
    fn eq(&self, other: &Self) -> bool {
        self.den == other.den && self.hnf == other.hnf
    }
}

impl Eq for Lattice {}

impl PartialOrd for Lattice {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Lattice {
    /// Lexicographic order on the rational HNF basis.
    fn cmp(&self, other: &Self) -> Ordering {
        self.basis.cmp(&other.basis)
    }
}

impl std::hash::Hash for Lattice {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.den.hash(state);
        self.hnf.hash(state);
    }
}

impl Lattice {
    pub fn from_rational_rows(rows: &[[BigRational; 4]]) -> Result<Self> {
        let mut den = BigInt::one();
        for r in rows {
            for x in r {
                den = den.lcm(x.denom());
            }
        }
        let int_rows: Vec<Row> = rows
            .iter()
            .map(|r| std::array::from_fn(|t| (&r[t] * BigRational::from_integer(den.clone())).to_integer()))
            .collect();
        let hnf = hermite_normal_form(int_rows)
            .ok_or_else(|| Error::InvalidInput("generators do not span a rank-4 lattice".into()))?;
        Ok(Self::from_hnf(hnf, den))
    }

    pub fn from_elements(gens: &[QuatElement]) -> Result<Self> {
        let rows: Vec<[BigRational; 4]> = gens.iter().map(|g| g.0.clone()).collect();
        Self::from_rational_rows(&rows)
    }

    fn from_hnf(mut hnf: [Row; 4], mut den: BigInt) -> Self {
        let mut g = den.clone();
        for r in &hnf {
            for x in r {
                g = g.gcd(x);
            }
        }
        if !g.is_one() {
            for r in hnf.iter_mut() {
                for x in r.iter_mut() {
                    *x = &*x / &g;
                }
            }
            den /= &g;
        }
        let basis: RatMatrix = std::array::from_fn(|r| {
            std::array::from_fn(|c| BigRational::new(hnf[r][c].clone(), den.clone()))
        });
        let inverse = invert(&basis).expect("HNF basis of a full-rank lattice is invertible");
        Lattice { hnf, den, basis, inverse }
    }

    pub fn basis(&self) -> &RatMatrix {
        &self.basis
    }

    pub fn basis_elements(&self) -> Vec<QuatElement> {
        self.basis.iter().map(|r| QuatElement(r.clone())).collect()
    }

    /// Coordinates of `x` in the HNF basis (rational in general).
    pub fn coordinates(&self, x: &QuatElement) -> [BigRational; 4] {
        std::array::from_fn(|c| {
            let mut acc = BigRational::zero();
            for r in 0..4 {
                acc += &x.0[r] * &self.inverse[r][c];
            }
            acc
        })
    }

    /// Integer coordinates of `x`, if `x` lies in the lattice.
    pub fn integer_coordinates(&self, x: &QuatElement) -> Option<[BigInt; 4]> {
        let c = self.coordinates(x);
        if c.iter().all(|t| t.is_integer()) {
            Some(c.map(|t| t.to_integer()))
        } else {
            None
        }
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.integer_coordinates(x).is_some()
    }

    pub fn element(&self, coords: &[i64]) -> QuatElement {
        let mut out = QuatElement::zero();
        for (r, &c) in coords.iter().enumerate() {
            if c != 0 {
                let s = BigRational::from_integer(BigInt::from(c));
                out = out.add(&QuatElement(self.basis[r].clone()).scale(&s));
            }
        }
        out
    }

    pub fn element_big(&self, coords: &[BigInt; 4]) -> QuatElement {
        QuatElement(std::array::from_fn(|c| {
            let mut acc = BigRational::zero();
            for r in 0..4 {
                acc += &self.basis[r][c] * BigRational::from_integer(coords[r].clone());
            }
            acc
        }))
    }

    pub fn is_subset_of(&self, other: &Lattice) -> bool {
        self.basis_elements().iter().all(|b| other.contains(b))
    }

    /// Absolute value of the determinant of the basis.
    pub fn covolume(&self) -> BigRational {
        let mut d = BigRational::from_integer(self.den.pow(4)).recip();
        for (r, row) in self.hnf.iter().enumerate() {
            d *= BigRational::from_integer(row[r].clone());
        }
        d
    }

    /// `[other : self]` for `self ⊆ other`.
    pub fn index_in(&self, other: &Lattice) -> BigRational {
        self.covolume() / other.covolume()
    }

    pub fn sum(&self, other: &Lattice) -> Lattice {
        let mut rows: Vec<[BigRational; 4]> = self.basis.to_vec();
        rows.extend(other.basis.iter().cloned());
        Lattice::from_rational_rows(&rows).expect("sum of full-rank lattices")
    }

    pub fn scale(&self, s: &BigRational) -> Lattice {
        let rows: Vec<[BigRational; 4]> =
            self.basis.iter().map(|r| std::array::from_fn(|c| &r[c] * s)).collect();
        Lattice::from_rational_rows(&rows).expect("nonzero scaling")
    }

    /// Dual lattice for the standard dot product on coordinates.
    pub fn dual(&self) -> Lattice {
        let rows: Vec<[BigRational; 4]> = (0..4)
            .map(|r| std::array::from_fn(|c| self.inverse[c][r].clone()))
            .collect();
        Lattice::from_rational_rows(&rows).expect("dual of full-rank lattice")
    }

    pub fn intersection(&self, other: &Lattice) -> Lattice {
        self.dual().sum(&other.dual()).dual()
    }

    /// The lattice spanned by all products `xy`, `x ∈ self`, `y ∈ other`.
    pub fn product(&self, other: &Lattice, alg: &QuaternionAlgebra) -> Lattice {
        let xs = self.basis_elements();
        let ys = other.basis_elements();
        let mut rows = Vec::with_capacity(16);
        for x in &xs {
            for y in &ys {
                rows.push(alg.mul(x, y).0);
            }
        }
        Lattice::from_rational_rows(&rows).expect("product of full-rank lattices in a division algebra")
    }

    pub fn conjugate(&self) -> Lattice {
        let rows: Vec<[BigRational; 4]> =
            self.basis_elements().iter().map(|b| b.conj().0).collect();
        Lattice::from_rational_rows(&rows).expect("conjugate lattice")
    }

    /// `{x : x·L ⊆ L}`.
    pub fn left_order(&self, alg: &QuaternionAlgebra) -> Lattice {
        let mut acc: Option<Lattice> = None;
        for b in self.basis_elements() {
            let inv = alg.inverse(&b).expect("basis elements of a lattice in a division algebra are units");
            let rows: Vec<[BigRational; 4]> =
                self.basis_elements().iter().map(|x| alg.mul(x, &inv).0).collect();
            let l = Lattice::from_rational_rows(&rows).expect("translate of a lattice");
            acc = Some(match acc {
                None => l,
                Some(a) => a.intersection(&l),
            });
        }
        acc.unwrap()
    }

    /// `{x : L·x ⊆ L}`.
    pub fn right_order(&self, alg: &QuaternionAlgebra) -> Lattice {
        let mut acc: Option<Lattice> = None;
        for b in self.basis_elements() {
            let inv = alg.inverse(&b).expect("basis elements of a lattice in a division algebra are units");
            let rows: Vec<[BigRational; 4]> =
                self.basis_elements().iter().map(|x| alg.mul(&inv, x).0).collect();
            let l = Lattice::from_rational_rows(&rows).expect("translate of a lattice");
            acc = Some(match acc {
                None => l,
                Some(a) => a.intersection(&l),
            });
        }
        acc.unwrap()
    }

    /// Gram matrix of the trace pairing `tr(x ȳ)` on the basis, divided by `scale`.
    /// Fails if the result is not integral or does not fit in `i64`.
    pub fn gram(&self, alg: &QuaternionAlgebra, scale: &BigRational) -> Result<[[i64; 4]; 4]> {
        let b = self.basis_elements();
        let mut g = [[0i64; 4]; 4];
        for r in 0..4 {
            for c in r..4 {
                let v = alg.trace_pairing(&b[r], &b[c]) / scale;
                if !v.is_integer() {
                    return Err(Error::InvalidInput(format!("trace form not integral: {v}")));
                }
                let v = v
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Overflow("Gram entry exceeds i64".into()))?;
                g[r][c] = v;
                g[c][r] = v;
            }
        }
        Ok(g)
    }

    pub fn hnf_rows(&self) -> (&[Row; 4], &BigInt) {
        (&self.hnf, &self.den)
    }
}

/// Row-style Hermite normal form: upper triangular, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. `None` if the rows do not have rank 4.
pub fn hermite_normal_form(mut rows: Vec<Row>) -> Option<[Row; 4]> {
    let mut out: Vec<Row> = Vec::with_capacity(4);
    for col in 0..4 {
        loop {
            let pivot = rows
                .iter()
                .enumerate()
                .filter(|(_, r)| !r[col].is_zero())
                .min_by(|a, b| a.1[col].abs().cmp(&b.1[col].abs()))
                .map(|(i, _)| i)?;
            let prow = rows[pivot].clone();
            let mut done = true;
            for (i, r) in rows.iter_mut().enumerate() {
                if i == pivot || r[col].is_zero() {
                    continue;
                }
                let q = r[col].div_floor(&prow[col]);
                for t in col..4 {
                    r[t] -= &q * &prow[t];
                }
                if !r[col].is_zero() {
                    done = false;
                }
            }
            if done {
                let mut prow = rows.swap_remove(pivot);
                if prow[col].is_negative() {
                    for x in prow.iter_mut() {
                        *x = -&*x;
                    }
                }
                out.push(prow);
                break;
            }
        }
    }
    for i in 0..4 {
        for j in 0..i {
            let q = out[j][i].div_floor(&out[i][i]);
            if !q.is_zero() {
                let ri = out[i].clone();
                for t in i..4 {
                    out[j][t] -= &q * &ri[t];
                }
            }
        }
    }
    Some([out[0].clone(), out[1].clone(), out[2].clone(), out[3].clone()])
}

pub fn invert(m: &RatMatrix) -> Option<RatMatrix> {
    let mut a: Vec<Vec<BigRational>> = m.iter().map(|r| r.to_vec()).collect();
    let mut inv: Vec<Vec<BigRational>> = (0..4)
        .map(|r| (0..4).map(|c| if r == c { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for col in 0..4 {
        let p = (col..4).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, p);
        inv.swap(col, p);
        let piv = a[col][col].clone();
        for t in 0..4 {
            a[col][t] = &a[col][t] / &piv;
            inv[col][t] = &inv[col][t] / &piv;
        }
        for r in 0..4 {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for t in 0..4 {
                    let s = &f * &a[col][t];
                    a[r][t] -= s;
                    let s = &f * &inv[col][t];
                    inv[r][t] -= s;
                }
            }
        }
    }
    Some(std::array::from_fn(|r| std::array::from_fn(|c| inv[r][c].clone())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lat(rows: &[[i64; 4]], den: i64) -> Lattice {
        let els: Vec<QuatElement> = rows.iter().map(|r| QuatElement::from_fraction(*r, den)).collect();
        Lattice::from_elements(&els).unwrap()
    }

    #[test]
    fn canonical_form_is_basis_independent() {
        let a = lat(&[[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [1, 1, 1, 1]], 2);
        let b = lat(&[[1, 1, 1, 1], [2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [3, 1, 1, 1]], 2);
        assert_eq!(a, b);
        assert!(Lattice::from_elements(&[QuatElement::one()]).is_err());
    }

    #[test]
    fn intersection_and_sum() {
        let z4 = lat(&[[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], 1);
        let a = lat(&[[2, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], 1);
        let b = lat(&[[1, 0, 0, 0], [0, 3, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]], 1);
        let i = a.intersection(&b);
        assert_eq!(i.index_in(&z4), BigRational::from_integer(BigInt::from(6)));
        assert_eq!(a.sum(&b), z4);
        assert!(i.is_subset_of(&a) && i.is_subset_of(&b));
        assert_eq!(z4.dual(), z4);
    }

    #[test]
    fn hurwitz_orders() {
        let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
        let o = lat(&[[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [1, 1, 1, 1]], 2);
        assert_eq!(o.left_order(&h), o);
        assert_eq!(o.right_order(&h), o);
        assert_eq!(o.product(&o, &h), o);
        let g = o.gram(&h, &BigRational::one()).unwrap();
        assert_eq!(g[3][3], 2);
    }
}
