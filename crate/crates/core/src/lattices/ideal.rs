use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::enumerate::Form;
use super::lattice::Lattice;
use super::order::{to_i128, Order};
use crate::arith::isqrt;
use crate::error::{invalid, Result};
use crate::qalg::{QuatElement, QuaternionAlgebra};

/// A right ideal of a fixed base order (its right order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RightIdeal {
    lattice: Lattice,
    norm: BigRational,
}

impl RightIdeal {
    pub fn unit(order: &Order) -> Self {
        RightIdeal { lattice: order.lattice().clone(), norm: BigRational::one() }
    }

    /// Checks `I·O ⊆ I` and computes the reduced norm `[O : I]^{1/2}`
    /// (as a ratio of covolumes, so `I` need not lie in `O`).
    pub fn from_lattice(order: &Order, lattice: Lattice) -> Result<Self> {
        if !lattice.product(order.lattice(), order.algebra()).is_subset_of(&lattice) {
            return Err(invalid("lattice is not stable under right multiplication by the order"));
        }
        let ratio = lattice.covolume() / order.lattice().covolume();
        let norm = rational_sqrt(&ratio).ok_or_else(|| invalid("index of the ideal is not a square"))?;
        Ok(RightIdeal { lattice, norm })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn norm(&self) -> &BigRational {
        &self.norm
    }

    pub fn left_order(&self, order: &Order) -> Order {
        Order::from_lattice(order.algebra().clone(), self.lattice.left_order(order.algebra()))
            .expect("left order of an ideal is an order")
    }

    /// `b·I`.
    pub fn left_mul(&self, order: &Order, b: &QuatElement) -> Result<RightIdeal> {
        let alg = order.algebra();
        let gens: Vec<QuatElement> = self.lattice.basis_elements().iter().map(|x| alg.mul(b, x)).collect();
        RightIdeal::from_lattice(order, Lattice::from_elements(&gens)?)
    }

    /// The norm form `nr(x)/nr(I)`, doubled to make the Gram matrix integral.
    pub fn normalized_form(&self, alg: &QuaternionAlgebra) -> Form {
        let g = self.lattice.gram(alg, &self.norm).expect("normalized trace form of an ideal is integral");
        Form::new(to_i128(&g))
    }

    /// Counts of `x ∈ I` with `nr(x)/nr(I) = m` for `m = 0..=bound`.
    pub fn theta(&self, alg: &QuaternionAlgebra, bound: u64) -> Vec<u64> {
        let doubled = self.normalized_form(alg).theta(2 * bound as i128);
        doubled.into_iter().step_by(2).collect()
    }

    /// The `ℓ + 1` right ideals `J ⊂ I` with `nr(J) = ℓ·nr(I)`, sorted.
    pub fn neighbors(&self, order: &Order, l: u64) -> Vec<RightIdeal> {
        let alg = order.algebra();
        let li = l as i128;
        let scaled = self.lattice.scale(&BigRational::from_integer(BigInt::from(l)));
        let target = &self.norm * BigRational::from_integer(BigInt::from(l));
        let mut out: Vec<RightIdeal> = Vec::new();
        for n in 1..li.pow(4) {
            let mut c = [0i64; 4];
            let mut m = n;
            for slot in c.iter_mut() {
                *slot = (m % li) as i64;
                m /= li;
            }
            let x = self.lattice.element(&c);
            if !(alg.nr(&x) / &target).is_integer() {
                continue;
            }
            let mut gens: Vec<QuatElement> = order.basis().iter().map(|b| alg.mul(&x, b)).collect();
            gens.extend(scaled.basis_elements());
            let lat = Lattice::from_elements(&gens).expect("contains ℓI");
            let ideal = RightIdeal::from_lattice(order, lat).expect("xO + ℓI is a right ideal");
            if ideal.norm == target && !out.contains(&ideal) {
                out.push(ideal);
            }
        }
        out.sort_by(|a, b| a.lattice.cmp(&b.lattice));
        out
    }
}

/// Finds `b` with `J = b·I`, if any.
pub fn find_isomorphism(order: &Order, i: &RightIdeal, j: &RightIdeal) -> Option<QuatElement> {
    let alg = order.algebra();
    let product = j.lattice.product(&i.lattice.conjugate(), alg);
    let n = &i.norm * &j.norm;
    let g = product.gram(alg, &n).expect("J·Ī has integral normalized trace form");
    let form = Form::new(to_i128(&g));
    let mut found = None;
    let _ = form.vectors_of_value(2, |x| {
        let c: [BigInt; 4] = std::array::from_fn(|t| BigInt::from(x[t]));
        let b = product.element_big(&c).scale(&i.norm.recip());
        if let Ok(image) = i.left_mul(order, &b) {
            if image.lattice == j.lattice {
                found = Some(b);
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    found
}

/// Number of `b ∈ I_i Ī_j` with `nr(b) = n·nr(I_i)·nr(I_j)`.
pub fn count_connecting(order: &Order, i: &RightIdeal, j: &RightIdeal, n: u64) -> u64 {
    let alg = order.algebra();
    let product = i.lattice.product(&j.lattice.conjugate(), alg);
    let scale = &i.norm * &j.norm;
    let g = product.gram(alg, &scale).expect("I·J̄ has integral normalized trace form");
    let form = Form::new(to_i128(&g));
    let mut count = 0u64;
    let _ = form.vectors_of_value(2 * n as i128, |_| {
        count += 1;
        ControlFlow::Continue(())
    });
    count
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() || r.is_zero() {
        return None;
    }
    let sq = |n: &BigInt| -> Option<BigInt> {
        match n.to_u128() {
            Some(v) => {
                let s = isqrt(v);
                (s * s == v).then(|| BigInt::from(s))
            }
            None => {
                let s = n.sqrt();
                (&s * &s == *n).then_some(s)
            }
        }
    };
    Some(BigRational::new(sq(r.numer())?, sq(r.denom())?))
}
