//! Optimal embeddings of imaginary quadratic orders into definite quaternion
//! orders, and the Gross points they define on a class set.
//!
//! An embedding of `O_D` into `R` is determined by the image `x` of
//! `(δ + √D)/2`, `δ = D mod 2`; such `x` correspond to vectors `s = 2x − δ` of
//! norm `|D|` in the trace-zero lattice `{2y − tr y : y ∈ R}`, which is searched
//! with the short-vector enumerator.

pub mod local;

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, valuation};
use crate::cmfields::ImagQuadOrder;
use crate::error::{Error, Result};
use crate::lattices::enumerate::Form;
use crate::lattices::{ClassSet, Lattice, Order};
use crate::qalg::{rat, QuatElement};

pub use local::local_embedding_number;

/// `|D|` above which the enumeration is refused.
pub const MAX_ABS_DISC: i64 = 200_000_000;

/// One Gross point: an optimal embedding into the left order of `I_class`,
/// given by the image of `ω_D = (D + √D)/2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrossPoint {
    pub class: usize,
    pub witness: QuatElement,
    pub conductor: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GrossPointCounts {
    #[serde(rename = "D")]
    pub disc: i64,
    #[serde(rename = "c")]
    pub conductor: u64,
    pub counts: Vec<u64>,
    pub total: u64,
}

/// Precomputed data for searching embeddings into one order.
pub struct EmbeddingSearch {
    order: Order,
    /// `den ×` coordinates (in the order basis) of the trace-zero lattice basis.
    gross_coords: [[i128; 4]; 3],
    den: i128,
    one: [i128; 4],
    form: Form,
    conjugations: Vec<[[i128; 4]; 4]>,
}

impl EmbeddingSearch {
    pub fn new(order: &Order) -> Self {
        let alg = order.algebra();
        let basis = order.basis();
        let mut gens: Vec<QuatElement> =
            basis.iter().map(|b| b.scale(&rat(2)).sub(&QuatElement::scalar(b.tr()))).collect();
        gens.push(QuatElement::one());
        let gross = Lattice::from_elements(&gens).expect("trace-zero lattice plus ℤ has rank 4");
        let pure: Vec<QuatElement> = gross.basis_elements()[1..].to_vec();
        debug_assert!(pure.iter().all(|s| s.0[0].is_zero()));
        let mut gram = vec![vec![0i128; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                gram[r][c] = alg.trace_pairing(&pure[r], &pure[c]).to_integer().to_i128().expect("small Gram");
            }
        }
        let coords: Vec<[BigRational; 4]> = pure.iter().map(|s| order.lattice().coordinates(s)).collect();
        let mut den = BigInt::one();
        for c in &coords {
            for x in c {
                den = den.lcm(x.denom());
            }
        }
        let denr = BigRational::from_integer(den.clone());
        let gross_coords: [[i128; 4]; 3] = std::array::from_fn(|r| {
            std::array::from_fn(|t| (&coords[r][t] * &denr).to_integer().to_i128().expect("small coordinates"))
        });
        let one = int_coords(order.lattice(), &QuatElement::one());
        let mut conjugations: Vec<[[i128; 4]; 4]> = Vec::new();
        for u in order.units() {
            let inv = alg.inverse(&u).expect("unit");
            let m: [[i128; 4]; 4] =
                std::array::from_fn(|a| int_coords(order.lattice(), &alg.mul(&alg.mul(&u, &basis[a]), &inv)));
            if !conjugations.contains(&m) {
                conjugations.push(m);
            }
        }
        EmbeddingSearch {
            order: order.clone(),
            gross_coords,
            den: den.to_i128().expect("small denominator"),
            one,
            form: Form::new(gram),
            conjugations,
        }
    }

    pub fn order(&self) -> &Order {
        &self.order
    }

    pub fn one_coords(&self) -> [i128; 4] {
        self.one
    }

    /// Coordinates of every optimal `x` with `tr x = δ`, `nr x = (δ² − D)/4`.
    pub fn solutions(&self, cm: &ImagQuadOrder) -> Result<Vec<[i128; 4]>> {
        let d = cm.discriminant();
        if d >= 0 {
            return Err(Error::NotImaginaryQuadratic(d));
        }
        if -d > MAX_ABS_DISC {
            return Err(Error::TooLarge(format!("|D| = {} exceeds the enumeration guard {MAX_ABS_DISC}", -d)));
        }
        let delta = d.rem_euclid(2) as i128;
        let mut out = Vec::new();
        let _ = self.form.vectors_of_value(2 * (-d as i128), |y| {
            let mut num = [0i128; 4];
            for t in 0..4 {
                num[t] = (0..3).map(|r| y[r] * self.gross_coords[r][t]).sum::<i128>() + delta * self.den * self.one[t];
            }
            let q = 2 * self.den;
            if num.iter().all(|v| v % q == 0) {
                let x = num.map(|v| v / q);
                if minors_gcd(&self.one, &x) == 1 {
                    out.push(x);
                }
            }
            ControlFlow::Continue(())
        });
        out.sort();
        Ok(out)
    }

    /// Lexicographically least element of the unit-conjugation orbit.
    pub fn canonical(&self, x: &[i128; 4]) -> [i128; 4] {
        let mut best = *x;
        for m in &self.conjugations {
            let mut y = [0i128; 4];
            for a in 0..4 {
                for t in 0..4 {
                    y[t] += x[a] * m[a][t];
                }
            }
            if y < best {
                best = y;
            }
        }
        best
    }

    /// One lexicographically minimal witness per unit-conjugacy class.
    pub fn orbit_representatives(&self, sols: &[[i128; 4]]) -> Vec<[i128; 4]> {
        let set: BTreeSet<[i128; 4]> = sols.iter().map(|x| self.canonical(x)).collect();
        set.into_iter().collect()
    }

    pub fn element(&self, x: &[i128; 4]) -> QuatElement {
        self.order.element(x)
    }
}

/// Unit-conjugacy classes of optimal embeddings `O_D → R`, as images of `ω_D`.
pub fn optimal_embeddings(order: &Order, cm: &ImagQuadOrder) -> Result<Vec<QuatElement>> {
    let search = EmbeddingSearch::new(order);
    let sols = search.solutions(cm)?;
    let shift = omega_shift(cm);
    Ok(search.orbit_representatives(&sols).iter().map(|x| search.element(x).add(&shift)).collect())
}

/// `ω_D − (δ + √D)/2 = (D − δ)/2`.
fn omega_shift(cm: &ImagQuadOrder) -> QuatElement {
    let d = cm.discriminant();
    QuatElement::scalar(rat((d - d.rem_euclid(2)) / 2))
}

pub(crate) fn int_coords(lattice: &Lattice, x: &QuatElement) -> [i128; 4] {
    let c = lattice.integer_coordinates(x).expect("element lies in the lattice");
    c.map(|v| v.to_i128().expect("small coordinates"))
}

/// gcd of the 2×2 minors of the rows `u`, `v`: the index of `ℤu + ℤv` in its saturation.
pub fn minors_gcd(u: &[i128; 4], v: &[i128; 4]) -> i128 {
    let mut g = 0i128;
    for a in 0..4 {
        for b in a + 1..4 {
            g = g.gcd(&(u[a] * v[b] - u[b] * v[a]));
            if g == 1 {
                return 1;
            }
        }
    }
    g
}

/// Residues in `O_q/𝔓 ≅ 𝔽_{q²} = 𝔽_q[e]`, written `a + b·e`.
#[derive(Clone, Debug)]
struct ResidueField {
    q: u64,
    e: QuatElement,
    t: i128,
    n: i128,
}

impl ResidueField {
    fn new(order: &Order, q: u64) -> Self {
        let alg = order.algebra();
        let qi = q as i128;
        let basis = order.basis();
        // An element whose reduced characteristic polynomial is irreducible mod q.
        for n in 1..qi.pow(4) {
            let mut c = [0i128; 4];
            let mut m = n;
            for slot in c.iter_mut() {
                *slot = m % qi;
                m /= qi;
            }
            let e = order.element(&c);
            let t = e.tr().to_integer().to_i128().unwrap().rem_euclid(qi);
            let nn = alg.nr(&e).to_integer().to_i128().unwrap().rem_euclid(qi);
            let has_root = (0..qi).any(|x| (x * x - t * x + nn).rem_euclid(qi) == 0);
            if !has_root {
                let _ = &basis;
                return ResidueField { q, e, t, n: nn };
            }
        }
        panic!("the residue field at a ramified prime is quadratic");
    }

    fn residue(&self, order: &Order, y: &QuatElement) -> [i128; 2] {
        let alg = order.algebra();
        let qi = self.q as i128;
        for a in 0..qi {
            for b in 0..qi {
                let z = y.sub(&QuatElement::scalar(rat(a as i64))).sub(&self.e.scale(&rat(b as i64)));
                let nz = alg.nr(&z);
                if nz.is_zero() || (valuation_rat(&nz, self.q) >= 1) {
                    return [a, b];
                }
            }
        }
        panic!("element is not integral at q");
    }

    fn frobenius(&self, r: [i128; 2]) -> [i128; 2] {
        let qi = self.q as i128;
        [(r[0] + r[1] * self.t).rem_euclid(qi), (-r[1]).rem_euclid(qi)]
    }

    /// Roots of `X² − δX + N` in `𝔽_q[e]`, sorted.
    fn roots(&self, delta: i128, norm: i128) -> Vec<[i128; 2]> {
        let qi = self.q as i128;
        let mut out = Vec::new();
        for a in 0..qi {
            for b in 0..qi {
                // (a + be)² = a² − b²n + (2ab + b²t)e
                let c0 = a * a - b * b * self.n - delta * a + norm;
                let c1 = 2 * a * b + b * b * self.t - delta * b;
                if c0.rem_euclid(qi) == 0 && c1.rem_euclid(qi) == 0 {
                    out.push([a, b]);
                }
            }
        }
        out
    }
}

fn valuation_rat(r: &BigRational, p: u64) -> i64 {
    let num = r.numer();
    let den = r.denom();
    let vn = arith::valuation_big(num, p) as i64;
    let vd = arith::valuation_big(den, p) as i64;
    vn - vd
}

/// Per-class data for choosing one orientation of each embedding.
struct ClassOrientation {
    /// Residues of the basis of the left order, already twisted by Frobenius when
    /// `ord_q nr(I)` is odd.
    residues: [[i128; 2]; 4],
    /// `(den, M)`: coordinates in `O_L(I·O)` and `O_L(I·O')` are `x·M / den`.
    eichler: Option<([[i128; 4]; 4], [[i128; 4]; 4], i128, [i128; 4], [i128; 4])>,
}

struct Orientation {
    field: ResidueField,
    p: Option<u64>,
    classes: Vec<ClassOrientation>,
}

impl Orientation {
    fn new(classes: &ClassSet) -> Self {
        let base = classes.order();
        let q = base.algebra().discriminant();
        let field = ResidueField::new(base, q);
        let parents = base.parents();
        let alg = base.algebra();
        let per_class = classes
            .ideals()
            .iter()
            .zip(classes.left_orders())
            .map(|(ideal, left)| {
                let twist = valuation_rat(ideal.norm(), q) % 2 != 0;
                let residues: [[i128; 2]; 4] = std::array::from_fn(|a| {
                    let r = field.residue(left, &left.basis()[a]);
                    if twist {
                        field.frobenius(r)
                    } else {
                        r
                    }
                });
                let eichler = parents.map(|par| {
                    let m1 = ideal.lattice().product(par.maximal.lattice(), alg).left_order(alg);
                    let m2 = ideal.lattice().product(par.second.lattice(), alg).left_order(alg);
                    let (t1, d1) = transfer(left, &m1);
                    let (t2, d2) = transfer(left, &m2);
                    let den = d1.lcm(&d2);
                    let t1 = t1.map(|r| r.map(|v| v * (den / d1)));
                    let t2 = t2.map(|r| r.map(|v| v * (den / d2)));
                    let one1 = int_coords(&m1, &QuatElement::one()).map(|v| v * den);
                    let one2 = int_coords(&m2, &QuatElement::one()).map(|v| v * den);
                    (t1, t2, den, one1, one2)
                });
                ClassOrientation { residues, eichler }
            })
            .collect();
        Orientation { field, p: parents.map(|p| p.p), classes: per_class }
    }

    fn keeps(&self, class: usize, x: &[i128; 4], roots: &[[i128; 2]]) -> bool {
        let qi = self.field.q as i128;
        let co = &self.classes[class];
        if roots.len() > 1 {
            let mut r = [0i128; 2];
            for a in 0..4 {
                r[0] += x[a] * co.residues[a][0];
                r[1] += x[a] * co.residues[a][1];
            }
            let r = r.map(|v| v.rem_euclid(qi));
            if r != roots[0] {
                return false;
            }
        }
        if let (Some(p), Some((t1, t2, _den, one1, one2))) = (self.p, &co.eichler) {
            let apply = |t: &[[i128; 4]; 4]| -> [i128; 4] {
                std::array::from_fn(|c| (0..4).map(|a| x[a] * t[a][c]).sum())
            };
            // Both coordinate vectors carry the common denominator, which cancels in the comparison.
            let g1 = minors_gcd(one1, &apply(t1));
            let g2 = minors_gcd(one2, &apply(t2));
            if valuation(g1, p) < valuation(g2, p) {
                return false;
            }
        }
        true
    }
}

/// Integer matrix `T` and denominator `d` with `coords_M(x) = coords_R(x)·T / d`.
fn transfer(from: &Order, to: &Lattice) -> ([[i128; 4]; 4], i128) {
    let rows: Vec<[BigRational; 4]> = from.basis().iter().map(|b| to.coordinates(b)).collect();
    let mut den = BigInt::one();
    for r in &rows {
        for x in r {
            den = den.lcm(x.denom());
        }
    }
    let d = BigRational::from_integer(den.clone());
    let t = std::array::from_fn(|a| std::array::from_fn(|c| (&rows[a][c] * &d).to_integer().to_i128().unwrap()));
    (t, den.to_i128().unwrap())
}

/// All Gross points of conductor `c` on the class set, one per orbit, with an
/// orientation chosen at the ramified prime and at the level.
pub fn gross_points(classes: &ClassSet, cm: &ImagQuadOrder) -> Result<Vec<GrossPoint>> {
    collect_points(classes, cm, true)
}

/// As [`gross_points`] but without orientations: every unit-conjugacy class of
/// optimal embeddings is returned.
pub fn optimal_embedding_classes(classes: &ClassSet, cm: &ImagQuadOrder) -> Result<Vec<GrossPoint>> {
    collect_points(classes, cm, false)
}

fn collect_points(classes: &ClassSet, cm: &ImagQuadOrder, oriented: bool) -> Result<Vec<GrossPoint>> {
    if cm.discriminant() >= 0 {
        return Err(Error::NotImaginaryQuadratic(cm.discriminant()));
    }
    let orientation = oriented.then(|| Orientation::new(classes));
    let d = cm.discriminant() as i128;
    let delta = d.rem_euclid(2);
    let norm = (delta * delta - d) / 4;
    let roots = orientation.as_ref().map(|o| o.field.roots(delta, norm)).unwrap_or_default();
    let shift = omega_shift(cm);
    let per_class: Result<Vec<Vec<GrossPoint>>> = classes
        .left_orders()
        .par_iter()
        .enumerate()
        .map(|(i, left)| {
            let search = EmbeddingSearch::new(left);
            let sols = search.solutions(cm)?;
            let reps = search.orbit_representatives(&sols);
            Ok(reps
                .iter()
                .filter(|x| orientation.as_ref().is_none_or(|o| o.keeps(i, x, &roots)))
                .map(|x| GrossPoint { class: i, witness: search.element(x).add(&shift), conductor: cm.conductor() })
                .collect())
        })
        .collect();
    Ok(per_class?.into_iter().flatten().collect())
}

pub fn counts_of(points: &[GrossPoint], classes: usize, cm: &ImagQuadOrder) -> GrossPointCounts {
    let mut counts = vec![0u64; classes];
    for p in points {
        counts[p.class] += 1;
    }
    GrossPointCounts { disc: cm.discriminant(), conductor: cm.conductor(), total: counts.iter().sum(), counts }
}

/// Per-class counts `m_i` of Gross points and their total.
pub fn gross_point_counts(classes: &ClassSet, cm: &ImagQuadOrder) -> Result<GrossPointCounts> {
    Ok(counts_of(&gross_points(classes, cm)?, classes.len(), cm))
}

/// Checks that `x` is an optimal embedding of `O_D` (as image of `ω_D`) into `order`.
pub fn is_optimal_embedding(order: &Order, cm: &ImagQuadOrder, x: &QuatElement) -> bool {
    let alg = order.algebra();
    let (t, n) = cm.generator_trace_norm();
    if x.tr() != BigRational::from_integer(BigInt::from(t)) || alg.nr(x) != BigRational::from_integer(BigInt::from(n)) {
        return false;
    }
    let Some(v) = order.lattice().integer_coordinates(x) else {
        return false;
    };
    let u = int_coords(order.lattice(), &QuatElement::one());
    let v = v.map(|c| c.to_i128().unwrap());
    minors_gcd(&u, &v) == 1
}
