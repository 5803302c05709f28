use std::ops::ControlFlow;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::enumerate::Form;
use super::lattice::Lattice;
use crate::arith::{self, isqrt, mod_inv};
use crate::error::{invalid, Error, Result};
use crate::qalg::{rat, QuatElement, QuaternionAlgebra};

/// An order in a definite quaternion algebra.
#[derive(Clone, Debug)]
pub struct Order {
    alg: Arc<QuaternionAlgebra>,
    lattice: Lattice,
    disc: u64,
    level: u64,
    parents: Option<Arc<EichlerParents>>,
}

/// The two maximal orders `O ⊃ E ⊂ O'` of an Eichler order and the right
/// `O`-ideal `J₀` of norm `p` with left order `O'`.
#[derive(Clone, Debug)]
pub struct EichlerParents {
    pub p: u64,
    pub maximal: Order,
    pub second: Order,
    pub connector: Lattice,
}

impl PartialEq for Order {
    fn eq(&self, other: &Self) -> bool {
        self.lattice == other.lattice && self.alg == other.alg
    }
}

impl Order {
    /// Validates that `lattice` is an order (contains 1, closed under products,
    /// integral trace form) and computes its reduced discriminant.
    pub fn from_lattice(alg: Arc<QuaternionAlgebra>, lattice: Lattice) -> Result<Self> {
        if !lattice.contains(&QuatElement::one()) {
            return Err(invalid("lattice does not contain 1"));
        }
        if !lattice.product(&lattice, &alg).is_subset_of(&lattice) {
            return Err(invalid("lattice is not closed under multiplication"));
        }
        let disc = reduced_discriminant(&lattice, &alg)?;
        let base = alg.discriminant();
        if disc % base != 0 {
            return Err(invalid("order discriminant not divisible by the algebra discriminant"));
        }
        Ok(Order { level: disc / base, alg, lattice, disc, parents: None })
    }

    pub fn algebra(&self) -> &Arc<QuaternionAlgebra> {
        &self.alg
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn discriminant(&self) -> u64 {
        self.disc
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Set for Eichler orders built by [`Order::eichler`].
    pub fn parents(&self) -> Option<&EichlerParents> {
        self.parents.as_deref()
    }

    pub fn basis(&self) -> Vec<QuatElement> {
        self.lattice.basis_elements()
    }

    pub fn contains(&self, x: &QuatElement) -> bool {
        self.lattice.contains(x)
    }

    /// Gram matrix of `tr(x ȳ)`; the norm form is half of it.
    pub fn trace_gram(&self) -> [[i64; 4]; 4] {
        self.lattice.gram(&self.alg, &BigRational::one()).expect("orders have integral trace form")
    }

    pub fn norm_form(&self) -> Form {
        Form::new(to_i128(&self.trace_gram()))
    }

    /// All elements of reduced norm 1.
    pub fn units(&self) -> Vec<QuatElement> {
        let form = self.norm_form();
        let mut out = Vec::new();
        let _ = form.vectors_of_value(2, |x| {
            out.push(self.element(x));
            ControlFlow::Continue(())
        });
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    /// `#O^× / 2`.
    pub fn unit_weight(&self) -> u64 {
        self.units().len() as u64 / 2
    }

    pub fn element(&self, coords: &[i128]) -> QuatElement {
        let c: [BigInt; 4] = std::array::from_fn(|t| BigInt::from(coords[t]));
        self.lattice.element_big(&c)
    }

    /// Integer structure constants: `b_a b_b = Σ_c table[a][b][c] b_c`.
    pub fn mult_table(&self) -> [[[i128; 4]; 4]; 4] {
        let b = self.basis();
        let mut t = [[[0i128; 4]; 4]; 4];
        for (x, bx) in b.iter().enumerate() {
            for (y, by) in b.iter().enumerate() {
                let c = self
                    .lattice
                    .integer_coordinates(&self.alg.mul(bx, by))
                    .expect("order is closed under multiplication");
                for z in 0..4 {
                    t[x][y][z] = c[z].to_i128().expect("structure constant fits in i128");
                }
            }
        }
        t
    }

    /// Splitting `O ⊗ ℤ_p ≅ M₂(ℤ_p)` modulo `p^k`.
    pub fn local_splitting(&self, p: u64, k: u32) -> Result<LocalSplitting> {
        if !arith::is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        if self.disc % p == 0 {
            return Err(Error::RamifiedPrime(p));
        }
        if k == 0 {
            return Err(invalid("precision must be positive"));
        }
        let modulus = (p as i128)
            .checked_pow(k)
            .filter(|m| *m < (1i128 << 60))
            .ok_or_else(|| Error::TooLarge(format!("{p}^{k} exceeds the local precision range")))?;
        let table = self.mult_table();
        let mul = |x: &[i128; 4], y: &[i128; 4]| -> [i128; 4] {
            let mut out = [0i128; 4];
            for a in 0..4 {
                if x[a] == 0 {
                    continue;
                }
                for b in 0..4 {
                    if y[b] == 0 {
                        continue;
                    }
                    let s = x[a] * y[b] % modulus;
                    for c in 0..4 {
                        out[c] = (out[c] + s * table[a][b][c]) % modulus;
                    }
                }
            }
            out.map(|v| v.rem_euclid(modulus))
        };
        // Nontrivial idempotent mod p: tr ≡ 1, nr ≡ 0.
        let gram = self.trace_gram();
        let pi = p as i128;
        let trace: Vec<i128> = self.basis().iter().map(|b| b.tr().to_integer().to_i128().unwrap()).collect();
        let mut e = None;
        'search: for n in 1..pi.pow(4) {
            let mut c = [0i128; 4];
            let mut m = n;
            for slot in c.iter_mut() {
                *slot = m % pi;
                m /= pi;
            }
            let tr: i128 = (0..4).map(|a| c[a] * trace[a]).sum();
            let mut twice_nr = 0i128;
            for a in 0..4 {
                for b in 0..4 {
                    twice_nr += c[a] * c[b] * gram[a][b] as i128;
                }
            }
            if tr.rem_euclid(pi) == 1 && (twice_nr / 2).rem_euclid(pi) == 0 {
                e = Some(c);
                break 'search;
            }
        }
        let mut e = e.expect("an unramified prime splits the order, so an idempotent exists mod p");
        loop {
            let e2 = mul(&e, &e);
            let e3 = mul(&e2, &e);
            let next: [i128; 4] = std::array::from_fn(|t| (3 * e2[t] - 2 * e3[t]).rem_euclid(modulus));
            if next == e {
                break;
            }
            e = next;
        }
        // Left ideal O·e is free of rank 2; pick two spanning vectors independent mod p.
        let unit = |t: usize| -> [i128; 4] { std::array::from_fn(|s| i128::from(s == t)) };
        let gens: Vec<[i128; 4]> = (0..4).map(|t| mul(&unit(t), &e)).collect();
        let mut chosen = None;
        'pick: for a in 0..4 {
            for b in a + 1..4 {
                for r in 0..4 {
                    for s in r + 1..4 {
                        let det = gens[a][r] * gens[b][s] - gens[a][s] * gens[b][r];
                        if det.rem_euclid(pi) != 0 {
                            chosen = Some((gens[a], gens[b], r, s));
                            break 'pick;
                        }
                    }
                }
            }
        }
        let (v1, v2, r, s) = chosen.expect("O·e has rank 2 mod p");
        let det = (v1[r] * v2[s] - v1[s] * v2[r]).rem_euclid(modulus);
        let det_inv = mod_inv(det, modulus).expect("unit minor");
        let solve = |w: &[i128; 4]| -> [i128; 2] {
            let c1 = (w[r] * v2[s] - w[s] * v2[r]).rem_euclid(modulus) * det_inv % modulus;
            let c2 = (v1[r] * w[s] - v1[s] * w[r]).rem_euclid(modulus) * det_inv % modulus;
            [c1, c2]
        };
        let mut images = [[[0i128; 2]; 2]; 4];
        for (t, img) in images.iter_mut().enumerate() {
            let x = unit(t);
            for (col, v) in [v1, v2].iter().enumerate() {
                let c = solve(&mul(&x, v));
                img[0][col] = c[0];
                img[1][col] = c[1];
            }
        }
        let mut split = LocalSplitting { p, k, modulus, basis_images: images, i_image: [[0; 2]; 2], j_image: [[0; 2]; 2] };
        split.i_image = split.image_of(self, &QuatElement::from_ints([0, 1, 0, 0]))?;
        split.j_image = split.image_of(self, &QuatElement::from_ints([0, 0, 1, 0]))?;
        Ok(split)
    }

    /// The Eichler order `{x ∈ O : φ(x)₂₁ ≡ 0 mod p}` together with the second
    /// maximal order `O'` (with `E = O ∩ O'`) and the connecting ideal.
    pub fn eichler(&self, p: u64) -> Result<EichlerData> {
        if self.level != 1 {
            return Err(Error::BadLevel("Eichler orders are built from a maximal order".into()));
        }
        let split = self.local_splitting(p, 1)?;
        let pi = p as i128;
        let lower: Vec<i128> = (0..4).map(|t| split.basis_images[t][1][0].rem_euclid(pi)).collect();
        let eichler = kernel_lattice(self, &[lower.clone()], pi);
        let second_row: Vec<i128> = (0..4).map(|t| split.basis_images[t][1][1].rem_euclid(pi)).collect();
        let connector = kernel_lattice(self, &[lower, second_row], pi);
        let second = connector.left_order(&self.alg);
        let mut eichler = Order::from_lattice(self.alg.clone(), eichler)?;
        let second = Order::from_lattice(self.alg.clone(), second)?;
        debug_assert_eq!(eichler.lattice, self.lattice.intersection(&second.lattice));
        eichler.parents = Some(Arc::new(EichlerParents {
            p,
            maximal: self.clone(),
            second: second.clone(),
            connector: connector.clone(),
        }));
        Ok(EichlerData { p, eichler, second, connector })
    }
}

/// `{x ∈ O : f(x) ≡ 0 mod p}` for the given linear functionals on coordinates.
fn kernel_lattice(order: &Order, functionals: &[Vec<i128>], p: i128) -> Lattice {
    let basis = order.basis();
    let mut gens: Vec<QuatElement> = basis.iter().map(|b| b.scale(&rat(p as i64))).collect();
    for n in 0..p.pow(4) {
        let mut c = [0i128; 4];
        let mut m = n;
        for slot in c.iter_mut() {
            *slot = m % p;
            m /= p;
        }
        if functionals.iter().all(|f| (0..4).map(|t| f[t] * c[t]).sum::<i128>().rem_euclid(p) == 0) {
            gens.push(order.element(&c));
        }
    }
    Lattice::from_elements(&gens).expect("kernel contains pO")
}

#[derive(Clone, Debug)]
pub struct EichlerData {
    pub p: u64,
    pub eichler: Order,
    pub second: Order,
    /// Right `O`-ideal of norm `p` with left order `O'`.
    pub connector: Lattice,
}

pub type Mat2 = [[i128; 2]; 2];

/// An algebra map `O → M₂(ℤ/p^k)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalSplitting {
    pub p: u64,
    pub k: u32,
    pub modulus: i128,
    pub basis_images: [Mat2; 4],
    pub i_image: Mat2,
    pub j_image: Mat2,
}

impl LocalSplitting {
    pub fn image(&self, coords: &[i128; 4]) -> Mat2 {
        let m = self.modulus;
        let mut out = [[0i128; 2]; 2];
        for (t, &c) in coords.iter().enumerate() {
            for r in 0..2 {
                for s in 0..2 {
                    out[r][s] = (out[r][s] + c.rem_euclid(m) * self.basis_images[t][r][s]) % m;
                }
            }
        }
        out
    }

    /// Image of an element whose coordinates in the order basis are `p`-integral.
    pub fn image_of(&self, order: &Order, x: &QuatElement) -> Result<Mat2> {
        let coords = order.lattice().coordinates(x);
        let mut c = [0i128; 4];
        for t in 0..4 {
            let num = coords[t].numer().to_i128().ok_or_else(|| Error::Overflow("coordinate".into()))?;
            let den = coords[t].denom().to_i128().ok_or_else(|| Error::Overflow("coordinate".into()))?;
            let inv = mod_inv(den, self.modulus)
                .ok_or_else(|| invalid(format!("element is not integral at {}", self.p)))?;
            c[t] = num.rem_euclid(self.modulus) * inv % self.modulus;
        }
        Ok(self.image(&c))
    }

    pub fn reduce(&self, k: u32) -> LocalSplitting {
        assert!(k <= self.k);
        let m = (self.p as i128).pow(k);
        let red = |a: &Mat2| -> Mat2 { a.map(|r| r.map(|v| v.rem_euclid(m))) };
        LocalSplitting {
            p: self.p,
            k,
            modulus: m,
            basis_images: self.basis_images.map(|a| red(&a)),
            i_image: red(&self.i_image),
            j_image: red(&self.j_image),
        }
    }
}

pub fn mat_mul(a: &Mat2, b: &Mat2, m: i128) -> Mat2 {
    std::array::from_fn(|r| std::array::from_fn(|c| (a[r][0] * b[0][c] + a[r][1] * b[1][c]).rem_euclid(m)))
}

fn reduced_discriminant(lattice: &Lattice, alg: &QuaternionAlgebra) -> Result<u64> {
    let g = lattice.gram(alg, &BigRational::one())?;
    let det = det4(&to_i128(&g)).unsigned_abs();
    let r = isqrt(det);
    if r * r != det {
        return Err(invalid("trace-form determinant is not a square"));
    }
    r.to_u64().ok_or_else(|| Error::Overflow("discriminant".into()))
}

pub(crate) fn to_i128(g: &[[i64; 4]; 4]) -> Vec<Vec<i128>> {
    g.iter().map(|r| r.iter().map(|&v| v as i128).collect()).collect()
}

pub(crate) fn det4(m: &[Vec<i128>]) -> i128 {
    let big: Vec<Vec<BigRational>> =
        m.iter().map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect()).collect();
    let mut a = big;
    let mut det = BigRational::one();
    for col in 0..4 {
        let Some(p) = (col..4).find(|&r| !a[r][col].is_zero()) else {
            return 0;
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        det *= a[col][col].clone();
        for r in col + 1..4 {
            let f = &a[r][col] / &a[col][col];
            for t in col..4 {
                let s = &f * &a[col][t];
                a[r][t] -= s;
            }
        }
    }
    det.to_integer().to_i128().expect("determinant fits in i128")
}

/// A maximal order of a definite algebra of prime discriminant.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Order> {
    let q = alg.discriminant();
    if !alg.is_definite() {
        return Err(Error::Indefinite("maximal orders are only built in definite algebras".into()));
    }
    if !arith::is_prime(q) {
        return Err(Error::UnsupportedDiscriminant(format!("discriminant {q} is not prime")));
    }
    let alg = Arc::new(alg.clone());
    let (a, b) = (alg.a(), alg.b());
    let std_basis = |den: i64, rows: &[[i64; 4]]| -> Vec<QuatElement> {
        rows.iter().map(|r| QuatElement::from_fraction(*r, den)).collect()
    };
    let explicit = if *a == rat(-1) && *b == rat(-1) && q == 2 {
        Some(std_basis(2, &[[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0], [1, 1, 1, 1]]))
    } else if *a == rat(-1) && *b == rat(-(q as i64)) && q % 4 == 3 {
        Some(std_basis(2, &[[2, 0, 0, 0], [0, 2, 0, 0], [1, 0, 1, 0], [0, 1, 0, 1]]))
    } else if *a == rat(-2) && *b == rat(-(q as i64)) && q % 8 == 5 {
        Some(std_basis(4, &[[4, 0, 0, 0], [2, 0, 2, 2], [0, 1, 2, 1], [0, 0, 0, 4]]))
    } else {
        None
    };
    let order = match explicit {
        Some(gens) => Order::from_lattice(alg.clone(), Lattice::from_elements(&gens)?)?,
        None => saturate(alg.clone())?,
    };
    if order.disc != q {
        return Err(Error::UnsupportedDiscriminant(format!(
            "could not reach a maximal order for discriminant {q} (got {})",
            order.disc
        )));
    }
    Ok(order)
}

/// Enlarges an order containing `ℤ⟨i, j⟩` (after clearing denominators of `a`, `b`)
/// until its discriminant equals that of the algebra.
fn saturate(alg: Arc<QuaternionAlgebra>) -> Result<Order> {
    if !alg.a().is_integer() || !alg.b().is_integer() {
        return Err(invalid("saturation expects integral structure constants"));
    }
    let start = Lattice::from_elements(&[
        QuatElement::from_ints([1, 0, 0, 0]),
        QuatElement::from_ints([0, 1, 0, 0]),
        QuatElement::from_ints([0, 0, 1, 0]),
        QuatElement::from_ints([0, 0, 0, 1]),
    ])?;
    let mut order = Order::from_lattice(alg.clone(), start)?;
    let target = alg.discriminant();
    'outer: while order.disc != target {
        let ratio = order.disc / target;
        for (l, _) in arith::factor(ratio) {
            if let Some(bigger) = enlarge_at(&order, l) {
                order = bigger;
                continue 'outer;
            }
        }
        return Err(Error::UnsupportedDiscriminant(format!("saturation stalled at discriminant {}", order.disc)));
    }
    Ok(order)
}

fn enlarge_at(order: &Order, l: u64) -> Option<Order> {
    overorders_at(order, l, true).into_iter().next()
}

/// Orders generated by `O` and one integral `x ∈ (1/ℓ)O \ O`.
fn overorders_at(order: &Order, l: u64, first_only: bool) -> Vec<Order> {
    let alg = order.alg.clone();
    let li = l as i128;
    let inv_l = BigRational::new(BigInt::one(), BigInt::from(l));
    let mut found: Vec<Order> = Vec::new();
    for n in 1..li.pow(4) {
        let mut c = [0i128; 4];
        let mut m = n;
        for slot in c.iter_mut() {
            *slot = m % li;
            m /= li;
        }
        let x = order.element(&c).scale(&inv_l);
        if !alg.nr(&x).is_integer() || !x.tr().is_integer() {
            continue;
        }
        let mut gens = order.basis();
        gens.push(x);
        let mut lat = Lattice::from_elements(&gens).expect("contains the order");
        loop {
            if lat.gram(&alg, &BigRational::one()).is_err() {
                break;
            }
            let next = lat.product(&lat, &alg).sum(&lat);
            if next == lat {
                if let Ok(o) = Order::from_lattice(alg.clone(), lat) {
                    if !found.contains(&o) {
                        found.push(o);
                        if first_only {
                            return found;
                        }
                    }
                }
                break;
            }
            lat = next;
        }
    }
    found
}

impl Order {
    /// True when no order strictly containing `self` and obtained by adjoining an
    /// element of `(1/ℓ)O` (ℓ ranging over the discriminant primes) has the same level.
    /// For a maximal order this means there is no strictly larger order at all.
    pub fn is_saturated(&self) -> bool {
        arith::prime_divisors(self.disc).into_iter().all(|l| {
            overorders_at(self, l, false).iter().all(|o| o.level != self.level && o.disc < self.disc)
                && (self.level != 1 || overorders_at(self, l, true).is_empty())
        })
    }

    /// Orders obtained from `self` by adjoining one integral element of `(1/ℓ)O`.
    pub fn minimal_overorders(&self, l: u64) -> Vec<Order> {
        overorders_at(self, l, false)
    }
}
