use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use cmlab_core::qalg::{candidate_places, hilbert_symbol, Place, QuatElement, QuaternionAlgebra};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Local solubility of `ax² + by² = z²` by a primitive solution modulo `p^k`.
/// For squarefree `a, b` this is exact with `k = 3` (odd `p`) and `k = 6` (`p = 2`).
fn brute_force_symbol(a: i64, b: i64, p: u64) -> i32 {
    let k = if p == 2 { 6 } else { 3 };
    let m = (p as i64).pow(k);
    let mut squares = vec![Vec::new(); m as usize];
    for z in 0..m {
        squares[(z * z % m) as usize].push(z);
    }
    let pi = p as i64;
    for x in 0..m {
        for y in 0..m {
            let v = (a * x % m * x % m + b * y % m * y % m).rem_euclid(m);
            let prim_xy = x % pi != 0 || y % pi != 0;
            if squares[v as usize].iter().any(|z| prim_xy || z % pi != 0) {
                return 1;
            }
        }
    }
    -1
}

#[test]
fn hilbert_symbol_matches_solubility_oracle() {
    let vals = [-15, -10, -7, -6, -5, -3, -2, -1, 1, 2, 3, 5, 6, 7, 10, 11, 13, 14, 15];
    for &a in &vals {
        for &b in &vals {
            for p in [2u64, 3, 5, 7] {
                let got = hilbert_symbol(&rat(a, 1), &rat(b, 1), Place::Prime(p)).unwrap();
                assert_eq!(got, brute_force_symbol(a, b, p), "({a},{b})_{p}");
            }
        }
    }
}

#[test]
fn quaternion_algebra_ramification_examples() {
    let h = QuaternionAlgebra::from_ints(-1, -1).unwrap();
    assert_eq!(h.ramification(), &[Place::Prime(2), Place::Infinity]);
    assert_eq!(QuaternionAlgebra::from_ints(1, 1).unwrap().ramification(), &[] as &[Place]);
    assert!(QuaternionAlgebra::from_ints(-1, 1).unwrap().is_matrix_algebra());
    for q in [2, 3, 5, 7, 11, 13, 17, 41, 73, 97] {
        let alg = QuaternionAlgebra::definite_of_prime_discriminant(q).unwrap();
        assert_eq!(alg.discriminant(), q);
        assert!(alg.is_definite());
    }
}

fn small() -> impl Strategy<Value = i64> {
    (-60i64..60).prop_filter("nonzero", |x| *x != 0)
}

fn element() -> impl Strategy<Value = QuatElement> {
    (prop::array::uniform4(-20i64..20), 1i64..5).prop_map(|(c, d)| QuatElement::from_fraction(c, d))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn product_formula(a in small(), b in small(), da in 1i64..9, db in 1i64..9) {
        let (a, b) = (rat(a, da), rat(b, db));
        let prod: i32 = candidate_places(&a, &b).into_iter().map(|v| hilbert_symbol(&a, &b, v).unwrap()).product();
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn ramification_depends_on_square_class(a in small(), b in small(), sn in 1i64..12, sd in 1i64..12) {
        let s = rat(sn, sd);
        let alg = QuaternionAlgebra::new(rat(a, 1), rat(b, 1)).unwrap();
        let scaled = QuaternionAlgebra::new(rat(a, 1), rat(b, 1) * &s * &s).unwrap();
        prop_assert_eq!(alg.ramification(), scaled.ramification());
    }

    #[test]
    fn norm_multiplicative_and_trace_symmetric(a in small(), b in small(), x in element(), y in element(), z in element()) {
        let alg = QuaternionAlgebra::new(rat(a, 1), rat(b, 1)).unwrap();
        prop_assert_eq!(alg.nr(&alg.mul(&x, &y)), alg.nr(&x) * alg.nr(&y));
        prop_assert_eq!(alg.tr(&alg.mul(&x, &y)), alg.tr(&alg.mul(&y, &x)));
        let xyz = alg.mul(&alg.mul(&x, &y), &z);
        prop_assert_eq!(&xyz, &alg.mul(&x, &alg.mul(&y, &z)));
        prop_assert_eq!(alg.mul(&x, &y).conj(), alg.mul(&y.conj(), &x.conj()));
        if let Ok(inv) = alg.inverse(&x) {
            prop_assert_eq!(alg.mul(&x, &inv), QuatElement::one());
        }
    }
}
