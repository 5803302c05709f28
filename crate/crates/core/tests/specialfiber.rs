use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use cmlab_core::lattices::brandt_matrix;
use cmlab_core::specialfiber::{build_model, measures};
use cmlab_core::Error;

#[test]
fn dual_graph_is_connected_bipartite_and_weighted_like_brandt() {
    for (p, q, d) in [(3, 2, -3), (5, 2, -20), (3, 11, -3), (5, 11, -20), (3, 2, -4), (7, 3, -4), (3, 23, -3)] {
        let m = build_model(p, q, d).unwrap();
        assert!(m.is_connected(), "({p},{q},{d})");
        // every edge runs from the parity-0 copy to the parity-1 copy by construction; degrees add up
        assert_eq!(m.degrees().iter().sum::<usize>(), 2 * m.edges.len());
        let b = brandt_matrix(&m.components, p).unwrap();
        let inc = m.weighted_incidence();
        for k in 0..b.len() {
            for l in 0..b.len() {
                assert_eq!(inc[k][l], BigRational::from_integer(BigInt::from(b[k][l])));
            }
        }
        let mass = m.singular.mass();
        assert_eq!(mass, BigRational::new(BigInt::from((q - 1) * (p + 1)), BigInt::from(12)));
        let ms = measures(&m);
        for (i, w) in m.singular.weights().iter().enumerate() {
            let expected = BigRational::one() / BigRational::from_integer(BigInt::from(*w)) / &mass;
            assert_eq!(ms.ram_inv.masses[i], expected);
        }
        for meas in [&ms.ram, &ms.ram_inv, &ms.components, &ms.components_inv] {
            assert!(meas.total().is_one());
        }
        assert_eq!(m.betti_number(), 1 - 2 * m.components.len() as i64 + m.singular.len() as i64);
    }
}

#[test]
fn exports_are_deterministic() {
    let a = build_model(3, 11, -3).unwrap();
    let b = build_model(3, 11, -3).unwrap();
    assert_eq!(a.dual_graph_dot(), b.dual_graph_dot());
    assert_eq!(a.dual_graph_json(), b.dual_graph_json());
    assert!(a.dual_graph_dot().starts_with("graph dual {"));
}

#[test]
fn rejects_unsupported_configurations() {
    assert_eq!(build_model(3, 3, -3).unwrap_err(), Error::SamePrime(3));
    assert!(matches!(build_model(5, 2, -4), Err(Error::SplitPlace(_))));
    assert!(matches!(build_model(3, 2, 5), Err(Error::NotImaginaryQuadratic(5))));
    assert!(build_model(3, 2, -12).is_err());
    // q split in K: K does not embed in B'
    assert!(build_model(3, 2, -7).is_err());
}
