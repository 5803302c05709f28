use std::collections::{HashMap, HashSet, VecDeque};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmlab_core::localmod::zpk;
use cmlab_core::localmod::{
    ball, bt_distance, bt_neighbors, cm_reduction_bimodule, regular, tensor_over_unramified, uniformizer_ideal,
    BTVertex, LocalBimodule, LocalQuatOrder, RamifiedChoice,
};

/// Index-`p` sublattices `{ax + by ≡ 0 mod p}` of `ℤ_p²`, one per `(a : b) ∈ P¹(F_p)`,
/// written as spans of `(pⁿ, 0), (u, 1)` up to homothety.
fn sublattices_of_root(p: u64) -> HashSet<BTVertex> {
    let pi = p as i128;
    let mut out = HashSet::new();
    for b in 0..pi {
        // a = 1: contains (p, 0) and (−b, 1)
        out.insert(BTVertex::new(p, 1, (-b).rem_euclid(pi), 0));
    }
    // (a : b) = (0 : 1): {y ≡ 0} = span((1, 0), (0, p)) ~ span((1/p, 0), (0, 1))
    out.insert(BTVertex::new(p, -1, 0, 0));
    out
}

#[test]
fn root_neighbors_are_the_index_p_sublattices() {
    for p in [2, 3, 5, 7] {
        let root = BTVertex::root(p).unwrap();
        let nb: HashSet<BTVertex> = bt_neighbors(&root).into_iter().collect();
        assert_eq!(nb.len() as u64, p + 1);
        assert_eq!(nb, sublattices_of_root(p));
    }
}

fn bfs_distances(adj: &HashMap<BTVertex, Vec<BTVertex>>, from: BTVertex) -> HashMap<BTVertex, u64> {
    let mut dist = HashMap::from([(from, 0)]);
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        for w in &adj[&v] {
            if adj.contains_key(w) && !dist.contains_key(w) {
                dist.insert(*w, dist[&v] + 1);
                queue.push_back(*w);
            }
        }
    }
    dist
}

#[test]
fn ball_is_a_tree_with_correct_degrees() {
    for p in [2, 3, 5] {
        let root = BTVertex::root(p).unwrap();
        let verts = ball(&root, 4);
        let set: HashSet<BTVertex> = verts.iter().map(|(v, _)| *v).collect();
        let mut edges = 0;
        for (v, _) in &verts {
            let nb = bt_neighbors(v);
            let distinct: HashSet<_> = nb.iter().collect();
            assert_eq!(distinct.len() as u64, p + 1);
            for w in &nb {
                assert!(bt_neighbors(w).contains(v), "symmetry");
                if set.contains(w) {
                    edges += 1;
                }
            }
        }
        // acyclic and connected: E = V − 1
        assert_eq!(edges / 2, verts.len() - 1);
    }
}

#[test]
fn distance_matches_breadth_first_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for p in [2, 3, 5] {
        let root = BTVertex::root(p).unwrap();
        let verts: Vec<BTVertex> = ball(&root, 4).into_iter().map(|(v, _)| v).collect();
        let adj: HashMap<BTVertex, Vec<BTVertex>> = verts.iter().map(|v| (*v, bt_neighbors(v))).collect();
        for _ in 0..200 {
            let a = verts[rng.gen_range(0..verts.len())];
            let b = verts[rng.gen_range(0..verts.len())];
            assert_eq!(bt_distance(&a, &b).unwrap(), bfs_distances(&adj, a)[&b]);
        }
    }
}

#[test]
fn distance_is_additive_along_geodesics() {
    let root = BTVertex::root(3).unwrap();
    let verts: Vec<BTVertex> = ball(&root, 3).into_iter().map(|(v, _)| v).collect();
    for a in verts.iter().step_by(3) {
        for b in verts.iter().step_by(5) {
            for w in &verts {
                let (ab, aw, wb) = (bt_distance(a, b).unwrap(), bt_distance(a, w).unwrap(), bt_distance(w, b).unwrap());
                assert!(aw + wb >= ab);
                if aw + wb == ab {
                    // w on the geodesic: its neighbor towards b is one step closer to b
                    if w != b {
                        assert!(bt_neighbors(w).iter().any(|x| bt_distance(x, b).unwrap() + 1 == wb));
                    }
                }
            }
        }
    }
}

#[test]
fn local_order_relations() {
    for p in [3, 5, 7, 13] {
        for k in [2, 4, 6] {
            let o = LocalQuatOrder::new(p, k).unwrap();
            let pi = LocalQuatOrder::pi();
            assert_eq!(o.mul(&pi, &pi), o.scalar(p as i128));
            let z = LocalQuatOrder::zeta();
            assert_eq!(o.mul(&pi, &z), o.mul(&o.pi_conjugate(&z), &pi));
        }
    }
}

#[test]
fn classification_of_basic_bimodules() {
    let o = LocalQuatOrder::new(5, 4).unwrap();
    let reg = regular(&o);
    let b = uniformizer_ideal(&o);
    assert!(reg.is_admissible());
    assert!(b.direct_sum(&b).is_admissible());
    assert_eq!(reg.direct_sum(&reg).bimodule_type().unwrap(), (2, 0));
    assert_eq!(b.direct_sum(&b).bimodule_type().unwrap(), (0, 2));
    assert_eq!(reg.direct_sum(&b).bimodule_type().unwrap(), (1, 1));
    assert!(!tensor_over_unramified(&o).is_admissible());
}

#[test]
fn precision_stability() {
    for p in [3, 5, 7] {
        for k in 2..=5 {
            for c in [RamifiedChoice::SqrtP, RamifiedChoice::SqrtPU] {
                let lo = cm_reduction_bimodule(&LocalQuatOrder::new(p, k).unwrap(), c).unwrap();
                let hi = cm_reduction_bimodule(&LocalQuatOrder::new(p, k + 2).unwrap(), c).unwrap();
                assert_eq!(lo.report(), hi.report());
            }
        }
    }
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize, m: i128) -> zpk::Mat {
    loop {
        let a: zpk::Mat = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0..m)).collect()).collect();
        if zpk::inverse(&a, m).is_some() {
            return a;
        }
    }
}

fn samples(o: &LocalQuatOrder) -> Vec<LocalBimodule> {
    let reg = regular(o);
    let b = uniformizer_ideal(o);
    vec![
        reg.direct_sum(&reg),
        b.direct_sum(&b),
        reg.direct_sum(&b),
        cm_reduction_bimodule(o, RamifiedChoice::SqrtP).unwrap(),
        cm_reduction_bimodule(o, RamifiedChoice::SqrtPU).unwrap(),
        tensor_over_unramified(o),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn type_is_invariant_under_change_of_basis(seed in any::<u64>(), pi in 0usize..3) {
        let p = [3u64, 5, 7][pi];
        let o = LocalQuatOrder::new(p, 4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for m in samples(&o) {
            let change = random_invertible(&mut rng, 8, o.modulus());
            let moved = m.change_basis(&change).unwrap();
            moved.validate().unwrap();
            prop_assert_eq!(moved.report(), m.report());
            if let Ok((r, s)) = moved.bimodule_type() {
                prop_assert_eq!(r + s, 2);
            }
        }
    }

    #[test]
    fn neighbors_are_symmetric(n in -3i32..4, u in 0i128..1000, s in 0u32..3, pi in 0usize..3) {
        let p = [2u64, 3, 5][pi];
        let v = BTVertex::new(p, n, u, s);
        for w in bt_neighbors(&v) {
            prop_assert!(bt_neighbors(&w).contains(&v));
            prop_assert_eq!(bt_distance(&v, &w).unwrap(), 1);
        }
    }
}
