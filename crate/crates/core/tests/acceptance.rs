//! Acceptance criteria 1-8. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::{HashMap, HashSet, VecDeque};
use std::io::Write;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cmlab_core::arith::{is_fundamental_discriminant, Splitting};
use cmlab_core::cmfields::{class_number, ImagQuadOrder};
use cmlab_core::embeddings::gross_point_counts;
use cmlab_core::equidist::{run_experiment, EquidistReport, ExperimentConfig, Target, Verdict};
use cmlab_core::lattices::{brandt_matrix, eichler_order, maximal_order, right_ideal_classes, ClassSet, Order};
use cmlab_core::localmod::{ball, bt_distance, bt_neighbors, cm_reduction_bimodule, BTVertex, LocalQuatOrder, RamifiedChoice};
use cmlab_core::qalg::QuaternionAlgebra;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn maximal(q: u64) -> Order {
    maximal_order(&QuaternionAlgebra::definite_of_prime_discriminant(q).unwrap()).unwrap()
}

fn classes(q: u64, level: u64) -> ClassSet {
    let o = maximal(q);
    right_ideal_classes(&if level == 1 { o } else { eichler_order(&o, level).unwrap() }).unwrap()
}

fn rat(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn mass_formula() -> Outcome {
    let start = Instant::now();
    for q in [2, 3, 5, 7, 11, 13] {
        let m = classes(q, 1).mass();
        ensure(m == rat(q - 1, 12), || format!("q = {q}: mass {m}"))?;
    }
    for (q, p) in [(2, 3), (2, 5), (3, 5), (11, 2)] {
        let m = classes(q, p).mass();
        ensure(m == rat((q - 1) * (p + 1), 12), || format!("(q, p) = ({q}, {p}): mass {m}"))?;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {t:?}"))?;
    Ok(format!("exact masses for 10 class sets in {t:.2?}"))
}

fn brandt_structure() -> Outcome {
    let cs = classes(11, 1);
    let w = cs.weights();
    let b = |n| brandt_matrix(&cs, n).unwrap();
    for l in [2u64, 3, 5, 7] {
        let m = b(l);
        for (i, row) in m.iter().enumerate() {
            ensure(row.iter().sum::<u64>() == l + 1, || format!("B({l}) row {i} = {row:?}"))?;
            for j in 0..m.len() {
                ensure(w[j] * m[i][j] == w[i] * m[j][i], || format!("B({l}) not weight-symmetric at ({i},{j})"))?;
            }
        }
    }
    let prod = cmlab_core::lattices::brandt::mat_mul(&b(2), &b(3));
    ensure(prod == b(6), || format!("B(2)B(3) = {prod:?} but B(6) = {:?}", b(6)))?;
    Ok(format!("disc 11 weights {w:?}, B(2) = {:?}", b(2)))
}

/// Reduced forms `(a, b, c)` found by scanning `c` for each `(a, b)`.
fn reduced_form_count(d: i64) -> u64 {
    let n = -d;
    let mut h = 0;
    let mut a = 1;
    while 3 * a * a <= n {
        for b in -a + 1..=a {
            let mut c = a;
            while b * b - 4 * a * c > d {
                c += 1;
            }
            if b * b - 4 * a * c == d && !(c == a && b < 0) && gcd(gcd(a, b.abs()), c) == 1 {
                h += 1;
            }
        }
        a += 1;
    }
    h
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn class_number_oracle() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for n in 3..=10_000i64 {
        let d = -n;
        if d.rem_euclid(4) > 1 {
            continue;
        }
        let h = class_number(d);
        let o = reduced_form_count(d);
        ensure(h == o, || format!("D = {d}: {h} vs oracle {o}"))?;
        checked += 1;
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("{checked} discriminants agree in {t:.2?}"))
}

fn embedding_dichotomy() -> Outcome {
    let q = 2;
    let mut summary = Vec::new();
    for p in [3u64, 5, 7] {
        let cs = classes(q, p);
        // K must embed in B', so 2 must not split; sample K with p inert or ramified
        let mut inert = Vec::new();
        let mut ramified = Vec::new();
        let mut d = -3i64;
        while inert.len() < 20 || ramified.len() < 20 {
            if is_fundamental_discriminant(d) && Splitting::of(d, q) != Splitting::Split {
                match Splitting::of(d, p) {
                    Splitting::Inert if inert.len() < 20 => inert.push(d),
                    Splitting::Ramified if ramified.len() < 20 => ramified.push(d),
                    _ => {}
                }
            }
            d -= 1;
        }
        for &dk in &inert {
            let total = gross_point_counts(&cs, &ImagQuadOrder::new(dk, 1).unwrap()).unwrap().total;
            ensure(total == 0, || format!("p = {p} inert in {dk}: {total} embeddings"))?;
        }
        for (i, &dk) in ramified.iter().enumerate() {
            let c = [1, 1, 3, 5, 7, 11][i % 6];
            let c = if c % p == 0 { 1 } else { c };
            let cm = ImagQuadOrder::new(dk, c).unwrap();
            let total = gross_point_counts(&cs, &cm).unwrap().total;
            ensure(total == cm.class_number(), || {
                format!("p = {p} ramified in {dk}, c = {c}: {total} vs h = {}", cm.class_number())
            })?;
        }
        summary.push(format!("p={p}: 20 inert, 20 ramified"));
    }
    Ok(summary.join("; "))
}

fn cm_bimodule_type() -> Outcome {
    for p in [3, 5, 7, 13] {
        for k in [4, 6] {
            for c in [RamifiedChoice::SqrtP, RamifiedChoice::SqrtPU] {
                let m = cm_reduction_bimodule(&LocalQuatOrder::new(p, k).unwrap(), c).unwrap();
                ensure(m.rank() == 8, || format!("rank {}", m.rank()))?;
                ensure(m.is_admissible(), || format!("p={p} k={k} {c:?} not admissible"))?;
                let t = m.bimodule_type().map_err(|e| e.to_string())?;
                ensure(t == (1, 1), || format!("p={p} k={k} {c:?}: type {t:?}"))?;
            }
        }
    }
    Ok("admissible of type (1,1) for p in {3,5,7,13}, both choices, k in {4,6}".into())
}

fn tree_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for p in [2u64, 3, 5] {
        let root = BTVertex::root(p).unwrap();
        let verts: Vec<BTVertex> = ball(&root, 4).into_iter().map(|(v, _)| v).collect();
        let adj: HashMap<BTVertex, Vec<BTVertex>> = verts.iter().map(|v| (*v, bt_neighbors(v))).collect();
        for (v, nb) in &adj {
            let distinct: HashSet<_> = nb.iter().collect();
            ensure(distinct.len() as u64 == p + 1, || format!("p={p}: degree {} at {v:?}", distinct.len()))?;
        }
        for _ in 0..200 {
            let a = verts[rng.gen_range(0..verts.len())];
            let b = verts[rng.gen_range(0..verts.len())];
            let mut dist = HashMap::from([(a, 0u64)]);
            let mut queue = VecDeque::from([a]);
            while let Some(v) = queue.pop_front() {
                for w in &adj[&v] {
                    if adj.contains_key(w) && !dist.contains_key(w) {
                        dist.insert(*w, dist[&v] + 1);
                        queue.push_back(*w);
                    }
                }
            }
            let got = bt_distance(&a, &b).unwrap();
            ensure(got == dist[&b], || format!("p={p}: d({a:?},{b:?}) = {got}, BFS {}", dist[&b]))?;
        }
    }
    Ok("degree p+1 on radius-4 balls, 600 random distances match BFS".into())
}

fn equidist_configs() -> Vec<ExperimentConfig> {
    let c = |p, q, d_k, n_max| ExperimentConfig { p, q, d_k, c0: 1, n_max, target: Target::Singular };
    vec![c(3, 2, -3, 6), c(5, 2, -20, 4), c(3, 11, -3, 6), c(5, 11, -20, 4), c(7, 3, -7, 4)]
}

fn describe(r: &EquidistReport) -> String {
    let c = r.config;
    let tv = r.best_tv(c.n_max).map(|t| cmlab_core::render::decimal(&t)).unwrap_or_default();
    format!("(p={}, q={}, dK={}) {} classes, winner {:?}, TV(n={}) = {tv}", c.p, c.q, c.d_k, r.labels.len(), r.verdict, c.n_max)
}

fn equidistribution(reports: &[EquidistReport]) -> Outcome {
    let tenth = rat(1, 10);
    let mut lines = Vec::new();
    for r in reports {
        let c = r.config;
        ensure(r.verdict != Verdict::NoData, || format!("{c:?}: no data"))?;
        let last = r.best_tv(c.n_max).unwrap();
        let first = r.best_tv(1).unwrap();
        ensure(last <= tenth, || format!("{}: TV above 1/10", describe(r)))?;
        ensure(last <= first, || format!("{}: TV grew from n = 1", describe(r)))?;
        lines.push(describe(r));
    }
    Ok(lines.join("; "))
}

fn conservation(reports: &[EquidistReport]) -> Outcome {
    let mut levels = 0;
    for r in reports {
        for row in &r.rows {
            ensure(row.total == row.class_number, || {
                format!("{:?} n={}: sum {} vs h {}", r.config, row.n, row.total, row.class_number)
            })?;
            levels += 1;
        }
    }
    Ok(format!("sum of m_i = h(O_c) at all {levels} levels"))
}

fn run(n: usize, name: &str, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
        Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let t = start.elapsed();
    let mut out = std::io::stdout();
    let ok = outcome.is_ok();
    let (tag, msg) = match outcome {
        Ok(m) => ("PASS", m),
        Err(m) => ("FAIL", m),
    };
    let _ = writeln!(out, "criterion {n} [{tag}] {name} ({t:.2?}): {msg}");
    ok
}

fn main() {
    let mut ok = true;
    ok &= run(1, "mass formula", mass_formula);
    ok &= run(2, "Brandt structure", brandt_structure);
    ok &= run(3, "class-number oracle", class_number_oracle);
    ok &= run(4, "embedding dichotomy", embedding_dichotomy);
    ok &= run(5, "CM-reduction bimodule", cm_bimodule_type);
    ok &= run(6, "tree properties", tree_properties);
    let start = Instant::now();
    let reports: Result<Vec<_>, _> = equidist_configs().iter().map(run_experiment).collect();
    let elapsed = start.elapsed();
    match reports {
        Ok(reports) => {
            ok &= run(7, "equidistribution evidence", || {
                ensure(elapsed < Duration::from_secs(600), || format!("runs took {elapsed:?}"))?;
                equidistribution(&reports)
            });
            ok &= run(8, "fiber-count conservation", || conservation(&reports));
        }
        Err(e) => {
            ok &= run(7, "equidistribution evidence", || Err(e.to_string()));
            ok &= run(8, "fiber-count conservation", || Err(e.to_string()));
        }
    }
    if !ok {
        std::process::exit(1);
    }
}
