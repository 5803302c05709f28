//! Finite model of the special fiber at a prime `p` where the quaternion
//! algebra ramifies, built from the definite algebra `B'` of discriminant `q`:
//!
//! * singular points: right ideal classes of the level-`p` Eichler order `E ⊂ O`,
//! * irreducible components: two parity copies of the classes of `O`,
//! * the singular point `[I]` lies on components `([I·O], 0)` and `([I·J₀], 1)`,
//!   where `J₀` is the right `O`-ideal of norm `p` whose left order is the other
//!   maximal order `O' ⊃ E`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::arith::{self, is_fundamental_discriminant, Splitting};
use crate::error::{invalid, Error, Result};
use crate::lattices::{maximal_order, right_ideal_classes, ClassSet, EichlerData, RightIdeal};
use crate::qalg::QuaternionAlgebra;
use crate::render;

#[derive(Clone, Debug)]
pub struct SpecialFiberModel {
    pub p: u64,
    pub q: u64,
    pub d_k: i64,
    pub singular: ClassSet,
    pub components: ClassSet,
    pub eichler: EichlerData,
    /// For each singular point: (component index in the parity-0 copy, in the parity-1 copy).
    pub edges: Vec<(usize, usize)>,
}

/// A probability measure with exact rational masses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedMeasure {
    pub labels: Vec<String>,
    pub masses: Vec<BigRational>,
}

impl WeightedMeasure {
    /// Masses proportional to the given positive rationals.
    pub fn proportional(labels: Vec<String>, raw: &[BigRational]) -> Result<Self> {
        if labels.len() != raw.len() || raw.is_empty() {
            return Err(invalid("measure needs one positive mass per label"));
        }
        let total: BigRational = raw.iter().fold(BigRational::zero(), |a, b| a + b);
        if total.is_zero() {
            return Err(invalid("total mass is zero"));
        }
        Ok(WeightedMeasure { labels, masses: raw.iter().map(|m| m / &total).collect() })
    }

    pub fn total(&self) -> BigRational {
        self.masses.iter().fold(BigRational::zero(), |a, b| a + b)
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Restriction to the indices in `keep`, renormalized.
    pub fn conditioned(&self, keep: &[usize]) -> Result<Self> {
        let labels = keep.iter().map(|&i| self.labels[i].clone()).collect();
        let raw: Vec<BigRational> = keep.iter().map(|&i| self.masses[i].clone()).collect();
        Self::proportional(labels, &raw)
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels,
            "masses": self.masses.iter().map(render::fraction).collect::<Vec<_>>(),
            "decimal": self.masses.iter().map(render::decimal).collect::<Vec<_>>(),
        })
    }
}

#[derive(Clone, Debug)]
pub struct Measures {
    pub ram: WeightedMeasure,
    pub ram_inv: WeightedMeasure,
    pub components: WeightedMeasure,
    pub components_inv: WeightedMeasure,
}

/// Checks the hypotheses shared by the model and the equidistribution harness.
pub fn validate(p: u64, q: u64, d_k: i64) -> Result<()> {
    if !arith::is_prime(p) || !arith::is_prime(q) {
        return Err(invalid(format!("p = {p} and q = {q} must be prime")));
    }
    if p == q {
        return Err(Error::SamePrime(p));
    }
    if d_k >= 0 {
        return Err(Error::NotImaginaryQuadratic(d_k));
    }
    if !is_fundamental_discriminant(d_k) {
        return Err(invalid(format!("{d_k} is not a fundamental discriminant")));
    }
    if Splitting::of(d_k, p) == Splitting::Split {
        return Err(Error::SplitPlace(format!("p = {p} splits in Q(sqrt({d_k}))")));
    }
    if Splitting::of(d_k, q) == Splitting::Split {
        return Err(invalid(format!("q = {q} splits in Q(sqrt({d_k})), so K does not embed in B'")));
    }
    Ok(())
}

pub fn build_model(p: u64, q: u64, d_k: i64) -> Result<SpecialFiberModel> {
    validate(p, q, d_k)?;
    let alg = QuaternionAlgebra::definite_of_prime_discriminant(q)?;
    let o = maximal_order(&alg)?;
    let eichler = o.eichler(p)?;
    let components = right_ideal_classes(&o)?;
    let singular = right_ideal_classes(&eichler.eichler)?;
    let a = o.algebra();
    let edges = singular
        .ideals()
        .iter()
        .map(|ideal| {
            let io = RightIdeal::from_lattice(&o, ideal.lattice().product(o.lattice(), a))?;
            let ij = RightIdeal::from_lattice(&o, ideal.lattice().product(&eichler.connector, a))?;
            Ok((components.class_of(&io), components.class_of(&ij)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpecialFiberModel { p, q, d_k, singular, components, eichler, edges })
}

impl SpecialFiberModel {
    pub fn num_components(&self) -> usize {
        2 * self.components.len()
    }

    /// Vertex index of component `c` in parity copy `parity`.
    pub fn vertex(&self, c: usize, parity: usize) -> usize {
        parity * self.components.len() + c
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_components()];
        for &(a, b) in &self.edges {
            deg[self.vertex(a, 0)] += 1;
            deg[self.vertex(b, 1)] += 1;
        }
        deg
    }

    pub fn is_connected(&self) -> bool {
        let n = self.num_components();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[self.vertex(a, 0)].push(self.vertex(b, 1));
            adj[self.vertex(b, 1)].push(self.vertex(a, 0));
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// `1 − V + E` (the graph is connected).
    pub fn betti_number(&self) -> i64 {
        1 - self.num_components() as i64 + self.edges.len() as i64
    }

    /// `M[k][l] = Σ_{edges i from (k,0) to (l,1)} w(c_k)/w(s_i)`; equals the Brandt matrix `B(p)`.
    pub fn weighted_incidence(&self) -> Vec<Vec<BigRational>> {
        let h = self.components.len();
        let mut m = vec![vec![BigRational::zero(); h]; h];
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            m[a][b] += BigRational::new(
                BigInt::from(self.components.weights()[a]),
                BigInt::from(self.singular.weights()[i]),
            );
        }
        m
    }

    /// Edge list `[[parity-0 component, parity-1 component, multiplicity]]`.
    pub fn edge_multiplicities(&self) -> Vec<[usize; 3]> {
        let mut map: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for &e in &self.edges {
            *map.entry(e).or_default() += 1;
        }
        map.into_iter().map(|((a, b), m)| [a, b, m]).collect()
    }

    pub fn component_labels(&self) -> Vec<String> {
        (0..2).flat_map(|par| (0..self.components.len()).map(move |c| format!("c{c}.{par}"))).collect()
    }

    pub fn singular_labels(&self) -> Vec<String> {
        (0..self.singular.len()).map(|i| format!("s{i}")).collect()
    }

    pub fn measures(&self) -> Measures {
        measures(self)
    }

    pub fn dual_graph_json(&self) -> serde_json::Value {
        let h = self.components.len();
        let vertices: Vec<serde_json::Value> = (0..2)
            .flat_map(|par| {
                (0..h).map(move |c| serde_json::json!({ "component": c, "parity": par }))
            })
            .collect();
        serde_json::json!({
            "vertices": vertices,
            "edges": self.edge_multiplicities(),
        })
    }

    pub fn dual_graph_dot(&self) -> String {
        let mut s = String::from("graph dual {\n");
        for (idx, label) in self.component_labels().iter().enumerate() {
            let c = idx % self.components.len();
            let _ = writeln!(s, "  \"{label}\" [label=\"{label} w={}\"];", self.components.weights()[c]);
        }
        for (i, &(a, b)) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "  \"c{a}.0\" -- \"c{b}.1\" [label=\"s{i} w={}\"];",
                self.singular.weights()[i]
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn summary(&self) -> ModelSummary {
        ModelSummary {
            p: self.p,
            q: self.q,
            d_k: self.d_k,
            splitting_at_p: Splitting::of(self.d_k, self.p),
            singular_weights: self.singular.weights().to_vec(),
            component_weights: self.components.weights().to_vec(),
            edges: self.edge_multiplicities(),
            betti_number: self.betti_number(),
            connected: self.is_connected(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModelSummary {
    pub p: u64,
    pub q: u64,
    pub d_k: i64,
    pub splitting_at_p: Splitting,
    pub singular_weights: Vec<u64>,
    pub component_weights: Vec<u64>,
    pub edges: Vec<[usize; 3]>,
    pub betti_number: i64,
    pub connected: bool,
}

fn weights_as(ws: &[u64], inverse: bool) -> Vec<BigRational> {
    ws.iter()
        .map(|&w| {
            let w = BigRational::from_integer(BigInt::from(w));
            if inverse {
                BigRational::one() / w
            } else {
                w
            }
        })
        .collect()
}

/// `μ_ram ∝ w(s_i)`, its inverse-weight variant, and the same pair on components.
pub fn measures(model: &SpecialFiberModel) -> Measures {
    let sw = model.singular.weights();
    let cw: Vec<u64> = model.components.weights().iter().chain(model.components.weights()).copied().collect();
    let sl = model.singular_labels();
    let cl = model.component_labels();
    Measures {
        ram: WeightedMeasure::proportional(sl.clone(), &weights_as(sw, false)).unwrap(),
        ram_inv: WeightedMeasure::proportional(sl, &weights_as(sw, true)).unwrap(),
        components: WeightedMeasure::proportional(cl.clone(), &weights_as(&cw, false)).unwrap(),
        components_inv: WeightedMeasure::proportional(cl, &weights_as(&cw, true)).unwrap(),
    }
}
