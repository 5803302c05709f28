//! The Bruhat–Tits tree of `PGL₂(ℚ_p)` and its identification with the dual graph
//! of the special fiber (vertices are components, edges are singular points).
//!
//! A vertex `(n, u)` is the homothety class of the lattice spanned by the columns of
//! `[[pⁿ, u], [0, 1]]`, with `n ∈ ℤ` and `u ∈ ℤ[1/p]` taken mod `pⁿ`. Here `u = U/pˢ`.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::arith::is_prime;
use crate::error::{invalid, Error, Result};

pub const MAX_PATCH_RADIUS: u32 = 6;
pub const MAX_PATCH_VERTICES: u64 = 2_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BTVertex {
    pub p: u64,
    pub n: i32,
    /// Numerator `U` of `u = U/pˢ`, with `0 ≤ U < p^(n+s)`.
    pub u: i128,
    pub s: u32,
}

fn pw(p: u64, e: i64) -> i128 {
    (p as i128).checked_pow(e as u32).expect("tree coordinates overflow")
}

impl BTVertex {
    /// The standard lattice `ℤ_p²`.
    pub fn root(p: u64) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        Ok(BTVertex { p, n: 0, u: 0, s: 0 })
    }

    /// Canonical vertex for `(n, U/pˢ)`.
    pub fn new(p: u64, n: i32, u: i128, s: u32) -> Self {
        let top = n as i64 + s as i64;
        let (mut u, mut s) = if top < 0 { (0, 0) } else { (u.rem_euclid(pw(p, top)), s) };
        while s > 0 && u % p as i128 == 0 {
            u /= p as i128;
            s -= 1;
        }
        if u == 0 {
            s = 0;
        }
        BTVertex { p, n, u, s }
    }

    pub fn neighbors(&self) -> Vec<BTVertex> {
        bt_neighbors(self)
    }
}

/// The `p + 1` lattice classes adjacent to `v`.
pub fn bt_neighbors(v: &BTVertex) -> Vec<BTVertex> {
    let p = v.p;
    let mut out: Vec<BTVertex> = if v.n + v.s as i32 >= 0 {
        let step = pw(p, v.n as i64 + v.s as i64);
        (0..p as i128).map(|t| BTVertex::new(p, v.n + 1, v.u + t * step, v.s)).collect()
    } else {
        // pⁿ is not integral relative to the denominator: widen it first
        let extra = (-(v.n + v.s as i32)) as u32;
        let s = v.s + extra;
        (0..p as i128).map(|t| BTVertex::new(p, v.n + 1, v.u * pw(p, extra as i64) + t, s)).collect()
    };
    out.push(BTVertex::new(p, v.n - 1, v.u, v.s));
    out
}

/// `v_p` of `U/pˢ`, `None` for zero.
fn val(p: u64, u: i128, s: u32) -> Option<i64> {
    if u == 0 {
        return None;
    }
    let mut u = u;
    let mut v = 0i64;
    while u % p as i128 == 0 {
        u /= p as i128;
        v += 1;
    }
    Some(v - s as i64)
}

/// Tree distance from the elementary divisors of `[[p^(m−n), (u'−u)/pⁿ], [0, 1]]`.
pub fn bt_distance(v: &BTVertex, w: &BTVertex) -> Result<u64> {
    if v.p != w.p {
        return Err(Error::MismatchedSupport(format!("vertices over p = {} and p = {}", v.p, w.p)));
    }
    let p = v.p;
    let s = v.s.max(w.s);
    let diff = w.u * pw(p, (s - w.s) as i64) - v.u * pw(p, (s - v.s) as i64);
    let dn = (w.n - v.n) as i64;
    let mut a = dn.min(0);
    if let Some(vd) = val(p, diff, s) {
        a = a.min(vd - v.n as i64);
    }
    Ok((dn - 2 * a) as u64)
}

/// Ball of radius `r` around `center` in BFS order, with distances.
pub fn ball(center: &BTVertex, radius: u32) -> Vec<(BTVertex, u32)> {
    let mut seen = HashMap::new();
    let mut order = Vec::new();
    let mut queue = VecDeque::from([(*center, 0)]);
    seen.insert(*center, 0);
    while let Some((v, d)) = queue.pop_front() {
        order.push((v, d));
        if d == radius {
            continue;
        }
        for w in bt_neighbors(&v) {
            if !seen.contains_key(&w) {
                seen.insert(w, d + 1);
                queue.push_back((w, d + 1));
            }
        }
    }
    order
}

/// `1 + (p+1)(p^r − 1)/(p − 1)`.
pub fn ball_size(p: u64, radius: u32) -> Option<u64> {
    let pr = p.checked_pow(radius)?;
    Some(1 + (p + 1).checked_mul((pr - 1) / (p - 1))?)
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchVertex {
    pub vertex: BTVertex,
    pub label: String,
    pub depth: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct PatchEdge {
    pub ends: [usize; 2],
    pub label: String,
}

/// A ball in the tree read as a piece of the dual graph of the special fiber.
#[derive(Clone, Debug, Serialize)]
pub struct DualGraphPatch {
    pub p: u64,
    pub radius: u32,
    pub vertices: Vec<PatchVertex>,
    pub edges: Vec<PatchEdge>,
}

/// Size guard for [`dual_graph_patch`].
pub fn check_patch(p: u64, radius: u32) -> Result<()> {
    BTVertex::root(p)?;
    if radius > MAX_PATCH_RADIUS {
        return Err(Error::TooLarge(format!("radius {radius} exceeds {MAX_PATCH_RADIUS}")));
    }
    if ball_size(p, radius).is_none_or(|n| n > MAX_PATCH_VERTICES) {
        return Err(Error::TooLarge(format!("ball of radius {radius} for p = {p}")));
    }
    Ok(())
}

pub fn dual_graph_patch(p: u64, radius: u32) -> Result<DualGraphPatch> {
    check_patch(p, radius)?;
    let root = BTVertex::root(p)?;
    let verts = ball(&root, radius);
    let index: HashMap<BTVertex, usize> = verts.iter().enumerate().map(|(i, (v, _))| (*v, i)).collect();
    let mut edges = Vec::new();
    for (i, (v, d)) in verts.iter().enumerate() {
        if *d == 0 {
            continue;
        }
        let parent = bt_neighbors(v)
            .into_iter()
            .filter_map(|w| index.get(&w).copied())
            .find(|&j| verts[j].1 + 1 == *d)
            .expect("BFS parent");
        edges.push(PatchEdge { ends: [parent, i], label: format!("singular point {}", edges.len()) });
    }
    let vertices = verts
        .into_iter()
        .enumerate()
        .map(|(i, (vertex, depth))| PatchVertex { vertex, label: format!("component {i}"), depth })
        .collect();
    Ok(DualGraphPatch { p, radius, vertices, edges })
}

impl DualGraphPatch {
    pub fn to_dot(&self) -> String {
        let mut s = format!("graph bt_p{}_r{} {{\n", self.p, self.radius);
        for (i, v) in self.vertices.iter().enumerate() {
            let u = if v.vertex.s == 0 {
                v.vertex.u.to_string()
            } else {
                format!("{}/{}^{}", v.vertex.u, self.p, v.vertex.s)
            };
            let _ = writeln!(s, "  v{i} [label=\"{} (n={}, u={u})\"];", v.label, v.vertex.n);
        }
        for e in &self.edges {
            let _ = writeln!(s, "  v{} -- v{} [label=\"{}\"];", e.ends[0], e.ends[1], e.label);
        }
        s.push_str("}\n");
        s
    }
}
