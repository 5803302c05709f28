//! Brute-force local embedding numbers: optimal embeddings of `O_D ⊗ ℤ_ℓ` into
//! `R ⊗ ℤ_ℓ` modulo conjugation by `(R ⊗ ℤ_ℓ)^×`, computed on residues mod `ℓ^k`.

use std::collections::HashMap;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::int_coords;
use crate::arith::mod_inv;
use crate::cmfields::ImagQuadOrder;
use crate::error::{Error, Result};
use crate::lattices::Order;
use crate::qalg::QuatElement;

const MAX_CANDIDATES: i128 = 20_000_000;

struct Ring {
    m: i128,
    l: i128,
    table: [[[i128; 4]; 4]; 4],
    one: [i128; 4],
    trace: [i128; 4],
    gram: [[i128; 4]; 4],
}

impl Ring {
    fn mul(&self, x: &[i128; 4], y: &[i128; 4]) -> [i128; 4] {
        let mut out = [0i128; 4];
        for a in 0..4 {
            if x[a] == 0 {
                continue;
            }
            for b in 0..4 {
                if y[b] == 0 {
                    continue;
                }
                let s = x[a] * y[b] % self.m;
                for c in 0..4 {
                    out[c] = (out[c] + s * self.table[a][b][c]) % self.m;
                }
            }
        }
        out.map(|v| v.rem_euclid(self.m))
    }

    fn tr(&self, x: &[i128; 4]) -> i128 {
        (0..4).map(|a| x[a] * self.trace[a]).sum::<i128>().rem_euclid(self.m)
    }

    fn nr(&self, x: &[i128; 4]) -> i128 {
        let mut s = 0i128;
        for a in 0..4 {
            for b in 0..4 {
                s += x[a] * x[b] % self.m * self.gram[a][b];
            }
        }
        // the trace form is even on the diagonal, so halving is exact before reduction
        (s / 2).rem_euclid(self.m)
    }

    fn conj(&self, x: &[i128; 4]) -> [i128; 4] {
        let t = self.tr(x);
        std::array::from_fn(|a| (t * self.one[a] - x[a]).rem_euclid(self.m))
    }

    fn conjugate_by(&self, u: &[i128; 4], x: &[i128; 4]) -> [i128; 4] {
        let inv_n = mod_inv(self.nr(u), self.m).expect("unit");
        let y = self.mul(&self.mul(u, x), &self.conj(u));
        y.map(|v| v * inv_n % self.m)
    }

    fn optimal(&self, x: &[i128; 4]) -> bool {
        // 1 and x independent mod ℓ
        (0..4).any(|a| (a + 1..4).any(|b| (self.one[a] * x[b] - self.one[b] * x[a]).rem_euclid(self.l) != 0))
    }
}

/// Whether the residue `x mod ℓ^k` is the reduction of an exact `ℓ`-adic solution.
///
/// Works on the affine plane `tr = δ`, parametrized by the non-pivot coordinates, and
/// searches lifts depth-first until the multivariate Newton condition
/// `v(f) ≥ max(k + v(∇f), 2v(∇f) + 1)` certifies a root congruent to `x` mod `ℓ^k`.
fn liftable(ring: &Ring, pivot: usize, x: &[i128; 4], delta: i128, d: i128, k: u32) -> Result<bool> {
    let l = ring.l;
    let vd = crate::arith::valuation(d, l as u64);
    let kmax = k + 2 * vd + 8;
    let big = l
        .checked_pow(kmax)
        .filter(|m| *m < (1i128 << 40))
        .ok_or_else(|| Error::TooLarge(format!("{l}^{kmax} lifting precision")))?;
    let inv = mod_inv(ring.trace[pivot].rem_euclid(big), big).expect("unit trace");
    let norm = (delta * delta - d) / 4;
    let point = |y: &[i128; 4]| -> [i128; 4] {
        let mut x = *y;
        let rest: i128 = (0..4).filter(|&a| a != pivot).map(|a| y[a] * ring.trace[a]).sum();
        x[pivot] = (delta - rest).rem_euclid(big) * inv % big;
        x
    };
    let val = |n: i128| -> u32 {
        if n.rem_euclid(big) == 0 {
            kmax
        } else {
            crate::arith::valuation(n.rem_euclid(big), l as u64)
        }
    };
    let exact_nr = |x: &[i128; 4]| -> i128 {
        let mut s = 0i128;
        for a in 0..4 {
            for b in 0..4 {
                s += x[a] * x[b] * ring.gram[a][b];
            }
        }
        s / 2
    };
    let dirs: Vec<[i128; 4]> = (0..4)
        .filter(|&a| a != pivot)
        .map(|a| {
            let mut z = [0i128; 4];
            z[a] = 1;
            z[pivot] = (-ring.trace[a]).rem_euclid(big) * inv % big;
            z
        })
        .collect();
    let grad_val = |x: &[i128; 4]| -> u32 {
        dirs.iter()
            .map(|z| {
                let mut t = 0i128;
                for a in 0..4 {
                    for b in 0..4 {
                        t += x[a] * z[b] % big * ring.gram[a][b];
                    }
                }
                val(t)
            })
            .min()
            .unwrap()
    };
    fn dfs(
        y: [i128; 4],
        j: u32,
        ctx: &dyn Fn(&[i128; 4]) -> (u32, u32),
        pivot: usize,
        l: i128,
        k: u32,
        kmax: u32,
    ) -> bool {
        let (vf, vg) = ctx(&y);
        if vf >= (k + vg).max(2 * vg + 1) && (k + vg).max(2 * vg + 1) < kmax {
            return true;
        }
        if j + 1 >= kmax {
            return false;
        }
        let lj = l.pow(j);
        let free: Vec<usize> = (0..4).filter(|&a| a != pivot).collect();
        for n in 0..l.pow(3) {
            let mut y2 = y;
            let mut r = n;
            for &a in &free {
                y2[a] += (r % l) * lj;
                r /= l;
            }
            let (vf2, _) = ctx(&y2);
            if vf2 > j && dfs(y2, j + 1, ctx, pivot, l, k, kmax) {
                return true;
            }
        }
        false
    }
    let ctx = |y: &[i128; 4]| -> (u32, u32) {
        let x = point(y);
        (val(exact_nr(&x) - norm), grad_val(&x))
    };
    let mut y = *x;
    y[pivot] = 0;
    Ok(dfs(y, k, &ctx, pivot, l, k, kmax))
}

/// Number of `(R ⊗ ℤ_ℓ)^×`-conjugacy classes of optimal embeddings `O_D ⊗ ℤ_ℓ → R ⊗ ℤ_ℓ`,
/// computed from orbits on solutions modulo `ℓ^k`.
pub fn local_embedding_number(order: &Order, cm: &ImagQuadOrder, l: u64, k: u32, seed: u64) -> Result<u64> {
    let li = l as i128;
    let m = li.pow(k);
    let raw = order.mult_table();
    let g = order.trace_gram();
    let ring = Ring {
        m,
        l: li,
        table: raw.map(|a| a.map(|b| b.map(|v| v.rem_euclid(m)))),
        one: int_coords(order.lattice(), &QuatElement::one()),
        trace: std::array::from_fn(|a| order.basis()[a].tr().to_integer().to_i128().unwrap()),
        gram: std::array::from_fn(|a| std::array::from_fn(|b| g[a][b] as i128)),
    };
    let d = cm.discriminant() as i128;
    let delta = d.rem_euclid(2);
    let norm = ((delta * delta - d) / 4).rem_euclid(m);

    // Solve the trace condition for one coordinate with a unit trace coefficient, if any.
    let pivot = (0..4).find(|&a| ring.trace[a].rem_euclid(li) != 0);
    let free = if pivot.is_some() { 3 } else { 4 };
    if m.checked_pow(free).is_none_or(|c| c > MAX_CANDIDATES) {
        return Err(Error::TooLarge(format!("{l}^{k} local search")));
    }
    let mut sols: Vec<[i128; 4]> = Vec::new();
    let total = m.pow(free);
    for n in 0..total {
        let mut x = [0i128; 4];
        let mut r = n;
        for a in 0..4 {
            if Some(a) == pivot {
                continue;
            }
            x[a] = r % m;
            r /= m;
        }
        if let Some(p) = pivot {
            let rest: i128 = (0..4).filter(|&a| a != p).map(|a| x[a] * ring.trace[a]).sum();
            let inv = mod_inv(ring.trace[p].rem_euclid(m), m).unwrap();
            x[p] = (delta - rest).rem_euclid(m) * inv % m;
        } else if ring.tr(&x) != delta.rem_euclid(m) {
            continue;
        }
        if ring.nr(&x) == norm && ring.optimal(&x) {
            sols.push(x);
        }
    }
    if sols.is_empty() {
        return Ok(0);
    }
    let index: HashMap<[i128; 4], usize> = sols.iter().enumerate().map(|(i, x)| (*x, i)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gens: Vec<[i128; 4]> = Vec::new();
    while gens.len() < 24 {
        let u: [i128; 4] = std::array::from_fn(|_| rng.gen_range(0..m));
        if ring.nr(&u).rem_euclid(li) != 0 {
            gens.push(u);
        }
    }
    for a in 0..4 {
        let mut u = ring.one;
        u[a] += li;
        gens.push(u.map(|v| v.rem_euclid(m)));
    }

    let mut parent: Vec<usize> = (0..sols.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for u in &gens {
        for (i, x) in sols.iter().enumerate() {
            let y = ring.conjugate_by(u, x);
            let j = *index.get(&y).expect("conjugation preserves the solution set");
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            if a != b {
                parent[a] = b;
            }
        }
    }
    let p = pivot.ok_or_else(|| Error::InvalidInput(format!("no element of unit trace at {l}")))?;
    let mut roots = 0;
    for i in 0..sols.len() {
        if find(&mut parent, i) == i && liftable(&ring, p, &sols[i], delta, d, k)? {
            roots += 1;
        }
    }
    Ok(roots)
}
