//! Dense linear algebra over `ℤ/p^k`.

use crate::arith::mod_inv;

pub type Mat = Vec<Vec<i128>>;

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![0; c]; r]
}

pub fn mul(a: &Mat, b: &Mat, m: i128) -> Mat {
    let (r, n, c) = (a.len(), b.len(), b.first().map_or(0, Vec::len));
    let mut out = zeros(r, c);
    for i in 0..r {
        for t in 0..n {
            let x = a[i][t];
            if x == 0 {
                continue;
            }
            for j in 0..c {
                out[i][j] = (out[i][j] + x * b[t][j]) % m;
            }
        }
    }
    out
}

pub fn add(a: &Mat, b: &Mat, m: i128) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u + v).rem_euclid(m)).collect()).collect()
}

pub fn sub(a: &Mat, b: &Mat, m: i128) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().zip(y).map(|(u, v)| (u - v).rem_euclid(m)).collect()).collect()
}

pub fn reduce(a: &Mat, m: i128) -> Mat {
    a.iter().map(|r| r.iter().map(|v| v.rem_euclid(m)).collect()).collect()
}

/// Columns of `a` followed by columns of `b`.
pub fn hcat(a: &Mat, b: &Mat) -> Mat {
    a.iter().zip(b).map(|(x, y)| x.iter().chain(y).copied().collect()).collect()
}

pub fn block_diag(blocks: &[&Mat]) -> Mat {
    let n: usize = blocks.iter().map(|b| b.len()).sum();
    let mut out = zeros(n, n);
    let mut off = 0;
    for b in blocks {
        for (i, row) in b.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[off + i][off + j] = *v;
            }
        }
        off += b.len();
    }
    out
}

fn val(x: i128, p: i128, k: u32) -> u32 {
    if x == 0 {
        return k;
    }
    let mut x = x;
    let mut v = 0;
    while x % p == 0 {
        x /= p;
        v += 1;
    }
    v
}

/// Valuations of the nonzero Smith invariants of `a` over `ℤ/p^k`.
pub fn smith_valuations(a: &Mat, p: i128, k: u32) -> Vec<u32> {
    let m = p.pow(k);
    let mut a = reduce(a, m);
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    for r in 0..rows.min(cols) {
        let mut best: Option<(u32, usize, usize)> = None;
        for i in r..rows {
            for j in r..cols {
                let v = val(a[i][j], p, k);
                if v < k && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                }
            }
        }
        let Some((v, i, j)) = best else { break };
        a.swap(r, i);
        for row in a.iter_mut() {
            row.swap(r, j);
        }
        let pv = p.pow(v);
        let unit_inv = mod_inv(a[r][r] / pv, m).expect("unit part");
        for i in r + 1..rows {
            if a[i][r] != 0 {
                let f = (a[i][r] / pv) * unit_inv % m;
                for j in r..cols {
                    a[i][j] = (a[i][j] - f * a[r][j]).rem_euclid(m);
                }
            }
        }
        for j in r + 1..cols {
            if a[r][j] != 0 {
                let f = (a[r][j] / pv) * unit_inv % m;
                for row in a.iter_mut() {
                    row[j] = (row[j] - f * row[r]).rem_euclid(m);
                }
            }
        }
        out.push(v);
    }
    out
}

/// `log_p` of the size of the column span of `a` in `(ℤ/p^k)^n`.
pub fn image_log_size(a: &Mat, p: i128, k: u32) -> u32 {
    smith_valuations(a, p, k).iter().map(|v| k - v).sum()
}

/// Whether the column spans of `a` and `b` coincide.
pub fn same_image(a: &Mat, b: &Mat, p: i128, k: u32) -> bool {
    let (sa, sb) = (image_log_size(a, p, k), image_log_size(b, p, k));
    sa == sb && image_log_size(&hcat(a, b), p, k) == sa
}

pub fn rank_mod_p(a: &Mat, p: i128) -> usize {
    smith_valuations(a, p, 1).len()
}

pub fn inverse(a: &Mat, m: i128) -> Option<Mat> {
    let n = a.len();
    let mut a = reduce(a, m);
    let mut inv = identity(n);
    for c in 0..n {
        let r = (c..n).find(|&r| mod_inv(a[r][c], m).is_some())?;
        a.swap(c, r);
        inv.swap(c, r);
        let u = mod_inv(a[c][c], m)?;
        for j in 0..n {
            a[c][j] = a[c][j] * u % m;
            inv[c][j] = inv[c][j] * u % m;
        }
        for i in 0..n {
            if i != c && a[i][c] != 0 {
                let f = a[i][c];
                for j in 0..n {
                    a[i][j] = (a[i][j] - f * a[c][j]).rem_euclid(m);
                    inv[i][j] = (inv[i][j] - f * inv[c][j]).rem_euclid(m);
                }
            }
        }
    }
    Some(inv)
}
