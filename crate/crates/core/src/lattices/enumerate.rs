//! Integer points of positive-definite quadratic forms.
//!
//! The form is LLL-reduced first, then searched with Fincke–Pohst pruning in
//! floating point (with a safety margin); every reported point is verified in
//! exact integer arithmetic, and in equality mode the innermost coordinate is
//! solved exactly from the integer discriminant.

use std::ops::ControlFlow;

use crate::arith::is_square;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `Q(x) + h·x + c == 0`
    Equal,
    /// `Q(x) + h·x + c <= 0`
    AtMost,
}

/// A positive-definite integral quadratic form `Q(x) = xᵀGx`, kept together
/// with an LLL-reduced equivalent form.
#[derive(Clone, Debug)]
pub struct Form {
    n: usize,
    gram: Vec<Vec<i128>>,
    /// Columns are the reduced basis in original coordinates.
    u: Vec<Vec<i128>>,
    reduced: Vec<Vec<i128>>,
    chol: Vec<Vec<f64>>,
}

impl Form {
    pub fn new(gram: Vec<Vec<i128>>) -> Self {
        let n = gram.len();
        assert!(gram.iter().all(|r| r.len() == n), "Gram matrix must be square");
        let (u, reduced) = lll(&gram);
        let chol = cholesky(&reduced).expect("quadratic form must be positive definite");
        Form { n, gram, u, reduced, chol }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn eval(&self, x: &[i128]) -> i128 {
        quad(&self.gram, x)
    }

    /// Calls `f` on every integer `x` with `xᵀGx + h·x + c` satisfying `mode`.
    pub fn search<F>(&self, h: &[i128], c: i128, mode: Mode, mut f: F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        let n = self.n;
        assert_eq!(h.len(), n);
        // h' = Uᵀh
        let hr: Vec<i128> = (0..n).map(|j| (0..n).map(|i| self.u[i][j] * h[i]).sum()).collect();
        let hf: Vec<f64> = hr.iter().map(|&v| v as f64).collect();
        // centre yc = -G'^{-1} h' / 2
        let sol = solve_chol(&self.chol, &hf);
        let yc: Vec<f64> = sol.iter().map(|v| -v / 2.0).collect();
        let hgh: f64 = hf.iter().zip(&sol).map(|(a, b)| a * b).sum::<f64>() / 4.0;
        let radius = hgh - c as f64;
        let margin = 1e-7 * (1.0 + hgh.abs() + (c as f64).abs());
        if radius + margin < 0.0 {
            return ControlFlow::Continue(());
        }
        let mut y = vec![0i128; n];
        let mut x = vec![0i128; n];
        let mut ctx = Ctx { form: self, hr: &hr, c, mode, yc: &yc, margin, y: &mut y, x: &mut x };
        ctx.level(n - 1, radius + margin, &mut f)
    }

    /// Every `x` with `Q(x) <= bound`.
    pub fn short_vectors<F>(&self, bound: i128, f: F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        self.search(&vec![0; self.n], -bound, Mode::AtMost, f)
    }

    /// Every `x` with `Q(x) == value`.
    pub fn vectors_of_value<F>(&self, value: i128, f: F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        self.search(&vec![0; self.n], -value, Mode::Equal, f)
    }

    /// `θ_Q` coefficients `#{x : Q(x) = m}` for `m = 0..=bound`.
    pub fn theta(&self, bound: i128) -> Vec<u64> {
        let mut out = vec![0u64; bound as usize + 1];
        let _ = self.short_vectors(bound, |x| {
            out[self.eval(x) as usize] += 1;
            ControlFlow::Continue(())
        });
        out
    }
}

struct Ctx<'a> {
    form: &'a Form,
    hr: &'a [i128],
    c: i128,
    mode: Mode,
    yc: &'a [f64],
    margin: f64,
    y: &'a mut Vec<i128>,
    x: &'a mut Vec<i128>,
}

impl Ctx<'_> {
    fn level<F>(&mut self, i: usize, rem: f64, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        if i == 0 && self.mode == Mode::Equal {
            return self.solve_last(f);
        }
        let q = &self.form.chol;
        let mut centre = self.yc[i];
        for j in i + 1..self.form.n {
            centre -= q[i][j] * (self.y[j] as f64 - self.yc[j]);
        }
        let rem = rem.max(0.0);
        let half = (rem / q[i][i]).sqrt() + 1e-9;
        let lo = (centre - half).ceil() as i128;
        let hi = (centre + half).floor() as i128;
        for v in lo..=hi {
            self.y[i] = v;
            let d = v as f64 - centre;
            let next = rem - q[i][i] * d * d;
            if next < -self.margin {
                continue;
            }
            if i == 0 {
                if self.value(&self.y.clone()) <= 0 {
                    self.emit(f)?;
                }
            } else {
                self.level(i - 1, next, f)?;
            }
        }
        ControlFlow::Continue(())
    }

    /// Exact solve for `y₀` once `y₁..` are fixed.
    fn solve_last<F>(&mut self, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        let g = &self.form.reduced;
        let n = self.form.n;
        let alpha = g[0][0];
        let mut beta = self.hr[0];
        for j in 1..n {
            beta += 2 * g[0][j] * self.y[j];
        }
        let mut gamma = self.c;
        for i in 1..n {
            gamma += self.hr[i] * self.y[i];
            for j in 1..n {
                gamma += g[i][j] * self.y[i] * self.y[j];
            }
        }
        let disc = beta * beta - 4 * alpha * gamma;
        let Some(s) = is_square(disc) else {
            return ControlFlow::Continue(());
        };
        let roots: &[i128] = if s == 0 { &[-beta] } else { &[-beta - s, -beta + s] };
        for &num in roots {
            if num % (2 * alpha) == 0 {
                self.y[0] = num / (2 * alpha);
                self.emit(f)?;
            }
        }
        ControlFlow::Continue(())
    }

    fn value(&self, y: &[i128]) -> i128 {
        let lin: i128 = self.hr.iter().zip(y).map(|(a, b)| a * b).sum();
        quad(&self.form.reduced, y) + lin + self.c
    }

    fn emit<F>(&mut self, f: &mut F) -> ControlFlow<()>
    where
        F: FnMut(&[i128]) -> ControlFlow<()>,
    {
        let n = self.form.n;
        for r in 0..n {
            self.x[r] = (0..n).map(|c| self.form.u[r][c] * self.y[c]).sum();
        }
        f(self.x)
    }
}

fn quad(g: &[Vec<i128>], x: &[i128]) -> i128 {
    let n = x.len();
    let mut s = 0;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        s += g[i][i] * x[i] * x[i];
        for j in i + 1..n {
            s += 2 * g[i][j] * x[i] * x[j];
        }
    }
    s
}

/// `xᵀGx = Σ q_ii (x_i + Σ_{j>i} q_ij x_j)²`; `None` unless positive definite.
fn cholesky(g: &[Vec<i128>]) -> Option<Vec<Vec<f64>>> {
    let n = g.len();
    let mut q: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    for i in 0..n {
        if q[i][i] <= 0.0 {
            return None;
        }
        for j in i + 1..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in i + 1..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    Some(q)
}

/// Solves `G z = b` from the decomposition produced by [`cholesky`].
fn solve_chol(q: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    // G = Lᵀ D L with L upper unit triangular (entries q_ij, j > i).
    // Forward: solve Lᵀ w = b.
    let mut w = b.to_vec();
    for i in 0..n {
        for j in 0..i {
            w[i] -= q[j][i] * w[j];
        }
    }
    for i in 0..n {
        w[i] /= q[i][i];
    }
    // Back: solve L z = w.
    let mut z = w;
    for i in (0..n).rev() {
        for j in i + 1..n {
            z[i] -= q[i][j] * z[j];
        }
    }
    z
}

/// LLL reduction of a Gram matrix. Returns `(U, UᵀGU)` with `U` unimodular.
fn lll(g: &[Vec<i128>]) -> (Vec<Vec<i128>>, Vec<Vec<i128>>) {
    let n = g.len();
    let mut u: Vec<Vec<i128>> = (0..n).map(|r| (0..n).map(|c| i128::from(r == c)).collect()).collect();
    let mut gr: Vec<Vec<i128>> = g.to_vec();
    if n <= 1 {
        return (u, gr);
    }
    let delta = 0.99;
    let mut k = 1;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        if guard > 100_000 {
            break;
        }
        for j in (0..k).rev() {
            let (mu, _) = gso(&gr);
            let r = mu[k][j].round();
            if r != 0.0 {
                let r = r as i128;
                for row in u.iter_mut() {
                    row[k] -= r * row[j];
                }
                // b_k ← b_k − r b_j
                let gjj = gr[j][j];
                let gkj = gr[k][j];
                for i in 0..n {
                    if i != k {
                        gr[k][i] -= r * gr[j][i];
                        gr[i][k] = gr[k][i];
                    }
                }
                gr[k][k] += r * r * gjj - 2 * r * gkj;
            }
        }
        let (mu, bstar) = gso(&gr);
        if bstar[k] < (delta - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            for row in u.iter_mut() {
                row.swap(k, k - 1);
            }
            gr.swap(k, k - 1);
            for row in gr.iter_mut() {
                row.swap(k, k - 1);
            }
            k = (k - 1).max(1);
        } else {
            k += 1;
        }
    }
    (u, gr)
}

fn gso(g: &[Vec<i128>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = g.len();
    let mut mu = vec![vec![0.0; n]; n];
    let mut r = vec![vec![0.0; n]; n];
    let mut b = vec![0.0; n];
    for i in 0..n {
        for j in 0..=i {
            let mut v = g[i][j] as f64;
            for l in 0..j {
                v -= mu[j][l] * r[i][l];
            }
            r[i][j] = v;
            if j < i {
                mu[i][j] = v / b[j];
            } else {
                b[i] = v;
            }
        }
    }
    (mu, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(g: &[Vec<i128>], h: &[i128], c: i128, mode: Mode, box_: i128) -> Vec<Vec<i128>> {
        let n = g.len();
        let mut out = Vec::new();
        let mut x = vec![-box_; n];
        loop {
            let v = quad(g, &x) + h.iter().zip(&x).map(|(a, b)| a * b).sum::<i128>() + c;
            let ok = match mode {
                Mode::Equal => v == 0,
                Mode::AtMost => v <= 0,
            };
            if ok {
                out.push(x.clone());
            }
            let mut i = 0;
            loop {
                if i == n {
                    out.sort();
                    return out;
                }
                x[i] += 1;
                if x[i] > box_ {
                    x[i] = -box_;
                    i += 1;
                } else {
                    break;
                }
            }
        }
    }

    fn collect(form: &Form, h: &[i128], c: i128, mode: Mode) -> Vec<Vec<i128>> {
        let mut out = Vec::new();
        let _ = form.search(h, c, mode, |x| {
            out.push(x.to_vec());
            ControlFlow::Continue(())
        });
        out.sort();
        out
    }

    #[test]
    fn matches_brute_force() {
        let g = vec![vec![5, 2, 1], vec![2, 7, -3], vec![1, -3, 9]];
        let form = Form::new(g.clone());
        for (h, c) in [(vec![0, 0, 0], -40), (vec![3, -1, 4], -25), (vec![-6, 2, 0], -11)] {
            for mode in [Mode::Equal, Mode::AtMost] {
                assert_eq!(collect(&form, &h, c, mode), brute(&g, &h, c, mode, 8));
            }
        }
    }

    #[test]
    fn skewed_form_is_reduced() {
        let g = vec![vec![1, 100, 0, 0], vec![100, 10001, 0, 0], vec![0, 0, 2, 1], vec![0, 0, 1, 3]];
        let form = Form::new(g);
        let theta = form.theta(3);
        // x0² + (x0 + 100x1)²... equivalent to x² + y² ⊕ the binary form 2a² + 2ab + 3b².
        assert_eq!(theta[0], 1);
        assert_eq!(theta[1], 4);
        assert_eq!(theta[2], 4 + 2);
    }
}
