//! Independent reference implementations used as test oracles.
//!
//! Nothing here shares code with `mixcs`: matrices are plain row vectors,
//! eigenvalues come from inertia counting and bisection, least squares
//! from the normal equations, and linear programs from a dense two-phase
//! simplex. Everything is slow and simple on purpose.

#![allow(clippy::needless_range_loop)]

pub type Rows = Vec<Vec<f64>>;

pub fn transpose(a: &Rows) -> Rows {
    let (m, n) = (a.len(), a[0].len());
    (0..n).map(|j| (0..m).map(|i| a[i][j]).collect()).collect()
}

pub fn matvec(a: &Rows, x: &[f64]) -> Vec<f64> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum())
        .collect()
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Number of eigenvalues of the symmetric `g` strictly below `x`, from the
/// signs of the pivots of an unpivoted `LDLᵀ` of `g − xI`.
pub fn count_below(g: &Rows, x: f64) -> usize {
    let n = g.len();
    let mut m: Rows = g.clone();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= x;
    }
    let scale = g.iter().flatten().fold(1.0f64, |a, v| a.max(v.abs()));
    let tiny = 1e-300_f64.max(f64::EPSILON * f64::EPSILON * scale);
    let mut neg = 0;
    for k in 0..n {
        let mut piv = m[k][k];
        if piv.abs() < tiny {
            piv = -tiny;
        }
        if piv < 0.0 {
            neg += 1;
        }
        for i in k + 1..n {
            let f = m[i][k] / piv;
            for j in k + 1..n {
                m[i][j] -= f * m[k][j];
            }
        }
    }
    neg
}

/// `(λ_min, λ_max)` of a symmetric matrix by bisection on inertia counts.
pub fn extreme_eigenvalues(g: &Rows) -> (f64, f64) {
    let n = g.len();
    let radius = g
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let off: f64 = row
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            (row[i] - off, row[i] + off)
        })
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (a, b)| {
            (lo.min(a), hi.max(b))
        });
    let (glo, ghi) = (radius.0 - 1e-12, radius.1 + 1e-12);
    // λ_min: smallest x with count_below(x) >= 1.
    let bisect = |target: usize| {
        let (mut lo, mut hi) = (glo, ghi);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if count_below(g, mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (bisect(1), bisect(n))
}

/// Eigenvalues of `[[a, b], [b, d]]` in closed form.
pub fn eig2(a: f64, b: f64, d: f64) -> (f64, f64) {
    let mid = 0.5 * (a + d);
    let rad = ((0.5 * (a - d)).powi(2) + b * b).sqrt();
    (mid - rad, mid + rad)
}

/// `A_Sᵀ A_S` from explicit column dot products.
pub fn gram_of(a: &Rows, cols: &[usize]) -> Rows {
    cols.iter()
        .map(|&p| {
            cols.iter()
                .map(|&q| a.iter().map(|row| row[p] * row[q]).sum())
                .collect()
        })
        .collect()
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Exhaustive δ_s.
pub fn ric_brute(a: &Rows, s: usize) -> f64 {
    subsets(a[0].len(), s)
        .iter()
        .map(|sub| {
            let (lo, hi) = extreme_eigenvalues(&gram_of(a, sub));
            (hi - 1.0).max(1.0 - lo)
        })
        .fold(0.0, f64::max)
}

/// Exhaustive `max_S σ_max(A_S)`.
pub fn submatrix_norm_brute(a: &Rows, s: usize) -> f64 {
    subsets(a[0].len(), s)
        .iter()
        .map(|sub| extreme_eigenvalues(&gram_of(a, sub)).1.max(0.0).sqrt())
        .fold(0.0, f64::max)
}

/// `σ_max(A)` through the eigenvalues of the smaller Gram matrix.
pub fn spectral_norm(a: &Rows) -> f64 {
    let small = if a.len() < a[0].len() {
        a.clone()
    } else {
        transpose(a)
    };
    // rows of `small` are the shorter dimension: G = small · smallᵀ.
    let g: Rows = small
        .iter()
        .map(|r| {
            small
                .iter()
                .map(|q| r.iter().zip(q).map(|(x, y)| x * y).sum())
                .collect()
        })
        .collect();
    extreme_eigenvalues(&g).1.max(0.0).sqrt()
}

/// Solves `m z = r` by Gaussian elimination with partial pivoting.
pub fn solve(mut m: Rows, mut r: Vec<f64>) -> Option<Vec<f64>> {
    let n = m.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| m[i][k].abs().total_cmp(&m[j][k].abs()))?;
        if m[p][k].abs() < 1e-300 {
            return None;
        }
        m.swap(k, p);
        r.swap(k, p);
        for i in k + 1..n {
            let f = m[i][k] / m[k][k];
            for j in k..n {
                m[i][j] -= f * m[k][j];
            }
            r[i] -= f * r[k];
        }
    }
    let mut z = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| m[k][j] * z[j]).sum();
        z[k] = (r[k] - s) / m[k][k];
    }
    Some(z)
}

/// Least squares for a full-column-rank `a` via `AᵀA z = Aᵀy`.
pub fn lstsq_normal(a: &Rows, y: &[f64]) -> Option<Vec<f64>> {
    let n = a[0].len();
    let cols: Vec<usize> = (0..n).collect();
    let g = gram_of(a, &cols);
    let rhs = (0..n)
        .map(|j| a.iter().zip(y).map(|(row, v)| row[j] * v).sum())
        .collect();
    solve(g, rhs)
}

const LP_TOL: f64 = 1e-10;

/// Runs simplex pivots with Bland's rule on a canonical tableau. The last
/// row holds reduced costs, the last column the right-hand side.
fn pivot_loop(t: &mut Rows, basis: &mut [usize], allowed: usize) -> bool {
    let m = basis.len();
    let w = t[0].len() - 1;
    for _ in 0..10_000 {
        let Some(enter) = (0..allowed).find(|&j| t[m][j] < -LP_TOL) else {
            return true;
        };
        let mut leave: Option<usize> = None;
        for i in 0..m {
            if t[i][enter] > LP_TOL {
                let ratio = t[i][w] / t[i][enter];
                leave = match leave {
                    None => Some(i),
                    Some(l) => {
                        let best = t[l][w] / t[l][enter];
                        if ratio < best - 1e-14 || (ratio <= best + 1e-14 && basis[i] < basis[l]) {
                            Some(i)
                        } else {
                            Some(l)
                        }
                    }
                };
            }
        }
        let Some(r) = leave else {
            return false;
        };
        pivot(t, r, enter);
        basis[r] = enter;
    }
    false
}

fn pivot(t: &mut Rows, r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let row = t[r].clone();
    for (i, ti) in t.iter_mut().enumerate() {
        if i != r {
            let f = ti[c];
            if f != 0.0 {
                for (v, rv) in ti.iter_mut().zip(&row) {
                    *v -= f * rv;
                }
            }
        }
    }
}

/// `min cᵀx` subject to `Ax = b`, `x ≥ 0`, by the two-phase simplex
/// method. Returns `None` when infeasible or unbounded.
pub fn lp_min(c: &[f64], a: &Rows, b: &[f64]) -> Option<(f64, Vec<f64>)> {
    let (m, n) = (a.len(), c.len());
    let width = n + m + 1;
    let mut t: Rows = vec![vec![0.0; width]; m + 1];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[i][j] = sign * a[i][j];
        }
        t[i][n + i] = 1.0;
        t[i][width - 1] = sign * b[i];
    }
    // Phase one: minimize the sum of artificials.
    for j in 0..width {
        if j < n || j == width - 1 {
            t[m][j] = -(0..m).map(|i| t[i][j]).sum::<f64>();
        }
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    if !pivot_loop(&mut t, &mut basis, n + m) || -t[m][width - 1] > 1e-8 {
        return None;
    }
    for r in 0..m {
        if basis[r] >= n {
            if let Some(c) = (0..n).find(|&j| t[r][j].abs() > 1e-9) {
                pivot(&mut t, r, c);
                basis[r] = c;
            }
        }
    }
    // Phase two on the original columns.
    t[m] = vec![0.0; width];
    t[m][..n].copy_from_slice(c);
    for r in 0..m {
        let j = basis[r];
        if j < n && c[j] != 0.0 {
            let row = t[r].clone();
            for (v, rv) in t[m].iter_mut().zip(&row) {
                *v -= c[j] * rv;
            }
        }
    }
    if !pivot_loop(&mut t, &mut basis, n) {
        return None;
    }
    let mut x = vec![0.0; n];
    for r in 0..m {
        if basis[r] < n {
            x[basis[r]] = t[r][width - 1];
        }
    }
    Some((c.iter().zip(&x).map(|(p, q)| p * q).sum(), x))
}

/// Basis pursuit `min ‖z‖₁ s.t. Φz = y` as an LP in `z = p − q`.
pub fn basis_pursuit_lp(phi: &Rows, y: &[f64]) -> Option<(f64, Vec<f64>)> {
    let d = phi[0].len();
    let a: Rows = phi
        .iter()
        .map(|row| row.iter().copied().chain(row.iter().map(|v| -v)).collect())
        .collect();
    let (obj, pq) = lp_min(&vec![1.0; 2 * d], &a, y)?;
    Some((obj, (0..d).map(|j| pq[j] - pq[d + j]).collect()))
}

/// Indices of the `k` largest `|v|`, nonzero only, ties to the lower index.
fn top_k(v: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
    idx.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// One pass of the reference CoSaMP loop.
#[derive(Debug, Clone, PartialEq)]
pub struct CosampStep {
    pub support: Vec<usize>,
    pub estimate: Vec<f64>,
    pub residual: f64,
}

/// Literal transcription of the CoSaMP procedure: proxy, merge, least
/// squares on the merged support (normal equations), prune, update. Runs
/// exactly `iters` passes, or fewer if the residual vanishes.
pub fn cosamp_reference(phi: &Rows, y: &[f64], s: usize, iters: usize) -> Vec<CosampStep> {
    let d = phi[0].len();
    let phit = transpose(phi);
    let mut a = vec![0.0; d];
    let mut v = y.to_vec();
    let mut trace = Vec::new();
    for _ in 0..iters {
        let u = matvec(&phit, &v);
        let omega = top_k(&u, 2 * s);
        let mut t: Vec<usize> = omega;
        t.extend((0..d).filter(|&i| a[i] != 0.0));
        t.sort_unstable();
        t.dedup();
        let sub: Rows = phi
            .iter()
            .map(|row| t.iter().map(|&j| row[j]).collect())
            .collect();
        let w_t = lstsq_normal(&sub, y).expect("merged support must be full rank");
        let keep = top_k(&w_t, s);
        a = vec![0.0; d];
        let support: Vec<usize> = keep.iter().map(|&k| t[k]).collect();
        for &k in &keep {
            a[t[k]] = w_t[k];
        }
        let pa = matvec(phi, &a);
        v = y.iter().zip(&pa).map(|(p, q)| p - q).collect();
        let r = norm2(&v);
        trace.push(CosampStep {
            support,
            estimate: a.clone(),
            residual: r,
        });
        if r == 0.0 {
            break;
        }
    }
    trace
}
