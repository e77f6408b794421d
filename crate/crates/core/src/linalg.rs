//! Dense real linear algebra at desk scale.
//!
//! Matrices are stored row-major and never mutated after construction.
//! Singular values come from one-sided (Hestenes) Jacobi, least squares
//! from Householder QR followed by an SVD of the triangular factor, which
//! yields the minimum-norm solution when the system is rank deficient.

use crate::{Error, Result};

/// Relative cutoff below which singular values are treated as zero.
pub const RANK_TOL: f64 = 1e-12;

/// Off-diagonal tolerance for Jacobi rotations.
const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 80;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Builds a matrix from row-major entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "matrix must be nonempty, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(r, c, rows.concat())
    }

    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self::new(rows, cols, data)
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        Self::from_fn(values.len(), values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                0.0
            }
        })
    }

    // Internal constructor for results of arithmetic on valid matrices.
    fn raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j));
            }
        }
        Self::raw(self.cols, self.rows, data)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::raw(
            self.rows,
            self.cols,
            self.data.iter().map(|v| v * c).collect(),
        )
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Dimension(format!(
                "shapes {:?} and {:?} differ",
                self.shape(),
                other.shape()
            )));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self::raw(self.rows, self.cols, data))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::raw(self.rows, self.cols, data))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {:?} by {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let mut data = vec![0.0; self.rows * other.cols];
        for i in 0..self.rows {
            let out = &mut data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, &b) in out.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(Self::raw(self.rows, other.cols, data))
    }

    /// `A x`.
    pub fn matvec(&self, x: &SignalVector) -> Result<SignalVector> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                x.len()
            )));
        }
        Ok(SignalVector::raw(self.apply(x.as_slice())))
    }

    /// `Aᵀ v`.
    pub fn matvec_t(&self, v: &SignalVector) -> Result<SignalVector> {
        if v.len() != self.rows {
            return Err(Error::Dimension(format!(
                "transpose of {}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok(SignalVector::raw(self.apply_t(v.as_slice())))
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = dot(self.row(i), x);
        }
    }

    pub(crate) fn apply_t(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        self.apply_t_into(v, &mut out);
        out
    }

    pub(crate) fn apply_t_into(&self, v: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += vi * a;
            }
        }
    }

    /// `AᵀA`, symmetric `cols × cols`.
    pub fn gram(&self) -> Self {
        let n = self.cols;
        let cols: Vec<Vec<f64>> = (0..n).map(|j| self.column(j)).collect();
        let mut data = vec![0.0; n * n];
        for p in 0..n {
            for q in p..n {
                let g = dot(&cols[p], &cols[q]);
                data[p * n + q] = g;
                data[q * n + p] = g;
            }
        }
        Self::raw(n, n, data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    /// Columns of `self` picked out by `set`, in order.
    pub fn submatrix(&self, set: &IndexSet) -> Result<Self> {
        if let Some(&bad) = set.as_slice().iter().find(|&&j| j >= self.cols) {
            return Err(Error::Dimension(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            )));
        }
        if set.is_empty() {
            return Err(Error::Dimension("empty column selection".into()));
        }
        let k = set.len();
        let mut data = Vec::with_capacity(self.rows * k);
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(set.as_slice().iter().map(|&j| row[j]));
        }
        Ok(Self::raw(self.rows, k, data))
    }
}

/// A real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalVector(Vec<f64>);

impl SignalVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Dimension("vector must be nonempty".into()));
        }
        if let Some(pos) = entries.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(entries))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub(crate) fn raw(entries: Vec<f64>) -> Self {
        Self(entries)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn norm2(&self) -> f64 {
        norm2(&self.0)
    }

    pub fn norm1(&self) -> f64 {
        self.0.iter().map(|v| v.abs()).sum()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn dot(&self, other: &Self) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|v| v * c).collect())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_len(other)?;
        Ok(Self(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    fn check_len(&self, other: &Self) -> Result<()> {
        if self.len() != other.len() {
            return Err(Error::Dimension(format!(
                "vector lengths {} and {} differ",
                self.len(),
                other.len()
            )));
        }
        Ok(())
    }

    /// Indices of nonzero entries.
    pub fn support(&self) -> IndexSet {
        IndexSet(
            self.0
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(i, _)| i)
                .collect(),
        )
    }

    pub fn count_nonzero(&self) -> usize {
        self.0.iter().filter(|v| **v != 0.0).count()
    }

    /// Entries at `set`.
    pub fn restrict(&self, set: &IndexSet) -> Vec<f64> {
        set.as_slice().iter().map(|&i| self.0[i]).collect()
    }

    /// Length-`len` vector holding `values` at `set` and zero elsewhere.
    pub fn scatter(len: usize, set: &IndexSet, values: &[f64]) -> Self {
        let mut out = vec![0.0; len];
        for (&i, &v) in set.as_slice().iter().zip(values) {
            out[i] = v;
        }
        Self(out)
    }
}

/// Strictly increasing column indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IndexSet(Vec<usize>);

impl IndexSet {
    /// Validates that `indices` is strictly increasing and bounded by `dim`.
    pub fn new(indices: Vec<usize>, dim: usize) -> Result<Self> {
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "index set must be strictly increasing".into(),
            ));
        }
        if let Some(&bad) = indices.last().filter(|&&i| i >= dim) {
            return Err(Error::Dimension(format!(
                "index {bad} out of range for dimension {dim}"
            )));
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates arbitrary indices.
    pub fn from_unsorted(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        Self(indices)
    }

    pub fn all(dim: usize) -> Self {
        Self((0..dim).collect())
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.binary_search(&i).is_ok()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut a, mut b) = (self.0.iter().peekable(), other.0.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some(&&x), Some(&&y)) => {
                    if x < y {
                        out.push(x);
                        a.next();
                    } else if y < x {
                        out.push(y);
                        b.next();
                    } else {
                        out.push(x);
                        a.next();
                        b.next();
                    }
                }
                (Some(&&x), None) => {
                    out.push(x);
                    a.next();
                }
                (None, Some(&&y)) => {
                    out.push(y);
                    b.next();
                }
                (None, None) => break,
            }
        }
        Self(out)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    // Scaled accumulation keeps tiny and huge entries from under/overflowing.
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    let ss: f64 = a.iter().map(|v| (v / scale) * (v / scale)).sum();
    scale * ss.sqrt()
}

/// Thin singular value decomposition `A = U diag(σ) Vᵀ`.
///
/// `u` is `rows × cols`, `v` is `cols × cols`; singular values are sorted
/// in decreasing order. When `rows < cols` the trailing `cols − rows`
/// singular values are zero and the matching columns of `u` are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    pub sigma: Vec<f64>,
    pub v: DenseMatrix,
}

/// One-sided Jacobi SVD.
pub fn svd(a: &DenseMatrix) -> Svd {
    let (m, n) = a.shape();
    // Column-major working copy.
    let mut w: Vec<f64> = (0..n).flat_map(|j| a.column(j)).collect();
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        v[j * n + j] = 1.0;
    }

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                let (cp, cq) = (&w[p * m..(p + 1) * m], &w[q * m..(q + 1) * m]);
                let alpha = dot(cp, cp);
                let beta = dot(cq, cq);
                let gamma = dot(cp, cq);
                if alpha == 0.0 || beta == 0.0 || gamma == 0.0 {
                    continue;
                }
                let r = gamma.abs() / (alpha.sqrt() * beta.sqrt());
                off = off.max(r);
                if r < JACOBI_TOL {
                    continue;
                }
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, m, p, q, c, s);
                rotate_columns(&mut v, n, p, q, c, s);
            }
        }
        if off < JACOBI_TOL {
            break;
        }
    }

    let mut sigma: Vec<f64> = (0..n).map(|j| norm2(&w[j * m..(j + 1) * m])).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut u = vec![0.0; m * n];
    let mut vv = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        let sg = sigma[src];
        if sg > 0.0 {
            for i in 0..m {
                u[i * n + dst] = w[src * m + i] / sg;
            }
        }
        for i in 0..n {
            vv[i * n + dst] = v[src * n + i];
        }
    }
    sigma = order.iter().map(|&j| sigma[j]).collect();
    Svd {
        u: DenseMatrix::raw(m, n, u),
        sigma,
        v: DenseMatrix::raw(n, n, vv),
    }
}

fn rotate_columns(buf: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = buf.split_at_mut(q * len);
    let cp = &mut head[p * len..(p + 1) * len];
    let cq = &mut tail[..len];
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (a, b) = (*x, *y);
        *x = c * a - s * b;
        *y = s * a + c * b;
    }
}

/// Largest singular value: `√λ_max` of the smaller Gram matrix, formed
/// after scaling the entries into `[−1, 1]`.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    let peak = a.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let scaled = a.scaled(1.0 / peak);
    let small = if a.rows() < a.cols() {
        scaled.transpose()
    } else {
        scaled
    };
    let mut g = small.gram().data;
    let (_, top) = symmetric_extreme_eigenvalues(&mut g, small.cols);
    peak * top.max(0.0).sqrt()
}

/// `(σ_min, σ_max)`.
///
/// `σ_min` is the square root of the smallest eigenvalue of `AᵀA`, so a
/// wide matrix (`rows < cols`) reports zero.
pub fn extreme_singular_values(a: &DenseMatrix) -> (f64, f64) {
    if a.rows() < a.cols() {
        (0.0, spectral_norm(a))
    } else {
        let sv = svd(a);
        (*sv.sigma.last().unwrap_or(&0.0), sv.sigma[0])
    }
}

/// Least-squares solution of `A z ≈ y`; the minimum-norm one when `A` is
/// rank deficient.
pub fn least_squares(a: &DenseMatrix, y: &SignalVector) -> Result<SignalVector> {
    if a.rows() != y.len() {
        return Err(Error::Dimension(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            y.len()
        )));
    }
    let (m, n) = a.shape();
    let (core, rhs) = if m >= n {
        let (r, qty) = householder_qr(a, y.as_slice());
        (r, qty)
    } else {
        (a.clone(), y.as_slice().to_vec())
    };
    let sv = svd(&core);
    let cutoff = RANK_TOL * sv.sigma[0];
    let mut z = vec![0.0; n];
    for (k, &sg) in sv.sigma.iter().enumerate() {
        if sg <= cutoff || sg == 0.0 {
            continue;
        }
        let coef = (0..core.rows())
            .map(|i| sv.u.get(i, k) * rhs[i])
            .sum::<f64>()
            / sg;
        for (j, zj) in z.iter_mut().enumerate() {
            *zj += coef * sv.v.get(j, k);
        }
    }
    SignalVector::new(z)
}

/// Householder QR of a tall matrix: returns the `n × n` triangular factor
/// and the first `n` entries of `Qᵀy`.
fn householder_qr(a: &DenseMatrix, y: &[f64]) -> (DenseMatrix, Vec<f64>) {
    let (m, n) = a.shape();
    let mut r: Vec<f64> = a.as_slice().to_vec();
    let mut b = y.to_vec();
    let mut hv = vec![0.0; m];
    for k in 0..n {
        let col_norm = norm2(&(k..m).map(|i| r[i * n + k]).collect::<Vec<_>>());
        if col_norm == 0.0 {
            continue;
        }
        let x0 = r[k * n + k];
        let alpha = if x0 >= 0.0 { -col_norm } else { col_norm };
        for i in k..m {
            hv[i] = r[i * n + k];
        }
        hv[k] -= alpha;
        let vnorm2: f64 = (k..m).map(|i| hv[i] * hv[i]).sum();
        if vnorm2 == 0.0 {
            continue;
        }
        for j in k..n {
            let proj: f64 = (k..m).map(|i| hv[i] * r[i * n + j]).sum::<f64>() * 2.0 / vnorm2;
            for i in k..m {
                r[i * n + j] -= proj * hv[i];
            }
        }
        let proj: f64 = (k..m).map(|i| hv[i] * b[i]).sum::<f64>() * 2.0 / vnorm2;
        for i in k..m {
            b[i] -= proj * hv[i];
        }
    }
    let mut tri = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            tri[i * n + j] = r[i * n + j];
        }
    }
    b.truncate(n);
    (DenseMatrix::raw(n, n, tri), b)
}

/// Extreme eigenvalues of a small symmetric matrix held row-major in
/// `g` (`k × k`): Householder reduction to tridiagonal form, then implicit
/// QL with Wilkinson-type shifts. Only the lower triangle is read; `g` is
/// overwritten.
pub(crate) fn symmetric_extreme_eigenvalues(g: &mut [f64], k: usize) -> (f64, f64) {
    debug_assert_eq!(g.len(), k * k);
    match k {
        0 => return (f64::INFINITY, f64::NEG_INFINITY),
        1 => return (g[0], g[0]),
        2 => {
            let (a, b, d) = (g[0], g[2], g[3]);
            let mid = 0.5 * (a + d);
            let rad = (0.5 * (a - d)).hypot(b);
            return (mid - rad, mid + rad);
        }
        _ => {}
    }
    let mut diag = [0.0; 16];
    let mut off = [0.0; 16];
    let (mut dv, mut ev);
    let (d, e): (&mut [f64], &mut [f64]) = if k <= 16 {
        (&mut diag[..k], &mut off[..k])
    } else {
        dv = vec![0.0; k];
        ev = vec![0.0; k];
        (&mut dv[..], &mut ev[..])
    };
    tridiagonalize(g, k, d, e);
    tridiagonal_ql(d, e);
    d.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        })
}

/// Householder tridiagonalization; `d` receives the diagonal and `e[i]`
/// the entry coupling `i − 1` and `i` (`e[0] = 0`).
fn tridiagonalize(a: &mut [f64], n: usize, d: &mut [f64], e: &mut [f64]) {
    for i in (1..n).rev() {
        let l = i - 1;
        if l == 0 {
            e[i] = a[i * n];
            continue;
        }
        let scale: f64 = (0..=l).map(|k| a[i * n + k].abs()).sum();
        if scale == 0.0 {
            e[i] = a[i * n + l];
            continue;
        }
        let mut h = 0.0;
        for k in 0..=l {
            a[i * n + k] /= scale;
            h += a[i * n + k] * a[i * n + k];
        }
        let f = a[i * n + l];
        let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
        e[i] = scale * g;
        h -= f * g;
        a[i * n + l] = f - g;
        let mut f = 0.0;
        for j in 0..=l {
            let mut g = 0.0;
            for k in 0..=j {
                g += a[j * n + k] * a[i * n + k];
            }
            for k in j + 1..=l {
                g += a[k * n + j] * a[i * n + k];
            }
            e[j] = g / h;
            f += e[j] * a[i * n + j];
        }
        let hh = f / (h + h);
        for j in 0..=l {
            let f = a[i * n + j];
            let g = e[j] - hh * f;
            e[j] = g;
            for k in 0..=j {
                a[j * n + k] -= f * e[k] + g * a[i * n + k];
            }
        }
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i * n + i];
    }
}

const QL_MAX_ITERS: usize = 60;

/// Eigenvalues of the symmetric tridiagonal matrix `(d, e)` into `d`.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        for _ in 0..QL_MAX_ITERS {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = (g * g + 1.0).sqrt();
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                // Callers pass scaled Gram blocks, so no overflow guard.
                r = (f * f + g * g).sqrt();
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn rejects_bad_shapes_and_nan() {
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
        assert!(DenseMatrix::new(0, 2, vec![]).is_err());
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
        assert!(SignalVector::new(vec![f64::INFINITY]).is_err());
    }

    #[test]
    fn submatrix_selects_columns() {
        let a = m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let s = IndexSet::new(vec![0, 2], 3).unwrap();
        assert_eq!(a.submatrix(&s).unwrap(), m(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert_eq!(a.submatrix(&IndexSet::all(3)).unwrap(), a);
        let bad = IndexSet::from_unsorted(vec![3]);
        assert!(matches!(a.submatrix(&bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn index_set_validation_and_union() {
        assert!(IndexSet::new(vec![1, 1], 4).is_err());
        assert!(IndexSet::new(vec![2, 1], 4).is_err());
        assert!(IndexSet::new(vec![0, 4], 4).is_err());
        let a = IndexSet::new(vec![0, 3, 5], 6).unwrap();
        let b = IndexSet::new(vec![1, 3], 6).unwrap();
        assert_eq!(a.union(&b).as_slice(), &[0, 1, 3, 5]);
    }

    #[test]
    fn least_squares_small_cases() {
        let z = least_squares(
            &DenseMatrix::identity(3).unwrap(),
            &SignalVector::new(vec![1.0, 2.0, 3.0]).unwrap(),
        )
        .unwrap();
        for (a, b) in z.as_slice().iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        let z = least_squares(
            &m(&[&[1.0], &[1.0]]),
            &SignalVector::new(vec![0.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!((z.as_slice()[0] - 1.0).abs() < 1e-15);
        assert!(least_squares(&m(&[&[1.0], &[1.0]]), &SignalVector::zeros(3)).is_err());
    }

    #[test]
    fn least_squares_min_norm_on_rank_deficient() {
        // Two identical columns: minimizers are z0 + z1 = 2; min norm splits evenly.
        let a = m(&[&[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]]);
        let z = least_squares(&a, &SignalVector::new(vec![2.0, 2.0, 2.0]).unwrap()).unwrap();
        assert!((z.as_slice()[0] - 1.0).abs() < 1e-12);
        assert!((z.as_slice()[1] - 1.0).abs() < 1e-12);
        // Underdetermined: [1 1] z = 2 → (1, 1).
        let w = m(&[&[1.0, 1.0]]);
        let z = least_squares(&w, &SignalVector::new(vec![2.0]).unwrap()).unwrap();
        assert!((z.as_slice()[0] - 1.0).abs() < 1e-12);
        assert!((z.as_slice()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn singular_values_of_diagonals() {
        assert!((spectral_norm(&DenseMatrix::identity(4).unwrap()) - 1.0).abs() < 1e-15);
        assert!((spectral_norm(&DenseMatrix::diag(&[3.0, 1.0]).unwrap()) - 3.0).abs() < 1e-15);
        let (lo, hi) = extreme_singular_values(&DenseMatrix::identity(3).unwrap());
        assert_eq!((lo, hi), (1.0, 1.0));
        let (lo, hi) = extreme_singular_values(&DenseMatrix::diag(&[2.0, 0.5]).unwrap());
        assert!((lo - 0.5).abs() < 1e-15 && (hi - 2.0).abs() < 1e-15);
        let (lo, _) = extreme_singular_values(&m(&[&[1.0, 2.0, 3.0]]));
        assert_eq!(lo, 0.0);
    }

    #[test]
    fn svd_reconstructs() {
        let a = m(&[
            &[1.0, 2.0, 0.5],
            &[-1.0, 0.3, 2.0],
            &[0.0, 1.0, 1.0],
            &[4.0, -2.0, 0.1],
        ]);
        let sv = svd(&a);
        for i in 0..4 {
            for j in 0..3 {
                let rec: f64 = (0..3)
                    .map(|k| sv.u.get(i, k) * sv.sigma[k] * sv.v.get(j, k))
                    .sum();
                assert!((rec - a.get(i, j)).abs() < 1e-13);
            }
        }
        assert!(sv.sigma.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn symmetric_extremes_match_diagonalizable_case() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let mut g = vec![2.0, 1.0, 1.0, 2.0];
        let (lo, hi) = symmetric_extreme_eigenvalues(&mut g, 2);
        assert!((lo - 1.0).abs() < 1e-15 && (hi - 3.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_extremes_of_second_difference_matrix() {
        // tridiag(-1, 2, -1) of order n: eigenvalues 2 − 2cos(jπ/(n+1)).
        for n in [3usize, 5, 8, 12, 20] {
            let mut g = vec![0.0; n * n];
            for i in 0..n {
                g[i * n + i] = 2.0;
                if i + 1 < n {
                    g[i * n + i + 1] = -1.0;
                    g[(i + 1) * n + i] = -1.0;
                }
            }
            let (lo, hi) = symmetric_extreme_eigenvalues(&mut g, n);
            let theta = std::f64::consts::PI / (n + 1) as f64;
            assert!((lo - (2.0 - 2.0 * theta.cos())).abs() < 1e-13, "n = {n}");
            assert!((hi - (2.0 + 2.0 * theta.cos())).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn symmetric_extremes_of_diagonal_and_rank_one() {
        let mut g = vec![0.0; 16];
        for (i, v) in [3.0, -1.0, 0.5, 2.0].iter().enumerate() {
            g[i * 4 + i] = *v;
        }
        assert_eq!(symmetric_extreme_eigenvalues(&mut g, 4), (-1.0, 3.0));
        // 11ᵀ in dimension 6: eigenvalues 0 (×5) and 6.
        let mut ones = vec![1.0; 36];
        let (lo, hi) = symmetric_extreme_eigenvalues(&mut ones, 6);
        assert!(lo.abs() < 1e-14 && (hi - 6.0).abs() < 1e-14);
    }
}
