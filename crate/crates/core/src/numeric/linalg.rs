//! Dense row-major matrices and the handful of factorizations the solvers need.

use serde::{Deserialize, Serialize};

use super::NumericError;

/// Row-major dense matrix with finite entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMatrix", into = "RawMatrix")]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TryFrom<RawMatrix> for DenseMatrix {
    type Error = NumericError;
    fn try_from(raw: RawMatrix) -> Result<Self, Self::Error> {
        DenseMatrix::new(raw.rows, raw.cols, raw.data)
    }
}

impl From<DenseMatrix> for RawMatrix {
    fn from(m: DenseMatrix) -> Self {
        RawMatrix { rows: m.rows, cols: m.cols, data: m.data }
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, NumericError> {
        if rows * cols != data.len() {
            return Err(NumericError::Dimension {
                context: "matrix entries",
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite("matrix entry"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, v) in d.iter().enumerate() {
            m.data[i * n + i] = *v;
        }
        m
    }

    /// Builds from row slices; `cols` is needed so that zero-row matrices keep their width.
    pub fn from_rows<R: AsRef<[f64]>>(cols: usize, rows: &[R]) -> Result<Self, NumericError> {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(NumericError::Dimension { context: "matrix row", expected: cols, found: r.len() });
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn push_row(&mut self, row: &[f64]) -> Result<(), NumericError> {
        if row.len() != self.cols {
            return Err(NumericError::Dimension { context: "matrix row", expected: self.cols, found: row.len() });
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite("matrix entry"));
        }
        self.data.extend_from_slice(row);
        self.rows += 1;
        Ok(())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Self { rows: idx.len(), cols: self.cols, data }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.row_iter().map(|r| dot(r, x)).collect()
    }

    /// Computes `selfᵀ y`.
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.cols];
        for (r, &w) in self.row_iter().zip(y) {
            if w != 0.0 {
                axpy(&mut out, w, r);
            }
        }
        out
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<Self, NumericError> {
        if self.cols != other.rows {
            return Err(NumericError::Dimension { context: "matmul", expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                axpy(dst, a, orow);
            }
        }
        Ok(out)
    }

    pub fn add_assign(&mut self, other: &DenseMatrix) -> Result<(), NumericError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(NumericError::Dimension { context: "matrix sum", expected: self.data.len(), found: other.data.len() });
        }
        self.data.iter_mut().zip(&other.data).for_each(|(a, b)| *a += b);
        Ok(())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| (self.get(i, j) - self.get(j, i)).abs() <= tol))
    }

    /// The default rank threshold: `1e-9 · max|m_ij|`.
    pub fn default_rank_tol(&self) -> f64 {
        1e-9 * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.row_iter().map(<[f64]>::to_vec).collect()
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

/// Numerical rank by Gaussian elimination with complete pivoting.
pub fn rank(m: &DenseMatrix, tol: f64) -> usize {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.data().to_vec();
    let mut r = 0;
    let mut col_used = vec![false; cols];
    let mut row_used = vec![false; rows];
    loop {
        let mut best = (0.0, usize::MAX, usize::MAX);
        for i in (0..rows).filter(|&i| !row_used[i]) {
            for j in (0..cols).filter(|&j| !col_used[j]) {
                let v = a[i * cols + j].abs();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.0 <= tol || best.1 == usize::MAX {
            return r;
        }
        let (_, pi, pj) = best;
        row_used[pi] = true;
        col_used[pj] = true;
        let piv = a[pi * cols + pj];
        for i in (0..rows).filter(|&i| !row_used[i]) {
            let f = a[i * cols + pj] / piv;
            if f != 0.0 {
                for j in 0..cols {
                    a[i * cols + j] -= f * a[pi * cols + j];
                }
            }
        }
        r += 1;
    }
}

/// Cholesky-based definiteness test; every pivot must exceed `tol`.
pub fn is_positive_definite(m: &DenseMatrix, tol: f64) -> Result<bool, NumericError> {
    let sym_tol = 1e-9 * (1.0 + m.max_abs());
    if !m.is_symmetric(sym_tol) {
        return Err(NumericError::Asymmetric);
    }
    let n = m.rows();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= tol {
            return Ok(false);
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(true)
}

/// Orthonormal basis of `{x : m x = 0}` from a pivoted row reduction.
pub fn null_space(m: &DenseMatrix, tol: f64) -> Vec<Vec<f64>> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.data().to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (pi, pv) = (r..rows)
            .map(|i| (i, a[i * cols + c].abs()))
            .fold((r, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if pv <= tol {
            continue;
        }
        for j in 0..cols {
            a.swap(r * cols + j, pi * cols + j);
        }
        let piv = a[r * cols + c];
        for j in 0..cols {
            a[r * cols + j] /= piv;
        }
        for i in (0..rows).filter(|&i| i != r) {
            let f = a[i * cols + c];
            if f != 0.0 {
                for j in 0..cols {
                    a[i * cols + j] -= f * a[r * cols + j];
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0.0; cols];
        v[free] = 1.0;
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -a[ri * cols + free];
        }
        basis.push(v);
    }
    orthonormalize(basis, 1e-12)
}

/// Modified Gram-Schmidt; drops vectors that become numerically dependent.
pub fn orthonormalize(vs: Vec<Vec<f64>>, tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(vs.len());
    for mut v in vs {
        let scale = norm2(&v).max(1.0);
        // Two passes keep the basis orthogonal for nearly parallel inputs.
        for _ in 0..2 {
            for q in &out {
                let p = dot(q, &v);
                axpy(&mut v, -p, q);
            }
        }
        let nv = norm2(&v);
        if nv > tol * scale {
            v.iter_mut().for_each(|x| *x /= nv);
            out.push(v);
        }
    }
    out
}

/// Solves a square system by complete pivoting, treating pivots at or below
/// `tol` as structural zeros. Unknowns without a pivot are set to zero.
/// Returns the solution and the largest residual left in the unpivoted rows,
/// which is zero (up to rounding) exactly when the system is consistent.
pub fn solve_pivoted(m: &[f64], rhs: &[f64], tol: f64) -> (Vec<f64>, f64) {
    let n = rhs.len();
    debug_assert_eq!(m.len(), n * n);
    let mut a = m.to_vec();
    let mut b = rhs.to_vec();
    let mut row_perm: Vec<usize> = (0..n).collect();
    let mut col_perm: Vec<usize> = (0..n).collect();
    let mut k = 0;
    while k < n {
        let mut best = (0.0, k, k);
        for i in k..n {
            for j in k..n {
                let v = a[row_perm[i] * n + col_perm[j]].abs();
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        if best.0 <= tol {
            break;
        }
        row_perm.swap(k, best.1);
        col_perm.swap(k, best.2);
        let pr = row_perm[k];
        let pc = col_perm[k];
        let piv = a[pr * n + pc];
        for &ri in &row_perm[k + 1..] {
            let f = a[ri * n + pc] / piv;
            if f != 0.0 {
                for &cj in &col_perm[k..] {
                    a[ri * n + cj] -= f * a[pr * n + cj];
                }
                b[ri] -= f * b[pr];
            }
        }
        k += 1;
    }
    let residual = row_perm[k..].iter().fold(0.0_f64, |m, &ri| m.max(b[ri].abs()));
    let mut x = vec![0.0; n];
    for i in (0..k).rev() {
        let pr = row_perm[i];
        let pc = col_perm[i];
        let mut s = b[pr];
        for &cj in &col_perm[i + 1..k] {
            s -= a[pr * n + cj] * x[cj];
        }
        x[pc] = s / a[pr * n + pc];
    }
    (x, residual)
}

/// Inverts a square matrix by Gauss-Jordan elimination with partial pivoting.
pub fn invert(m: &[f64], n: usize, tol: f64) -> Option<Vec<f64>> {
    let mut a = m.to_vec();
    let mut inv = vec![0.0; n * n];
    for i in 0..n {
        inv[i * n + i] = 1.0;
    }
    for c in 0..n {
        let (pi, pv) = (c..n).map(|i| (i, a[i * n + c].abs())).fold((c, -1.0), |b, x| if x.1 > b.1 { x } else { b });
        if pv <= tol {
            return None;
        }
        if pi != c {
            for j in 0..n {
                a.swap(c * n + j, pi * n + j);
                inv.swap(c * n + j, pi * n + j);
            }
        }
        let piv = a[c * n + c];
        for j in 0..n {
            a[c * n + j] /= piv;
            inv[c * n + j] /= piv;
        }
        for i in (0..n).filter(|&i| i != c) {
            let f = a[i * n + c];
            if f != 0.0 {
                for j in 0..n {
                    a[i * n + j] -= f * a[c * n + j];
                    inv[i * n + j] -= f * inv[c * n + j];
                }
            }
        }
    }
    Some(inv)
}

/// Squared distance from `x` to the affine set `{z : C z = d}`, or `None` when
/// the equations are inconsistent. `C` rows are given as slices.
pub fn affine_distance_sq(rows: &[&[f64]], d: &[f64], x: &[f64]) -> Option<f64> {
    let k = rows.len();
    if k == 0 {
        return Some(0.0);
    }
    let norms: Vec<f64> = rows.iter().map(|r| norm2(r)).collect();
    let mut gram = vec![0.0; k * k];
    let mut rhs = vec![0.0; k];
    for i in 0..k {
        for j in 0..=i {
            let g = dot(rows[i], rows[j]) / (norms[i] * norms[j]);
            gram[i * k + j] = g;
            gram[j * k + i] = g;
        }
        rhs[i] = (dot(rows[i], x) - d[i]) / norms[i];
    }
    let (mu, residual) = solve_pivoted(&gram, &rhs, 1e-10);
    if residual > 1e-9 * (1.0 + norm_inf(&rhs)) {
        return None;
    }
    let mut step = vec![0.0; x.len()];
    for i in 0..k {
        axpy(&mut step, mu[i] / norms[i], rows[i]);
    }
    Some(dot(&step, &step))
}
