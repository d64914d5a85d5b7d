//! Dense (column-major) and sparse (CSR) matrix containers.
//!
//! Containers are immutable after construction as far as the public API is
//! concerned; all linear-algebra routines take them by reference and return
//! fresh values. Dimension mismatches in pure linear operations panic, the
//! same convention as the rest of the numerics ecosystem; fallible
//! construction returns `Result`.

use crate::{Error, Result};

/// Column-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    n: usize,
    d: usize,
    data: Vec<f64>,
}

impl DenseMat {
    /// Zero matrix. `d = 0` is allowed for empty factor outputs.
    pub fn zeros(n: usize, d: usize) -> Self {
        DenseMat { n, d, data: vec![0.0; n * d] }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = DenseMat::zeros(k, k);
        for i in 0..k {
            m.set(i, i, 1.0);
        }
        m
    }

    /// Build from column-major data, checking shape and finiteness.
    pub fn from_col_major(n: usize, d: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArg(format!("matrix must be at least 1x1, got {n}x{d}")));
        }
        if data.len() != n * d {
            return Err(Error::Dim(format!("expected {} entries, got {}", n * d, data.len())));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense matrix entries"));
        }
        Ok(DenseMat { n, d, data })
    }

    /// Build from a row-major slice of rows (convenient in tests).
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidArg("no rows".into()));
        }
        let d = rows[0].len();
        let mut m = DenseMat::zeros(n, d);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::Dim(format!("row {i} has length {}, expected {d}", row.len())));
            }
            for (j, &v) in row.iter().enumerate() {
                m.set(i, j, v);
            }
        }
        if !m.data.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("dense matrix entries"));
        }
        Ok(m)
    }

    /// Assemble from columns of equal length.
    pub fn from_cols(n: usize, cols: Vec<Vec<f64>>) -> Self {
        let d = cols.len();
        let mut data = Vec::with_capacity(n * d);
        for c in &cols {
            assert_eq!(c.len(), n, "column length mismatch");
            data.extend_from_slice(c);
        }
        DenseMat { n, d, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.n && j < self.d);
        self.data[j * self.n + i]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.n && j < self.d);
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    #[inline]
    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Split the backing store at column `j`: columns `[0, j)` shared,
    /// columns `[j, d)` mutable. Used by in-place factorizations.
    pub(crate) fn data_split(&mut self, j: usize) -> (&[f64], &mut [f64]) {
        let n = self.n;
        let (a, b) = self.data.split_at_mut(j * n);
        (&*a, b)
    }

    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `A*x` or `A^T*x`.
    pub fn matvec(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        if transpose {
            assert_eq!(x.len(), self.n, "matvec^T length mismatch");
            (0..self.d).map(|j| dot(self.col(j), x)).collect()
        } else {
            assert_eq!(x.len(), self.d, "matvec length mismatch");
            let mut y = vec![0.0; self.n];
            for j in 0..self.d {
                axpy(x[j], self.col(j), &mut y);
            }
            y
        }
    }

    /// `A * B`.
    pub fn matmul(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.d, other.n, "matmul inner dimension mismatch");
        let mut out = DenseMat::zeros(self.n, other.d);
        for j in 0..other.d {
            let bcol = other.col(j);
            let ocol = out.col_mut(j);
            for (k, &bkj) in bcol.iter().enumerate() {
                if bkj != 0.0 {
                    axpy(bkj, &self.data[k * self.n..(k + 1) * self.n], ocol);
                }
            }
        }
        out
    }

    /// `A^T * B`.
    pub fn matmul_tn(&self, other: &DenseMat) -> DenseMat {
        assert_eq!(self.n, other.n, "matmul_tn dimension mismatch");
        let mut out = DenseMat::zeros(self.d, other.d);
        for j in 0..other.d {
            for i in 0..self.d {
                out.set(i, j, dot(self.col(i), other.col(j)));
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMat {
        let mut t = DenseMat::zeros(self.d, self.n);
        for j in 0..self.d {
            for i in 0..self.n {
                t.set(j, i, self.at(i, j));
            }
        }
        t
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Copy with one extra column appended on the right.
    pub fn append_col(&self, c: &[f64]) -> DenseMat {
        assert_eq!(c.len(), self.n, "appended column length mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(c);
        DenseMat { n: self.n, d: self.d + 1, data }
    }

    /// View of columns `[j0, j1)` as a new matrix.
    pub fn col_range(&self, j0: usize, j1: usize) -> DenseMat {
        assert!(j0 <= j1 && j1 <= self.d);
        DenseMat {
            n: self.n,
            d: j1 - j0,
            data: self.data[j0 * self.n..j1 * self.n].to_vec(),
        }
    }
}

/// Compressed-sparse-row matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    n: usize,
    d: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMat {
    /// Build from `(row, col, value)` triplets. Duplicates are summed,
    /// column indices sorted within each row, explicit zeros kept out.
    pub fn from_triplets(n: usize, d: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::InvalidArg(format!("matrix must be at least 1x1, got {n}x{d}")));
        }
        for &(i, j, v) in triplets {
            if i >= n || j >= d {
                return Err(Error::Dim(format!("entry ({i},{j}) out of range for {n}x{d}")));
            }
            if !v.is_finite() {
                return Err(Error::NonFinite("sparse matrix entries"));
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_by_key(|&(i, j, _)| (i, j));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(sorted.len());
        for &(i, j, v) in &sorted {
            match merged.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => merged.push((i, j, v)),
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for &(i, _, _) in &merged {
            row_ptr[i + 1] += 1;
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        let col_idx = merged.iter().map(|t| t.1).collect();
        let values = merged.iter().map(|t| t.2).collect();
        Ok(SparseMat { n, d, row_ptr, col_idx, values })
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterator over `(col, value)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn matvec(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        if transpose {
            assert_eq!(x.len(), self.n, "matvec^T length mismatch");
            let mut y = vec![0.0; self.d];
            for i in 0..self.n {
                let xi = x[i];
                if xi != 0.0 {
                    for (j, v) in self.row(i) {
                        y[j] += v * xi;
                    }
                }
            }
            y
        } else {
            assert_eq!(x.len(), self.d, "matvec length mismatch");
            let mut y = vec![0.0; self.n];
            for i in 0..self.n {
                let mut acc = 0.0;
                for (j, v) in self.row(i) {
                    acc += v * x[j];
                }
                y[i] = acc;
            }
            y
        }
    }

    pub fn to_dense(&self) -> DenseMat {
        let mut m = DenseMat::zeros(self.n, self.d);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                m.set(i, j, v);
            }
        }
        m
    }

    pub fn transpose(&self) -> SparseMat {
        let triplets: Vec<(usize, usize, f64)> = self.triplets().map(|(i, j, v)| (j, i, v)).collect();
        SparseMat::from_triplets(self.d, self.n, &triplets).expect("transpose of valid matrix")
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    /// Scale row `i` by `s[i]` in place (used by the coherent sparse generators).
    pub fn scale_rows(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.n);
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            for v in &mut self.values[lo..hi] {
                *v *= s[i];
            }
        }
    }

    /// Scale column `j` by `s[j]` in place.
    pub fn scale_cols(&mut self, s: &[f64]) {
        assert_eq!(s.len(), self.d);
        for (j, v) in self.col_idx.iter().zip(self.values.iter_mut()) {
            *v *= s[*j];
        }
    }
}

/// Either storage format; the solver and harness accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum Mat {
    Dense(DenseMat),
    Sparse(SparseMat),
}

impl Mat {
    pub fn rows(&self) -> usize {
        match self {
            Mat::Dense(a) => a.rows(),
            Mat::Sparse(a) => a.rows(),
        }
    }

    pub fn cols(&self) -> usize {
        match self {
            Mat::Dense(a) => a.cols(),
            Mat::Sparse(a) => a.cols(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Mat::Dense(a) => a.rows() * a.cols(),
            Mat::Sparse(a) => a.nnz(),
        }
    }

    pub fn matvec(&self, x: &[f64], transpose: bool) -> Vec<f64> {
        match self {
            Mat::Dense(a) => a.matvec(x, transpose),
            Mat::Sparse(a) => a.matvec(x, transpose),
        }
    }

    pub fn to_dense(&self) -> DenseMat {
        match self {
            Mat::Dense(a) => a.clone(),
            Mat::Sparse(a) => a.to_dense(),
        }
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self, Mat::Sparse(_))
    }
}

impl From<DenseMat> for Mat {
    fn from(a: DenseMat) -> Self {
        Mat::Dense(a)
    }
}

impl From<SparseMat> for Mat {
    fn from(a: SparseMat) -> Self {
        Mat::Sparse(a)
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[inline]
pub fn scale_vec(s: f64, x: &mut [f64]) {
    for v in x {
        *v *= s;
    }
}

/// `||A x - b||_2` with one matvec.
pub fn residual_norm(a: &Mat, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x, false);
    ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng64;

    #[test]
    fn identity_matvec() {
        let a = DenseMat::identity(3);
        assert_eq!(a.matvec(&[1.0, 2.0, 3.0], false), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn sparse_single_entry() {
        // single entry A[1,0] = 2 applied to x = (3,)
        let a = SparseMat::from_triplets(4, 1, &[(1, 0, 2.0)]).unwrap();
        assert_eq!(a.matvec(&[3.0], false), vec![0.0, 6.0, 0.0, 0.0]);
    }

    #[test]
    fn dense_matvec_matches_naive_loop() {
        let mut rng = Rng64::new(11);
        let (n, d) = (7, 4);
        let mut a = DenseMat::zeros(n, d);
        for j in 0..d {
            for i in 0..n {
                a.set(i, j, rng.normal());
            }
        }
        let x: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let y = a.matvec(&x, false);
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..d {
                acc += a.at(i, j) * x[j];
            }
            assert!((y[i] - acc).abs() <= 1e-14);
        }
        let z: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let yt = a.matvec(&z, true);
        for j in 0..d {
            let mut acc = 0.0;
            for i in 0..n {
                acc += a.at(i, j) * z[i];
            }
            assert!((yt[j] - acc).abs() <= 1e-14);
        }
    }

    #[test]
    fn sparse_matvec_matches_dense() {
        let mut rng = Rng64::new(5);
        let (n, d) = (9, 6);
        let mut trips = Vec::new();
        for i in 0..n {
            for j in 0..d {
                if rng.uniform() < 0.3 {
                    trips.push((i, j, rng.normal()));
                }
            }
        }
        let a = SparseMat::from_triplets(n, d, &trips).unwrap();
        let ad = a.to_dense();
        let x: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let y_sparse = a.matvec(&x, false);
        let y_dense = ad.matvec(&x, false);
        for (p, q) in y_sparse.iter().zip(&y_dense) {
            assert!((p - q).abs() < 1e-13);
        }
        let z: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
        let t_sparse = a.matvec(&z, true);
        let t_dense = ad.matvec(&z, true);
        for (p, q) in t_sparse.iter().zip(&t_dense) {
            assert!((p - q).abs() < 1e-13);
        }
    }

    #[test]
    fn triplet_duplicates_sum() {
        let a = SparseMat::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 1.5), (1, 1, 2.0)]).unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.to_dense().at(0, 0), 2.5);
    }

    #[test]
    #[should_panic(expected = "matvec length mismatch")]
    fn dimension_mismatch_panics() {
        let a = DenseMat::identity(3);
        let _ = a.matvec(&[1.0, 2.0], false);
    }

    #[test]
    fn nonfinite_rejected() {
        assert!(matches!(
            DenseMat::from_col_major(1, 1, vec![f64::NAN]),
            Err(Error::NonFinite(_))
        ));
    }
}
