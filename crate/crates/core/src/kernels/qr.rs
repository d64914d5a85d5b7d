//! Householder QR factorizations.
//!
//! `qr` is the plain factorization used for orthogonalization and as an SVD
//! preprocessing step. `cpqr` adds greedy column pivoting with exact
//! trailing-norm recomputation and detects numerical rank with a relative
//! `rcond` rule. `complete_orthogonal` reduces `[R11 R12]` to `[T 0]` with
//! orthogonal transformations from the right, which is what makes
//! minimal-norm solutions possible downstream.
//!
//! All factors are sign-normalized so that triangular diagonals are
//! nonnegative; this makes factorizations deterministic and lets perturbed
//! back-solves add a positive shift without cancellation.

use crate::mat::{dot, DenseMat};
use crate::{Error, Result};

/// Rank-revealing factorization `B * Vhat = Q1 * [R11 R12]` with detected
/// rank `p`.
#[derive(Debug, Clone)]
pub struct CpqrFactors {
    /// `m x p`, orthonormal columns.
    pub q1: DenseMat,
    /// `p x p`, upper triangular, nonnegative nonincreasing diagonal.
    pub r11: DenseMat,
    /// `p x (d-p)`; zero width when full rank, all zeros after
    /// `complete_orthogonal`.
    pub r12: DenseMat,
    /// The orthogonal right factor.
    pub vhat: VHat,
    /// Detected numerical rank.
    pub p: usize,
    /// Column count of the original matrix.
    pub d: usize,
}

/// Right factor of the rank-revealing factorization: a bare column
/// permutation straight out of pivoted QR, or a dense orthogonal matrix
/// after complete orthogonal reduction.
#[derive(Debug, Clone)]
pub enum VHat {
    /// `vhat[:, j] = e_perm[j]`: position `j` holds original column `perm[j]`.
    Perm(Vec<usize>),
    Dense(DenseMat),
}

impl CpqrFactors {
    /// `V1 * y` for `y` of length `p`.
    pub fn apply_v1(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.p, "apply_v1 length mismatch");
        match &self.vhat {
            VHat::Perm(perm) => {
                let mut x = vec![0.0; self.d];
                for (j, &yj) in y.iter().enumerate() {
                    x[perm[j]] = yj;
                }
                x
            }
            VHat::Dense(v) => {
                let mut x = vec![0.0; self.d];
                for (j, &yj) in y.iter().enumerate() {
                    if yj != 0.0 {
                        crate::mat::axpy(yj, v.col(j), &mut x);
                    }
                }
                x
            }
        }
    }

    /// `V1^T * x` for `x` of length `d`.
    pub fn apply_v1t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.d, "apply_v1t length mismatch");
        match &self.vhat {
            VHat::Perm(perm) => (0..self.p).map(|j| x[perm[j]]).collect(),
            VHat::Dense(v) => (0..self.p).map(|j| dot(v.col(j), x)).collect(),
        }
    }

    /// Materialize the full `d x d` orthogonal right factor.
    pub fn vhat_full(&self) -> DenseMat {
        match &self.vhat {
            VHat::Perm(perm) => {
                let mut v = DenseMat::zeros(self.d, self.d);
                for (j, &pj) in perm.iter().enumerate() {
                    v.set(pj, j, 1.0);
                }
                v
            }
            VHat::Dense(v) => v.clone(),
        }
    }

    /// `Q1 * [R11 R12] * Vhat^T`, for testing reconstruction quality.
    pub fn reconstruct(&self) -> DenseMat {
        let mut r = DenseMat::zeros(self.p, self.d);
        for j in 0..self.p {
            for i in 0..=j {
                r.set(i, j, self.r11.at(i, j));
            }
        }
        for j in 0..self.d - self.p {
            for i in 0..self.p {
                r.set(i, self.p + j, self.r12.at(i, j));
            }
        }
        let qr = self.q1.matmul(&r);
        match &self.vhat {
            VHat::Perm(perm) => {
                let mut out = DenseMat::zeros(qr.rows(), self.d);
                for j in 0..self.d {
                    let src = qr.col(j).to_vec();
                    out.col_mut(perm[j]).copy_from_slice(&src);
                }
                out
            }
            VHat::Dense(v) => qr.matmul(&v.transpose()),
        }
    }
}

/// Householder reflector for `x`: returns `(tau, beta)` and overwrites
/// `x[1..]` with the reflector tail (implicit leading 1). `H x = beta e1`
/// with `H = I - tau v v^T`.
fn make_reflector(x: &mut [f64]) -> (f64, f64) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return (0.0, 0.0);
    }
    let x0 = x[0];
    let beta = if x0 >= 0.0 { -norm } else { norm };
    let tau = (beta - x0) / beta;
    let denom = x0 - beta;
    for v in &mut x[1..] {
        *v /= denom;
    }
    x[0] = 1.0;
    (tau, beta)
}

/// Apply `H = I - tau v v^T` (reflector stored in `v`, `v[0]` implicit 1
/// not required: the slice holds the actual values) to a column slice.
#[inline]
fn apply_reflector(v: &[f64], tau: f64, col: &mut [f64]) {
    let w = dot(v, col);
    if w != 0.0 {
        crate::mat::axpy(-tau * w, v, col);
    }
}

struct Packed {
    w: DenseMat,
    tau: Vec<f64>,
    perm: Vec<usize>,
    steps: usize,
}

fn trailing_norm(w: &DenseMat, from_row: usize, j: usize) -> f64 {
    w.col(j)[from_row..].iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Core Householder factorization. With `pivot`, columns are greedily
/// reordered by exact trailing norm; with `stop_rcond`, factorization stops
/// once the next pivot falls below `rcond * |r_11|` (the detected rank is
/// the number of completed steps).
fn factor(a: &DenseMat, pivot: bool, stop_rcond: Option<f64>) -> Packed {
    let (m, d) = (a.rows(), a.cols());
    let kmax = m.min(d);
    let mut w = a.clone();
    let mut tau = vec![0.0; kmax];
    let mut perm: Vec<usize> = (0..d).collect();
    let mut r00 = 0.0f64;
    let mut steps = 0;

    for k in 0..kmax {
        if pivot {
            let mut best = k;
            let mut best_norm = trailing_norm(&w, k, k);
            for j in k + 1..d {
                let nj = trailing_norm(&w, k, j);
                if nj > best_norm {
                    best = j;
                    best_norm = nj;
                }
            }
            if best_norm == 0.0 {
                break;
            }
            if k == 0 {
                r00 = best_norm;
            } else if let Some(rc) = stop_rcond {
                if best_norm < rc * r00 {
                    break;
                }
            }
            if best != k {
                perm.swap(k, best);
                for i in 0..m {
                    let t = w.at(i, k);
                    w.set(i, k, w.at(i, best));
                    w.set(i, best, t);
                }
            }
        }

        let (t, beta) = {
            let col = &mut w.col_mut(k)[k..];
            make_reflector(col)
        };
        tau[k] = t;
        if t != 0.0 {
            let (head, tail) = w.data_split(k + 1);
            let v = &head[k * m + k..(k + 1) * m];
            for j in 0..d - k - 1 {
                let col = &mut tail[j * m + k..(j + 1) * m];
                apply_reflector(v, t, col);
            }
        }
        w.set(k, k, beta);
        steps += 1;
    }

    Packed { w, tau, perm, steps }
}

/// Materialize the first `p` columns of `Q` from packed reflectors.
fn accumulate_q(packed: &Packed, p: usize) -> DenseMat {
    let m = packed.w.rows();
    let mut q = DenseMat::zeros(m, p);
    for k in 0..p {
        q.set(k, k, 1.0);
    }
    for k in (0..packed.steps.min(p)).rev() {
        let t = packed.tau[k];
        if t == 0.0 {
            continue;
        }
        let mut v = packed.w.col(k)[k..].to_vec();
        v[0] = 1.0;
        for j in k..p {
            let col = &mut q.col_mut(j)[k..];
            apply_reflector(&v, t, col);
        }
    }
    q
}

/// Plain Householder QR: `a = Q1 * R` with `Q1` of size `m x k`,
/// `R` of size `k x d`, `k = min(m, d)`, and `diag(R) >= 0`.
pub fn qr(a: &DenseMat) -> (DenseMat, DenseMat) {
    let packed = factor(a, false, None);
    let k = a.rows().min(a.cols());
    let mut q1 = accumulate_q(&packed, k);
    let mut r = extract_r(&packed.w, k);
    normalize_signs(&mut q1, &mut r);
    (q1, r)
}

/// R factor only, for singular-value computations that never need `Q`.
pub fn qr_r_only(a: &DenseMat) -> DenseMat {
    let packed = factor(a, false, None);
    let k = a.rows().min(a.cols());
    extract_r(&packed.w, k)
}

fn extract_r(w: &DenseMat, k: usize) -> DenseMat {
    let d = w.cols();
    let mut r = DenseMat::zeros(k, d);
    for j in 0..d {
        let top = j.min(k.saturating_sub(1));
        for i in 0..=top {
            r.set(i, j, w.at(i, j));
        }
    }
    r
}

fn normalize_signs(q1: &mut DenseMat, r: &mut DenseMat) {
    let k = r.rows().min(r.cols());
    for i in 0..k {
        if r.at(i, i) < 0.0 {
            for j in i..r.cols() {
                let v = r.at(i, j);
                r.set(i, j, -v);
            }
            for v in q1.col_mut(i) {
                *v = -*v;
            }
        }
    }
}

/// Column-pivoted Householder QR with relative-rank truncation:
/// `p = max { q : |r_qq| >= rcond * |r_11| }`.
///
/// An all-zero input is reported as `Error::RankZero`.
pub fn cpqr(b: &DenseMat, rcond: f64) -> Result<CpqrFactors> {
    if !(rcond > 0.0 && rcond < 1.0) {
        return Err(Error::InvalidArg(format!("rcond must be in (0,1), got {rcond}")));
    }
    let d = b.cols();
    let packed = factor(b, true, Some(rcond));
    let p = packed.steps;
    if p == 0 {
        return Err(Error::RankZero);
    }
    let mut q1 = accumulate_q(&packed, p);
    let mut r = extract_r(&packed.w, p);
    normalize_signs(&mut q1, &mut r);
    let r11 = r.col_range(0, p);
    let r12 = r.col_range(p, d);
    Ok(CpqrFactors { q1, r11, r12, vhat: VHat::Perm(packed.perm), p, d })
}

/// Annihilate `R12` with orthogonal transformations from the right,
/// returning factors whose product `Q1 [R11 R12] Vhat^T` is unchanged and
/// whose `R12` is exactly zero.
pub fn complete_orthogonal(f: &CpqrFactors) -> CpqrFactors {
    let (p, d) = (f.p, f.d);
    let q = d - p;
    if q == 0 || f.r12.max_abs() == 0.0 {
        let mut out = f.clone();
        out.r12 = DenseMat::zeros(p, q);
        return out;
    }

    // working row block [R11 R12], p x d
    let mut m = DenseMat::zeros(p, d);
    for j in 0..p {
        for i in 0..=j {
            m.set(i, j, f.r11.at(i, j));
        }
    }
    for j in 0..q {
        for i in 0..p {
            m.set(i, p + j, f.r12.at(i, j));
        }
    }
    let mut v = f.vhat_full();

    // Bottom-up: the reflector for row i is supported on column i and the
    // trailing block, so rows below i (already reduced) are untouched.
    for i in (0..p).rev() {
        let mut x = Vec::with_capacity(q + 1);
        x.push(m.at(i, i));
        for j in 0..q {
            x.push(m.at(i, p + j));
        }
        if x[1..].iter().all(|&t| t == 0.0) {
            continue;
        }
        let (tau, beta) = make_reflector(&mut x);
        if tau == 0.0 {
            continue;
        }
        let w = x; // reflector over coordinates {i} ∪ {p..d}, w[0] = 1
        m.set(i, i, beta);
        for j in 0..q {
            m.set(i, p + j, 0.0);
        }
        for t in 0..i {
            let mut val = m.at(t, i);
            for j in 0..q {
                val += m.at(t, p + j) * w[1 + j];
            }
            val *= tau;
            m.set(t, i, m.at(t, i) - val);
            for j in 0..q {
                m.set(t, p + j, m.at(t, p + j) - val * w[1 + j]);
            }
        }
        for t in 0..d {
            let mut val = v.at(t, i);
            for j in 0..q {
                val += v.at(t, p + j) * w[1 + j];
            }
            val *= tau;
            v.set(t, i, v.at(t, i) - val);
            for j in 0..q {
                v.set(t, p + j, v.at(t, p + j) - val * w[1 + j]);
            }
        }
    }

    let mut r11 = DenseMat::zeros(p, p);
    for j in 0..p {
        for i in 0..=j {
            r11.set(i, j, m.at(i, j));
        }
    }
    let mut q1 = f.q1.clone();
    for i in 0..p {
        if r11.at(i, i) < 0.0 {
            for j in i..p {
                let t = r11.at(i, j);
                r11.set(i, j, -t);
            }
            for t in q1.col_mut(i) {
                *t = -*t;
            }
        }
    }
    CpqrFactors { q1, r11, r12: DenseMat::zeros(p, q), vhat: VHat::Dense(v), p, d }
}
