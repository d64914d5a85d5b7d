//! Compact SVD via one-sided Jacobi.
//!
//! Tall matrices are first reduced by a plain QR so the Jacobi sweeps run on
//! a small square factor; one-sided Jacobi then delivers singular values
//! with high relative accuracy, which matters for the ill-conditioned test
//! matrices (condition numbers around 1e6) used throughout.

use super::qr::{qr, qr_r_only};
use crate::mat::{dot, norm2, DenseMat, Mat};
use crate::{Error, Result};

/// Compact SVD `A = U diag(sigma) V^T` with detected rank `r`.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    /// `n x r`, orthonormal columns.
    pub u: DenseMat,
    /// `r` positive values, nonincreasing.
    pub sigma: Vec<f64>,
    /// `d x r`, orthonormal columns.
    pub v: DenseMat,
    /// Count of singular values above `rank_tol * sigma_max`.
    pub r: usize,
}

const MAX_SWEEPS: usize = 60;
const ORTH_TOL: f64 = 1e-14;

/// Cyclic one-sided Jacobi: orthogonalize the columns of `w` by plane
/// rotations, accumulating them into `v` when present. On return the columns
/// of `w` are `u_j * sigma_j`.
fn one_sided_jacobi(w: &mut DenseMat, mut v: Option<&mut DenseMat>) {
    let k = w.cols();
    if k < 2 {
        return;
    }
    for _sweep in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k - 1 {
            for q in p + 1..k {
                let (app, aqq, apq) = {
                    let wp = w.col(p);
                    let wq = w.col(q);
                    (dot(wp, wp), dot(wq, wq), dot(wp, wq))
                };
                if app == 0.0 || aqq == 0.0 {
                    continue;
                }
                if apq.abs() <= ORTH_TOL * (app * aqq).sqrt() {
                    continue;
                }
                let tau = (aqq - app) / (2.0 * apq);
                let t = if tau.abs() > 1e100 {
                    0.5 / tau
                } else {
                    let sign = if tau >= 0.0 { 1.0 } else { -1.0 };
                    sign / (tau.abs() + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_cols(w, p, q, c, s);
                if let Some(vm) = v.as_deref_mut() {
                    rotate_cols(vm, p, q, c, s);
                }
                rotated = true;
            }
        }
        if !rotated {
            break;
        }
    }
}

/// `(col_p, col_q) <- (c*col_p - s*col_q, s*col_p + c*col_q)` for `p < q`.
#[inline]
fn rotate_cols(m: &mut DenseMat, p: usize, q: usize, c: f64, s: f64) {
    debug_assert!(p < q);
    let n = m.rows();
    let data = m.data_mut();
    let (left, right) = data.split_at_mut(q * n);
    let wp = &mut left[p * n..(p + 1) * n];
    let wq = &mut right[..n];
    for (vp, vq) in wp.iter_mut().zip(wq.iter_mut()) {
        let a = *vp;
        let b = *vq;
        *vp = c * a - s * b;
        *vq = s * a + c * b;
    }
}

/// Compact SVD with relative rank tolerance.
pub fn svd_compact(a: &DenseMat, rank_tol: f64) -> Result<SvdFactors> {
    if rank_tol < 0.0 {
        return Err(Error::InvalidArg(format!("rank_tol must be >= 0, got {rank_tol}")));
    }
    if !a.data().iter().all(|v| v.is_finite()) {
        return Err(Error::NonFinite("svd input"));
    }
    if a.rows() >= a.cols() {
        svd_tall(a, rank_tol)
    } else {
        let f = svd_tall(&a.transpose(), rank_tol)?;
        Ok(SvdFactors { u: f.v, sigma: f.sigma, v: f.u, r: f.r })
    }
}

fn svd_tall(a: &DenseMat, rank_tol: f64) -> Result<SvdFactors> {
    let d = a.cols();
    let (q1, mut work) = if a.rows() > d {
        let (q1, r) = qr(a);
        (Some(q1), r)
    } else {
        (None, a.clone())
    };
    let mut v = DenseMat::identity(d);
    one_sided_jacobi(&mut work, Some(&mut v));

    let mut order: Vec<(f64, usize)> = (0..d).map(|j| (norm2(work.col(j)), j)).collect();
    order.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    let sigma_max = order.first().map(|t| t.0).unwrap_or(0.0);
    let r = order.iter().take_while(|(s, _)| *s > rank_tol * sigma_max && *s > 0.0).count();

    let mut u_small = DenseMat::zeros(work.rows(), r);
    let mut v_out = DenseMat::zeros(d, r);
    let mut sigma = Vec::with_capacity(r);
    for (out_j, &(s, j)) in order.iter().take(r).enumerate() {
        sigma.push(s);
        let inv = 1.0 / s;
        for (t, &x) in u_small.col_mut(out_j).iter_mut().zip(work.col(j).to_vec().iter()) {
            *t = x * inv;
        }
        let vs = v.col(j).to_vec();
        v_out.col_mut(out_j).copy_from_slice(&vs);
    }
    let u = match q1 {
        Some(q) => q.matmul(&u_small),
        None => u_small,
    };
    Ok(SvdFactors { u, sigma, v: v_out, r })
}

/// All `min(n, d)` singular values in nonincreasing order, without forming
/// `U` or `V`. Cheap path for condition numbers and distortion measurements.
pub fn singular_values(a: &DenseMat) -> Vec<f64> {
    let work0 = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let mut work = if work0.rows() > work0.cols() { qr_r_only(&work0) } else { work0 };
    one_sided_jacobi(&mut work, None);
    let mut s: Vec<f64> = (0..work.cols()).map(|j| norm2(work.col(j))).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Minimal-norm least-squares solution through the truncated pseudoinverse:
/// `x = V diag(1/sigma) U^T b`. Returns the solution and `||A x - b||_2`.
pub fn svd_solve_min_norm(a: &Mat, b: &[f64], rank_tol: f64) -> Result<(Vec<f64>, f64)> {
    let dense = a.to_dense();
    let f = svd_compact(&dense, rank_tol)?;
    let mut x = vec![0.0; a.cols()];
    for j in 0..f.r {
        let coef = dot(f.u.col(j), b) / f.sigma[j];
        crate::mat::axpy(coef, f.v.col(j), &mut x);
    }
    let resid = crate::mat::residual_norm(a, &x, b);
    Ok((x, resid))
}
