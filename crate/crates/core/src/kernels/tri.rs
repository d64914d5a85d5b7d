//! Triangular solves with an optional diagonal perturbation.
//!
//! The perturbed form divides by `r_ii + perturb` instead of `r_ii`, the
//! safeguard used when the factorization may have missed the numerical rank.
//! Diagonals are nonnegative by construction (see the QR kernels), so the
//! shift never cancels.

use crate::mat::{dot, DenseMat};
use crate::{Error, Result};

/// Solve `R y = v` (or `R^T y = v`) by back/forward substitution.
/// `perturb = 0` is an exact solve and reports a zero diagonal as an error.
pub fn tri_solve(r: &DenseMat, v: &[f64], transpose: bool, perturb: f64) -> Result<Vec<f64>> {
    let p = r.rows();
    assert_eq!(r.cols(), p, "tri_solve needs a square triangular factor");
    assert_eq!(v.len(), p, "tri_solve rhs length mismatch");
    if perturb < 0.0 {
        return Err(Error::InvalidArg(format!("perturb must be >= 0, got {perturb}")));
    }
    let mut y = v.to_vec();
    if !transpose {
        for j in (0..p).rev() {
            let div = r.at(j, j) + perturb;
            if div == 0.0 {
                return Err(Error::SingularDiagonal(j));
            }
            y[j] /= div;
            let yj = y[j];
            if yj != 0.0 {
                let col = &r.col(j)[..j];
                for (yi, rij) in y[..j].iter_mut().zip(col) {
                    *yi -= rij * yj;
                }
            }
        }
    } else {
        for j in 0..p {
            let div = r.at(j, j) + perturb;
            if div == 0.0 {
                return Err(Error::SingularDiagonal(j));
            }
            y[j] = (y[j] - dot(&r.col(j)[..j], &y[..j])) / div;
        }
    }
    Ok(y)
}

/// Diagonal-ratio proxy for the condition number of an upper-triangular
/// factor: `max_i |r_ii| / min_i |r_ii|`, a cheap lower bound on kappa.
/// Returns infinity when the smallest diagonal is zero.
pub fn tri_cond_estimate(r: &DenseMat) -> f64 {
    let p = r.rows();
    assert!(p >= 1, "tri_cond_estimate needs at least a 1x1 factor");
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..p {
        let d = r.at(i, i).abs();
        lo = lo.min(d);
        hi = hi.max(d);
    }
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}
