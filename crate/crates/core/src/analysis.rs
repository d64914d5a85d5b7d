//! Embedding-quality diagnostics.
//!
//! The central quantity is the measured subspace-embedding distortion of a
//! sketch `S` on a matrix `A`: with `U` the orthonormal left factor of `A`,
//! the extreme singular values of `S U` characterize the distortion exactly,
//! with no sampling of directions. Everything else (failure rates, the
//! preconditioner condition number, coherence-reduction checks) builds on
//! that.

use crate::kernels::{singular_values, svd_compact, tri_solve, CpqrFactors};
use crate::mat::{norm2, DenseMat, Mat};
use crate::rng::{label, Rng64};
use crate::sketch::{fwht, realize, SketchOp, SketchSpec};
use crate::{Error, Result};
use rayon::prelude::*;

/// Rank tolerance used when factoring inputs for diagnostics.
const DIAG_RANK_TOL: f64 = 1e-12;

/// Relative cutoff deciding whether a sketched factor kept full rank.
const RANK_EPS: f64 = 1e-10;

/// Measured distortion of a sketch on a subspace.
#[derive(Debug, Clone, Copy)]
pub struct DistortionReport {
    /// Smallest singular value of `S U` (0 when rank is lost).
    pub sigma_min: f64,
    /// Largest singular value of `S U`.
    pub sigma_max: f64,
    /// `max(1 - sigma_min^2, sigma_max^2 - 1)`.
    pub epsilon: f64,
    /// Whether `S U` kept the full rank of `U`.
    pub rank_preserved: bool,
}

/// Coherence: the largest Euclidean row norm of the orthonormal left factor
/// of `A`. Always within `[sqrt(r/n), 1]`.
pub fn coherence(a: &Mat) -> Result<f64> {
    let f = svd_compact(&a.to_dense(), DIAG_RANK_TOL)?;
    if f.r == 0 {
        return Err(Error::RankZero);
    }
    Ok(max_row_norm(&f.u))
}

fn max_row_norm(u: &DenseMat) -> f64 {
    let (n, r) = (u.rows(), u.cols());
    let mut best = 0.0f64;
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..r {
            let v = u.at(i, j);
            acc += v * v;
        }
        best = best.max(acc);
    }
    best.sqrt()
}

/// Non-uniformity of a vector: `||x||_inf / ||x||_2`, in `[1/sqrt(n), 1]`.
pub fn non_uniformity(x: &[f64]) -> Result<f64> {
    let norm = norm2(x);
    if norm == 0.0 {
        return Err(Error::InvalidArg("non_uniformity of the zero vector".into()));
    }
    let max = x.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    Ok(max / norm)
}

/// Distortion of a realized sketch on `A`, via the singular values of `S U`.
pub fn embedding_distortion(op: &SketchOp, a: &Mat) -> Result<DistortionReport> {
    let f = svd_compact(&a.to_dense(), DIAG_RANK_TOL)?;
    if f.r == 0 {
        return Err(Error::RankZero);
    }
    Ok(distortion_of_factor(op, &f.u))
}

/// Same as `embedding_distortion` but with the orthonormal factor already in
/// hand; used by the Monte-Carlo loops to factor `A` once.
pub fn distortion_of_factor(op: &SketchOp, u: &DenseMat) -> DistortionReport {
    let su = op.apply_to_dense(u);
    let sv = singular_values(&su);
    let r = u.cols();
    let sigma_max = sv.first().copied().unwrap_or(0.0);
    let sigma_r = if sv.len() >= r { sv[r - 1] } else { 0.0 };
    let rank_preserved = sigma_r > RANK_EPS * sigma_max;
    let sigma_min = if rank_preserved { sigma_r } else { 0.0 };
    let epsilon = (1.0 - sigma_min * sigma_min).max(sigma_max * sigma_max - 1.0).max(0.0);
    DistortionReport { sigma_min, sigma_max, epsilon, rank_preserved }
}

/// Condition number of the preconditioned matrix `W = A V1 R11^{-1}`,
/// materialized column by column and measured with the SVD kernel.
pub fn precond_quality(a: &Mat, f: &CpqrFactors) -> Result<f64> {
    let w = materialize_w(a, f)?;
    let sv = singular_values(&w);
    let lo = sv[f.p - 1];
    if lo == 0.0 {
        return Err(Error::RankZero);
    }
    Ok(sv[0] / lo)
}

/// `W = A V1 R11^{-1}` as a dense `n x p` matrix.
pub fn materialize_w(a: &Mat, f: &CpqrFactors) -> Result<DenseMat> {
    let p = f.p;
    let mut cols = Vec::with_capacity(p);
    let mut e = vec![0.0; p];
    for k in 0..p {
        e[k] = 1.0;
        let y = tri_solve(&f.r11, &e, false, 0.0)?;
        e[k] = 0.0;
        let v1y = f.apply_v1(&y);
        cols.push(a.matvec(&v1y, false));
    }
    Ok(DenseMat::from_cols(a.rows(), cols))
}

/// Fraction of independent sketch draws whose measured distortion exceeds
/// `epsilon` or which lose rank. Trials use substreams of `spec.seed`.
pub fn failure_rate(spec: &SketchSpec, a: &Mat, epsilon: f64, trials: usize) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArg("failure_rate needs trials >= 1".into()));
    }
    let f = svd_compact(&a.to_dense(), DIAG_RANK_TOL)?;
    if f.r == 0 {
        return Err(Error::RankZero);
    }
    let failures: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let op = realize(&spec.reseeded(t), a.rows()).expect("valid sketch spec");
            let rep = distortion_of_factor(&op, &f.u);
            usize::from(!rep.rank_preserved || rep.epsilon > epsilon)
        })
        .sum();
    Ok(failures as f64 / trials as f64)
}

/// Empirical frequency, over random sign diagonals `D`, of the
/// coherence-reduction bound
/// `mu(H D U) <= sqrt(r/n) + sqrt(8 log(n/delta1) / n)`
/// for the Walsh-Hadamard transform `H`.
pub fn coherence_reduction_check(
    n: usize,
    u: &DenseMat,
    delta1: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !n.is_power_of_two() {
        return Err(Error::PowerOfTwo(n));
    }
    if u.rows() != n {
        return Err(Error::Dim(format!("U has {} rows, expected {n}", u.rows())));
    }
    let r = u.cols();
    let bound = (r as f64 / n as f64).sqrt() + (8.0 * (n as f64 / delta1).ln() / n as f64).sqrt();
    let hits: usize = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = Rng64::substream(seed, label::TRIAL, t);
            let signs: Vec<f64> = (0..n).map(|_| rng.sign()).collect();
            let mut hdu = DenseMat::zeros(n, r);
            for j in 0..r {
                let src = u.col(j);
                let dst = hdu.col_mut(j);
                for i in 0..n {
                    dst[i] = src[i] * signs[i];
                }
                fwht(dst).expect("n is a power of two");
            }
            usize::from(max_row_norm(&hdu) <= bound)
        })
        .sum();
    Ok(hits as f64 / trials as f64)
}
