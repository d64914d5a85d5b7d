//! Deterministic generators for the random test problems.
//!
//! Dense families: an incoherent type built from orthogonalized Gaussian
//! factors with singular values equally spaced from 1 to 1e6, a
//! semi-coherent type that plants an identity block, and a fully coherent
//! `[I; 0]` type. Sparse families start from a Bernoulli(0.01) pattern with
//! standard-normal values and geometric column scaling, then get their rows
//! rescaled by powers of a Gaussian diagonal to push leverage onto a few
//! rows. All generators are pure functions of `(dims, seed)`.

use crate::mat::{DenseMat, Mat, SparseMat};
use crate::rng::{label, Rng64};
use crate::{Error, Result};

/// Problem families understood by the generators and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    IncoherentDense,
    SemicoherentDense,
    CoherentDense,
    IncoherentSparse,
    SemicoherentSparse,
    CoherentSparse,
    IdentityBlock,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::IncoherentDense => "incoherent_dense",
            Family::SemicoherentDense => "semicoherent_dense",
            Family::CoherentDense => "coherent_dense",
            Family::IncoherentSparse => "incoherent_sparse",
            Family::SemicoherentSparse => "semicoherent_sparse",
            Family::CoherentSparse => "coherent_sparse",
            Family::IdentityBlock => "identity_block",
        }
    }

    pub fn is_sparse(self) -> bool {
        matches!(
            self,
            Family::IncoherentSparse | Family::SemicoherentSparse | Family::CoherentSparse
        )
    }
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "incoherent_dense" => Family::IncoherentDense,
            "semicoherent_dense" => Family::SemicoherentDense,
            "coherent_dense" => Family::CoherentDense,
            "incoherent_sparse" => Family::IncoherentSparse,
            "semicoherent_sparse" => Family::SemicoherentSparse,
            "coherent_sparse" => Family::CoherentSparse,
            "identity_block" => Family::IdentityBlock,
            other => return Err(Error::InvalidArg(format!("unknown family '{other}'"))),
        })
    }
}

/// A generatable problem: family, dimensions, optional rank parameter
/// (identity_block only), and seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProblemSpec {
    pub family: Family,
    pub n: usize,
    pub d: usize,
    pub r: Option<usize>,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn generate(&self) -> Result<Mat> {
        if self.n < self.d || self.d == 0 {
            return Err(Error::InvalidArg(format!(
                "problem needs n >= d >= 1, got {} x {}",
                self.n, self.d
            )));
        }
        Ok(match self.family {
            Family::IncoherentDense => Mat::Dense(gen_incoherent_dense(self.n, self.d, self.seed)?),
            Family::SemicoherentDense => {
                Mat::Dense(gen_semicoherent_dense(self.n, self.d, self.seed)?)
            }
            Family::CoherentDense => Mat::Dense(gen_coherent_dense(self.n, self.d)),
            Family::IncoherentSparse => {
                Mat::Sparse(gen_incoherent_sparse(self.n, self.d, self.seed)?)
            }
            Family::SemicoherentSparse => {
                Mat::Sparse(gen_semicoherent_sparse(self.n, self.d, self.seed)?)
            }
            Family::CoherentSparse => Mat::Sparse(gen_coherent_sparse(self.n, self.d, self.seed)?),
            Family::IdentityBlock => {
                let r = self.r.unwrap_or(self.d);
                Mat::Dense(gen_identity_block(self.n, self.d, r)?)
            }
        })
    }
}

/// Gaussian matrix with per-column substreams.
fn gaussian_dense(n: usize, d: usize, seed: u64, lbl: u64) -> DenseMat {
    let mut a = DenseMat::zeros(n, d);
    for j in 0..d {
        let mut rng = Rng64::substream(seed, lbl, j as u64);
        for v in a.col_mut(j) {
            *v = rng.normal();
        }
    }
    a
}

/// Orthonormal `n x d` factor: Householder QR of a Gaussian draw with the
/// triangular diagonal fixed nonnegative, so the draw is deterministic.
pub fn haar_factor(n: usize, d: usize, seed: u64) -> DenseMat {
    let g = gaussian_dense(n, d, seed, label::ORTHO);
    let (q, _) = crate::kernels::qr(&g);
    q
}

/// Incoherent dense type: `U Sigma V^T` with orthogonalized Gaussian
/// factors and singular values equally spaced from 1 to 1e6.
pub fn gen_incoherent_dense(n: usize, d: usize, seed: u64) -> Result<DenseMat> {
    if n < d {
        return Err(Error::InvalidArg(format!("incoherent dense needs n >= d, got {n} x {d}")));
    }
    let u = haar_factor(n, d, seed);
    let v = haar_factor(d, d, seed ^ 0x5eed_0001);
    let mut us = u;
    for j in 0..d {
        let sigma = spaced_sigma(j, d);
        for t in us.col_mut(j) {
            *t *= sigma;
        }
    }
    Ok(us.matmul(&v.transpose()))
}

/// Equally spaced grid from 1 to 1e6; a single column degenerates to 1.
fn spaced_sigma(j: usize, d: usize) -> f64 {
    if d == 1 {
        1.0
    } else {
        1.0 + (1e6 - 1.0) * j as f64 / (d - 1) as f64
    }
}

/// Semi-coherent dense type: `[B 0; 0 I_{d/2}] + 1e-8 J` with `B` an
/// incoherent dense draw.
pub fn gen_semicoherent_dense(n: usize, d: usize, seed: u64) -> Result<DenseMat> {
    if d % 2 != 0 {
        return Err(Error::InvalidArg(format!("semicoherent dense needs even d, got {d}")));
    }
    if n < d {
        return Err(Error::InvalidArg(format!("semicoherent dense needs n >= d, got {n} x {d}")));
    }
    let half = d / 2;
    let b = gen_incoherent_dense(n - half, half, seed)?;
    let mut a = DenseMat::zeros(n, d);
    for j in 0..half {
        for i in 0..n - half {
            a.set(i, j, b.at(i, j));
        }
    }
    for k in 0..half {
        a.set(n - half + k, half + k, 1.0);
    }
    for j in 0..d {
        for i in 0..n {
            a.set(i, j, a.at(i, j) + 1e-8);
        }
    }
    Ok(a)
}

/// Coherent dense type: `[I_d; 0] + 1e-8 J`. Deterministic.
pub fn gen_coherent_dense(n: usize, d: usize) -> DenseMat {
    let mut a = DenseMat::zeros(n, d);
    for j in 0..d {
        for i in 0..n {
            a.set(i, j, if i == j { 1.0 + 1e-8 } else { 1e-8 });
        }
    }
    a
}

/// Incoherent sparse type, in the spirit of `sprandn(n, d, 0.01, 1e-6)`:
/// each entry present independently with probability 0.01 and standard
/// normal value, then columns scaled geometrically from 1 down to 1e-6 to
/// put the condition number near 1e6.
pub fn gen_incoherent_sparse(n: usize, d: usize, seed: u64) -> Result<SparseMat> {
    let density = 0.01;
    if (n as f64) * density < 1.0 {
        return Err(Error::InvalidArg(format!(
            "sparse generator needs n * 0.01 >= 1 for full rank, got n = {n}"
        )));
    }
    let mut triplets = Vec::new();
    for j in 0..d {
        let mut pat = Rng64::substream(seed, label::PATTERN, j as u64);
        let mut val = Rng64::substream(seed, label::VALUES, j as u64);
        let scale = if d == 1 { 1.0 } else { 10f64.powf(-6.0 * j as f64 / (d - 1) as f64) };
        for i in 0..n {
            if pat.uniform() < density {
                triplets.push((i, j, val.normal() * scale));
            }
        }
    }
    SparseMat::from_triplets(n, d, &triplets)
}

/// Semi-coherent sparse type: `Dhat^5 B` with `B` incoherent sparse and
/// `Dhat` a standard-normal diagonal. Elementwise powers keep the sign:
/// `g^k = sign(g) |g|^k`.
pub fn gen_semicoherent_sparse(n: usize, d: usize, seed: u64) -> Result<SparseMat> {
    scaled_sparse(n, d, seed, 5)
}

/// Coherent sparse type: `Dhat^20 B`.
pub fn gen_coherent_sparse(n: usize, d: usize, seed: u64) -> Result<SparseMat> {
    scaled_sparse(n, d, seed, 20)
}

fn scaled_sparse(n: usize, d: usize, seed: u64, power: i32) -> Result<SparseMat> {
    let mut b = gen_incoherent_sparse(n, d, seed)?;
    let mut rng = Rng64::substream(seed, label::DIAG, 0);
    let scales: Vec<f64> = (0..n)
        .map(|_| {
            let g: f64 = rng.normal();
            g.signum() * g.abs().powi(power)
        })
        .collect();
    b.scale_rows(&scales);
    Ok(b)
}

/// `[[I_r, 0], [0, 0]]`: rank `r`, coherence exactly 1.
pub fn gen_identity_block(n: usize, d: usize, r: usize) -> Result<DenseMat> {
    if r > d || d > n {
        return Err(Error::InvalidArg(format!(
            "identity block needs r <= d <= n, got r = {r}, d = {d}, n = {n}"
        )));
    }
    let mut a = DenseMat::zeros(n, d);
    for i in 0..r {
        a.set(i, i, 1.0);
    }
    Ok(a)
}

/// The all-ones right-hand side used by every benchmark run.
pub fn rhs_ones(n: usize) -> Vec<f64> {
    vec![1.0; n]
}
