//! Random sketching operators.
//!
//! Hashing sketches place a few signed entries in every column so that
//! `S A` touches each row of `A`; sampling keeps a random subset of rows;
//! the transform sketches first mix the input with a signed fast transform
//! (Walsh-Hadamard or Hartley) to spread out any concentrated rows, then
//! hash or sample the mixed rows. Generation is a pure function of
//! `(spec.seed, n)` with per-column substreams, so a sketch is reproducible
//! independent of iteration order.

mod transform;

pub use transform::{fdht, fdht_with_plan, fwht, Fft};

use crate::mat::{DenseMat, Mat};
use crate::rng::{label, Rng64};
use crate::{Error, Result};

/// The sketch distributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SketchKind {
    SHashing,
    SHashingVariant,
    Gaussian,
    Sampling,
    HrDht,
    SrDht,
    Hrht,
}

impl SketchKind {
    pub fn uses_s(self) -> bool {
        matches!(self, SketchKind::SHashing | SketchKind::SHashingVariant | SketchKind::HrDht | SketchKind::Hrht)
    }

    pub fn name(self) -> &'static str {
        match self {
            SketchKind::SHashing => "s_hashing",
            SketchKind::SHashingVariant => "s_hashing_variant",
            SketchKind::Gaussian => "gaussian",
            SketchKind::Sampling => "sampling",
            SketchKind::HrDht => "hr_dht",
            SketchKind::SrDht => "sr_dht",
            SketchKind::Hrht => "hrht",
        }
    }
}

impl std::str::FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "s_hashing" => SketchKind::SHashing,
            "s_hashing_variant" => SketchKind::SHashingVariant,
            "gaussian" => SketchKind::Gaussian,
            "sampling" => SketchKind::Sampling,
            "hr_dht" => SketchKind::HrDht,
            "sr_dht" => SketchKind::SrDht,
            "hrht" => SketchKind::Hrht,
            other => return Err(Error::InvalidArg(format!("unknown sketch kind '{other}'"))),
        })
    }
}

impl std::fmt::Display for SketchKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Description of a sketch distribution. `s` is only read by the hashing
/// kinds; the transform kinds use it for their downstream hashing stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SketchSpec {
    pub kind: SketchKind,
    pub m: usize,
    pub s: usize,
    pub seed: u64,
}

impl SketchSpec {
    pub fn new(kind: SketchKind, m: usize, s: usize, seed: u64) -> Self {
        SketchSpec { kind, m, s, seed }
    }

    /// Same distribution, independently re-seeded for Monte-Carlo trial `t`.
    pub fn reseeded(&self, t: u64) -> Self {
        let mut derived = Rng64::substream(self.seed, label::TRIAL, t);
        SketchSpec { seed: derived.next_u64(), ..*self }
    }
}

/// Realized hashing sketch: per-column lists of `(row, value)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct HashSketch {
    pub m: usize,
    pub n: usize,
    cols: Vec<Vec<(usize, f64)>>,
}

impl HashSketch {
    pub fn col(&self, j: usize) -> &[(usize, f64)] {
        &self.cols[j]
    }

    /// Dense `m x n` materialization, for test oracles.
    pub fn to_dense(&self) -> DenseMat {
        let mut s = DenseMat::zeros(self.m, self.n);
        for (j, col) in self.cols.iter().enumerate() {
            for &(i, v) in col {
                s.set(i, j, v);
            }
        }
        s
    }
}

/// Which transform mixes the input before hashing/sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Wht,
    Dht,
}

/// The stage applied after the randomized transform.
#[derive(Debug, Clone, PartialEq)]
pub enum Downstream {
    Hash(HashSketch),
    Sample(Vec<usize>),
}

/// Realized transform sketch `S_h F D` / `S_s F D`: sign diagonal on the
/// original `n` coordinates, zero-padding to `n_pad`, fast transform, then
/// the downstream stage on the `n_pad` mixed coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TransformSketch {
    pub n: usize,
    pub n_pad: usize,
    pub signs: Vec<f64>,
    pub transform: Transform,
    pub downstream: Downstream,
}

/// A realized sketch, applicable to matrices and vectors.
#[derive(Debug, Clone, PartialEq)]
pub enum SketchOp {
    Hash(HashSketch),
    Transform(TransformSketch),
    /// Explicit dense sketch (Gaussian draws, or arbitrary matrices in tests).
    Dense(DenseMat),
    Sample(Vec<usize>),
}

fn check_hashing_dims(spec: &SketchSpec) -> Result<()> {
    if spec.m == 0 {
        return Err(Error::InvalidArg("sketch needs m >= 1".into()));
    }
    if spec.s == 0 || spec.s > spec.m {
        return Err(Error::InvalidArg(format!(
            "hashing needs 1 <= s <= m, got s = {}, m = {}",
            spec.s, spec.m
        )));
    }
    Ok(())
}

/// `s`-hashing (rows without replacement): each column gets exactly `s`
/// distinct rows, each entry independently `±1/sqrt(s)`.
pub fn gen_s_hashing(spec: &SketchSpec, n: usize) -> Result<HashSketch> {
    check_hashing_dims(spec)?;
    let scale = 1.0 / (spec.s as f64).sqrt();
    let cols = (0..n)
        .map(|j| {
            let mut rows_rng = Rng64::substream(spec.seed, label::HASH_ROWS, j as u64);
            let mut signs_rng = Rng64::substream(spec.seed, label::HASH_SIGNS, j as u64);
            let rows = rows_rng.distinct_below(spec.m, spec.s);
            rows.into_iter().map(|i| (i, signs_rng.sign() * scale)).collect()
        })
        .collect();
    Ok(HashSketch { m: spec.m, n, cols })
}

/// `s`-hashing variant (rows with replacement): per column, `s` draws each
/// adding `±1/sqrt(s)`; coincident draws accumulate, exact cancellations
/// drop out of the support.
pub fn gen_s_hashing_variant(spec: &SketchSpec, n: usize) -> Result<HashSketch> {
    check_hashing_dims(spec)?;
    let scale = 1.0 / (spec.s as f64).sqrt();
    let cols = (0..n)
        .map(|j| {
            let mut rows_rng = Rng64::substream(spec.seed, label::HASH_ROWS, j as u64);
            let mut signs_rng = Rng64::substream(spec.seed, label::HASH_SIGNS, j as u64);
            let mut acc: Vec<(usize, f64)> = Vec::with_capacity(spec.s);
            for _ in 0..spec.s {
                let i = rows_rng.below(spec.m);
                let v = signs_rng.sign() * scale;
                match acc.iter_mut().find(|(r, _)| *r == i) {
                    Some(slot) => slot.1 += v,
                    None => acc.push((i, v)),
                }
            }
            acc.retain(|&(_, v)| v != 0.0);
            acc.sort_unstable_by_key(|&(r, _)| r);
            acc
        })
        .collect();
    Ok(HashSketch { m: spec.m, n, cols })
}

/// Builds the variant distribution the long way round, as
/// `(1/sqrt(s)) [S^(1) + ... + S^(s)]` from independent 1-hashing draws.
/// Kept as a distributional-equivalence oracle for `gen_s_hashing_variant`.
pub fn gen_variant_via_sum(spec: &SketchSpec, n: usize) -> Result<HashSketch> {
    check_hashing_dims(spec)?;
    let scale = 1.0 / (spec.s as f64).sqrt();
    let cols = (0..n)
        .map(|j| {
            let mut acc: Vec<(usize, f64)> = Vec::with_capacity(spec.s);
            for k in 0..spec.s {
                // independent 1-hashing matrices: substream per (term, column)
                let idx = (k as u64) << 32 | j as u64;
                let mut rows_rng = Rng64::substream(spec.seed, label::HASH_ROWS, idx);
                let mut signs_rng = Rng64::substream(spec.seed, label::HASH_SIGNS, idx);
                let i = rows_rng.below(spec.m);
                let v = signs_rng.sign() * scale;
                match acc.iter_mut().find(|(r, _)| *r == i) {
                    Some(slot) => slot.1 += v,
                    None => acc.push((i, v)),
                }
            }
            acc.retain(|&(_, v)| v != 0.0);
            acc.sort_unstable_by_key(|&(r, _)| r);
            acc
        })
        .collect();
    Ok(HashSketch { m: spec.m, n, cols })
}

/// Row-sampling sketch: `m` uniform independent row indices (with
/// replacement); applying it selects rows, no scaling.
pub fn gen_sampling(spec: &SketchSpec, n: usize) -> Vec<usize> {
    let mut rng = Rng64::substream(spec.seed, label::SAMPLING, 0);
    (0..spec.m).map(|_| rng.below(n)).collect()
}

/// Scaled Gaussian sketch: `m x n` with i.i.d. `N(0, 1/m)` entries
/// (standard deviation `1/sqrt(m)`).
pub fn gen_gaussian(spec: &SketchSpec, n: usize) -> DenseMat {
    let mut g = DenseMat::zeros(spec.m, n);
    let sd = 1.0 / (spec.m as f64).sqrt();
    for j in 0..n {
        let mut rng = Rng64::substream(spec.seed, label::GAUSSIAN, j as u64);
        for v in g.col_mut(j) {
            *v = rng.normal() * sd;
        }
    }
    g
}

fn gen_transform(spec: &SketchSpec, n: usize, transform: Transform, sample: bool) -> Result<TransformSketch> {
    let n_pad = n.next_power_of_two();
    let mut signs_rng = Rng64::substream(spec.seed, label::TRANSFORM_SIGNS, 0);
    let signs: Vec<f64> = (0..n).map(|_| signs_rng.sign()).collect();
    let inner = SketchSpec { seed: spec.seed, ..*spec };
    let downstream = if sample {
        Downstream::Sample(gen_sampling(&inner, n_pad))
    } else {
        Downstream::Hash(gen_s_hashing(&inner, n_pad)?)
    };
    Ok(TransformSketch { n, n_pad, signs, transform, downstream })
}

/// Draw a sketch from the distribution described by `spec` for inputs with
/// `n` rows.
pub fn realize(spec: &SketchSpec, n: usize) -> Result<SketchOp> {
    if n == 0 {
        return Err(Error::InvalidArg("sketch input dimension must be >= 1".into()));
    }
    Ok(match spec.kind {
        SketchKind::SHashing => SketchOp::Hash(gen_s_hashing(spec, n)?),
        SketchKind::SHashingVariant => SketchOp::Hash(gen_s_hashing_variant(spec, n)?),
        SketchKind::Gaussian => SketchOp::Dense(gen_gaussian(spec, n)),
        SketchKind::Sampling => SketchOp::Sample(gen_sampling(spec, n)),
        SketchKind::HrDht => SketchOp::Transform(gen_transform(spec, n, Transform::Dht, false)?),
        SketchKind::SrDht => SketchOp::Transform(gen_transform(spec, n, Transform::Dht, true)?),
        SketchKind::Hrht => SketchOp::Transform(gen_transform(spec, n, Transform::Wht, false)?),
    })
}

impl HashSketch {
    /// Apply to the columns of a dense work matrix (`n` rows), producing the
    /// `m x d` sketched matrix. Cost `O(s n d)`.
    fn apply_dense(&self, a: &DenseMat) -> DenseMat {
        assert_eq!(a.rows(), self.n, "hash sketch dimension mismatch");
        let d = a.cols();
        let mut out = DenseMat::zeros(self.m, d);
        for j in 0..d {
            let src = a.col(j);
            let dst = out.col_mut(j);
            for (i, &x) in src.iter().enumerate() {
                if x != 0.0 {
                    for &(r, v) in &self.cols[i] {
                        dst[r] += v * x;
                    }
                }
            }
        }
        out
    }

    /// Sparse input path touching only stored entries: cost `O(s nnz(A))`.
    fn apply_sparse(&self, a: &crate::mat::SparseMat) -> DenseMat {
        assert_eq!(a.rows(), self.n, "hash sketch dimension mismatch");
        let mut out = DenseMat::zeros(self.m, a.cols());
        for i in 0..a.rows() {
            for (jcol, x) in a.row(i) {
                for &(r, v) in &self.cols[i] {
                    out.set(r, jcol, out.at(r, jcol) + v * x);
                }
            }
        }
        out
    }

    fn apply_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "hash sketch vector length mismatch");
        let mut out = vec![0.0; self.m];
        for (i, &x) in b.iter().enumerate() {
            if x != 0.0 {
                for &(r, v) in &self.cols[i] {
                    out[r] += v * x;
                }
            }
        }
        out
    }
}

impl TransformSketch {
    /// `D`-scale, zero-pad, transform each column, then hash/sample.
    fn apply_to_dense(&self, am: &DenseMat) -> DenseMat {
        assert_eq!(am.rows(), self.n, "transform sketch dimension mismatch");
        let d = am.cols();
        let mut w = DenseMat::zeros(self.n_pad, d);
        for j in 0..d {
            let src = am.col(j);
            let dst = w.col_mut(j);
            for i in 0..self.n {
                dst[i] = src[i] * self.signs[i];
            }
        }
        self.finish(w)
    }

    fn apply_to_sparse(&self, am: &crate::mat::SparseMat) -> DenseMat {
        assert_eq!(am.rows(), self.n, "transform sketch dimension mismatch");
        let mut w = DenseMat::zeros(self.n_pad, am.cols());
        for i in 0..am.rows() {
            for (j, v) in am.row(i) {
                w.set(i, j, v * self.signs[i]);
            }
        }
        self.finish(w)
    }

    fn apply_vec(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n, "transform sketch vector length mismatch");
        let mut w = DenseMat::zeros(self.n_pad, 1);
        for i in 0..self.n {
            w.set(i, 0, b[i] * self.signs[i]);
        }
        self.finish(w).col(0).to_vec()
    }

    fn finish(&self, mut w: DenseMat) -> DenseMat {
        let d = w.cols();
        match self.transform {
            Transform::Wht => {
                for j in 0..d {
                    fwht(w.col_mut(j)).expect("padded length is a power of two");
                }
            }
            Transform::Dht => {
                let plan = Fft::new(self.n_pad).expect("padded length is a power of two");
                let mut scratch = vec![0.0; self.n_pad];
                for j in 0..d {
                    fdht_with_plan(&plan, w.col_mut(j), &mut scratch);
                }
            }
        }
        match &self.downstream {
            Downstream::Hash(h) => h.apply_dense(&w),
            Downstream::Sample(idx) => {
                let mut out = DenseMat::zeros(idx.len(), d);
                for j in 0..d {
                    let src = w.col(j);
                    let dst = out.col_mut(j);
                    for (t, &i) in idx.iter().enumerate() {
                        dst[t] = src[i];
                    }
                }
                out
            }
        }
    }
}

impl SketchOp {
    /// Output row count.
    pub fn rows(&self) -> usize {
        match self {
            SketchOp::Hash(h) => h.m,
            SketchOp::Transform(t) => match &t.downstream {
                Downstream::Hash(h) => h.m,
                Downstream::Sample(idx) => idx.len(),
            },
            SketchOp::Dense(g) => g.rows(),
            SketchOp::Sample(idx) => idx.len(),
        }
    }

    /// The sketched matrix `S A`, always dense.
    pub fn apply(&self, a: &Mat) -> DenseMat {
        match a {
            Mat::Dense(am) => self.apply_to_dense(am),
            Mat::Sparse(am) => self.apply_to_sparse(am),
        }
    }

    pub fn apply_to_dense(&self, am: &DenseMat) -> DenseMat {
        match self {
            SketchOp::Hash(h) => h.apply_dense(am),
            SketchOp::Transform(t) => t.apply_to_dense(am),
            SketchOp::Dense(g) => {
                assert_eq!(g.cols(), am.rows(), "dense sketch dimension mismatch");
                g.matmul(am)
            }
            SketchOp::Sample(idx) => {
                let mut out = DenseMat::zeros(idx.len(), am.cols());
                for j in 0..am.cols() {
                    let src = am.col(j);
                    let dst = out.col_mut(j);
                    for (t, &i) in idx.iter().enumerate() {
                        dst[t] = src[i];
                    }
                }
                out
            }
        }
    }

    fn apply_to_sparse(&self, am: &crate::mat::SparseMat) -> DenseMat {
        match self {
            SketchOp::Hash(h) => h.apply_sparse(am),
            SketchOp::Transform(t) => t.apply_to_sparse(am),
            SketchOp::Dense(g) => {
                assert_eq!(g.cols(), am.rows(), "dense sketch dimension mismatch");
                let mut out = DenseMat::zeros(g.rows(), am.cols());
                for i in 0..am.rows() {
                    for (j, v) in am.row(i) {
                        crate::mat::axpy(v, g.col(i), out.col_mut(j));
                    }
                }
                out
            }
            SketchOp::Sample(idx) => {
                let mut out = DenseMat::zeros(idx.len(), am.cols());
                for (t, &i) in idx.iter().enumerate() {
                    for (j, v) in am.row(i) {
                        out.set(t, j, v);
                    }
                }
                out
            }
        }
    }

    /// The sketched vector `S b`.
    pub fn apply_vec(&self, b: &[f64]) -> Vec<f64> {
        match self {
            SketchOp::Hash(h) => h.apply_vec(b),
            SketchOp::Transform(t) => t.apply_vec(b),
            SketchOp::Dense(g) => g.matvec(b, false),
            SketchOp::Sample(idx) => idx.iter().map(|&i| b[i]).collect(),
        }
    }
}
