//! Sketch-precondition-solve for `min_x ||A x - b||_2`.
//!
//! The pipeline: draw a sketch `S`, form `S A` and `S b`; take a
//! rank-revealing factorization `S A = Q1 [R11 R12] Vhat^T` (optionally
//! reduced so `R12 = 0` for minimal-norm solutions); compute the explicit
//! sketched solution `x_s = V1 R11^{-1} Q1^T S b` and return it when its
//! residual already meets the absolute tolerance; otherwise run LSQR on
//! `min_y ||W y - b||` with `W = A V1 R11^{-1}` applied implicitly, and
//! recover `x = V1 R11^{-1} y`.

use crate::kernels::{complete_orthogonal, cpqr, tri_cond_estimate, tri_solve, CpqrFactors};
use crate::mat::{dot, norm2, residual_norm, scale_vec, Mat};
use crate::sketch::{realize, SketchKind, SketchSpec};
use crate::{Error, Result};
use std::time::Instant;

/// Solver parameters. `m_ratio` fixes the sketch size as `ceil(m_ratio * d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub kind: SketchKind,
    pub m_ratio: f64,
    pub s: usize,
    pub seed: u64,
    /// Absolute residual tolerance for the explicit early exit.
    pub tau_a: f64,
    /// Relative LSQR termination tolerance.
    pub tau_r: f64,
    pub it_max: usize,
    /// Rank-truncation threshold of the pivoted QR.
    pub rcond: f64,
    /// Conditioning threshold that triggers the perturbed back-solve.
    pub rcond_thres: f64,
    /// Diagonal perturbation used when triggered.
    pub perturb: f64,
    /// Reduce `R12` to zero so the recovered solution has minimal norm.
    pub min_norm: bool,
    /// Start LSQR from `y0 = Q1^T S b` instead of zero.
    pub warm_start: bool,
}

impl SolverConfig {
    /// Defaults for dense storage: hashed randomized Hartley transform,
    /// `m = 1.7 d`, one nonzero per column.
    pub fn dense_default(seed: u64) -> Self {
        SolverConfig {
            kind: SketchKind::HrDht,
            m_ratio: 1.7,
            s: 1,
            seed,
            tau_a: 1e-8,
            tau_r: 1e-6,
            it_max: 10_000,
            rcond: 1e-12,
            rcond_thres: 1e-10,
            perturb: 1e-10,
            min_norm: false,
            warm_start: false,
        }
    }

    /// Defaults for sparse storage: 2-hashing with `m = 1.4 d`.
    pub fn sparse_default(seed: u64) -> Self {
        SolverConfig {
            kind: SketchKind::SHashing,
            m_ratio: 1.4,
            s: 2,
            ..SolverConfig::dense_default(seed)
        }
    }

    /// Defaults chosen by the storage format of `a`.
    pub fn default_for(a: &Mat, seed: u64) -> Self {
        if a.is_sparse() {
            SolverConfig::sparse_default(seed)
        } else {
            SolverConfig::dense_default(seed)
        }
    }

    pub fn sketch_spec(&self, d: usize) -> SketchSpec {
        let m = (self.m_ratio * d as f64).ceil() as usize;
        SketchSpec::new(self.kind, m.max(1), self.s, self.seed)
    }
}

/// Which path produced the returned solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    Explicit,
    Iterative,
}

impl std::fmt::Display for Route {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Route::Explicit => "explicit",
            Route::Iterative => "iterative",
        })
    }
}

/// Wall-clock seconds spent in each stage.
#[derive(Debug, Clone, Copy, Default)]
pub struct StageTimes {
    pub sketch: f64,
    pub factorize: f64,
    pub explicit: f64,
    pub lsqr: f64,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub x: Vec<f64>,
    pub residual: f64,
    /// LSQR iterations; 0 on the explicit route.
    pub iterations: usize,
    /// Detected rank of the sketched matrix.
    pub p: usize,
    pub route: Route,
    /// Set when LSQR stopped at `it_max` with the best iterate so far.
    pub hit_it_max: bool,
    pub times: StageTimes,
}

/// The diagonal perturbation actually used for triangular solves: active
/// only when the diagonal-ratio proxy says `R11` is dangerously conditioned.
pub fn effective_perturb(f: &CpqrFactors, rcond_thres: f64, perturb: f64) -> f64 {
    if tri_cond_estimate(&f.r11) >= 1.0 / rcond_thres {
        perturb
    } else {
        0.0
    }
}

/// `W y = A (V1 (R11^{-1} y))`, never materializing `W`.
pub fn apply_w(f: &CpqrFactors, a: &Mat, y: &[f64], perturb: f64) -> Result<Vec<f64>> {
    let t = tri_solve(&f.r11, y, false, perturb)?;
    Ok(a.matvec(&f.apply_v1(&t), false))
}

/// `W^T v = R11^{-T} (V1^T (A^T v))`.
pub fn apply_wt(f: &CpqrFactors, a: &Mat, v: &[f64], perturb: f64) -> Result<Vec<f64>> {
    let at_v = a.matvec(v, true);
    tri_solve(&f.r11, &f.apply_v1t(&at_v), true, perturb)
}

/// `||A x_s - b||_2 <= tau_a`, the explicit-route acceptance test.
pub fn explicit_residual_check(a: &Mat, b: &[f64], x_s: &[f64], tau_a: f64) -> bool {
    residual_norm(a, x_s, b) <= tau_a
}

/// Outcome of the preconditioned LSQR stage.
#[derive(Debug, Clone)]
pub struct LsqrOutcome {
    pub y: Vec<f64>,
    pub iterations: usize,
    pub hit_it_max: bool,
}

/// Paige-Saunders LSQR on `min_y ||W y - b||` with `W` applied implicitly
/// through the factors. Terminates when
/// `||W^T r|| / (||W|| ||r||) <= tau_r`, with `||W||` the running Frobenius
/// estimate, or at `it_max`. `y0` (length `p`) seeds the iteration; `None`
/// starts from zero.
pub fn lsqr_preconditioned(
    a: &Mat,
    b: &[f64],
    f: &CpqrFactors,
    y0: Option<&[f64]>,
    tau_r: f64,
    it_max: usize,
    perturb: f64,
) -> Result<LsqrOutcome> {
    let p = f.p;
    let mut y = match y0 {
        Some(v) => {
            assert_eq!(v.len(), p, "warm start length mismatch");
            v.to_vec()
        }
        None => vec![0.0; p],
    };

    // u = b - W y0
    let mut u = b.to_vec();
    if y0.is_some() {
        let wy = apply_w(f, a, &y, perturb)?;
        for (ui, wi) in u.iter_mut().zip(&wy) {
            *ui -= wi;
        }
    }
    let mut beta = norm2(&u);
    if beta == 0.0 {
        return Ok(LsqrOutcome { y, iterations: 0, hit_it_max: false });
    }
    scale_vec(1.0 / beta, &mut u);

    let mut v = apply_wt(f, a, &u, perturb)?;
    let mut alpha = norm2(&v);
    if alpha == 0.0 {
        // W^T r = 0: the start point is already a least-squares solution.
        return Ok(LsqrOutcome { y, iterations: 0, hit_it_max: false });
    }
    scale_vec(1.0 / alpha, &mut v);

    let mut w = v.clone();
    let mut phibar = beta;
    let mut rhobar = alpha;
    let mut anorm2 = alpha * alpha;
    let mut iterations = 0;
    let mut hit_it_max = false;

    loop {
        if iterations >= it_max {
            hit_it_max = true;
            break;
        }
        iterations += 1;

        // bidiagonalization step
        let wv = apply_w(f, a, &v, perturb)?;
        for (ui, t) in u.iter_mut().zip(&wv) {
            *ui = t - alpha * *ui;
        }
        beta = norm2(&u);
        if beta > 0.0 {
            scale_vec(1.0 / beta, &mut u);
        }
        anorm2 += beta * beta;

        let wtu = apply_wt(f, a, &u, perturb)?;
        for (vi, t) in v.iter_mut().zip(&wtu) {
            *vi = t - beta * *vi;
        }
        alpha = norm2(&v);
        if alpha > 0.0 {
            scale_vec(1.0 / alpha, &mut v);
        }
        anorm2 += alpha * alpha;

        // plane rotation removing the subdiagonal
        let rho = rhobar.hypot(beta);
        let c = rhobar / rho;
        let s = beta / rho;
        let theta = s * alpha;
        rhobar = -c * alpha;
        let phi = c * phibar;
        phibar *= s;

        let t1 = phi / rho;
        let t2 = -theta / rho;
        for i in 0..p {
            y[i] += t1 * w[i];
            w[i] = v[i] + t2 * w[i];
        }

        // termination: ||W^T r|| / (||W|| ||r||) <= tau_r
        let rnorm = phibar;
        let arnorm = alpha * (c * phibar).abs();
        if rnorm == 0.0 {
            break;
        }
        let test2 = arnorm / (anorm2.sqrt() * rnorm);
        if test2 <= tau_r {
            break;
        }
    }
    Ok(LsqrOutcome { y, iterations, hit_it_max })
}

/// Run the full pipeline.
pub fn solve(a: &Mat, b: &[f64], cfg: &SolverConfig) -> Result<SolveResult> {
    let (n, d) = (a.rows(), a.cols());
    if b.len() != n {
        return Err(Error::Dim(format!("b has length {}, A has {n} rows", b.len())));
    }
    if n < d {
        return Err(Error::InvalidArg(format!(
            "solver expects n >= d, got {n} x {d}; transpose under-determined inputs"
        )));
    }

    let t0 = Instant::now();
    let spec = cfg.sketch_spec(d);
    let op = realize(&spec, n)?;
    let sa = op.apply(a);
    let sb = op.apply_vec(b);
    let sketch_time = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let mut factors = cpqr(&sa, cfg.rcond)?;
    if cfg.min_norm {
        factors = complete_orthogonal(&factors);
    }
    let perturb = effective_perturb(&factors, cfg.rcond_thres, cfg.perturb);
    let factorize_time = t1.elapsed().as_secs_f64();

    // Step 3: explicit sketched solution x_s = V1 R11^{-1} Q1^T S b.
    let t2 = Instant::now();
    let q1t_sb: Vec<f64> = (0..factors.p).map(|j| dot(factors.q1.col(j), &sb)).collect();
    let y_s = tri_solve(&factors.r11, &q1t_sb, false, perturb)?;
    let x_s = factors.apply_v1(&y_s);
    let explicit_resid = residual_norm(a, &x_s, b);
    let explicit_time = t2.elapsed().as_secs_f64();

    if explicit_resid <= cfg.tau_a {
        return Ok(SolveResult {
            x: x_s,
            residual: explicit_resid,
            iterations: 0,
            p: factors.p,
            route: Route::Explicit,
            hit_it_max: false,
            times: StageTimes {
                sketch: sketch_time,
                factorize: factorize_time,
                explicit: explicit_time,
                lsqr: 0.0,
            },
        });
    }

    let t3 = Instant::now();
    let y0 = cfg.warm_start.then_some(q1t_sb.as_slice());
    let out = lsqr_preconditioned(a, b, &factors, y0, cfg.tau_r, cfg.it_max, perturb)?;
    let y_tau = tri_solve(&factors.r11, &out.y, false, perturb)?;
    let x_tau = factors.apply_v1(&y_tau);
    let residual = residual_norm(a, &x_tau, b);
    let lsqr_time = t3.elapsed().as_secs_f64();

    Ok(SolveResult {
        x: x_tau,
        residual,
        iterations: out.iterations,
        p: factors.p,
        route: Route::Iterative,
        hit_it_max: out.hit_it_max,
        times: StageTimes {
            sketch: sketch_time,
            factorize: factorize_time,
            explicit: explicit_time,
            lsqr: lsqr_time,
        },
    })
}
