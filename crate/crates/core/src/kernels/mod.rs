//! Factorization kernels: Householder QR (plain and column-pivoted),
//! complete orthogonal decomposition, one-sided Jacobi SVD, and triangular
//! solves. Everything operates on column-major dense matrices; sketched
//! matrices are small enough that dense factorization is the right tool.

mod qr;
mod svd;
mod tri;

pub use qr::{complete_orthogonal, cpqr, qr, qr_r_only, CpqrFactors, VHat};
pub use svd::{singular_values, svd_compact, svd_solve_min_norm, SvdFactors};
pub use tri::{tri_cond_estimate, tri_solve};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::{norm2, DenseMat};
    use crate::rng::Rng64;

    fn random_dense(n: usize, d: usize, seed: u64) -> DenseMat {
        let mut rng = Rng64::new(seed);
        let mut a = DenseMat::zeros(n, d);
        for j in 0..d {
            for i in 0..n {
                a.set(i, j, rng.normal());
            }
        }
        a
    }

    /// Rank-deficient matrix with prescribed leading singular values and a
    /// clearly separated tail.
    fn gapped_matrix(n: usize, d: usize, rank: usize, tail: f64, seed: u64) -> DenseMat {
        let g1 = random_dense(n, d, seed);
        let (u, _) = qr(&g1);
        let g2 = random_dense(d, d, seed ^ 0xabcdef);
        let (v, _) = qr(&g2);
        let mut scaled = DenseMat::zeros(n, d);
        for j in 0..d {
            let s = if j < rank { 1.0 + j as f64 / d as f64 } else { tail };
            for i in 0..n {
                scaled.set(i, j, u.at(i, j) * s);
            }
        }
        scaled.matmul(&v.transpose())
    }

    /// Independent oracle: cyclic two-sided Jacobi eigensolver for a
    /// symmetric matrix, used to cross-check singular values via A^T A.
    fn jacobi_eigenvalues(mut a: DenseMat) -> Vec<f64> {
        let n = a.rows();
        let scale = a.max_abs().max(1e-300);
        for _pass in 0..100 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off = off.max(a.at(p, q).abs());
                }
            }
            if off <= 1e-14 * scale {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = a.at(p, q);
                    if apq.abs() <= 1e-18 * scale {
                        continue;
                    }
                    let theta = (a.at(q, q) - a.at(p, p)) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = c * t;
                    for i in 0..n {
                        let aip = a.at(i, p);
                        let aiq = a.at(i, q);
                        a.set(i, p, c * aip - s * aiq);
                        a.set(i, q, s * aip + c * aiq);
                    }
                    for j in 0..n {
                        let apj = a.at(p, j);
                        let aqj = a.at(q, j);
                        a.set(p, j, c * apj - s * aqj);
                        a.set(q, j, s * apj + c * aqj);
                    }
                }
            }
        }
        let mut ev: Vec<f64> = (0..n).map(|i| a.at(i, i)).collect();
        ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
        ev
    }

    fn spectral_norm(a: &DenseMat) -> f64 {
        singular_values(a)[0]
    }

    // ---- svd_compact -------------------------------------------------

    #[test]
    fn svd_identity() {
        let f = svd_compact(&DenseMat::identity(3), 1e-12).unwrap();
        assert_eq!(f.r, 3);
        assert_eq!(f.sigma, vec![1.0, 1.0, 1.0]);
        assert_eq!(f.u, DenseMat::identity(3));
        assert_eq!(f.v, DenseMat::identity(3));
    }

    #[test]
    fn svd_rank_one_outer_product() {
        // u v^T with unit u, v
        let u = [0.6, 0.8, 0.0];
        let v = [0.0, 1.0];
        let mut a = DenseMat::zeros(3, 2);
        for i in 0..3 {
            for j in 0..2 {
                a.set(i, j, u[i] * v[j]);
            }
        }
        let f = svd_compact(&a, 1e-12).unwrap();
        assert_eq!(f.r, 1);
        assert!((f.sigma[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn svd_matches_jacobi_eigen_oracle() {
        let a = random_dense(6, 4, 17);
        let f = svd_compact(&a, 0.0).unwrap();
        let gram = a.matmul_tn(&a);
        let ev = jacobi_eigenvalues(gram);
        for (s, e) in f.sigma.iter().zip(&ev) {
            assert!((s * s - e).abs() <= 1e-10 * ev[0].max(1.0), "sigma^2 {} vs ev {}", s * s, e);
        }
    }

    #[test]
    fn svd_reconstructs_input() {
        for &(n, d, seed) in &[(20usize, 7usize, 1u64), (50, 50, 2), (200, 100, 3)] {
            let a = random_dense(n, d, seed);
            let f = svd_compact(&a, 0.0).unwrap();
            // U diag(sigma) V^T
            let mut us = f.u.clone();
            for j in 0..f.r {
                for v in us.col_mut(j) {
                    *v *= f.sigma[j];
                }
            }
            let rec = us.matmul(&f.v.transpose());
            let mut err = 0.0f64;
            for j in 0..d {
                for i in 0..n {
                    err = err.max((rec.at(i, j) - a.at(i, j)).abs());
                }
            }
            assert!(err <= 1e-10 * f.sigma[0], "reconstruction error {err}");
            // orthonormality
            let utu = f.u.matmul_tn(&f.u);
            let vtv = f.v.matmul_tn(&f.v);
            for j in 0..f.r {
                for i in 0..f.r {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((utu.at(i, j) - id).abs() <= 1e-10);
                    assert!((vtv.at(i, j) - id).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn svd_rejects_nonfinite() {
        let mut a = DenseMat::zeros(2, 2);
        a.set(0, 0, f64::NAN);
        assert!(svd_compact(&a, 0.0).is_err());
    }

    // ---- cpqr --------------------------------------------------------

    #[test]
    fn cpqr_identity() {
        let f = cpqr(&DenseMat::identity(4), 1e-12).unwrap();
        assert_eq!(f.p, 4);
        for i in 0..4 {
            assert!((f.r11.at(i, i) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cpqr_truncates_tiny_diagonal() {
        // diag(1, 1e-15, 0, 0) padded to 6x4
        let mut b = DenseMat::zeros(6, 4);
        b.set(0, 0, 1.0);
        b.set(1, 1, 1e-15);
        let f = cpqr(&b, 1e-12).unwrap();
        assert_eq!(f.p, 1);
    }

    #[test]
    fn cpqr_rank_and_column_space_match_svd() {
        // rank 7 from a product of 40x7 and 7x10 Gaussians
        let a = random_dense(40, 7, 5).matmul(&random_dense(7, 10, 6));
        let f = cpqr(&a, 1e-12).unwrap();
        assert_eq!(f.p, 7);
        let svd = svd_compact(&a, 1e-10).unwrap();
        assert_eq!(svd.r, 7);
        // principal angles via || (I - U U^T) Q1 ||_2 = sin(theta_max)
        let proj = svd.u.matmul(&svd.u.matmul_tn(&f.q1));
        let mut diff = f.q1.clone();
        for j in 0..diff.cols() {
            for i in 0..diff.rows() {
                let v = diff.at(i, j) - proj.at(i, j);
                diff.set(i, j, v);
            }
        }
        assert!(spectral_norm(&diff) <= 1e-8);
    }

    #[test]
    fn cpqr_zero_matrix_is_rank_zero() {
        assert!(matches!(cpqr(&DenseMat::zeros(3, 3), 1e-12), Err(crate::Error::RankZero)));
    }

    #[test]
    fn cpqr_reconstructs_and_diagonal_monotone() {
        for seed in 0..5u64 {
            let b = gapped_matrix(30, 12, 9, 1e-13, 100 + seed);
            let f = cpqr(&b, 1e-10).unwrap();
            let rec = f.reconstruct();
            let bnorm = spectral_norm(&b);
            for j in 0..b.cols() {
                for i in 0..b.rows() {
                    assert!((rec.at(i, j) - b.at(i, j)).abs() <= 1e-10 * bnorm);
                }
            }
            for i in 1..f.p {
                assert!(
                    f.r11.at(i, i).abs() <= f.r11.at(i - 1, i - 1).abs() * (1.0 + 1e-12),
                    "diagonal not nonincreasing"
                );
            }
            let qtq = f.q1.matmul_tn(&f.q1);
            for j in 0..f.p {
                for i in 0..f.p {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((qtq.at(i, j) - id).abs() <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn cpqr_rank_matches_svd_rank_on_gapped_matrices() {
        let mut agree = 0;
        for trial in 0..100u64 {
            let mut rng = Rng64::new(7000 + trial);
            let n = 15 + rng.below(30);
            let d = 5 + rng.below(10);
            let rank = 1 + rng.below(d.min(n) - 1);
            let b = gapped_matrix(n, d, rank, 1e-9, 9000 + trial);
            let f = cpqr(&b, 1e-6).unwrap();
            let s = svd_compact(&b, 1e-6).unwrap();
            if f.p == rank && s.r == rank {
                agree += 1;
            }
        }
        assert_eq!(agree, 100, "rank agreement {agree}/100");
    }

    // ---- complete_orthogonal ------------------------------------------

    #[test]
    fn cod_noop_when_r12_zero() {
        let a = random_dense(10, 4, 21);
        let f = cpqr(&a, 1e-12).unwrap();
        assert_eq!(f.p, 4);
        let g = complete_orthogonal(&f);
        assert_eq!(g.r11, f.r11);
        assert_eq!(g.q1, f.q1);
    }

    #[test]
    fn cod_scalar_row_example() {
        // p = 1, R11 = (1), R12 = (1 1): after reduction |R11| = sqrt(3)
        let f = CpqrFactors {
            q1: DenseMat::from_rows(&[&[1.0], &[0.0]]).unwrap(),
            r11: DenseMat::from_rows(&[&[1.0]]).unwrap(),
            r12: DenseMat::from_rows(&[&[1.0, 1.0]]).unwrap(),
            vhat: VHat::Perm(vec![0, 1, 2]),
            p: 1,
            d: 3,
        };
        let g = complete_orthogonal(&f);
        assert!((g.r11.at(0, 0).abs() - 3.0f64.sqrt()).abs() <= 1e-14);
        assert_eq!(g.r12.max_abs(), 0.0);
    }

    #[test]
    fn cod_preserves_product_on_rank_deficient() {
        for seed in 0..5u64 {
            let b = gapped_matrix(30, 8, 5, 1e-14, 300 + seed);
            let f = cpqr(&b, 1e-10).unwrap();
            assert_eq!(f.p, 5);
            let g = complete_orthogonal(&f);
            assert_eq!(g.r12.max_abs(), 0.0);
            let rec = g.reconstruct();
            let bnorm = spectral_norm(&b);
            for j in 0..b.cols() {
                for i in 0..b.rows() {
                    assert!(
                        (rec.at(i, j) - b.at(i, j)).abs() <= 1e-9 * bnorm,
                        "cod reconstruction off at ({i},{j})"
                    );
                }
            }
            // Vhat stays orthogonal
            let v = g.vhat_full();
            let vtv = v.matmul_tn(&v);
            for j in 0..v.cols() {
                for i in 0..v.cols() {
                    let id = if i == j { 1.0 } else { 0.0 };
                    assert!((vtv.at(i, j) - id).abs() <= 1e-12);
                }
            }
        }
    }

    // ---- tri_solve / tri_cond_estimate ---------------------------------

    #[test]
    fn tri_identity_solve() {
        let y = tri_solve(&DenseMat::identity(4), &[1.0, -2.0, 3.0, 0.5], false, 0.0).unwrap();
        assert_eq!(y, vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn tri_hand_back_substitution() {
        let r = DenseMat::from_rows(&[&[2.0, 1.0], &[0.0, 4.0]]).unwrap();
        let y = tri_solve(&r, &[4.0, 8.0], false, 0.0).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-15 && (y[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tri_random_residual() {
        let mut rng = Rng64::new(31);
        let p = 20;
        let mut r = DenseMat::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                r.set(i, j, rng.normal());
            }
            r.set(j, j, 1.0 + rng.uniform()); // well away from zero
        }
        let v: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
        for &tr in &[false, true] {
            let y = tri_solve(&r, &v, tr, 0.0).unwrap();
            let back = if tr { r.transpose().matvec(&y, false) } else { r.matvec(&y, false) };
            let err: f64 = back.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            assert!(err <= 1e-12 * norm2(&v));
        }
    }

    #[test]
    fn tri_zero_diag_errors_without_perturb() {
        let mut r = DenseMat::identity(3);
        r.set(1, 1, 0.0);
        assert!(matches!(
            tri_solve(&r, &[1.0, 1.0, 1.0], false, 0.0),
            Err(crate::Error::SingularDiagonal(1))
        ));
        // with perturbation the solve goes through, dividing by r_ii + perturb
        let y = tri_solve(&r, &[1.0, 1.0, 1.0], false, 0.5).unwrap();
        assert!((y[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn tri_cond_examples() {
        assert_eq!(tri_cond_estimate(&DenseMat::identity(5)), 1.0);
        let mut r = DenseMat::zeros(3, 3);
        r.set(0, 0, 10.0);
        r.set(1, 1, 1.0);
        r.set(2, 2, 0.1);
        assert!((tri_cond_estimate(&r) - 100.0).abs() < 1e-12);
    }

    #[test]
    fn tri_cond_is_lower_bound_for_kappa() {
        let mut rng = Rng64::new(77);
        for _ in 0..10 {
            let p = 8;
            let mut r = DenseMat::zeros(p, p);
            for j in 0..p {
                for i in 0..=j {
                    r.set(i, j, rng.normal());
                }
                r.set(j, j, 0.2 + rng.uniform());
            }
            let s = singular_values(&r);
            let kappa = s[0] / s[p - 1];
            assert!(tri_cond_estimate(&r) <= kappa * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tri_roundtrip_identity_within_tolerance() {
        // solve then multiply is the identity for kappa <= 1e6
        let mut rng = Rng64::new(123);
        let p = 15;
        let mut r = DenseMat::zeros(p, p);
        for j in 0..p {
            for i in 0..=j {
                r.set(i, j, rng.normal());
            }
            let spread = 10f64.powf(-(6.0 * j as f64 / (p - 1) as f64 / 2.0));
            r.set(j, j, spread);
        }
        let v: Vec<f64> = (0..p).map(|_| rng.normal()).collect();
        let y = tri_solve(&r, &v, false, 0.0).unwrap();
        let back = r.matvec(&y, false);
        let err: f64 = back.iter().zip(&v).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        assert!(err <= 1e-12 * norm2(&v).max(norm2(&back)));
    }

    // ---- plain qr ------------------------------------------------------

    #[test]
    fn qr_orthonormal_and_reconstructs() {
        let a = random_dense(25, 10, 41);
        let (q, r) = qr(&a);
        let rec = q.matmul(&r);
        for j in 0..10 {
            for i in 0..25 {
                assert!((rec.at(i, j) - a.at(i, j)).abs() <= 1e-12);
            }
            assert!(r.at(j, j) >= 0.0, "R diagonal sign-normalized");
        }
        let qtq = q.matmul_tn(&q);
        for j in 0..10 {
            for i in 0..10 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((qtq.at(i, j) - id).abs() <= 1e-13);
            }
        }
    }

    #[test]
    fn svd_solve_min_norm_on_consistent_system() {
        let a = random_dense(12, 5, 51);
        let x_true: Vec<f64> = (0..5).map(|j| j as f64 - 2.0).collect();
        let b = a.matvec(&x_true, false);
        let (x, resid) = svd_solve_min_norm(&crate::mat::Mat::Dense(a), &b, 1e-12).unwrap();
        assert!(resid <= 1e-10);
        for (p, q) in x.iter().zip(&x_true) {
            assert!((p - q).abs() <= 1e-9);
        }
    }
}
