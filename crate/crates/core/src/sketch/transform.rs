//! Fast Walsh-Hadamard and discrete Hartley transforms, power-of-two
//! lengths. Both are orthogonal and symmetric under the normalizations used
//! here, so each is its own inverse.

use crate::{Error, Result};

/// In-place normalized Walsh-Hadamard transform:
/// `H_ij = n^{-1/2} (-1)^{<bits(i), bits(j)>}`.
pub fn fwht(x: &mut [f64]) -> Result<()> {
    let n = x.len();
    if !n.is_power_of_two() {
        return Err(Error::PowerOfTwo(n));
    }
    let mut len = 1;
    while len < n {
        for block in x.chunks_mut(2 * len) {
            let (a, b) = block.split_at_mut(len);
            for (ai, bi) in a.iter_mut().zip(b.iter_mut()) {
                let s = *ai + *bi;
                let d = *ai - *bi;
                *ai = s;
                *bi = d;
            }
        }
        len *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in x {
        *v *= scale;
    }
    Ok(())
}

/// Radix-2 FFT plan with precomputed twiddles and bit-reversal table,
/// reused across the many columns a sketch application touches.
pub struct Fft {
    n: usize,
    bitrev: Vec<u32>,
    // twiddles at each stage, concatenated: stage with half-length `len`
    // stores exp(-2*pi*i*k/(2*len)) for k < len
    tw_re: Vec<f64>,
    tw_im: Vec<f64>,
    stage_off: Vec<usize>,
}

impl Fft {
    pub fn new(n: usize) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::PowerOfTwo(n));
        }
        let bits = n.trailing_zeros();
        let mut bitrev = vec![0u32; n];
        for (i, r) in bitrev.iter_mut().enumerate() {
            *r = (i as u32).reverse_bits() >> (32 - bits.max(1));
        }
        if n == 1 {
            bitrev[0] = 0;
        }
        let mut tw_re = Vec::new();
        let mut tw_im = Vec::new();
        let mut stage_off = Vec::new();
        let mut len = 1;
        while len < n {
            stage_off.push(tw_re.len());
            for k in 0..len {
                let ang = -std::f64::consts::PI * k as f64 / len as f64;
                tw_re.push(ang.cos());
                tw_im.push(ang.sin());
            }
            len *= 2;
        }
        Ok(Fft { n, bitrev, tw_re, tw_im, stage_off })
    }

    /// Forward transform, `X_k = sum_j x_j exp(-2 pi i j k / n)`, in place.
    pub fn forward(&self, re: &mut [f64], im: &mut [f64]) {
        let n = self.n;
        assert_eq!(re.len(), n);
        assert_eq!(im.len(), n);
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                re.swap(i, j);
                im.swap(i, j);
            }
        }
        let mut len = 1;
        let mut stage = 0;
        while len < n {
            let off = self.stage_off[stage];
            for start in (0..n).step_by(2 * len) {
                for k in 0..len {
                    let (wr, wi) = (self.tw_re[off + k], self.tw_im[off + k]);
                    let i0 = start + k;
                    let i1 = i0 + len;
                    let tr = re[i1] * wr - im[i1] * wi;
                    let ti = re[i1] * wi + im[i1] * wr;
                    re[i1] = re[i0] - tr;
                    im[i1] = im[i0] - ti;
                    re[i0] += tr;
                    im[i0] += ti;
                }
            }
            len *= 2;
            stage += 1;
        }
    }
}

/// In-place normalized discrete Hartley transform:
/// `F_ij = sqrt(1/n) [cos(2 pi i j / n) + sin(2 pi i j / n)]`,
/// computed as `(Re(FFT) - Im(FFT)) / sqrt(n)`.
pub fn fdht(x: &mut [f64]) -> Result<()> {
    let plan = Fft::new(x.len())?;
    fdht_with_plan(&plan, x, &mut vec![0.0; x.len()]);
    Ok(())
}

/// Plan-reusing variant; `im_scratch` must have the same length as `x`.
pub fn fdht_with_plan(plan: &Fft, x: &mut [f64], im_scratch: &mut [f64]) {
    let n = x.len();
    debug_assert_eq!(n, plan.n);
    im_scratch.fill(0.0);
    plan.forward(x, im_scratch);
    let scale = 1.0 / (n as f64).sqrt();
    for (xr, xi) in x.iter_mut().zip(im_scratch.iter()) {
        *xr = (*xr - *xi) * scale;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mat::norm2;
    use crate::rng::Rng64;

    fn naive_wht_matrix(n: usize) -> Vec<Vec<f64>> {
        let scale = 1.0 / (n as f64).sqrt();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let par = (i & j).count_ones() % 2;
                        if par == 0 {
                            scale
                        } else {
                            -scale
                        }
                    })
                    .collect()
            })
            .collect()
    }

    fn naive_dht_matrix(n: usize) -> Vec<Vec<f64>> {
        let scale = (1.0 / n as f64).sqrt();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        let ang = std::f64::consts::TAU * (i * j) as f64 / n as f64;
                        scale * (ang.cos() + ang.sin())
                    })
                    .collect()
            })
            .collect()
    }

    fn apply_naive(m: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
        m.iter().map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
    }

    #[test]
    fn fwht_two_point_example() {
        let mut x = vec![1.0, 0.0];
        fwht(&mut x).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        assert!((x[0] - s).abs() < 1e-15 && (x[1] - s).abs() < 1e-15);
    }

    #[test]
    fn fwht_matches_naive_n4() {
        let mut rng = Rng64::new(2);
        let x: Vec<f64> = (0..4).map(|_| rng.normal()).collect();
        let h = naive_wht_matrix(4);
        let want = apply_naive(&h, &x);
        let mut got = x.clone();
        fwht(&mut got).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-14);
        }
    }

    #[test]
    fn fwht_preserves_norm() {
        let mut rng = Rng64::new(3);
        let x: Vec<f64> = (0..1024).map(|_| rng.normal()).collect();
        let before = norm2(&x);
        let mut y = x;
        fwht(&mut y).unwrap();
        assert!((norm2(&y) - before).abs() <= 1e-12 * before);
    }

    #[test]
    fn fdht_identity_for_n1() {
        let mut x = vec![3.5];
        fdht(&mut x).unwrap();
        assert_eq!(x, vec![3.5]);
    }

    #[test]
    fn fdht_matches_naive_n8() {
        let mut rng = Rng64::new(4);
        let x: Vec<f64> = (0..8).map(|_| rng.normal()).collect();
        let f = naive_dht_matrix(8);
        let want = apply_naive(&f, &x);
        let mut got = x.clone();
        fdht(&mut got).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-13);
        }
    }

    #[test]
    fn fdht_is_involution() {
        let mut rng = Rng64::new(5);
        let x: Vec<f64> = (0..256).map(|_| rng.normal()).collect();
        // verified against the naive matrix first
        let f = naive_dht_matrix(256);
        let once = apply_naive(&f, &x);
        let mut fast_once = x.clone();
        fdht(&mut fast_once).unwrap();
        for (a, b) in fast_once.iter().zip(&once) {
            assert!((a - b).abs() <= 1e-12);
        }
        let mut twice = fast_once;
        fdht(&mut twice).unwrap();
        for (a, b) in twice.iter().zip(&x) {
            assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn non_power_of_two_rejected() {
        let mut x = vec![0.0; 6];
        assert!(fwht(&mut x).is_err());
        assert!(fdht(&mut x).is_err());
    }
}
