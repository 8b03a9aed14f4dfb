//! Orthonormal DCT-II of arbitrary exact length via a complex FFT of
//! length 2n (rustfft supplies mixed-radix and Bluestein kernels, so any
//! n works without padding).

use num_complex::Complex64 as C;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct DctPlan {
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    /// Twiddles `exp(-i pi k / (2n))`.
    twiddle: Vec<C>,
}

impl std::fmt::Debug for DctPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DctPlan(n={})", self.n)
    }
}

impl DctPlan {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let fft = FftPlanner::new().plan_fft_forward(2 * n);
        let twiddle = (0..n)
            .map(|k| {
                let ang = -std::f64::consts::PI * k as f64 / (2.0 * n as f64);
                C::new(ang.cos(), ang.sin())
            })
            .collect();
        DctPlan { n, fft, twiddle }
    }

    /// Orthonormal DCT-II coefficients:
    /// `X_k = s_k sum_j x_j cos(pi (2j+1) k / (2n))` with
    /// `s_0 = sqrt(1/n)` and `s_k = sqrt(2/n)` otherwise.
    ///
    /// Uses the even extension `[x, reverse(x)]` of length 2n, whose DFT
    /// satisfies `sum_j x_j cos(pi (2j+1) k / (2n)) = Re(e^{-i pi k/(2n)} V_k) / 2`.
    pub fn dct2_orthonormal(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(x.len(), n);
        let mut buf: Vec<C> = Vec::with_capacity(2 * n);
        for &v in x {
            buf.push(C::new(v, 0.0));
        }
        for &v in x.iter().rev() {
            buf.push(C::new(v, 0.0));
        }
        self.fft.process(&mut buf);

        let s0 = (1.0 / n as f64).sqrt();
        let sk = (2.0 / n as f64).sqrt();
        (0..n)
            .map(|k| {
                let raw = 0.5 * (self.twiddle[k] * buf[k]).re;
                if k == 0 {
                    s0 * raw
                } else {
                    sk * raw
                }
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dct(x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|k| {
                let sk = if k == 0 {
                    (1.0 / n as f64).sqrt()
                } else {
                    (2.0 / n as f64).sqrt()
                };
                sk * x
                    .iter()
                    .enumerate()
                    .map(|(j, &v)| {
                        v * (std::f64::consts::PI * (2.0 * j as f64 + 1.0) * k as f64
                            / (2.0 * n as f64))
                            .cos()
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn matches_naive_definition_on_awkward_lengths() {
        // Primes and highly composite lengths alike must agree.
        for &n in &[1usize, 2, 3, 7, 12, 31, 64, 97] {
            let mut rng = crate::rng::CounterRng::new(n as u64);
            let x: Vec<f64> = (0..n).map(|_| rng.normal()).collect();
            let plan = DctPlan::new(n);
            let fast = plan.dct2_orthonormal(&x);
            let slow = naive_dct(&x);
            for (a, b) in fast.iter().zip(&slow) {
                assert!((a - b).abs() < 1e-12 * (n as f64), "n={n}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn transform_is_orthonormal() {
        let n = 23;
        let plan = DctPlan::new(n);
        // Apply to the canonical basis and check the Gram matrix.
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            cols.push(plan.dct2_orthonormal(&e));
        }
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = (0..n).map(|k| cols[i][k] * cols[j][k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((dot - want).abs() < 1e-12, "gram({i},{j}) = {dot}");
            }
        }
    }
}
