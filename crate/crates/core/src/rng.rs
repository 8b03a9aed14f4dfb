//! Seeded, counter-based random number generation.
//!
//! Every random quantity in this crate (test matrices, sketching operators,
//! right-hand sides) is drawn from [`CounterRng`], a SplitMix64 generator:
//! the state is a plain 64-bit counter advanced by a fixed odd increment and
//! the output is a bijective mix of the counter. Identical seeds therefore
//! produce identical byte streams on every platform, which the golden-file
//! tests and the reproducibility guarantees of the solvers rely on.
//!
//! Normal variates use the Box–Muller transform on consecutive uniforms from
//! the word stream, never a rejection method, so the number of raw words
//! consumed per variate is fixed.

/// SplitMix64: a 64-bit counter generator with finalizer mixing.
#[derive(Debug, Clone)]
pub struct CounterRng {
    state: u64,
    /// Cached second Box–Muller variate.
    spare_normal: Option<f64>,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng {
            state: seed,
            spare_normal: None,
        }
    }

    /// Next raw 64-bit word.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in the half-open interval (0, 1]; never returns 0 so it is
    /// safe inside a logarithm.
    pub fn uniform_open(&mut self) -> f64 {
        let bits = self.next_u64() >> 11; // 53 significant bits
        (bits as f64 + 1.0) / 9_007_199_254_740_992.0
    }

    /// Uniform in [0, 1).
    pub fn uniform(&mut self) -> f64 {
        let bits = self.next_u64() >> 11;
        bits as f64 / 9_007_199_254_740_992.0
    }

    /// Standard normal variate via Box–Muller on two consecutive uniforms.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let angle = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(radius * angle.sin());
        radius * angle.cos()
    }

    /// Rademacher variate (+1 or -1 with equal probability).
    pub fn rademacher(&mut self) -> f64 {
        if self.next_u64() & 1 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Integer uniform in [0, bound) by rejection-free modulo reduction on
    /// the full 64-bit word (bias is negligible for bound << 2^64 and,
    /// more importantly, deterministic).
    pub fn below(&mut self, bound: usize) -> usize {
        (self.next_u64() % bound as u64) as usize
    }

    /// First `take` entries of a seeded Fisher–Yates shuffle of `0..n`:
    /// `take` distinct indices sampled without replacement.
    pub fn sample_without_replacement(&mut self, n: usize, take: usize) -> Vec<usize> {
        assert!(take <= n, "cannot sample {take} of {n}");
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..take {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(take);
        pool
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_stream() {
        let mut a = CounterRng::new(42);
        let mut b = CounterRng::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        let mut c = CounterRng::new(43);
        assert_ne!(CounterRng::new(42).next_u64(), c.next_u64());
    }

    #[test]
    fn normals_have_plausible_moments() {
        let mut rng = CounterRng::new(7);
        let n = 100_000;
        let (mut sum, mut sumsq) = (0.0, 0.0);
        for _ in 0..n {
            let z = rng.normal();
            sum += z;
            sumsq += z * z;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.03, "var {var}");
    }

    #[test]
    fn sampling_without_replacement_is_distinct() {
        let mut rng = CounterRng::new(3);
        let picks = rng.sample_without_replacement(100, 40);
        assert_eq!(picks.len(), 40);
        let mut sorted = picks.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), 40);
        assert!(picks.iter().all(|&i| i < 100));
    }

    #[test]
    fn uniform_open_never_zero() {
        let mut rng = CounterRng::new(0);
        for _ in 0..10_000 {
            let u = rng.uniform_open();
            assert!(u > 0.0 && u <= 1.0);
        }
    }
}
