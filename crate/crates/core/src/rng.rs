//! Deterministic hierarchical random streams.
//!
//! Every randomized routine in the toolkit draws from an [`RngStream`]. A
//! stream is identified by a 64-bit key derived from the base seed and the
//! path of child indices taken to reach it, so the draws of any node in the
//! task/UE/slot hierarchy depend only on `(base_seed, path)` - never on how
//! many values a parent or sibling has consumed. That property is what makes
//! regeneration bit-identical and generation embarrassingly parallel.
//!
//! Distribution sampling (uniform ints, Box-Muller normals, Laplacians) is
//! implemented here directly on the ChaCha8 word stream so draw sequences are
//! pinned by this crate alone.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::cmatrix::C64;
use crate::error::{Error, Result};

const F64_FROM_U53: f64 = 1.0 / ((1u64 << 53) as f64);

/// SplitMix64 finalizer; bijective 64-bit mix.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Counter-derived deterministic random stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    /// Root stream for a base seed.
    pub fn from_seed(base_seed: u64) -> Self {
        let key = mix64(base_seed);
        Self {
            key,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    /// Derives the child stream with the given index. The child's draws are
    /// a pure function of `(base_seed, path)`; deriving a child does not
    /// consume or disturb this stream's own state.
    pub fn child(&self, index: u64) -> Self {
        let key = mix64(self.key ^ mix64(index ^ 0xA076_1D64_78BD_642F));
        Self {
            key,
            rng: ChaCha8Rng::seed_from_u64(key),
        }
    }

    /// Stream identity key (derivation only; not a draw).
    pub fn key(&self) -> u64 {
        self.key
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * F64_FROM_U53
    }

    /// Uniform on (0, 1]; safe as a logarithm argument.
    #[inline]
    pub fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * F64_FROM_U53
    }

    /// Unbiased uniform integer in `[0, n)` (Lemire's multiply-shift method).
    pub fn uniform_below(&mut self, n: usize) -> usize {
        assert!(n > 0, "uniform_below(0)");
        let n = n as u64;
        let mut x = self.next_u64();
        let mut m = (x as u128) * (n as u128);
        let mut low = m as u64;
        if low < n {
            let threshold = n.wrapping_neg() % n;
            while low < threshold {
                x = self.next_u64();
                m = (x as u128) * (n as u128);
                low = m as u64;
            }
        }
        (m >> 64) as usize
    }

    /// Uniform integer in `{1, ..., n}` (the paper-style rand({1..n}, 1)).
    pub fn uniform_1_to(&mut self, n: usize) -> usize {
        1 + self.uniform_below(n)
    }

    /// Standard normal via Box-Muller.
    pub fn normal(&mut self) -> f64 {
        let u = self.uniform_open();
        let v = self.uniform_f64();
        (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
    }

    /// CN(0,1) sample: total complex variance 1, i.e. real and imaginary
    /// parts each N(0, 1/2). One polar draw yields both parts.
    pub fn complex_normal(&mut self) -> C64 {
        let u = self.uniform_open();
        let v = self.uniform_f64();
        let r = (-u.ln()).sqrt();
        let ang = std::f64::consts::TAU * v;
        Complex64::new(r * ang.cos(), r * ang.sin())
    }

    /// Zero-mean Laplacian with the given scale (inverse-CDF sampling).
    pub fn laplacian(&mut self, scale: f64) -> f64 {
        let u = self.uniform_f64() - 0.5;
        -scale * u.signum() * (1.0 - 2.0 * u.abs()).max(1e-300).ln()
    }

    /// Draws `k` distinct items from `pool` by partial Fisher-Yates
    /// (sampling without replacement, order of draws preserved).
    pub fn sample_without_replacement<T: Copy>(&mut self, pool: &[T], k: usize) -> Result<Vec<T>> {
        if k > pool.len() {
            return Err(Error::invalid_config(format!(
                "cannot draw {} items from a pool of {}",
                k,
                pool.len()
            )));
        }
        let mut scratch: Vec<T> = pool.to_vec();
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let j = i + self.uniform_below(scratch.len() - i);
            scratch.swap(i, j);
            out.push(scratch[i]);
        }
        Ok(out)
    }
}

/// Vector of `n` independent CN(0,1) samples.
///
/// `n = 0` is rejected: callers always know a positive count and a silent
/// empty draw would mask index bugs.
pub fn complex_gaussian(rng: &mut RngStream, n: usize) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(Error::invalid_argument("complex_gaussian needs n >= 1"));
    }
    Ok((0..n).map(|_| rng.complex_normal()).collect())
}
