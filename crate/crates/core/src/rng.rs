//! Seeded random streams and the primitive variate generators used by the
//! sampler and the validation oracles.
//!
//! A stream is keyed by `(seed, stream_index)`. The key is a ChaCha8 key
//! expanded from `seed` with SplitMix64, and `stream_index` selects the
//! ChaCha stream, so each draw index gets its own counter-based substream.
//! All variate algorithms below are fixed: the sequence produced for a given
//! key is part of the crate's reproducibility contract.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};

/// One step of SplitMix64, also used to derive independent seeds.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a domain tag into a seed so that different consumers of the same
/// user seed (sampler, oracle, Monte Carlo checks) draw from unrelated keys.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut s = seed ^ tag.rotate_left(32);
    splitmix64(&mut s) ^ tag
}

/// Deterministic random stream. Single owner; clone to fork.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    core: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut key = [0u8; 32];
        let mut state = seed;
        for chunk in key.chunks_exact_mut(8) {
            chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
        }
        let mut core = ChaCha8Rng::from_seed(key);
        core.set_stream(stream_index);
        RngStream { seed, stream_index, core }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    /// Position in the underlying 32-bit word counter.
    pub fn word_pos(&self) -> u128 {
        self.core.get_word_pos()
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.core.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 bits of resolution; one `u64` per call.
    #[inline]
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `(0, 1]`, for logarithms.
    #[inline]
    fn uniform_open0(&mut self) -> f64 {
        1.0 - self.uniform01()
    }

    /// Fair sign from the top bit of one `u64`.
    #[inline]
    pub fn draw_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 { -1.0 } else { 1.0 }
    }

    /// Index `i` with probability `weights[i] / Σ weights`, by an inverse-CDF
    /// walk on a single uniform. Weights need not be normalized.
    pub fn draw_categorical(&mut self, weights: &[f64]) -> Result<usize> {
        let mut total = 0.0;
        for &w in weights {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight(w));
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::AllZeroWeights);
        }
        let target = self.uniform01() * total;
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            acc += w;
            last = i;
            if target < acc {
                return Ok(i);
            }
        }
        // rounding in the running sum
        Ok(last)
    }

    /// Standard normal by Box–Muller; consumes two uniforms, no caching.
    pub fn standard_normal(&mut self) -> f64 {
        let u1 = self.uniform_open0();
        let u2 = self.uniform01();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Gamma(shape, 1). Marsaglia–Tsang for `shape >= 1`; for `shape < 1`
    /// a Gamma(shape + 1) draw is multiplied by `U^(1/shape)`.
    pub fn draw_gamma(&mut self, shape: f64) -> Result<f64> {
        if !(shape > 0.0) || !shape.is_finite() {
            return Err(Error::InvalidShape { alpha: shape, beta: f64::NAN });
        }
        if shape < 1.0 {
            let g = self.marsaglia_tsang(shape + 1.0);
            let u = self.uniform_open0();
            return Ok(g * u.powf(1.0 / shape));
        }
        Ok(self.marsaglia_tsang(shape))
    }

    fn marsaglia_tsang(&mut self, shape: f64) -> f64 {
        let d = shape - 1.0 / 3.0;
        let c = 1.0 / (9.0 * d).sqrt();
        loop {
            let x = self.standard_normal();
            let v = 1.0 + c * x;
            if v <= 0.0 {
                continue;
            }
            let v = v * v * v;
            let u = self.uniform_open0();
            let x2 = x * x;
            if u < 1.0 - 0.0331 * x2 * x2 || u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
                return d * v;
            }
        }
    }

    /// Beta(alpha, beta) as `X / (X + Y)` with independent gamma variates.
    pub fn draw_beta(&mut self, alpha: f64, beta: f64) -> Result<f64> {
        let valid = |s: f64| s > 0.0 && s.is_finite();
        if !valid(alpha) || !valid(beta) {
            return Err(Error::InvalidShape { alpha, beta });
        }
        let x = self.draw_gamma(alpha)?;
        let y = self.draw_gamma(beta)?;
        let sum = x + y;
        if sum == 0.0 {
            // both underflowed; the smaller shape dominates near zero
            return Ok(if alpha < beta { 0.0 } else { 1.0 });
        }
        Ok(x / sum)
    }

    /// Uniform point on `S^{p-1}` as a normalized Gaussian vector.
    pub fn draw_uniform_sphere(&mut self, out: &mut [f64]) {
        loop {
            let mut norm2 = 0.0;
            for v in out.iter_mut() {
                *v = self.standard_normal();
                norm2 += *v * *v;
            }
            if norm2 > 0.0 {
                let inv = 1.0 / norm2.sqrt();
                out.iter_mut().for_each(|v| *v *= inv);
                return;
            }
        }
    }
}
