//! Deterministic pseudo-random numbers.
//!
//! Everything stochastic in this crate (weight init, synthetic data, noise,
//! shuffling, per-run seeds) flows through [`Lcg64`] so that a run is a pure
//! function of its seeds, on every platform. The generator is the classic
//! 64-bit linear congruential generator with Knuth's MMIX multiplier; doubles
//! are built from the top 53 bits of the state.

/// MMIX LCG multiplier.
const LCG_A: u64 = 6364136223846793005;
/// MMIX LCG increment.
const LCG_C: u64 = 1442695040888963407;

/// 64-bit LCG. `next_u64` advances `state = state * A + C` (wrapping) and
/// returns the new state.
#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Lcg64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_mul(LCG_A).wrapping_add(LCG_C);
        self.state
    }

    /// Uniform double in `[0, 1)`, from the 53 high bits of the state.
    pub fn uniform01(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform double in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform01()
    }

    /// Standard normal via Box-Muller. Uses two uniform draws per sample;
    /// `1 - uniform01()` keeps the log argument in `(0, 1]`.
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.uniform01();
        let u2 = self.uniform01();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Unbiased-enough index in `[0, n)` via the widening-multiply trick.
    fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i + 1);
            xs.swap(i, j);
        }
    }
}

/// Stream tags for [`seed_stream`]. Central registry so independent
/// consumers can never collide onto the same stream. Stable by contract:
/// datasets and artifacts reproduce bit-for-bit only while these hold.
pub mod stream {
    pub const MODEL_INIT: u64 = 1;
    pub const DATA_INPUTS: u64 = 2;
    pub const DATA_NOISE: u64 = 3;
    pub const DATA_TEACHER: u64 = 4;
    pub const SHUFFLE: u64 = 5;
    pub const SWEEP_POINT: u64 = 6;
}

/// SplitMix64 finalizer; used to decorrelate seed streams.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Derives an independent seed from a base seed and a tag sequence, e.g. one
/// stream per (dataset, noise, init) purpose or per sweep grid point. Order
/// of the words matters.
pub fn seed_stream(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed);
    for &w in words {
        h = mix64(h ^ mix64(w));
    }
    h
}
