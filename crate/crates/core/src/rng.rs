//! Counter-based random numbers: every draw is a pure function of
//! `(seed, trial, draw)`, so trials can be evaluated in any order and on any
//! number of threads with identical results.

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 64 random bits for draw `draw` of trial `trial`.
#[inline]
pub fn draw_bits(seed: u64, trial: u64, draw: u64) -> u64 {
    mix64(mix64(mix64(seed) ^ trial) ^ draw)
}

/// Uniform on `[0, 1)` with 53 bits of resolution.
#[inline]
pub fn draw_uniform(seed: u64, trial: u64, draw: u64) -> f64 {
    (draw_bits(seed, trial, draw) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Sequential view over one counter-based stream, for callers that want an
/// iterator of uniforms rather than explicit indices.
#[derive(Clone, Debug)]
pub struct CounterStream {
    seed: u64,
    stream: u64,
    next: u64,
}

impl CounterStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            next: 0,
        }
    }

    pub fn next_uniform(&mut self) -> f64 {
        let u = draw_uniform(self.seed, self.stream, self.next);
        self.next += 1;
        u
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_uniform();
        let u2 = self.next_uniform();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
