//! Counter-based deterministic random numbers.
//!
//! Every randomized operation in the pipeline (shuffles, augmentation draws,
//! synthetic rendering) goes through [`CounterRng`], which hashes a
//! `(seed, stream, counter)` triple with the splitmix64 finalizer. A draw is
//! a pure function of those three values: no hidden state, no dependence on
//! call order across streams, identical output on every platform.

/// splitmix64 finalizer: bijective avalanche mix of a 64-bit word.
#[inline]
pub fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable FNV-1a hash of a stream name, for readable stream ids.
pub fn stream(name: &str) -> u64 {
    let mut h = 0xCBF2_9CE4_8422_2325u64;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Counter-mode generator keyed by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { key: mix(seed ^ mix(stream)), counter: 0 }
    }

    /// Generator for a named sub-stream, e.g. one per sample index.
    pub fn named(seed: u64, name: &str) -> Self {
        Self::new(seed, stream(name))
    }

    /// The n-th word of the stream; advances past it.
    pub fn next_u64(&mut self) -> u64 {
        let word = mix(self.key ^ mix(self.counter));
        self.counter += 1;
        word
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`.
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform index in `[0, n)` via fixed-point multiply; `n` must be > 0.
    pub fn next_below(&mut self, n: usize) -> usize {
        debug_assert!(n > 0);
        ((u128::from(self.next_u64()) * n as u128) >> 64) as usize
    }

    /// Standard normal draw (Box-Muller, cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        // Shift the first uniform into (0, 1] so the log is finite.
        let u1 = ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64);
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i + 1);
            xs.swap(i, j);
        }
    }
}
