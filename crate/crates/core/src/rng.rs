//! Counter-based random streams.
//!
//! Every stream is a `(key, counter)` pair. Draw `i` is
//! `splitmix64_mix(key + i * GOLDEN_GAMMA)`, which is exactly the classic
//! splitmix64 sequence seeded with `key`. Child streams are derived with
//! [`RngStream::fork`], which hashes a label into a fresh key without
//! touching the parent's counter, so forks are reproducible regardless of
//! how many values the parent has already produced.

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// The splitmix64 finalizer.
#[inline]
pub fn splitmix64_mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Streaming 64-bit FNV-1a, used for labels and content checksums.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fnv1a64(u64);

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv1a64 {
    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }

    pub fn write_u64(&mut self, v: u64) {
        self.write(&v.to_le_bytes());
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}

/// One-shot 64-bit FNV-1a.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::default();
    h.write(bytes);
    h.finish()
}

/// A reproducible, forkable stream of pseudo-random numbers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RngStream {
    key: u64,
    counter: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self { key: seed, counter: 0 }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }

    /// Derives an independent child stream. The parent is left untouched.
    pub fn fork(&self, label: &str) -> RngStream {
        let tag = splitmix64_mix(fnv1a64(label.as_bytes()) ^ GOLDEN_GAMMA);
        RngStream::new(splitmix64_mix(self.key ^ tag).wrapping_add(GOLDEN_GAMMA))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        splitmix64_mix(self.key.wrapping_add(self.counter.wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lower, upper)`; returns `lower` exactly when the range is empty.
    /// Always consumes one draw.
    pub fn uniform(&mut self, lower: f64, upper: f64) -> f64 {
        let u = self.next_f64();
        if upper <= lower {
            return lower;
        }
        lower + (upper - lower) * u
    }

    /// Bernoulli trial with success probability `p`. Always consumes one draw.
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `[0, bound)` by rejection sampling. `bound` must be positive.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "below() needs a positive bound");
        // Largest multiple of `bound` representable; values past it are rejected.
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let x = self.next_u64();
            if x <= zone {
                return x % bound;
            }
        }
    }
}
