//! Counter-based random number generation for reproducible parallel ensembles.
//!
//! Every trajectory draws from its own stream, keyed by the run's master seed
//! and the trajectory index; within a stream the n-th output is a pure
//! function of `(key, n)`. Ensembles therefore produce identical results for
//! any worker count and any scheduling order, and a trajectory can be replayed
//! in isolation.
//!
//! The mixing function is the SplitMix64 finalizer, which is plenty for Monte
//! Carlo jump decisions; this is not a cryptographic generator.

/// Weyl-sequence increment used by SplitMix64.
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A stateless-by-construction generator: output `n` of a stream is
/// `mix(key + (n+1) * GAMMA)` with the key derived from `(seed, stream)`.
#[derive(Debug, Clone)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    /// Stream `stream` of the generator family seeded by `seed`.
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix(mix(seed).wrapping_add(mix(stream.wrapping_mul(GAMMA).wrapping_add(1))));
        Self { key, counter: 0 }
    }

    /// Position in the stream (number of values consumed).
    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Jump to an absolute position in the stream.
    pub fn set_counter(&mut self, counter: u64) {
        self.counter = counter;
    }

    pub fn next_u64(&mut self) -> u64 {
        self.counter += 1;
        mix(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    /// Uniform double in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        (self.next_u64() >> 11) as f64 * SCALE
    }
}
