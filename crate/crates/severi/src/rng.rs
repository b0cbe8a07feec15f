//! Deterministic 64-bit generator (splitmix64) used for every random draw in
//! the crate, so that samples, strata and synthesized curves replay exactly
//! from a seed on any platform.

/// Splitmix64 stream. One instance per sampling task; derive sub-seeds with
/// [`derive_seed`] instead of sharing an instance across tasks.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform value in `[0, bound)` by rejection; `bound` must be nonzero.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        debug_assert!(bound > 0);
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform integer in the symmetric box `[-bound, bound]`.
    pub fn next_in_box(&mut self, bound: u64) -> i64 {
        self.next_below(2 * bound + 1) as i64 - bound as i64
    }
}

/// Stable sub-seed derivation: hashes `parts` into `base` one splitmix step
/// at a time. Used to give each (stratum, sample, purpose) its own stream.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut rng = SplitMix64::new(base);
    let mut acc = rng.next_u64();
    for &p in parts {
        let mut sub = SplitMix64::new(acc ^ p.wrapping_mul(0x9e37_79b9_7f4a_7c15));
        acc = sub.next_u64();
    }
    acc
}
