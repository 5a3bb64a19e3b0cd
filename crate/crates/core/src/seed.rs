//! SplitMix64 generator and the seed-derivation tree.
//!
//! Every random decision in the crate (splits, bootstrap draws, feature
//! subsets, SVM epoch orders, synthetic images) draws from a stream whose
//! seed is `SeedTree::derive(tag, index)`. The derivation is
//!
//! ```text
//! tag_hash = fnv1a64(tag)
//! derive   = mix(mix(master ^ mix(tag_hash)) + (index + 1) * 0x9E3779B97F4A7C15)
//! ```
//!
//! with `mix` the SplitMix64 finalizer, so it is reproducible in any
//! language with 64-bit wrapping arithmetic. Distinct tags hash to distinct
//! 64-bit values for every tag used in this crate (checked in tests).

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn fnv1a64(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedTree {
    master: u64,
}

impl SeedTree {
    pub fn new(master: u64) -> Self {
        Self { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn derive(&self, tag: &str, index: u64) -> u64 {
        let base = mix(self.master ^ mix(fnv1a64(tag)));
        mix(base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN)))
    }

    pub fn subtree(&self, tag: &str, index: u64) -> SeedTree {
        SeedTree::new(self.derive(tag, index))
    }

    pub fn rng(&self, tag: &str, index: u64) -> SplitMix64 {
        SplitMix64::new(self.derive(tag, index))
    }
}

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` by rejection (no modulo bias). `n` must be > 0.
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let threshold = n.wrapping_neg() % n;
        loop {
            let r = self.next_u64();
            if r >= threshold {
                return r % n;
            }
        }
    }

    pub fn range_f64(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal via Box-Muller (one draw per call).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Fisher-Yates, walking from the back.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
