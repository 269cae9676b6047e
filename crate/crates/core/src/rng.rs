//! Counter-based pseudo-random generator used for every random draw.
//!
//! The generator is part of the external contract: key files, ciphertexts
//! and experiment outputs are replayable from seeds alone, so the mapping
//! from `(key, counter)` to output words is fixed here and pinned by golden
//! vectors in the tests.
//!
//! Algorithm:
//!
//! ```text
//! GAMMA = 0x9E3779B97F4A7C15
//! mix(z):  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//!          z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//!          z ^ (z >> 31)                                  (wrapping u64)
//! word(key, n) = mix(key + (n + 1) * GAMMA)
//! ```
//!
//! `word(key, 0), word(key, 1), ...` is exactly the SplitMix64 sequence
//! started from state `key`, so any SplitMix64 implementation reproduces a
//! stream. Child streams are derived with
//! `split(key, id) = word(key ^ SPLIT_TAG, id)` where
//! `SPLIT_TAG = 0x6A09E667F3BCC909`.
//!
//! Doubles: `unit = (word >> 11) * 2^-53` in `[0, 1)`, and
//! `symmetric = 2 * unit - 1` in `[-1, 1)`. A sign draw is `+1` when the
//! top bit of the word is clear, `-1` otherwise.

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const SPLIT_TAG: u64 = 0x6A09_E667_F3BC_C909;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stateless word function: the `n`-th output of stream `key`.
#[inline]
pub fn word(key: u64, n: u64) -> u64 {
    mix64(key.wrapping_add(n.wrapping_add(1).wrapping_mul(GAMMA)))
}

#[inline]
pub fn word_to_unit(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[inline]
pub fn word_to_symmetric(w: u64) -> f64 {
    2.0 * word_to_unit(w) - 1.0
}

/// A position in a counter-addressed stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CounterRng {
    key: u64,
    counter: u64,
}

impl CounterRng {
    pub fn new(seed: u64) -> Self {
        CounterRng { key: seed, counter: 0 }
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Independent child stream `id`, starting at counter 0.
    pub fn split(&self, id: u64) -> Self {
        CounterRng::new(word(self.key ^ SPLIT_TAG, id))
    }

    /// Random access into this stream without advancing it.
    pub fn word_at(&self, n: u64) -> u64 {
        word(self.key, n)
    }

    pub fn next_u64(&mut self) -> u64 {
        let w = word(self.key, self.counter);
        self.counter = self.counter.wrapping_add(1);
        w
    }

    /// Uniform in `[0, 1)`.
    pub fn next_unit(&mut self) -> f64 {
        word_to_unit(self.next_u64())
    }

    /// Uniform in `[-1, 1)`.
    pub fn next_symmetric(&mut self) -> f64 {
        word_to_symmetric(self.next_u64())
    }

    /// `+1.0` or `-1.0` with equal probability.
    pub fn next_sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference SplitMix64 written the stateful way, independent of `word`.
    struct SplitMix64(u64);

    impl SplitMix64 {
        fn next(&mut self) -> u64 {
            self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = self.0;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^ (z >> 31)
        }
    }

    #[test]
    fn matches_splitmix64_sequence() {
        for seed in [0u64, 1, 42, u64::MAX] {
            let mut reference = SplitMix64(seed);
            let mut rng = CounterRng::new(seed);
            for _ in 0..64 {
                assert_eq!(rng.next_u64(), reference.next());
            }
        }
    }

    #[test]
    fn golden_words() {
        // Published SplitMix64 outputs for seed 0.
        let mut rng = CounterRng::new(0);
        assert_eq!(rng.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(rng.next_u64(), 0x6E78_9E6A_A1B9_65F4);
        assert_eq!(rng.next_u64(), 0x06C4_5D18_8009_454F);
    }

    #[test]
    fn golden_split_and_doubles() {
        let child = CounterRng::new(1234).split(7);
        assert_eq!(child.key(), word(1234 ^ SPLIT_TAG, 7));
        let w = 0xFFFF_FFFF_FFFF_FFFFu64;
        assert!(word_to_unit(w) < 1.0);
        assert_eq!(word_to_symmetric(0), -1.0);
        assert_eq!(word_to_unit(1 << 63), 0.5);
    }

    #[test]
    fn word_at_is_random_access() {
        let mut rng = CounterRng::new(99);
        let peek = rng.word_at(5);
        for _ in 0..5 {
            rng.next_u64();
        }
        assert_eq!(rng.next_u64(), peek);
    }

    #[test]
    fn splits_differ() {
        let root = CounterRng::new(5);
        assert_ne!(root.split(0).key(), root.split(1).key());
        assert_ne!(root.split(0).key(), root.key());
    }
}
