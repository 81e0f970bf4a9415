//! Hierarchical, splittable random streams.
//!
//! Every random quantity in the crate is drawn from a [`Stream`] obtained
//! from a [`StreamKey`]. Keys form a tree rooted at the master seed; a child
//! key depends only on its parent and its tag, so adding draws to one branch
//! never perturbs another (e.g. changing the evaluation count leaves the
//! training trajectory untouched).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The concrete generator behind every stream.
pub type Stream = ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct StreamKey(u64);

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        StreamKey(mix(seed))
    }

    pub fn raw(self) -> u64 {
        self.0
    }

    pub fn child(self, tag: u64) -> Self {
        StreamKey(mix(self.0 ^ mix(tag.wrapping_mul(0xd6e8_feb8_6659_fd93))))
    }

    /// Child keyed by a name (FNV-1a hash), used for scheme names and phases.
    pub fn named(self, name: &str) -> Self {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in name.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }

    pub fn rng(self) -> Stream {
        Stream::seed_from_u64(self.0)
    }
}
