//! Splittable seeding: every random stream in a run derives from one root
//! seed through a fixed path of labels, so any trial can be replayed alone.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedTree(u64);

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl SeedTree {
    pub fn new(seed: u64) -> Self {
        SeedTree(seed)
    }

    pub fn value(self) -> u64 {
        self.0
    }

    pub fn child(self, label: u64) -> Self {
        SeedTree(splitmix(self.0 ^ splitmix(label.wrapping_add(0x632B_E59B_D9B4_E019))))
    }

    /// Child keyed by a short ASCII tag, e.g. `"noise"`.
    pub fn named(self, tag: &str) -> Self {
        let label = tag.bytes().fold(0xCBF2_9CE4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01B3));
        self.child(label)
    }

    pub fn rng(self) -> Rng {
        ChaCha8Rng::seed_from_u64(self.0)
    }
}
