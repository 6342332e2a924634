//! Counter-based random substreams.
//!
//! Every random quantity in the crate is drawn from a generator keyed by a
//! path of integers below a master seed, e.g. `(seed, grid point, label
//! draw)` or `(seed, trial)`. A key is derived by folding each path element
//! through the SplitMix64 finalizer, so a substream depends only on its path
//! and never on how many other substreams were consumed before it. Parallel
//! drivers can therefore split work arbitrarily and still reproduce the
//! sequential result bit for bit.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

/// Generator type used for every substream.
pub type StreamRng = Xoshiro256PlusPlus;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// A node in the substream tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Stream(u64);

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream(splitmix64(seed ^ 0x6e65_7470_6f77_6572))
    }

    /// The `index`-th child of this stream.
    #[inline]
    pub fn child(self, index: u64) -> Self {
        Stream(splitmix64(self.0 ^ splitmix64(index.wrapping_add(GOLDEN))))
    }

    #[inline]
    pub fn rng(self) -> StreamRng {
        StreamRng::seed_from_u64(self.0)
    }

    pub fn key(self) -> u64 {
        self.0
    }
}

/// Fixed child indices so unrelated consumers of one master seed never share
/// a substream.
pub(crate) mod purpose {
    pub const LABELS: u64 = 1;
    pub const SWITCH: u64 = 2;
    pub const TRIALS: u64 = 3;
    pub const GRAPH: u64 = 4;
    pub const SURFACE: u64 = 5;
    pub const REPLICATES: u64 = 6;
}
