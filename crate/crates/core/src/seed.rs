//! Seed derivation.
//!
//! Every random quantity in a trial comes from a ChaCha8 generator keyed by
//! the trial seed. Independent consumers use distinct ChaCha streams of the
//! same key, so scenery cells and walk steps never share keystream.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const STREAM_SCENERY_NONNEG: u64 = 0;
pub(crate) const STREAM_SCENERY_NEG: u64 = 1;
pub(crate) const STREAM_WALK: u64 = 2;
pub(crate) const STREAM_AUX: u64 = 3;

/// SplitMix64 finalizer. A bijection on `u64`.
pub fn mix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Seed of trial `index` under `master`. Injective in `index` for a fixed master.
pub fn trial_seed(master: u64, index: u64) -> u64 {
    mix64(mix64(master).wrapping_add(index))
}

pub(crate) fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for walk increments of the trial keyed by `seed`.
pub fn walk_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_WALK)
}

/// Generator for auxiliary draws (i.i.d. location samples and the like).
pub fn aux_rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, STREAM_AUX)
}
