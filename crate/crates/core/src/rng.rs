//! Seeded random streams.
//!
//! Every random quantity comes from a ChaCha8 generator keyed with
//! `seed_from_u64(seed)`. Independent work items (Monte Carlo trials, data
//! splits) each get their own child stream, selected with ChaCha's 64-bit
//! stream id, so results do not depend on how work is scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Stream ids at or above this are reserved for non-trial purposes.
pub const RESERVED_STREAM_BASE: u64 = 1 << 62;

/// Stream used for the training subsample in dataset splits.
pub const TRAIN_STREAM: u64 = RESERVED_STREAM_BASE;
/// Stream used for the held-out subsample in dataset splits.
pub const TEST_STREAM: u64 = RESERVED_STREAM_BASE + 1;
/// Stream used for cross-validation fold assignment.
pub const FOLD_STREAM: u64 = RESERVED_STREAM_BASE + 2;

/// Child stream `stream` of `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// In-place Fisher–Yates shuffle: for `i = len-1 .. 1`, swap `i` with a
/// uniform `j ∈ [0, i]`.
pub fn shuffle<T, R: Rng + ?Sized>(rng: &mut R, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}
