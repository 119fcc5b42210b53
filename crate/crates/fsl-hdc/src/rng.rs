//! Deterministic random streams.
//!
//! Every random choice in the crate draws from a [`ChaCha8Rng`] keyed by the
//! master seed plus a named stream tag (and optional indices). Streams are
//! independent of each other and of evaluation order, so regenerating any
//! single item — one item-memory vector, one partition, one user layout —
//! yields identical bits no matter what else ran before.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Named sub-streams of the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Position hypervector bank of the item memory.
    PositionBank = 1,
    /// Value hypervector bank of the item memory.
    ValueBank = 2,
    /// Flip-position ordering for level-encoded value vectors.
    ValueFlipOrder = 3,
    /// Per-class subsampling of the training pool.
    Subsample = 4,
    /// Client partition assignment.
    Partition = 5,
    /// Draw of the main server's local dataset.
    MainServerDraw = 6,
    /// Iteration order for fed-server retraining.
    FedShuffle = 7,
    /// Iteration order and holdout split for main-server retraining.
    MainShuffle = 8,
    /// User positions in the network area.
    UserPositions = 9,
    /// Generic per-test diagnostics.
    Diagnostics = 10,
}

/// splitmix64 finalizer; a cheap, well-mixed 64-bit permutation.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha8 generator keyed by `(master, stream, indices...)`.
pub fn stream_rng(master: u64, stream: Stream, indices: &[u64]) -> ChaCha8Rng {
    let mut state = mix(master ^ mix(stream as u64));
    for &ix in indices {
        state = mix(state ^ mix(ix));
    }
    let mut seed = [0u8; 32];
    for chunk in seed.chunks_exact_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
