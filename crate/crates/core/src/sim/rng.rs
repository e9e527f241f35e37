//! Seeded random streams.
//!
//! Every random draw comes from a ChaCha8 stream keyed by the run seed and
//! selected by a stream id `(purpose << 48) | index`, so chains can run in
//! any order or in parallel and still reproduce bit for bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a random stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    /// Order of transmitted data symbols.
    Symbols = 1,
    /// Order of pilot symbols.
    PilotOrder = 2,
    /// Gate chains carrying data symbols; indexed by sub-run or pixel.
    DataChain = 3,
    /// Gate chains carrying pilot symbols.
    PilotChain = 4,
}

pub fn stream_rng(seed: u64, purpose: Purpose, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}
