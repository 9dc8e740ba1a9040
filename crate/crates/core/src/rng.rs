//! Seeded random streams.
//!
//! Every random decision is drawn from a ChaCha8 stream keyed by
//! `(run seed, stream label, unit key)`. A unit (a trigram, a suffix, a word
//! type) therefore sees the same uniform draw whatever the noise level, so the
//! set of affected units at a lower theta is a subset of the set at a higher
//! theta, and changing one noiser's parameter never perturbs another's draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Seed used whenever the caller does not supply one.
pub const DEFAULT_SEED: u64 = 20_240_601;

/// Labels separating the independent random streams of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Phonological,
    Morphological,
    FunctionWord,
    ContentWord,
    Replicate,
}

impl Stream {
    fn label(self) -> &'static [u8] {
        match self {
            Stream::Phonological => b"phon",
            Stream::Morphological => b"morph",
            Stream::FunctionWord => b"func",
            Stream::ContentWord => b"content",
            Stream::Replicate => b"replicate",
        }
    }
}

/// A generator dedicated to one unit of one stream.
pub fn unit_rng(seed: u64, stream: Stream, key: &str) -> ChaCha8Rng {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    hasher.update(stream.label());
    hasher.update([0u8]);
    hasher.update(key.as_bytes());
    let digest: [u8; 32] = hasher.finalize().into();
    ChaCha8Rng::from_seed(digest)
}

/// Derives a child seed, e.g. one per sweep replicate.
pub fn derive_seed(seed: u64, stream: Stream, key: &str) -> u64 {
    use rand::RngCore;
    unit_rng(seed, stream, key).next_u64()
}
