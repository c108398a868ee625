//! Named random substreams derived from a single master seed.
//!
//! Every consumer of randomness asks for `(seed, domain, index)`. The ChaCha
//! stream id carries the index, so results never depend on how work is split
//! across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Offspring counts and orientations of tree `index`.
    Tree,
    /// Leaf-duration draws of tree `index`.
    Durations,
    /// Root orientation of tiled root `index`.
    RootOrientation,
    /// Sample `index` of a W ensemble.
    WSample,
    /// Replicate `index` of a path ensemble (derives a per-path seed).
    Replicate,
    /// Time-point draws of an analyzer on path `index`.
    Analysis,
}

impl Domain {
    fn tag(self) -> u64 {
        match self {
            Domain::Tree => 0x7472_6565,
            Domain::Durations => 0x6475_7261,
            Domain::RootOrientation => 0x726f_6f74,
            Domain::WSample => 0x7773_616d,
            Domain::Replicate => 0x7265_706c,
            Domain::Analysis => 0x616e_616c,
        }
    }
}

pub fn substream(seed: u64, domain: Domain, index: u64) -> SimRng {
    let mut rng =
        ChaCha8Rng::seed_from_u64(seed ^ domain.tag().wrapping_mul(0x9e37_79b9_7f4a_7c15));
    rng.set_stream(index);
    rng
}

/// Seed of replicate `index` in an ensemble driven by `master`.
pub fn replicate_seed(master: u64, index: u64) -> u64 {
    use rand::RngCore;
    substream(master, Domain::Replicate, index).next_u64()
}
