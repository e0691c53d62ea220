//! Counter-based randomness.
//!
//! Every draw in the graph model is addressed by `(seed, side, round,
//! vertex)` rather than pulled from a shared sequential stream. The
//! underlying generator is ChaCha8: the seed is the key, `(side, round)`
//! selects the stream and the vertex index selects a fixed block of the
//! keystream. Draws for a vertex therefore exist whether or not the vertex
//! ends up using them, which makes graphs for different thresholds `m`
//! nest inside each other for a fixed seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Keystream words reserved per vertex. Uniform sampling on `[0, n)` uses
/// rejection, which needs more than one 64-bit word with probability below
/// `2^-32` for any `n < 2^32`.
const WORDS_PER_VERTEX: u128 = 16;

/// Which side of the bipartition a vertex lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Row,
    Col,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Row => Side::Col,
            Side::Col => Side::Row,
        }
    }
}

/// Keyed source of uniform selections for one model seed.
#[derive(Clone, Debug)]
pub struct SelectionRng {
    inner: ChaCha8Rng,
}

impl SelectionRng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform target in `[0, n)` for the given vertex's selection in
    /// `round` (1 or 2). Unbiased: `gen_range` rejects instead of reducing
    /// modulo `n`.
    pub fn select(&mut self, side: Side, round: u8, vertex: usize, n: usize) -> u32 {
        debug_assert!(n >= 1 && n <= u32::MAX as usize);
        debug_assert!(round == 1 || round == 2);
        let stream = match side {
            Side::Row => 0u64,
            Side::Col => 1,
        } | (u64::from(round) << 1);
        self.inner.set_stream(stream);
        self.inner.set_word_pos(vertex as u128 * WORDS_PER_VERTEX);
        self.inner.gen_range(0..n as u32)
    }
}

/// SplitMix64 finaliser: `z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9;
/// z = (z ^ (z >> 27)) * 0x94D049BB133111EB; z ^ (z >> 31)`.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for Monte Carlo trial `trial` under master seed `seed`:
///
/// `mix64(seed + 0x9E3779B97F4A7C15 * (trial + 1))` with wrapping
/// arithmetic. Trials can be generated in any order or in parallel.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    mix64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(trial.wrapping_add(1))))
}
