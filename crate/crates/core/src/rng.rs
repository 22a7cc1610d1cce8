//! Reproducible, splittable random streams.
//!
//! Every consumer draws from its own ChaCha20 stream, keyed by the run seed
//! and addressed by a `(Substream, index)` pair. Streams never share state,
//! so drawing from one cannot perturb another, and trials can be scheduled
//! in any order or on any thread.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::signal::C64;

/// Named purposes for random draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Substream {
    Bits,
    Sop,
    PdlAngle,
    Ase,
    PhaseNoise,
    Pmd,
    Training,
    /// Free stream for tests and synthetic channels.
    Auxiliary,
}

impl Substream {
    fn id(self) -> u64 {
        match self {
            Substream::Bits => 1,
            Substream::Sop => 2,
            Substream::PdlAngle => 3,
            Substream::Ase => 4,
            Substream::PhaseNoise => 5,
            Substream::Pmd => 6,
            Substream::Training => 7,
            Substream::Auxiliary => 8,
        }
    }
}

pub type StreamRng = ChaCha20Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeededRng {
    pub seed: u64,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Independent stream for `kind`, sub-addressed by `index` (e.g. the
    /// amplifier or section number).
    pub fn stream(&self, kind: Substream, index: u64) -> StreamRng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream((kind.id() << 48) ^ (index & 0x0000_ffff_ffff_ffff));
        rng
    }

    /// Seed of trial `trial` derived from this base seed.
    pub fn trial_seed(&self, trial: u64) -> u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(u64::MAX - 1);
        rng.set_word_pos(u128::from(trial) * 2);
        rng.random()
    }
}

/// `n` equiprobable bits (0 or 1).
pub fn generate_bits<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<u8> {
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word: u64 = rng.random();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|i| ((word >> i) & 1) as u8));
    }
    bits
}

/// Circular complex Gaussian sample with E|z|² = `variance`.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> C64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re * s, im * s)
}
