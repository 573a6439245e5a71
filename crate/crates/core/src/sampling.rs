//! Seeded random streams and the sampling oracles the policies draw from.
//!
//! Every trial owns one ChaCha stream per arm plus one stream for the
//! unified arm-choice draws. Streams are keyed on `(master_seed, trial)`
//! through the seed and on the arm index through the ChaCha stream id, so a
//! trial's randomness does not depend on which worker runs it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::ArmModel;

/// Stream id reserved for the unified arm-choice draws.
pub const CHOICE_STREAM: u64 = u64::MAX;

fn keyed_rng(master_seed: u64, trial: u64, stream: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&trial.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(stream);
    rng
}

/// The stream for arm `arm` in trial `trial`.
pub fn arm_stream(master_seed: u64, trial: u64, arm: usize) -> ChaCha8Rng {
    keyed_rng(master_seed, trial, arm as u64)
}

pub fn choice_stream(master_seed: u64, trial: u64) -> ChaCha8Rng {
    keyed_rng(master_seed, trial, CHOICE_STREAM)
}

/// Per-arm sampling oracle. Policies see rewards only through this.
pub trait ArmOracle {
    fn num_arms(&self) -> usize;
    fn pull(&mut self, arm: usize) -> f64;
}

/// Oracle for the unified arm: the arm is picked uniformly at random.
pub trait UnifiedOracle {
    /// Returns the arm that was picked and the reward drawn from it.
    fn pull(&mut self) -> (usize, f64);
}

pub struct SeededArms<'a> {
    arms: &'a [ArmModel],
    streams: Vec<ChaCha8Rng>,
}

impl<'a> SeededArms<'a> {
    pub fn new(arms: &'a [ArmModel], master_seed: u64, trial: u64) -> Self {
        let streams = (0..arms.len()).map(|k| arm_stream(master_seed, trial, k)).collect();
        SeededArms { arms, streams }
    }
}

impl ArmOracle for SeededArms<'_> {
    fn num_arms(&self) -> usize {
        self.arms.len()
    }

    fn pull(&mut self, arm: usize) -> f64 {
        self.arms[arm].sample(&mut self.streams[arm])
    }
}

pub struct SeededUnified<'a> {
    inner: SeededArms<'a>,
    choice: ChaCha8Rng,
}

impl<'a> SeededUnified<'a> {
    pub fn new(arms: &'a [ArmModel], master_seed: u64, trial: u64) -> Self {
        SeededUnified {
            inner: SeededArms::new(arms, master_seed, trial),
            choice: choice_stream(master_seed, trial),
        }
    }
}

impl UnifiedOracle for SeededUnified<'_> {
    fn pull(&mut self) -> (usize, f64) {
        let k = self.choice.random_range(0..self.inner.num_arms());
        (k, self.inner.pull(k))
    }
}
