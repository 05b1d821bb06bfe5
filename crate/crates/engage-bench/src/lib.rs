//! Shared fixtures for the criterion benches.

use engage_core::sampling::sample_uniform_population;
use engage_core::{GameInstance, ServingRule, StrategyProfile, UserPopulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn population(k: usize, d: usize) -> UserPopulation {
    sample_uniform_population(k, d, 42).expect("valid population")
}

pub fn random_basis_profile(n: usize, d: usize, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis: Vec<usize> = (0..n).map(|_| rng.gen_range(0..d)).collect();
    StrategyProfile::from_basis(d, basis).expect("valid profile")
}

pub fn game(k: usize, d: usize, n: usize, rule: ServingRule) -> GameInstance {
    GameInstance::new(population(k, d), n, rule).expect("valid game")
}
