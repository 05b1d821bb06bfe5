//! Best-response dynamics over the standard basis.
//!
//! Each pass draws a fresh random permutation of producers and applies the
//! first strictly improving basis deviation it finds; the run converges when
//! a full pass finds none. Randomness comes from a single ChaCha8 generator
//! seeded from the run seed: stream 0 initializes the profile, stream
//! `pass + 1` drives that pass's permutation, so traces are reproducible
//! across platforms.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::population::UserPopulation;
use crate::serving::ServingRule;
use crate::strategy::StrategyProfile;
use crate::utility::{cached_opponent_sums, KahanSum};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DynamicsConfig {
    /// Iteration cap, counted in while-loop passes.
    pub max_iters: usize,
    pub seed: u64,
}

impl DynamicsConfig {
    pub fn new(max_iters: usize, seed: u64) -> Result<Self> {
        if max_iters == 0 {
            return Err(Error::Empty { what: "max_iters" });
        }
        Ok(DynamicsConfig { max_iters, seed })
    }
}

/// One applied strategy update: (iteration, producer, old feature, new
/// feature).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UpdateEvent(pub usize, pub usize, pub usize, pub usize);

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DynamicsResult {
    pub converged: bool,
    pub iterations: usize,
    /// Final basis profile, returned even on non-convergence.
    pub basis: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<UpdateEvent>>,
}

/// Utility of producer `i` for every candidate basis vector, holding
/// opponents fixed. O(K n) to build the opponent cache, then O(K d) for the
/// scan.
pub fn basis_utilities(
    i: usize,
    profile: &StrategyProfile,
    users: &UserPopulation,
    rule: &ServingRule,
) -> Result<Vec<f64>> {
    let cache = cached_opponent_sums(profile, users, rule, i)?;
    let d = users.dim();
    let mut out = Vec::with_capacity(d);
    for f in 0..d {
        let mut acc = KahanSum::default();
        for (k, c) in users.rows().enumerate() {
            acc.add(cache.engagement(k, c[f]));
        }
        out.push(acc.value());
    }
    Ok(out)
}

/// Among exact ties the current feature wins if it is a maximizer,
/// otherwise the lowest index wins.
fn argmax_with_current(utils: &[f64], current: usize) -> usize {
    let best = utils.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if utils[current] == best {
        return current;
    }
    utils.iter().position(|&u| u == best).unwrap()
}

/// Best basis response for producer `i` and its utility.
pub fn best_basis_response(
    i: usize,
    profile: &StrategyProfile,
    users: &UserPopulation,
    rule: &ServingRule,
) -> Result<(usize, f64)> {
    let utils = basis_utilities(i, profile, users, rule)?;
    let current = profile
        .basis()
        .map(|b| b[i])
        .ok_or(Error::BadProfileFile { reason: "basis form required".into() })?;
    let best = argmax_with_current(&utils, current);
    Ok((best, utils[best]))
}

pub fn run_best_response_dynamics(
    game: &GameInstance,
    config: &DynamicsConfig,
) -> DynamicsResult {
    let d = game.dim();
    let n = game.n;

    let mut init_rng = ChaCha8Rng::seed_from_u64(config.seed);
    init_rng.set_stream(0);
    let features: Vec<usize> = (0..n).map(|_| init_rng.gen_range(0..d)).collect();
    let mut profile = StrategyProfile::from_basis(d, features).expect("valid game");

    let mut trace = Vec::new();
    let mut iterations = 0;
    let mut converged = false;

    while iterations < config.max_iters {
        let mut pass_rng = ChaCha8Rng::seed_from_u64(config.seed);
        pass_rng.set_stream(iterations as u64 + 1);
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut pass_rng);
        iterations += 1;

        let mut improved = false;
        for &i in &order {
            let utils = basis_utilities(i, &profile, &game.users, &game.rule)
                .expect("dimensions checked at construction");
            let current = profile.basis().unwrap()[i];
            let best = argmax_with_current(&utils, current);
            // Strict improvement only, with no epsilon.
            if utils[best] > utils[current] {
                trace.push(UpdateEvent(iterations, i, current, best));
                profile.set_basis_feature(i, best);
                improved = true;
                break;
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }

    let basis = profile.basis().unwrap().to_vec();
    debug_assert!(!converged || verify_pure_ne_on_basis(&basis, game));
    DynamicsResult {
        converged,
        iterations,
        basis,
        trace: Some(trace),
    }
}

/// True iff no producer can gain more than 1e-12 by deviating to any basis
/// vector.
pub fn verify_pure_ne_on_basis(basis: &[usize], game: &GameInstance) -> bool {
    let profile = match StrategyProfile::from_basis(game.dim(), basis.to_vec()) {
        Ok(p) => p,
        Err(_) => return false,
    };
    for i in 0..basis.len() {
        let utils = match basis_utilities(i, &profile, &game.users, &game.rule) {
            Ok(u) => u,
            Err(_) => return false,
        };
        let held = utils[basis[i]];
        if utils.iter().any(|&u| u > held + 1e-12) {
            return false;
        }
    }
    true
}

/// Enumerates all d^n basis profiles (lexicographically) and returns the
/// pure equilibria. Guarded to d^n <= 10^6.
pub fn brute_force_ne_enumeration(game: &GameInstance) -> Result<Vec<Vec<usize>>> {
    const LIMIT: u128 = 1_000_000;
    let d = game.dim() as u128;
    let size = d
        .checked_pow(game.n as u32)
        .ok_or(Error::InstanceTooLarge { size: u128::MAX, limit: LIMIT })?;
    if size > LIMIT {
        return Err(Error::InstanceTooLarge { size, limit: LIMIT });
    }

    let mut equilibria = Vec::new();
    let mut current = vec![0usize; game.n];
    loop {
        if verify_pure_ne_on_basis(&current, game) {
            equilibria.push(current.clone());
        }
        // Lexicographic increment, most significant digit first.
        let mut pos = game.n;
        loop {
            if pos == 0 {
                return Ok(equilibria);
            }
            pos -= 1;
            current[pos] += 1;
            if current[pos] < game.dim() {
                break;
            }
            current[pos] = 0;
        }
    }
}
