//! Per-instance equilibrium reports: specialization metrics and utilities
//! computed from the profile best-response dynamics ends on.

use serde::{Deserialize, Serialize};

use crate::dynamics::{run_best_response_dynamics, DynamicsConfig};
use crate::error::Result;
use crate::game::GameInstance;
use crate::strategy::StrategyProfile;
use crate::utility::total_utilities;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumReport {
    /// `n_f / n` per feature.
    pub producer_fractions: Vec<f64>,
    /// `(1/K) sum_k c_k(f)` per feature.
    pub user_feature_weights: Vec<f64>,
    pub distinct_features: usize,
    pub entropy: f64,
    pub total_producer_utility: f64,
    pub avg_producer_utility: f64,
    pub total_user_utility: f64,
    pub avg_user_utility: f64,
    pub converged: bool,
    pub iterations: usize,
    pub basis: Vec<usize>,
}

/// Distinct-feature count, producer-distribution entropy, and per-feature
/// fractions of a basis profile.
pub fn specialization_metrics(basis: &[usize], d: usize) -> (usize, f64, Vec<f64>) {
    let n = basis.len() as f64;
    let mut counts = vec![0usize; d];
    for &f in basis {
        counts[f] += 1;
    }
    let distinct = counts.iter().filter(|&&c| c > 0).count();
    let mut entropy = 0.0;
    let mut fractions = Vec::with_capacity(d);
    for &c in &counts {
        let p = c as f64 / n;
        fractions.push(p);
        if c > 0 {
            entropy -= p * p.ln();
        }
    }
    (distinct, entropy, fractions)
}

/// Runs the dynamics once and summarizes the final profile (flagged, not
/// skipped, when the run did not converge).
pub fn run_instance(game: &GameInstance, config: &DynamicsConfig) -> Result<EquilibriumReport> {
    let result = run_best_response_dynamics(game, config);
    let d = game.dim();
    let (distinct_features, entropy, producer_fractions) =
        specialization_metrics(&result.basis, d);

    let profile = StrategyProfile::from_basis(d, result.basis.clone())?;
    let (total_producer_utility, total_user_utility) =
        total_utilities(&profile, &game.users, &game.rule)?;

    let k = game.users.num_users() as f64;
    let user_feature_weights = game
        .users
        .column_sums()
        .into_iter()
        .map(|s| s / k)
        .collect();

    Ok(EquilibriumReport {
        producer_fractions,
        user_feature_weights,
        distinct_features,
        entropy,
        avg_producer_utility: total_producer_utility / game.n as f64,
        total_producer_utility,
        avg_user_utility: total_user_utility / k,
        total_user_utility,
        converged: result.converged,
        iterations: result.iterations,
        basis: result.basis,
    })
}
