//! Non-negative matrix factorization of a sparse ratings matrix by
//! multiplicative updates restricted to observed entries. The user factor
//! matrix, L1-normalized per row, becomes the game's user population; the
//! epsilon clamp keeps every entry strictly positive.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::UserPopulation;
use crate::ratings::RatingsTable;

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NmfConfig {
    pub rank: usize,
    pub iterations: usize,
    pub seed: u64,
    /// Division guard and entry floor for the multiplicative updates.
    pub epsilon: f64,
}

impl NmfConfig {
    pub fn new(rank: usize, iterations: usize, seed: u64) -> Result<Self> {
        if rank == 0 {
            return Err(Error::Empty { what: "rank" });
        }
        if iterations == 0 {
            return Err(Error::Empty { what: "iterations" });
        }
        Ok(NmfConfig { rank, iterations, seed, epsilon: 1e-9 })
    }
}

#[derive(Debug, Clone)]
pub struct NmfOutcome {
    pub population: UserPopulation,
    /// Squared Frobenius error over observed entries after each iteration.
    pub loss_trace: Vec<f64>,
}

fn observed_loss(
    triples: &[(u32, u32, f64)],
    w: &[f64],
    h: &[f64],
    rank: usize,
) -> f64 {
    let mut loss = 0.0;
    for &(u, i, r) in triples {
        let wu = &w[u as usize * rank..(u as usize + 1) * rank];
        let hi = &h[i as usize * rank..(i as usize + 1) * rank];
        let pred: f64 = wu.iter().zip(hi).map(|(&a, &b)| a * b).sum();
        loss += (r - pred) * (r - pred);
    }
    loss
}

pub fn nmf_user_embeddings(ratings: &RatingsTable, config: &NmfConfig) -> Result<NmfOutcome> {
    if ratings.triples.is_empty() {
        return Err(Error::Empty { what: "ratings" });
    }
    let ku = ratings.num_users();
    let ki = ratings.num_items();
    let rank = config.rank;
    let limit = ku.min(ki);
    if rank > limit {
        return Err(Error::RankTooLarge { rank, limit });
    }
    let eps = config.epsilon;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut w: Vec<f64> = (0..ku * rank).map(|_| rng.gen::<f64>()).collect();
    let mut h: Vec<f64> = (0..ki * rank).map(|_| rng.gen::<f64>()).collect();

    let mut loss_trace = Vec::with_capacity(config.iterations);
    let mut num = vec![0.0f64; ku.max(ki) * rank];
    let mut den = vec![0.0f64; ku.max(ki) * rank];

    for _ in 0..config.iterations {
        // W update on observed entries: W_uf *= num / (den + eps).
        num[..ku * rank].fill(0.0);
        den[..ku * rank].fill(0.0);
        for &(u, i, r) in &ratings.triples {
            let u = u as usize;
            let i = i as usize;
            let wu = &w[u * rank..(u + 1) * rank];
            let hi = &h[i * rank..(i + 1) * rank];
            let pred: f64 = wu.iter().zip(hi).map(|(&a, &b)| a * b).sum();
            for f in 0..rank {
                num[u * rank + f] += r * hi[f];
                den[u * rank + f] += pred * hi[f];
            }
        }
        for (wv, (nv, dv)) in w.iter_mut().zip(num.iter().zip(&den)) {
            *wv = (*wv * nv / (dv + eps)).max(eps);
        }

        // H update with the refreshed W.
        num[..ki * rank].fill(0.0);
        den[..ki * rank].fill(0.0);
        for &(u, i, r) in &ratings.triples {
            let u = u as usize;
            let i = i as usize;
            let wu = &w[u * rank..(u + 1) * rank];
            let hi = &h[i * rank..(i + 1) * rank];
            let pred: f64 = wu.iter().zip(hi).map(|(&a, &b)| a * b).sum();
            for f in 0..rank {
                num[i * rank + f] += r * wu[f];
                den[i * rank + f] += pred * wu[f];
            }
        }
        for (hv, (nv, dv)) in h.iter_mut().zip(num.iter().zip(&den)) {
            *hv = (*hv * nv / (dv + eps)).max(eps);
        }

        loss_trace.push(observed_loss(&ratings.triples, &w, &h, rank));
    }

    let mut rows = Vec::with_capacity(ku);
    for u in 0..ku {
        let row = w[u * rank..(u + 1) * rank].to_vec();
        if row.iter().sum::<f64>() == 0.0 {
            return Err(Error::ZeroFactorRow { row: u });
        }
        rows.push(row);
    }
    Ok(NmfOutcome {
        population: UserPopulation::from_rows(rows)?,
        loss_trace,
    })
}
