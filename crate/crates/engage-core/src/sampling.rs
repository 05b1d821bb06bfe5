//! Synthetic user populations: uniform and skewed-uniform draws on the
//! probability simplex.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::population::UserPopulation;

/// Uniform point on the (d-1)-simplex: d unit-exponential draws normalized
/// by their sum.
pub fn simplex_point(rng: &mut impl Rng, d: usize) -> Vec<f64> {
    loop {
        let mut point: Vec<f64> = (0..d).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
        let sum: f64 = point.iter().sum();
        if sum > 0.0 {
            for v in &mut point {
                *v /= sum;
            }
            return point;
        }
    }
}

pub fn sample_uniform_population(k: usize, d: usize, seed: u64) -> Result<UserPopulation> {
    if k == 0 {
        return Err(Error::Empty { what: "users" });
    }
    if d == 0 {
        return Err(Error::Empty { what: "dimensions" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..k).map(|_| simplex_point(&mut rng, d)).collect();
    UserPopulation::from_rows(rows)
}

/// Skewed-uniform population: feature weights `w` are drawn once on the
/// simplex and sorted ascending; each user is a uniform simplex draw
/// re-weighted coordinate-wise by `w` and renormalized. Returns the
/// population together with `w`.
pub fn sample_skewed_population(
    k: usize,
    d: usize,
    seed: u64,
) -> Result<(UserPopulation, Vec<f64>)> {
    if k == 0 {
        return Err(Error::Empty { what: "users" });
    }
    if d == 0 {
        return Err(Error::Empty { what: "dimensions" });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut w = simplex_point(&mut rng, d);
    w.sort_by(f64::total_cmp);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let u = simplex_point(&mut rng, d);
            u.iter().zip(&w).map(|(&uv, &wv)| uv * wv).collect()
        })
        .collect();
    // Renormalization to L1 = 1 happens inside from_rows.
    Ok((UserPopulation::from_rows(rows)?, w))
}
