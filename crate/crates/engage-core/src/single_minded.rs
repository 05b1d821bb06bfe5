//! Closed-form equilibrium machinery for single-minded users under the
//! linear-proportional rule: every user sits on a basis vector, so a basis
//! profile is fully described by per-feature producer counts and the
//! equilibrium condition `n_f / m_f <= (n_f' + 1) / m_f'` is a rational
//! inequality. All checks run in exact integer arithmetic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::UserPopulation;

/// `m[f]` = number of users whose preference vector is `e_f`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SingleMindedPopulation {
    m: Vec<u64>,
}

impl SingleMindedPopulation {
    pub fn new(m: Vec<u64>) -> Result<Self> {
        if m.is_empty() {
            return Err(Error::Empty { what: "single-minded counts" });
        }
        if let Some(idx) = m.iter().position(|&v| v == 0) {
            return Err(Error::NonPositiveCount { index: idx });
        }
        Ok(SingleMindedPopulation { m })
    }

    pub fn counts(&self) -> &[u64] {
        &self.m
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    pub fn total_users(&self) -> u64 {
        self.m.iter().sum()
    }

    /// The explicit game population: `m[f]` users at each basis vector.
    pub fn to_population(&self) -> UserPopulation {
        let d = self.dim();
        let mut rows = Vec::with_capacity(self.total_users() as usize);
        for (f, &count) in self.m.iter().enumerate() {
            for _ in 0..count {
                let mut row = vec![0.0; d];
                row[f] = 1.0;
                rows.push(row);
            }
        }
        UserPopulation::from_rows(rows).expect("basis rows are valid")
    }
}

/// Per-feature producer counts summing to the producer count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountProfile {
    pub counts: Vec<u64>,
}

impl CountProfile {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::Empty { what: "count profile" });
        }
        Ok(CountProfile { counts })
    }

    pub fn n(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// One of the basis profiles realizing these counts (producers assigned
    /// to features in index order).
    pub fn to_basis(&self) -> Vec<usize> {
        let mut basis = Vec::with_capacity(self.n() as usize);
        for (f, &count) in self.counts.iter().enumerate() {
            basis.extend(std::iter::repeat(f).take(count as usize));
        }
        basis
    }
}

fn check_dims(m: &SingleMindedPopulation, counts: &CountProfile) -> Result<()> {
    if m.dim() != counts.counts.len() {
        return Err(Error::DimensionMismatch {
            expected: m.dim(),
            got: counts.counts.len(),
        });
    }
    Ok(())
}

/// Equilibrium condition: `n_f / m_f <= (n_f' + 1) / m_f'` for all pairs,
/// via cross-multiplication.
pub fn single_minded_equilibrium_check(
    m: &SingleMindedPopulation,
    counts: &CountProfile,
) -> Result<bool> {
    check_dims(m, counts)?;
    let mv = m.counts();
    let nv = &counts.counts;
    for f in 0..mv.len() {
        for fp in 0..mv.len() {
            let lhs = nv[f] as u128 * mv[fp] as u128;
            let rhs = (nv[fp] as u128 + 1) * mv[f] as u128;
            if lhs > rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Independent deviation oracle: a producer on `f` (utility `m_f / n_f`)
/// must not gain by moving to `f'` (utility `m_f' / (n_f' + 1)`).
pub fn single_minded_brute_deviation_check(
    m: &SingleMindedPopulation,
    counts: &CountProfile,
) -> Result<bool> {
    check_dims(m, counts)?;
    let mv = m.counts();
    let nv = &counts.counts;
    for f in 0..mv.len() {
        if nv[f] == 0 {
            continue;
        }
        for fp in 0..mv.len() {
            if fp == f {
                continue;
            }
            // m_f / n_f >= m_f' / (n_f' + 1)
            let lhs = mv[f] as u128 * (nv[fp] as u128 + 1);
            let rhs = mv[fp] as u128 * nv[f] as u128;
            if lhs < rhs {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProportionalOutcome {
    pub counts: CountProfile,
    /// True when every `delta_f * n` was integral (no rounding needed).
    pub exact: bool,
    /// Worst additive violation of the equilibrium condition after
    /// rounding, clamped at 0.
    pub slack: f64,
}

/// The proportional construction `n_f = delta_f * n` with
/// `delta_f = m_f / sum(m)`, rounded by largest remainder (ties to the
/// lowest index) when the shares are not integral.
pub fn proportional_profile(m: &SingleMindedPopulation, n: u64) -> ProportionalOutcome {
    let mv = m.counts();
    let total: u64 = m.total_users();
    let d = mv.len();

    let mut counts = vec![0u64; d];
    let mut remainders: Vec<(u64, usize)> = Vec::with_capacity(d);
    let mut assigned = 0u64;
    for f in 0..d {
        let numer = mv[f] * n;
        counts[f] = numer / total;
        assigned += counts[f];
        remainders.push((numer % total, f));
    }
    let exact = remainders.iter().all(|&(r, _)| r == 0);
    // Largest remainder first; ties to the lowest feature index.
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut leftover = n - assigned;
    for &(_, f) in &remainders {
        if leftover == 0 {
            break;
        }
        counts[f] += 1;
        leftover -= 1;
    }

    let mut slack: f64 = 0.0;
    for f in 0..d {
        for fp in 0..d {
            let gap = counts[f] as f64 / mv[f] as f64
                - (counts[fp] as f64 + 1.0) / mv[fp] as f64;
            slack = slack.max(gap);
        }
    }

    ProportionalOutcome {
        counts: CountProfile { counts },
        exact,
        slack: slack.max(0.0),
    }
}
