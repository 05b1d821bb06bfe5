use crate::error::{Error, Result};
use crate::population::UserPopulation;
use crate::serving::{serve_probabilities, ServingRule};
use crate::strategy::StrategyProfile;

/// Neumaier-compensated accumulator. Utility sums run over thousands of
/// users; compensation keeps them stable under user reordering (within
/// 1e-12).
#[derive(Debug, Default, Clone, Copy)]
pub struct KahanSum {
    sum: f64,
    c: f64,
}

impl KahanSum {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

fn check_dims(profile: &StrategyProfile, users: &UserPopulation) -> Result<()> {
    if profile.dim() != users.dim() {
        return Err(Error::DimensionMismatch {
            expected: users.dim(),
            got: profile.dim(),
        });
    }
    Ok(())
}

/// Expected engagement utility of producer `i`: the exact sum over all
/// users of `p_i(c_k, s) * (c_k . s_i)`.
pub fn producer_utility(
    i: usize,
    profile: &StrategyProfile,
    users: &UserPopulation,
    rule: &ServingRule,
) -> Result<f64> {
    check_dims(profile, users)?;
    let n = profile.num_producers();
    if i >= n {
        return Err(Error::ProducerOutOfRange { index: i, n });
    }
    let mut acc = KahanSum::default();
    for c in users.rows() {
        let probs = serve_probabilities(c, profile, rule)?;
        acc.add(probs[i] * profile.dot(i, c));
    }
    Ok(acc.value())
}

/// Total producer utility and total user utility, computed by their
/// separate definitions: `U_p` sums producers then users, `U_u` sums users
/// then producers. The two agree up to summation noise.
pub fn total_utilities(
    profile: &StrategyProfile,
    users: &UserPopulation,
    rule: &ServingRule,
) -> Result<(f64, f64)> {
    check_dims(profile, users)?;
    let n = profile.num_producers();

    let mut producer_total = KahanSum::default();
    for i in 0..n {
        producer_total.add(producer_utility(i, profile, users, rule)?);
    }

    let mut user_total = KahanSum::default();
    for c in users.rows() {
        let probs = serve_probabilities(c, profile, rule)?;
        let mut engagement = KahanSum::default();
        for (i, &p) in probs.iter().enumerate() {
            engagement.add(p * profile.dot(i, c));
        }
        user_total.add(engagement.value());
    }

    Ok((producer_total.value(), user_total.value()))
}

/// Per-user opponent aggregates for producer `i`, letting the utility of
/// any candidate strategy of `i` be evaluated in O(K).
///
/// Linear stores `S(c_k, s_-i) = sum_{j != i} c_k . s_j`. Softmax stores
/// the max opponent alignment `m_k` and `sum_{j != i} exp((c_k . s_j - m_k)
/// / tau)`; with no opponents the exp-sum is 0.
#[derive(Debug, Clone)]
pub enum OpponentCache {
    Linear { sums: Vec<f64> },
    Softmax { tau: f64, max_dot: Vec<f64>, exp_sums: Vec<f64> },
}

impl OpponentCache {
    /// Probability of producer `i` being served to user `k` when its own
    /// alignment with that user is `x`.
    pub fn probability(&self, k: usize, x: f64) -> f64 {
        match self {
            OpponentCache::Linear { sums } => {
                if x > 0.0 {
                    x / (x + sums[k])
                } else {
                    0.0
                }
            }
            OpponentCache::Softmax { tau, max_dot, exp_sums } => {
                if exp_sums[k] == 0.0 {
                    return 1.0;
                }
                let m = max_dot[k].max(x);
                let own = ((x - m) / tau).exp();
                let opp = exp_sums[k] * ((max_dot[k] - m) / tau).exp();
                own / (own + opp)
            }
        }
    }

    /// Engagement contribution of user `k`: `p * x`.
    pub fn engagement(&self, k: usize, x: f64) -> f64 {
        self.probability(k, x) * x
    }
}

pub fn cached_opponent_sums(
    profile: &StrategyProfile,
    users: &UserPopulation,
    rule: &ServingRule,
    i: usize,
) -> Result<OpponentCache> {
    check_dims(profile, users)?;
    let n = profile.num_producers();
    if i >= n {
        return Err(Error::ProducerOutOfRange { index: i, n });
    }
    let k = users.num_users();
    match rule {
        ServingRule::Linear => {
            let mut sums = Vec::with_capacity(k);
            for c in users.rows() {
                let mut s = 0.0;
                for j in 0..n {
                    if j != i {
                        s += profile.dot(j, c);
                    }
                }
                sums.push(s);
            }
            Ok(OpponentCache::Linear { sums })
        }
        ServingRule::Softmax { tau } => {
            let mut max_dot = Vec::with_capacity(k);
            let mut exp_sums = Vec::with_capacity(k);
            for c in users.rows() {
                let mut m = f64::NEG_INFINITY;
                for j in 0..n {
                    if j != i {
                        m = m.max(profile.dot(j, c));
                    }
                }
                let mut e = 0.0;
                if m.is_finite() {
                    for j in 0..n {
                        if j != i {
                            e += ((profile.dot(j, c) - m) / tau).exp();
                        }
                    }
                }
                max_dot.push(m);
                exp_sums.push(e);
            }
            Ok(OpponentCache::Softmax { tau: *tau, max_dot, exp_sums })
        }
    }
}
