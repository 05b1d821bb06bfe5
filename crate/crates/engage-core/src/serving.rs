use crate::error::{Error, Result};
use crate::strategy::StrategyProfile;

/// The recommender's content-serving rule: probability of showing producer
/// i's content to a user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ServingRule {
    /// Probability proportional to the inner product `c . s_i`, with zero
    /// probability on zero alignment.
    Linear,
    /// Softmax over `c . s_j / tau`.
    Softmax { tau: f64 },
}

impl ServingRule {
    pub fn softmax(tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::InvalidTau { tau });
        }
        Ok(ServingRule::Softmax { tau })
    }

    pub fn label(&self) -> String {
        match self {
            ServingRule::Linear => "linear".to_string(),
            ServingRule::Softmax { .. } => "softmax".to_string(),
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self {
            ServingRule::Linear => None,
            ServingRule::Softmax { tau } => Some(*tau),
        }
    }
}

/// Serving probabilities `p_i(c, s)` for every producer.
///
/// Softmax is evaluated with per-user max subtraction, so exponents never
/// exceed 0 even at very low temperatures. Linear returns the all-zero
/// vector when every inner product is zero.
pub fn serve_probabilities(
    c: &[f64],
    profile: &StrategyProfile,
    rule: &ServingRule,
) -> Result<Vec<f64>> {
    if c.len() != profile.dim() {
        return Err(Error::DimensionMismatch {
            expected: profile.dim(),
            got: c.len(),
        });
    }
    for &v in c {
        if !v.is_finite() {
            return Err(Error::NonFinite);
        }
        if v < 0.0 {
            return Err(Error::NegativeEntry { value: v });
        }
    }
    let n = profile.num_producers();
    let mut dots: Vec<f64> = (0..n).map(|i| profile.dot(i, c)).collect();
    match rule {
        ServingRule::Linear => {
            let total: f64 = dots.iter().sum();
            if total == 0.0 {
                return Ok(dots);
            }
            for v in &mut dots {
                *v /= total;
            }
            Ok(dots)
        }
        ServingRule::Softmax { tau } => {
            if !(tau.is_finite() && *tau > 0.0) {
                return Err(Error::InvalidTau { tau: *tau });
            }
            let max = dots.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in &mut dots {
                *v = ((*v - max) / tau).exp();
                sum += *v;
            }
            for v in &mut dots {
                *v /= sum;
            }
            Ok(dots)
        }
    }
}
