use crate::error::{Error, Result};
use crate::population::UserPopulation;
use crate::serving::ServingRule;

/// An engagement game: a user population, a producer count, and the
/// recommender's serving rule.
#[derive(Debug, Clone)]
pub struct GameInstance {
    pub users: UserPopulation,
    pub n: usize,
    pub rule: ServingRule,
}

impl GameInstance {
    pub fn new(users: UserPopulation, n: usize, rule: ServingRule) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty { what: "producers" });
        }
        if let ServingRule::Softmax { tau } = rule {
            if !(tau.is_finite() && tau > 0.0) {
                return Err(Error::InvalidTau { tau });
            }
        }
        Ok(GameInstance { users, n, rule })
    }

    pub fn dim(&self) -> usize {
        self.users.dim()
    }
}
