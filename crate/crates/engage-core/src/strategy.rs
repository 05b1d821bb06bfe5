use crate::error::{Error, Result};

/// The producers' joint action.
///
/// Basis form stores one feature index per producer (the profiles Algorithm
/// 1 operates on). General form stores one non-negative row per producer
/// with L1 norm at most 1.
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileForm {
    Basis(Vec<usize>),
    /// Row-major n x d.
    General(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    n: usize,
    d: usize,
    form: ProfileForm,
}

impl StrategyProfile {
    pub fn from_basis(d: usize, features: Vec<usize>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Empty { what: "basis profile" });
        }
        for &f in &features {
            if f >= d {
                return Err(Error::FeatureOutOfRange { index: f, d });
            }
        }
        Ok(StrategyProfile {
            n: features.len(),
            d,
            form: ProfileForm::Basis(features),
        })
    }

    /// Rows with L1 norm in (1, 1 + 1e-12] are clamped back to norm 1;
    /// anything larger is rejected.
    pub fn from_general(d: usize, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty { what: "general profile" });
        }
        let n = rows.len();
        let mut flat = Vec::with_capacity(n * d);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            let mut norm = 0.0;
            for &v in row {
                if !v.is_finite() {
                    return Err(Error::NonFinite);
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry { value: v });
                }
                norm += v;
            }
            if norm > 1.0 + 1e-12 {
                return Err(Error::RowNormTooLarge { row: r, norm });
            }
            if norm > 1.0 {
                flat.extend(row.iter().map(|&v| v / norm));
            } else {
                flat.extend_from_slice(row);
            }
        }
        Ok(StrategyProfile {
            n,
            d,
            form: ProfileForm::General(flat),
        })
    }

    pub fn num_producers(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn form(&self) -> &ProfileForm {
        &self.form
    }

    pub fn basis(&self) -> Option<&[usize]> {
        match &self.form {
            ProfileForm::Basis(f) => Some(f),
            ProfileForm::General(_) => None,
        }
    }

    /// Reassign producer `i`'s basis feature in place. Panics if the profile
    /// is in general form.
    pub fn set_basis_feature(&mut self, i: usize, feature: usize) {
        assert!(feature < self.d);
        match &mut self.form {
            ProfileForm::Basis(f) => f[i] = feature,
            ProfileForm::General(_) => panic!("set_basis_feature on a general profile"),
        }
    }

    /// Inner product `c . s_i`.
    pub fn dot(&self, i: usize, c: &[f64]) -> f64 {
        debug_assert_eq!(c.len(), self.d);
        match &self.form {
            ProfileForm::Basis(f) => c[f[i]],
            ProfileForm::General(m) => {
                let row = &m[i * self.d..(i + 1) * self.d];
                row.iter().zip(c).map(|(&s, &cv)| s * cv).sum()
            }
        }
    }

    /// A basis profile converts losslessly to the general profile of unit
    /// vectors; a general profile is returned unchanged.
    pub fn to_general(&self) -> StrategyProfile {
        match &self.form {
            ProfileForm::General(_) => self.clone(),
            ProfileForm::Basis(f) => {
                let mut flat = vec![0.0; self.n * self.d];
                for (i, &feature) in f.iter().enumerate() {
                    flat[i * self.d + feature] = 1.0;
                }
                StrategyProfile {
                    n: self.n,
                    d: self.d,
                    form: ProfileForm::General(flat),
                }
            }
        }
    }

    pub fn general_row(&self, i: usize) -> Option<&[f64]> {
        match &self.form {
            ProfileForm::General(m) => Some(&m[i * self.d..(i + 1) * self.d]),
            ProfileForm::Basis(_) => None,
        }
    }
}
