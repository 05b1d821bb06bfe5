use crate::error::{Error, Result};

/// A fixed population of users, one non-negative preference vector per user.
///
/// Rows are L1-normalized to 1 on construction; all-zero rows are rejected.
/// Immutable after construction, so it can be shared freely across
/// concurrent evaluations.
#[derive(Debug, Clone, PartialEq)]
pub struct UserPopulation {
    k: usize,
    d: usize,
    /// Row-major K x d.
    weights: Vec<f64>,
    strictly_positive: bool,
    spans_space: bool,
}

impl UserPopulation {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty { what: "user rows" });
        }
        let d = rows[0].len();
        if d == 0 {
            return Err(Error::Empty { what: "user row entries" });
        }
        let k = rows.len();
        let mut weights = Vec::with_capacity(k * d);
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
            if norm == 0.0 {
                return Err(Error::ZeroRow { row: r });
            }
            weights.extend(row.iter().map(|&v| v / norm));
        }
        let strictly_positive = weights.iter().all(|&v| v > 0.0);
        let spans_space = rank(&weights, k, d) == d;
        Ok(UserPopulation {
            k,
            d,
            weights,
            strictly_positive,
            spans_space,
        })
    }

    pub fn num_users(&self) -> usize {
        self.k
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.weights[k * self.d..(k + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.weights.chunks_exact(self.d)
    }

    /// Assumption 1 diagnostic: every entry strictly positive.
    pub fn strictly_positive(&self) -> bool {
        self.strictly_positive
    }

    /// Assumption 2 diagnostic: the rows span the full d-dimensional space.
    pub fn spans_space(&self) -> bool {
        self.spans_space
    }

    /// Total user weight per feature, `sum_k c_k(f)`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.d];
        for row in self.rows() {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

/// Numerical rank via Gaussian elimination with partial pivoting.
fn rank(weights: &[f64], k: usize, d: usize) -> usize {
    let mut m: Vec<Vec<f64>> = weights.chunks_exact(d).map(|r| r.to_vec()).collect();
    let tol = 1e-9;
    let mut rank = 0;
    for col in 0..d {
        let pivot = (rank..k).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()));
        let Some(p) = pivot else { break };
        if m[p][col].abs() <= tol {
            continue;
        }
        m.swap(rank, p);
        for r in rank + 1..k {
            let factor = m[r][col] / m[rank][col];
            for c in col..d {
                m[r][c] -= factor * m[rank][c];
            }
        }
        rank += 1;
        if rank == k {
            break;
        }
    }
    rank
}
