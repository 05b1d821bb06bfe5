//! Ratings CSV ingestion with configurable column names, building dense
//! user/item index maps for factorization.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct RatingsSchema {
    pub user_col: String,
    pub item_col: String,
    pub rating_col: String,
}

impl Default for RatingsSchema {
    fn default() -> Self {
        RatingsSchema {
            user_col: "user".into(),
            item_col: "item".into(),
            rating_col: "rating".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RatingsTable {
    /// (user index, item index, rating), deduplicated, in first-appearance
    /// order of the (user, item) pair.
    pub triples: Vec<(u32, u32, f64)>,
    pub user_ids: Vec<String>,
    pub item_ids: Vec<String>,
    /// Number of duplicate (user, item) pairs dropped (last occurrence
    /// wins).
    pub duplicates: usize,
}

impl RatingsTable {
    pub fn num_users(&self) -> usize {
        self.user_ids.len()
    }

    pub fn num_items(&self) -> usize {
        self.item_ids.len()
    }
}

pub fn load_ratings_csv(path: &Path, schema: &RatingsSchema) -> Result<RatingsTable> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn { name: name.to_string() })
    };
    let user_col = col(&schema.user_col)?;
    let item_col = col(&schema.item_col)?;
    let rating_col = col(&schema.rating_col)?;

    let mut user_index: HashMap<String, u32> = HashMap::new();
    let mut item_index: HashMap<String, u32> = HashMap::new();
    let mut user_ids = Vec::new();
    let mut item_ids = Vec::new();
    let mut pair_slot: HashMap<(u32, u32), usize> = HashMap::new();
    let mut triples: Vec<(u32, u32, f64)> = Vec::new();
    let mut duplicates = 0usize;

    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |idx: usize| -> Result<&str> {
            record.get(idx).ok_or_else(|| Error::BadRecord {
                line,
                reason: "missing field".into(),
            })
        };
        let user = field(user_col)?.to_string();
        let item = field(item_col)?.to_string();
        let rating: f64 = field(rating_col)?.parse().map_err(|_| Error::BadRecord {
            line,
            reason: format!("unparsable rating '{}'", field(rating_col).unwrap_or("")),
        })?;
        if !rating.is_finite() {
            return Err(Error::BadRecord { line, reason: "non-finite rating".into() });
        }
        if rating < 0.0 {
            return Err(Error::BadRecord { line, reason: format!("negative rating {rating}") });
        }
        let u = *user_index.entry(user.clone()).or_insert_with(|| {
            user_ids.push(user);
            (user_ids.len() - 1) as u32
        });
        let i = *item_index.entry(item.clone()).or_insert_with(|| {
            item_ids.push(item);
            (item_ids.len() - 1) as u32
        });
        match pair_slot.get(&(u, i)) {
            Some(&slot) => {
                triples[slot].2 = rating;
                duplicates += 1;
            }
            None => {
                pair_slot.insert((u, i), triples.len());
                triples.push((u, i, rating));
            }
        }
    }

    if triples.is_empty() {
        return Err(Error::Empty { what: "ratings" });
    }

    Ok(RatingsTable { triples, user_ids, item_ids, duplicates })
}
