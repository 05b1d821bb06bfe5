//! File formats: users CSV (`f0,...,f{d-1}` header) and strategy-profile
//! JSON (`{"n":..,"d":..,"basis":[..]}` or `{"n":..,"d":..,"matrix":[[..]]}`).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::UserPopulation;
use crate::strategy::{ProfileForm, StrategyProfile};

/// Writes each weight with 17 significant digits, enough to round-trip f64.
pub fn save_population(path: &Path, population: &UserPopulation) -> Result<()> {
    let file = File::create(path)?;
    let mut out = BufWriter::new(file);
    let header: Vec<String> = (0..population.dim()).map(|f| format!("f{f}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for row in population.rows() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadStats {
    /// Rows whose L1 norm was not already 1 within 1e-9 (renormalized on
    /// load; callers should surface a warning).
    pub renormalized_rows: usize,
}

pub fn load_population(path: &Path) -> Result<(UserPopulation, LoadStats)> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let d = headers.len();
    for (f, name) in headers.iter().enumerate() {
        if name != format!("f{f}") {
            return Err(Error::BadUsersFile {
                reason: format!("expected header column 'f{f}', found '{name}'"),
            });
        }
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut stats = LoadStats::default();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != d {
            return Err(Error::BadUsersFile {
                reason: format!("line {line}: expected {d} fields, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(d);
        for cell in record.iter() {
            let v: f64 = cell.parse().map_err(|_| Error::BadUsersFile {
                reason: format!("line {line}: unparsable value '{cell}'"),
            })?;
            row.push(v);
        }
        let norm: f64 = row.iter().sum();
        if (norm - 1.0).abs() > 1e-9 {
            stats.renormalized_rows += 1;
        }
        rows.push(row);
    }
    Ok((UserPopulation::from_rows(rows)?, stats))
}

#[derive(Serialize, Deserialize)]
struct ProfileJson {
    n: usize,
    d: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    basis: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    matrix: Option<Vec<Vec<f64>>>,
}

pub fn save_profile(path: &Path, profile: &StrategyProfile) -> Result<()> {
    let json = match profile.form() {
        ProfileForm::Basis(features) => ProfileJson {
            n: profile.num_producers(),
            d: profile.dim(),
            basis: Some(features.clone()),
            matrix: None,
        },
        ProfileForm::General(_) => ProfileJson {
            n: profile.num_producers(),
            d: profile.dim(),
            basis: None,
            matrix: Some(
                (0..profile.num_producers())
                    .map(|i| profile.general_row(i).unwrap().to_vec())
                    .collect(),
            ),
        },
    };
    let file = File::create(path)?;
    serde_json::to_writer_pretty(BufWriter::new(file), &json)?;
    Ok(())
}

pub fn load_profile(path: &Path) -> Result<StrategyProfile> {
    let file = File::open(path)?;
    let json: ProfileJson = serde_json::from_reader(std::io::BufReader::new(file))?;
    let profile = match (json.basis, json.matrix) {
        (Some(basis), None) => StrategyProfile::from_basis(json.d, basis)?,
        (None, Some(matrix)) => StrategyProfile::from_general(json.d, matrix)?,
        _ => {
            return Err(Error::BadProfileFile {
                reason: "exactly one of 'basis' or 'matrix' must be present".into(),
            })
        }
    };
    if profile.num_producers() != json.n {
        return Err(Error::BadProfileFile {
            reason: format!(
                "declared n = {} but profile has {} producers",
                json.n,
                profile.num_producers()
            ),
        });
    }
    Ok(profile)
}
