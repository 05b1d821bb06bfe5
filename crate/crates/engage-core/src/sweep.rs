//! Seeded experiment sweeps over (producers, dimension, rule, embedding
//! seed, run seed) grids. Instances run in parallel but results are written
//! in cross-product order, so identical specs produce byte-identical output
//! apart from the timestamp header line.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicsConfig;
use crate::error::{Error, Result};
use crate::game::GameInstance;
use crate::io::load_population;
use crate::population::UserPopulation;
use crate::report::{run_instance, EquilibriumReport};
use crate::sampling::{sample_skewed_population, sample_uniform_population};
use crate::serving::ServingRule;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleSpec {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
}

impl RuleSpec {
    pub fn to_rule(&self) -> Result<ServingRule> {
        match (self.kind.as_str(), self.tau) {
            ("linear", None) => Ok(ServingRule::Linear),
            ("linear", Some(_)) => Err(Error::BadSweepSpec {
                reason: "linear rule takes no tau".into(),
            }),
            ("softmax", Some(tau)) => ServingRule::softmax(tau),
            ("softmax", None) => Err(Error::BadSweepSpec {
                reason: "softmax rule requires tau".into(),
            }),
            (other, _) => Err(Error::BadSweepSpec {
                reason: format!("unknown rule kind '{other}'"),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "lowercase")]
pub enum UsersSource {
    Uniform,
    Skewed,
    File { path: PathBuf },
}

impl UsersSource {
    fn dataset_name(&self) -> String {
        match self {
            UsersSource::Uniform => "uniform".into(),
            UsersSource::Skewed => "skewed".into(),
            UsersSource::File { path } => path
                .file_stem()
                .map(|s| s.to_string_lossy().replace(',', "_"))
                .unwrap_or_else(|| "file".into()),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepSpec {
    pub producers: Vec<usize>,
    pub dims: Vec<usize>,
    pub rules: Vec<RuleSpec>,
    pub embed_seeds: Vec<u64>,
    pub run_seeds: Vec<u64>,
    pub users: UsersSource,
    pub k: usize,
    pub max_iters: usize,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let nonempty = [
            (!self.producers.is_empty(), "producers"),
            (!self.dims.is_empty(), "dims"),
            (!self.rules.is_empty(), "rules"),
            (!self.embed_seeds.is_empty(), "embed_seeds"),
            (!self.run_seeds.is_empty(), "run_seeds"),
        ];
        for (ok, what) in nonempty {
            if !ok {
                return Err(Error::BadSweepSpec { reason: format!("{what} is empty") });
            }
        }
        if self.max_iters == 0 {
            return Err(Error::BadSweepSpec { reason: "max_iters must be >= 1".into() });
        }
        for rule in &self.rules {
            rule.to_rule()?;
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let file = File::open(path)?;
        let spec: SweepSpec = serde_json::from_reader(std::io::BufReader::new(file))?;
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub dataset: String,
    pub rule: ServingRule,
    pub n: usize,
    pub d: usize,
    pub embed_seed: u64,
    pub run_seed: u64,
    pub report: EquilibriumReport,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub results_path: PathBuf,
    pub features_path: PathBuf,
    pub convergence_summary_path: PathBuf,
    pub iterations_summary_path: PathBuf,
    pub rows: Vec<SweepRow>,
}

pub const RESULTS_HEADER: &str = "dataset,rule,tau,n,d,embed_seed,run_seed,converged,\
iterations,distinct_features,entropy,avg_prod_utility,avg_user_utility,total_utility";

fn tau_field(rule: &ServingRule) -> String {
    match rule.tau() {
        Some(tau) => format!("{tau}"),
        None => String::new(),
    }
}

/// Executes the full cross-product of the sweep spec. Instances run on a rayon
/// pool (`workers` bounds its size); rows keep spec order regardless of
/// completion order.
pub fn run_sweep(spec: &SweepSpec, out_dir: &Path, workers: Option<usize>) -> Result<SweepOutput> {
    spec.validate()?;
    std::fs::create_dir_all(out_dir)?;
    let dataset = spec.users.dataset_name();

    // One population per (dim, embed seed); shared across runs.
    let mut populations: HashMap<(usize, u64), Arc<UserPopulation>> = HashMap::new();
    match &spec.users {
        UsersSource::File { path } => {
            let (pop, _) = load_population(path)?;
            for &d in &spec.dims {
                if d != pop.dim() {
                    return Err(Error::BadSweepSpec {
                        reason: format!(
                            "dims contains {d} but users file has dimension {}",
                            pop.dim()
                        ),
                    });
                }
            }
            let pop = Arc::new(pop);
            for &d in &spec.dims {
                for &seed in &spec.embed_seeds {
                    populations.insert((d, seed), Arc::clone(&pop));
                }
            }
        }
        UsersSource::Uniform => {
            for &d in &spec.dims {
                for &seed in &spec.embed_seeds {
                    let pop = sample_uniform_population(spec.k, d, seed)?;
                    populations.insert((d, seed), Arc::new(pop));
                }
            }
        }
        UsersSource::Skewed => {
            for &d in &spec.dims {
                for &seed in &spec.embed_seeds {
                    let (pop, _) = sample_skewed_population(spec.k, d, seed)?;
                    populations.insert((d, seed), Arc::new(pop));
                }
            }
        }
    }

    struct Job {
        n: usize,
        d: usize,
        rule: ServingRule,
        embed_seed: u64,
        run_seed: u64,
    }
    let mut jobs = Vec::new();
    for &n in &spec.producers {
        for &d in &spec.dims {
            for rule_spec in &spec.rules {
                let rule = rule_spec.to_rule()?;
                for &embed_seed in &spec.embed_seeds {
                    for &run_seed in &spec.run_seeds {
                        jobs.push(Job { n, d, rule, embed_seed, run_seed });
                    }
                }
            }
        }
    }

    let run_job = |job: &Job| -> Result<SweepRow> {
        let users = populations[&(job.d, job.embed_seed)].as_ref().clone();
        let game = GameInstance::new(users, job.n, job.rule)?;
        let config = DynamicsConfig::new(spec.max_iters, job.run_seed)?;
        let report = run_instance(&game, &config)?;
        Ok(SweepRow {
            dataset: dataset.clone(),
            rule: job.rule,
            n: job.n,
            d: job.d,
            embed_seed: job.embed_seed,
            run_seed: job.run_seed,
            report,
        })
    };

    let results: Vec<Result<SweepRow>> = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| Error::BadSweepSpec { reason: e.to_string() })?
            .install(|| jobs.par_iter().map(run_job).collect()),
        None => jobs.par_iter().map(run_job).collect(),
    };
    let rows: Vec<SweepRow> = results.into_iter().collect::<Result<_>>()?;

    let results_path = out_dir.join("results.csv");
    let features_path = out_dir.join("features.csv");
    let convergence_summary_path = out_dir.join("convergence_summary.csv");
    let iterations_summary_path = out_dir.join("iterations_summary.csv");

    write_results(&results_path, &rows)?;
    write_features(&features_path, &rows)?;
    write_convergence_summary(&convergence_summary_path, &rows)?;
    write_iterations_summary(&iterations_summary_path, &rows)?;

    Ok(SweepOutput {
        results_path,
        features_path,
        convergence_summary_path,
        iterations_summary_path,
        rows,
    })
}

fn write_results(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "# generated {}", chrono::Utc::now().to_rfc3339())?;
    writeln!(out, "{RESULTS_HEADER}")?;
    for row in rows {
        let r = &row.report;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            row.dataset,
            row.rule.label(),
            tau_field(&row.rule),
            row.n,
            row.d,
            row.embed_seed,
            row.run_seed,
            r.converged,
            r.iterations,
            r.distinct_features,
            r.entropy,
            r.avg_producer_utility,
            r.avg_user_utility,
            r.total_producer_utility,
        )?;
    }
    out.flush()?;
    Ok(())
}

/// Per-feature sidecar used by the paired bar charts: average user weight
/// and producer fraction per feature for every instance.
fn write_features(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(
        out,
        "dataset,rule,tau,n,d,embed_seed,run_seed,feature,user_weight,producer_fraction"
    )?;
    for row in rows {
        for (f, (&w, &p)) in row
            .report
            .user_feature_weights
            .iter()
            .zip(&row.report.producer_fractions)
            .enumerate()
        {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                row.dataset,
                row.rule.label(),
                tau_field(&row.rule),
                row.n,
                row.d,
                row.embed_seed,
                row.run_seed,
                f,
                w,
                p,
            )?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Convergence counts per rule and temperature (Table 1 shape).
fn write_convergence_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut order: Vec<(String, String)> = Vec::new();
    let mut counts: HashMap<(String, String), (usize, usize)> = HashMap::new();
    for row in rows {
        let key = (row.rule.label(), tau_field(&row.rule));
        if !counts.contains_key(&key) {
            order.push(key.clone());
        }
        let entry = counts.entry(key).or_insert((0, 0));
        entry.1 += 1;
        if row.report.converged {
            entry.0 += 1;
        }
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "dataset,rule,tau,converged,total")?;
    let dataset = rows.first().map(|r| r.dataset.as_str()).unwrap_or("");
    for key in order {
        let (converged, total) = counts[&key];
        writeln!(out, "{dataset},{},{},{converged},{total}", key.0, key.1)?;
    }
    out.flush()?;
    Ok(())
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let count = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / count;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1.0);
    (mean, (var / count).sqrt())
}

/// Mean/stderr of iteration counts per (rule, tau, d, n) over converged
/// runs (Figure 1 shape).
fn write_iterations_summary(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut order: Vec<(String, String, usize, usize)> = Vec::new();
    let mut samples: HashMap<(String, String, usize, usize), Vec<f64>> = HashMap::new();
    for row in rows {
        if !row.report.converged {
            continue;
        }
        let key = (row.rule.label(), tau_field(&row.rule), row.d, row.n);
        if !samples.contains_key(&key) {
            order.push(key.clone());
        }
        samples.entry(key).or_default().push(row.report.iterations as f64);
    }
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "dataset,rule,tau,d,n,mean_iterations,stderr_iterations")?;
    let dataset = rows.first().map(|r| r.dataset.as_str()).unwrap_or("");
    for key in order {
        let (mean, stderr) = mean_and_stderr(&samples[&key]);
        writeln!(out, "{dataset},{},{},{},{},{mean},{stderr}", key.0, key.1, key.2, key.3)?;
    }
    out.flush()?;
    Ok(())
}
