//! `engage`: generate user populations, run best-response dynamics, verify
//! equilibria, sweep experiment grids, and render charts.
//!
//! On failure the process exits nonzero after printing a single
//! machine-readable line `{"error": "..."}` to stderr.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::bail;
use clap::{Parser, Subcommand, ValueEnum};

use engage_core::dynamics::DynamicsConfig;
use engage_core::io::{load_population, load_profile, save_population};
use engage_core::nmf::{nmf_user_embeddings, NmfConfig};
use engage_core::ratings::{load_ratings_csv, RatingsSchema};
use engage_core::sampling::{sample_skewed_population, sample_uniform_population};
use engage_core::single_minded::{
    proportional_profile, single_minded_equilibrium_check, CountProfile, SingleMindedPopulation,
};
use engage_core::sweep::{run_sweep, SweepSpec};
use engage_core::{
    chart, run_best_response_dynamics, verify_pure_ne_on_basis, GameInstance, ProfileForm,
    ServingRule,
};

#[derive(Parser)]
#[command(name = "engage", about = "Engagement-game simulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Dist {
    Uniform,
    Skewed,
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleKind {
    Linear,
    Softmax,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic user population CSV.
    GenUsers {
        #[arg(long, value_enum)]
        dist: Dist,
        #[arg(long)]
        users: usize,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Factorize a ratings CSV into user embeddings.
    Nmf {
        #[arg(long)]
        ratings: PathBuf,
        #[arg(long, default_value = "user")]
        user_col: String,
        #[arg(long, default_value = "item")]
        item_col: String,
        #[arg(long, default_value = "rating")]
        rating_col: String,
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        iters: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Optional per-iteration loss log (CSV `iter,loss`).
        #[arg(long)]
        loss_log: Option<PathBuf>,
    },
    /// Run best-response dynamics once and write the result JSON.
    Run {
        #[arg(long)]
        users: PathBuf,
        #[arg(long)]
        producers: usize,
        #[arg(long, value_enum)]
        rule: RuleKind,
        #[arg(long)]
        tau: Option<f64>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Execute a sweep spec (JSON) over producers/dims/rules/seeds.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Check whether a basis profile is a pure Nash equilibrium.
    Verify {
        #[arg(long)]
        users: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, value_enum, default_value = "linear")]
        rule: RuleKind,
        #[arg(long)]
        tau: Option<f64>,
    },
    /// Single-minded equilibrium check or proportional construction.
    SingleMinded {
        /// Per-feature user counts, comma-separated.
        #[arg(long, value_delimiter = ',')]
        m: Vec<u64>,
        /// Per-feature producer counts to check, comma-separated.
        #[arg(long, value_delimiter = ',', conflicts_with = "construct")]
        counts: Option<Vec<u64>>,
        /// Build the proportional profile for this many producers.
        #[arg(long)]
        construct: Option<u64>,
    },
    /// Render SVG charts from a sweep results CSV.
    Plot {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_rule(kind: RuleKind, tau: Option<f64>) -> anyhow::Result<ServingRule> {
    match (kind, tau) {
        (RuleKind::Linear, None) => Ok(ServingRule::Linear),
        (RuleKind::Linear, Some(_)) => bail!("--tau is only valid with --rule softmax"),
        (RuleKind::Softmax, Some(tau)) => Ok(ServingRule::softmax(tau)?),
        (RuleKind::Softmax, None) => bail!("--rule softmax requires --tau"),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenUsers { dist, users, dim, seed, out } => {
            let population = match dist {
                Dist::Uniform => sample_uniform_population(users, dim, seed)?,
                Dist::Skewed => {
                    let (population, weights) = sample_skewed_population(users, dim, seed)?;
                    println!(
                        "{}",
                        serde_json::json!({ "feature_weights": weights })
                    );
                    population
                }
            };
            save_population(&out, &population)?;
            eprintln!(
                "wrote {} users x {} features to {} (strictly_positive={}, spans_space={})",
                population.num_users(),
                population.dim(),
                out.display(),
                population.strictly_positive(),
                population.spans_space(),
            );
        }
        Command::Nmf {
            ratings,
            user_col,
            item_col,
            rating_col,
            dim,
            iters,
            seed,
            out,
            loss_log,
        } => {
            let schema = RatingsSchema { user_col, item_col, rating_col };
            let table = load_ratings_csv(&ratings, &schema)?;
            eprintln!(
                "loaded {} ratings, {} users, {} items ({} duplicates dropped)",
                table.triples.len(),
                table.num_users(),
                table.num_items(),
                table.duplicates,
            );
            let config = NmfConfig::new(dim, iters, seed)?;
            let outcome = nmf_user_embeddings(&table, &config)?;
            if let Some(log_path) = loss_log {
                let mut log = BufWriter::new(File::create(log_path)?);
                writeln!(log, "iter,loss")?;
                for (iter, loss) in outcome.loss_trace.iter().enumerate() {
                    writeln!(log, "{},{loss}", iter + 1)?;
                }
            }
            save_population(&out, &outcome.population)?;
            eprintln!(
                "final observed loss {:.6}, embeddings written to {}",
                outcome.loss_trace.last().unwrap(),
                out.display()
            );
        }
        Command::Run { users, producers, rule, tau, seed, max_iters, out } => {
            let (population, stats) = load_population(&users)?;
            if stats.renormalized_rows > 0 {
                eprintln!("warning: renormalized {} rows on load", stats.renormalized_rows);
            }
            let rule = parse_rule(rule, tau)?;
            let game = GameInstance::new(population, producers, rule)?;
            let config = DynamicsConfig::new(max_iters, seed)?;
            let result = run_best_response_dynamics(&game, &config);
            serde_json::to_writer(BufWriter::new(File::create(&out)?), &result)?;
            println!(
                "{}",
                serde_json::json!({
                    "converged": result.converged,
                    "iterations": result.iterations,
                    "out": out.display().to_string(),
                })
            );
        }
        Command::Sweep { spec, out, workers } => {
            let spec = SweepSpec::from_json_file(&spec)?;
            let output = run_sweep(&spec, &out, workers)?;
            println!(
                "{}",
                serde_json::json!({
                    "rows": output.rows.len(),
                    "results": output.results_path.display().to_string(),
                    "features": output.features_path.display().to_string(),
                    "convergence_summary": output.convergence_summary_path.display().to_string(),
                    "iterations_summary": output.iterations_summary_path.display().to_string(),
                })
            );
        }
        Command::Verify { users, profile, rule, tau } => {
            let (population, _) = load_population(&users)?;
            let profile = load_profile(&profile)?;
            let basis: Vec<usize> = match profile.form() {
                ProfileForm::Basis(b) => b.clone(),
                ProfileForm::General(_) => {
                    // Accept a general profile only if every row is a unit
                    // basis vector.
                    let mut basis = Vec::with_capacity(profile.num_producers());
                    for i in 0..profile.num_producers() {
                        let row = profile.general_row(i).unwrap();
                        let hit: Vec<usize> = row
                            .iter()
                            .enumerate()
                            .filter(|(_, &v)| v != 0.0)
                            .map(|(f, _)| f)
                            .collect();
                        match hit.as_slice() {
                            [f] if row[*f] == 1.0 => basis.push(*f),
                            _ => bail!("verify requires a basis profile (row {i} is not a unit vector)"),
                        }
                    }
                    basis
                }
            };
            let rule = parse_rule(rule, tau)?;
            let n = basis.len();
            let game = GameInstance::new(population, n, rule)?;
            let is_ne = verify_pure_ne_on_basis(&basis, &game);
            println!("{}", serde_json::json!({ "is_equilibrium": is_ne, "basis": basis }));
        }
        Command::SingleMinded { m, counts, construct } => {
            let population = SingleMindedPopulation::new(m)?;
            let (profile, slack) = match (counts, construct) {
                (Some(counts), None) => (CountProfile::new(counts)?, None),
                (None, Some(n)) => {
                    let outcome = proportional_profile(&population, n);
                    (outcome.counts, Some(outcome.slack))
                }
                _ => bail!("exactly one of --counts or --construct is required"),
            };
            let is_eq = single_minded_equilibrium_check(&population, &profile)?;
            let slack = slack.unwrap_or(0.0);
            println!(
                "{}",
                serde_json::json!({
                    "m": population.counts(),
                    "counts": profile.counts,
                    "is_equilibrium": is_eq,
                    "slack": slack,
                })
            );
        }
        Command::Plot { results, out } => {
            let written = chart::emit_charts(&results, &out)?;
            println!(
                "{}",
                serde_json::json!({
                    "charts": written.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
                })
            );
        }
    }
    Ok(())
}

fn main() {
    let cli = Cli::parse();
    if let Err(err) = run(cli) {
        eprintln!("{}", serde_json::json!({ "error": format!("{err:#}") }));
        std::process::exit(1);
    }
}
