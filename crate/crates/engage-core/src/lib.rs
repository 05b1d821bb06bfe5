//! Simulation and equilibrium analysis for engagement games: producers pick
//! content vectors over embedded features, a recommender serves content by a
//! softmax or linear-proportional rule, and producers compete for user
//! engagement.
//!
//! The crate is organized as:
//! - [`population`], [`strategy`], [`serving`], [`utility`]: the game model
//!   (users, strategy profiles, serving rules, engagement utilities).
//! - [`dynamics`]: best-response dynamics over the standard basis plus a
//!   brute-force equilibrium oracle for small instances.
//! - [`single_minded`]: closed-form equilibrium checks when every user sits
//!   on a basis vector.
//! - [`sampling`], [`ratings`], [`nmf`], [`io`]: user-population pipelines
//!   (synthetic simplex samplers, ratings CSV ingestion, NMF embeddings,
//!   population serialization).
//! - [`report`], [`sweep`], [`chart`]: the experiment harness (per-instance
//!   reports, seeded sweep grids, SVG charts).

pub mod chart;
pub mod dynamics;
pub mod error;
pub mod game;
pub mod io;
pub mod nmf;
pub mod population;
pub mod ratings;
pub mod report;
pub mod sampling;
pub mod serving;
pub mod single_minded;
pub mod strategy;
pub mod sweep;
pub mod utility;

pub use dynamics::{
    best_basis_response, brute_force_ne_enumeration, run_best_response_dynamics,
    verify_pure_ne_on_basis, DynamicsConfig, DynamicsResult, UpdateEvent,
};
pub use error::Error;
pub use game::GameInstance;
pub use population::UserPopulation;
pub use serving::{serve_probabilities, ServingRule};
pub use strategy::{ProfileForm, StrategyProfile};
pub use utility::{cached_opponent_sums, producer_utility, total_utilities, OpponentCache};
