//! End-to-end acceptance checks for the engagement-game engine. Each test
//! covers one criterion and prints a single `acceptance NN <name>: PASS`
//! (or FAIL) line; run with `--nocapture` to see every line.

use engage_core::sampling::{sample_uniform_population, simplex_point};
use engage_core::single_minded::{
    proportional_profile, single_minded_brute_deviation_check, single_minded_equilibrium_check,
    CountProfile, SingleMindedPopulation,
};
use engage_core::{
    brute_force_ne_enumeration, producer_utility, run_best_response_dynamics, total_utilities,
    verify_pure_ne_on_basis, DynamicsConfig, GameInstance, ServingRule, StrategyProfile,
    UserPopulation,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(number: usize, name: &str, pass: bool) {
    println!(
        "acceptance {number:02} {name}: {}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance {number:02} {name} failed");
}

fn rules_under_test(taus: &[f64]) -> Vec<ServingRule> {
    let mut rules = vec![ServingRule::Linear];
    rules.extend(taus.iter().map(|&t| ServingRule::softmax(t).unwrap()));
    rules
}

fn dynamics(users: &UserPopulation, n: usize, rule: ServingRule, seed: u64) -> engage_core::DynamicsResult {
    let game = GameInstance::new(users.clone(), n, rule).unwrap();
    run_best_response_dynamics(&game, &DynamicsConfig::new(500, seed).unwrap())
}

fn median_usize(values: &mut [usize]) -> usize {
    values.sort_unstable();
    values[values.len() / 2]
}

/// 500-iteration cap suffices across the full grid: every softmax instance
/// converges, and at least 99% of linear ones do.
#[test]
fn criterion_01_convergence_grid() {
    let taus = [100.0, 10.0, 1.0, 0.1];
    let embed_seeds = [13u64, 17, 19, 23, 29];
    let mut softmax_total = 0usize;
    let mut softmax_converged = 0usize;
    let mut linear_total = 0usize;
    let mut linear_converged = 0usize;
    for &d in &[5usize, 10, 15] {
        for &embed in &embed_seeds {
            let users = sample_uniform_population(2000, d, embed).unwrap();
            for &n in &[2usize, 5, 10, 20, 50] {
                for rule in rules_under_test(&taus) {
                    let result = dynamics(&users, n, rule, 1);
                    match rule {
                        ServingRule::Linear => {
                            linear_total += 1;
                            linear_converged += result.converged as usize;
                            if !result.converged {
                                println!(
                                    "  linear instance d={d} embed={embed} n={n} hit the \
                                     500-pass cap (persistent best-response cycle)"
                                );
                            }
                        }
                        ServingRule::Softmax { .. } => {
                            softmax_total += 1;
                            softmax_converged += result.converged as usize;
                            if !result.converged {
                                println!(
                                    "  softmax instance d={d} embed={embed} n={n} tau={:?} \
                                     hit the 500-pass cap",
                                    rule.tau()
                                );
                            }
                        }
                    }
                }
            }
        }
    }
    let pass = softmax_converged == softmax_total
        && (linear_converged as f64) >= 0.99 * linear_total as f64;
    println!(
        "  softmax {softmax_converged}/{softmax_total}, linear {linear_converged}/{linear_total}"
    );
    verdict(1, "convergence-grid", pass);
}

/// At high temperature every producer pools on the single feature with the
/// largest total user weight.
#[test]
fn criterion_02_high_temperature_homogeneity() {
    let users = sample_uniform_population(2000, 15, 13).unwrap();
    let sums = users.column_sums();
    let top = sums
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap()
        .0;
    let mut pass = true;
    for seed in [1u64, 2, 3] {
        let result = dynamics(&users, 100, ServingRule::softmax(100.0).unwrap(), seed);
        let distinct: std::collections::BTreeSet<usize> = result.basis.iter().copied().collect();
        pass &= result.converged && distinct.len() == 1 && distinct.contains(&top);
    }
    verdict(2, "high-temperature-homogeneity", pass);
}

/// Median distinct-feature count is non-increasing in temperature, and the
/// low-temperature / linear regimes stay strongly specialized.
#[test]
fn criterion_03_specialization_monotone_in_temperature() {
    let users = sample_uniform_population(2000, 15, 13).unwrap();
    let seeds = [1u64, 2, 3];
    let median_distinct = |rule: ServingRule| {
        let mut counts: Vec<usize> = seeds
            .iter()
            .map(|&s| {
                let result = dynamics(&users, 100, rule, s);
                result
                    .basis
                    .iter()
                    .collect::<std::collections::BTreeSet<_>>()
                    .len()
            })
            .collect();
        median_usize(&mut counts)
    };
    let by_tau: Vec<usize> = [0.01, 0.1, 1.0, 10.0, 100.0]
        .iter()
        .map(|&t| median_distinct(ServingRule::softmax(t).unwrap()))
        .collect();
    let monotone = by_tau.windows(2).all(|w| w[1] <= w[0]);
    let linear = median_distinct(ServingRule::Linear);
    println!("  distinct by tau {by_tau:?}, linear {linear}");
    verdict(
        3,
        "specialization-monotone",
        monotone && by_tau[0] >= 8 && linear >= 8,
    );
}

/// Average producer utility decreases strictly with temperature, and the
/// linear rule sits between tau = 0.01 and tau = 1 softmax. Averages run
/// over five embedding seeds and three run seeds, dropping runs that hit
/// the pass cap (near-hardmax serving does not always converge).
#[test]
fn criterion_04_utility_monotone_in_temperature() {
    let populations: Vec<UserPopulation> = [13u64, 17, 19, 23, 29]
        .iter()
        .map(|&e| sample_uniform_population(2000, 15, e).unwrap())
        .collect();
    let seeds = [1u64, 2, 3];
    let avg_utility = |n: usize, rule: ServingRule| {
        let mut total = 0.0;
        let mut runs = 0usize;
        for users in &populations {
            for &s in &seeds {
                let result = dynamics(users, n, rule, s);
                if !result.converged {
                    continue;
                }
                let profile = StrategyProfile::from_basis(15, result.basis).unwrap();
                let (up, _) = total_utilities(&profile, users, &rule).unwrap();
                total += up / n as f64;
                runs += 1;
            }
        }
        assert!(runs > 0, "no converged run for n={n} rule={}", rule.label());
        total / runs as f64
    };
    let mut pass = true;
    for &n in &[5usize, 10, 50] {
        let by_tau: Vec<f64> = [0.01, 0.1, 1.0, 10.0, 100.0]
            .iter()
            .map(|&t| avg_utility(n, ServingRule::softmax(t).unwrap()))
            .collect();
        let linear = avg_utility(n, ServingRule::Linear);
        let monotone = by_tau.windows(2).all(|w| w[1] < w[0]);
        let ordering = by_tau[0] > linear && linear > by_tau[2];
        println!("  n={n}: by tau {by_tau:?}, linear {linear}");
        pass &= monotone && ordering;
    }
    verdict(4, "utility-monotone", pass);
}

/// Total producer utility equals total user utility on random games under
/// both rules.
#[test]
fn criterion_05_producer_user_utility_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst: f64 = 0.0;
    for trial in 0..1000 {
        let d = rng.gen_range(1..=6);
        let k = rng.gen_range(1..=40);
        let n = rng.gen_range(1..=10);
        let users = sample_uniform_population(k, d, trial).unwrap();
        let rows: Vec<Vec<f64>> = (0..n).map(|_| simplex_point(&mut rng, d)).collect();
        let profile = StrategyProfile::from_general(d, rows).unwrap();
        let tau = 10f64.powf(rng.gen_range(-1.3..2.0));
        for rule in [ServingRule::Linear, ServingRule::softmax(tau).unwrap()] {
            let (up, uu) = total_utilities(&profile, &users, &rule).unwrap();
            let rel = (up - uu).abs() / up.abs().max(1e-300);
            worst = worst.max(rel);
        }
    }
    println!("  worst relative difference {worst:.3e}");
    verdict(5, "producer-user-utility-identity", worst < 1e-9);
}

/// Every converged dynamics output on small games is a member of the
/// brute-force pure-equilibrium set.
#[test]
fn criterion_06_dynamics_outputs_are_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut converged_runs = 0usize;
    let mut pass = true;
    for trial in 0..100u64 {
        let d = rng.gen_range(1..=3);
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=20);
        let users = sample_uniform_population(k, d, 1000 + trial).unwrap();
        let tau = 10f64.powf(rng.gen_range(-1.0..1.5));
        for rule in [ServingRule::Linear, ServingRule::softmax(tau).unwrap()] {
            let game = GameInstance::new(users.clone(), n, rule).unwrap();
            let result = run_best_response_dynamics(&game, &DynamicsConfig::new(500, trial).unwrap());
            if !result.converged {
                continue;
            }
            converged_runs += 1;
            let equilibria = brute_force_ne_enumeration(&game).unwrap();
            pass &= equilibria.contains(&result.basis);
        }
    }
    println!("  {converged_runs} converged runs checked");
    verdict(6, "dynamics-vs-brute-force", pass && converged_runs > 0);
}

/// The exact integer equilibrium condition agrees with the deviation oracle
/// and with the full-game verifier on explicit linear games.
#[test]
fn criterion_07_single_minded_condition_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut pass = true;
    for _ in 0..200 {
        let d = rng.gen_range(1..=6);
        let m: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=20)).collect();
        let counts: Vec<u64> = (0..d).map(|_| rng.gen_range(0..=10)).collect();
        let m = SingleMindedPopulation::new(m).unwrap();
        let counts = CountProfile::new(counts).unwrap();
        let a = single_minded_equilibrium_check(&m, &counts).unwrap();
        let b = single_minded_brute_deviation_check(&m, &counts).unwrap();
        pass &= a == b;
    }
    for _ in 0..50 {
        let d = rng.gen_range(1..=4);
        let m: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=5)).collect();
        let counts: Vec<u64> = (0..d).map(|_| rng.gen_range(0..=3)).collect();
        if counts.iter().sum::<u64>() == 0 {
            continue;
        }
        let m = SingleMindedPopulation::new(m).unwrap();
        let counts = CountProfile::new(counts).unwrap();
        let condition = single_minded_equilibrium_check(&m, &counts).unwrap();
        let game = GameInstance::new(
            m.to_population(),
            counts.n() as usize,
            ServingRule::Linear,
        )
        .unwrap();
        let full = verify_pure_ne_on_basis(&counts.to_basis(), &game);
        pass &= condition == full;
    }
    verdict(7, "single-minded-equivalence", pass);
}

/// With strictly positive users and basis opponents, some basis vector
/// strictly beats every interior point for the deviating producer.
#[test]
fn criterion_08_best_response_on_vertices() {
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    // Interior points keep every coordinate at or above this floor so the
    // strict-convexity gap stays measurable.
    let floor = 0.01;
    let interior = |rng: &mut ChaCha8Rng, d: usize| loop {
        let p = simplex_point(rng, d);
        if p.iter().all(|&v| v >= floor) {
            return p;
        }
    };
    let mut worst_margin = f64::INFINITY;
    for trial in 0..1000u64 {
        let d = rng.gen_range(2..=5);
        let n = rng.gen_range(2..=6);
        let users = sample_uniform_population(10, d, 2000 + trial).unwrap();
        if !users.strictly_positive() {
            continue;
        }
        let opponents: Vec<usize> = (0..n - 1).map(|_| rng.gen_range(0..d)).collect();
        let tau = [0.1, 1.0, 10.0][rng.gen_range(0..3)];
        for rule in [ServingRule::Linear, ServingRule::softmax(tau).unwrap()] {
            let utility_of = |candidate: Vec<f64>| {
                let mut rows = vec![candidate];
                for &f in &opponents {
                    let mut e = vec![0.0; d];
                    e[f] = 1.0;
                    rows.push(e);
                }
                let profile = StrategyProfile::from_general(d, rows).unwrap();
                producer_utility(0, &profile, &users, &rule).unwrap()
            };
            let best_vertex = (0..d)
                .map(|f| {
                    let mut e = vec![0.0; d];
                    e[f] = 1.0;
                    utility_of(e)
                })
                .fold(f64::NEG_INFINITY, f64::max);
            for _ in 0..100 {
                let margin = best_vertex - utility_of(interior(&mut rng, d));
                worst_margin = worst_margin.min(margin);
            }
        }
    }
    println!("  worst vertex-over-interior margin {worst_margin:.3e}");
    verdict(8, "vertex-best-response", worst_margin > 1e-9);
}

/// Midpoint convexity of the per-user engagement as a function of the own
/// alignment x, strict on the domains where the curvature is positive.
#[test]
fn criterion_09_engagement_midpoint_convexity() {
    let mut rng = ChaCha8Rng::seed_from_u64(909);

    // Linear rule: f(x) = x^2 / (x + s) with opponent mass s > 0.
    let mut worst_linear = f64::INFINITY;
    for _ in 0..1000 {
        let s = rng.gen_range(0.05..2.0);
        let f = |x: f64| x * x / (x + s);
        let mut x1 = rng.gen_range(1e-6..1.0f64);
        let mut x2 = rng.gen_range(1e-6..1.0f64);
        while (x1 - x2).abs() < 0.05 {
            x2 = rng.gen_range(1e-6..1.0);
        }
        if x1 > x2 {
            std::mem::swap(&mut x1, &mut x2);
        }
        let gap = (f(x1) + f(x2)) / 2.0 - f((x1 + x2) / 2.0);
        worst_linear = worst_linear.min(gap);
    }
    // Degenerate opponent mass: f(x) = x is affine, so the midpoint gap
    // vanishes but never goes negative beyond rounding.
    let affine_ok = {
        let f = |x: f64| x * x / x;
        let gap = (f(0.25) + f(0.75)) / 2.0 - f(0.5);
        gap.abs() < 1e-12
    };

    // Softmax rule: f(x) = x e^{x/tau} / (e^{x/tau} + s_exp), strict on
    // x <= tau * ln(s_exp).
    let mut worst_softmax = f64::INFINITY;
    for _ in 0..1000 {
        let tau = 10f64.powf(rng.gen_range(-1.0..1.0));
        let opponents = rng.gen_range(2..=8);
        let s_exp: f64 = (0..opponents)
            .map(|_| (rng.gen_range(0.0..1.0) / tau).exp())
            .sum();
        let bound = (tau * s_exp.ln()).min(1.0);
        let f = |x: f64| {
            let e = (x / tau).exp();
            x * e / (e + s_exp)
        };
        let mut x1 = rng.gen_range(0.0..bound);
        let mut x2 = rng.gen_range(0.0..bound);
        while (x1 - x2).abs() < 0.2 * bound {
            x2 = rng.gen_range(0.0..bound);
        }
        if x1 > x2 {
            std::mem::swap(&mut x1, &mut x2);
        }
        let gap = (f(x1) + f(x2)) / 2.0 - f((x1 + x2) / 2.0);
        worst_softmax = worst_softmax.min(gap);
    }
    println!("  worst strict gaps: linear {worst_linear:.3e}, softmax {worst_softmax:.3e}");
    verdict(
        9,
        "engagement-midpoint-convexity",
        worst_linear > 1e-12 && worst_softmax > 1e-12 && affine_ok,
    );
}

/// Factorization of a ratings-sized sparse matrix: monotone observed loss,
/// strictly positive factors, and exact recovery of a rank-1 matrix.
#[test]
fn criterion_10_factorization_properties() {
    use engage_core::nmf::{nmf_user_embeddings, NmfConfig};
    use engage_core::ratings::RatingsTable;

    // Synthetic ratings at the scale of the classic 100k movie dataset:
    // 943 users x 1682 items, 100k observed entries from noisy positive
    // factors, clamped to the 1..5 star range.
    let users = 943usize;
    let items = 1682usize;
    let rank_true = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let wt: Vec<f64> = (0..users * rank_true).map(|_| rng.gen_range(0.0..1.0)).collect();
    let ht: Vec<f64> = (0..items * rank_true).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut seen = std::collections::HashSet::new();
    let mut triples = Vec::with_capacity(100_000);
    while triples.len() < 100_000 {
        let u = rng.gen_range(0..users);
        let i = rng.gen_range(0..items);
        if !seen.insert((u, i)) {
            continue;
        }
        let dot: f64 = (0..rank_true)
            .map(|f| wt[u * rank_true + f] * ht[i * rank_true + f])
            .sum();
        let rating = (dot * 2.0 + rng.gen_range(-0.25..0.25)).clamp(1.0, 5.0);
        triples.push((u as u32, i as u32, rating));
    }
    let table = RatingsTable {
        triples,
        user_ids: (0..users).map(|u| u.to_string()).collect(),
        item_ids: (0..items).map(|i| i.to_string()).collect(),
        duplicates: 0,
    };
    let outcome = nmf_user_embeddings(&table, &NmfConfig::new(15, 40, 7).unwrap()).unwrap();
    let monotone = outcome
        .loss_trace
        .windows(2)
        .all(|w| w[1] <= w[0] * (1.0 + 1e-9));
    let positive = outcome.population.strictly_positive();

    // Rank-1 recovery on a small dense matrix.
    let wv: Vec<f64> = (0..30).map(|_| rng.gen_range(0.2..1.0)).collect();
    let hv: Vec<f64> = (0..20).map(|_| rng.gen_range(0.2..1.0)).collect();
    let mut dense = Vec::new();
    for (u, &a) in wv.iter().enumerate() {
        for (i, &b) in hv.iter().enumerate() {
            dense.push((u as u32, i as u32, a * b));
        }
    }
    let dense_table = RatingsTable {
        triples: dense.clone(),
        user_ids: (0..30).map(|u| u.to_string()).collect(),
        item_ids: (0..20).map(|i| i.to_string()).collect(),
        duplicates: 0,
    };
    let rank1 = nmf_user_embeddings(&dense_table, &NmfConfig::new(1, 400, 3).unwrap()).unwrap();
    let residual = rank1.loss_trace.last().unwrap();
    let total: f64 = dense.iter().map(|&(_, _, r)| r * r).sum();
    let recovery = (residual / total).sqrt();

    println!(
        "  monotone={monotone} positive={positive} rank-1 relative error {recovery:.3e}"
    );
    verdict(
        10,
        "factorization-properties",
        monotone && positive && recovery < 1e-3,
    );
}

/// When the proportional counts are integral they always form an
/// equilibrium.
#[test]
fn criterion_11_proportional_construction() {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let mut pass = true;
    for _ in 0..100 {
        let d = rng.gen_range(2..=6);
        let m: Vec<u64> = (0..d).map(|_| rng.gen_range(1..=10)).collect();
        let m = SingleMindedPopulation::new(m).unwrap();
        let n = m.total_users() * rng.gen_range(1..=5);
        let outcome = proportional_profile(&m, n);
        pass &= outcome.exact
            && outcome.slack == 0.0
            && single_minded_equilibrium_check(&m, &outcome.counts).unwrap();
    }
    verdict(11, "proportional-construction", pass);
}

/// Repeated sweeps over the same spec produce byte-identical results apart
/// from the timestamp header.
#[test]
fn criterion_12_sweep_determinism() {
    use engage_core::sweep::{run_sweep, RuleSpec, SweepSpec, UsersSource};

    let spec = SweepSpec {
        producers: vec![2, 5],
        dims: vec![3, 5],
        rules: vec![
            RuleSpec { kind: "linear".into(), tau: None },
            RuleSpec { kind: "softmax".into(), tau: Some(1.0) },
            RuleSpec { kind: "softmax".into(), tau: Some(0.1) },
        ],
        embed_seeds: vec![13, 17],
        run_seeds: vec![1, 2],
        users: UsersSource::Uniform,
        k: 100,
        max_iters: 500,
    };
    let body = |dir: &std::path::Path, workers: Option<usize>| {
        let output = run_sweep(&spec, dir, workers).unwrap();
        let text = std::fs::read_to_string(&output.results_path).unwrap();
        let (first, rest) = text.split_once('\n').unwrap();
        assert!(first.starts_with('#'));
        rest.to_string()
    };
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    let d3 = tempfile::tempdir().unwrap();
    let a = body(d1.path(), Some(1));
    let b = body(d2.path(), Some(4));
    let c = body(d3.path(), None);
    verdict(12, "sweep-determinism", a == b && b == c);
}
