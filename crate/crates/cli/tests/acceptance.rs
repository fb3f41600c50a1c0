//! Acceptance suite.
//!
//! Every test below implements one acceptance criterion at its stated
//! tolerance and runtime budget, and prints one PASS/FAIL line. Run with
//! `cargo test -p stakesim-cli --test acceptance -- --nocapture` to see the
//! lines.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use stakesim_core::{
    concentration_check_radical, expected_time_lone, expected_time_lone_log,
    expected_time_lone_log_equal, expected_time_lone_radical, expected_time_lone_radical_equal,
    linear_share_rows, log_bound_rows, log_product_rows, party_bound_log, party_bound_radical,
    radical_bound_rows, run_trials, AttackModel, GridSpec, PartyConfig, RedrawPolicy, ShareMode,
    StakeShareDistribution, SumIndexing, SystemParams, TrialJob, TrialRun, Variant,
};

fn criterion(name: &str, budget: Duration, body: impl FnOnce() -> Result<(), String>) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let result = result.and_then(|()| {
        if elapsed <= budget {
            Ok(())
        } else {
            Err(format!("runtime {elapsed:?} exceeded budget {budget:?}"))
        }
    });
    match result {
        Ok(()) => println!("[PASS] {name} ({elapsed:.2?})"),
        Err(message) => {
            println!("[FAIL] {name}: {message}");
            panic!("{name}: {message}");
        }
    }
}

fn check(condition: bool, message: impl Fn() -> String) -> Result<(), String> {
    if condition {
        Ok(())
    } else {
        Err(message())
    }
}

fn radical(coin_d: f64, stake_d: f64) -> SystemParams {
    SystemParams::new(
        Variant::Radical { exponent: 0.5 },
        1e9,
        coin_d,
        stake_d,
        0.0,
        16.0,
    )
    .unwrap()
}

fn logarithmic(coin_d: f64, stake_d: f64, stake_reward: f64) -> SystemParams {
    SystemParams::new(Variant::Logarithmic, 1e9, coin_d, stake_d, 0.0, stake_reward).unwrap()
}

fn within_ci(run: &TrialRun, reference: f64) -> Result<(), String> {
    let gap = (run.stats.mean - reference).abs();
    check(gap <= 3.0 * run.stats.std_error, || {
        format!(
            "mean {} vs reference {reference}: gap {gap} > 3 x {}",
            run.stats.mean, run.stats.std_error
        )
    })
}

#[test]
fn acceptance_01_radical_equal_closed_form_vs_monte_carlo() {
    criterion(
        "criterion 1: radical equal-difficulty closed form lies in the Monte Carlo 99.7% CI",
        Duration::from_secs(10),
        || {
            let params = radical(100.0, 100.0);
            // Direct-summation oracle: 25 * sum_{n=1..50} n^(-1/2).
            let oracle = 25.0 * (1..=50u64).map(|n| 1.0 / (n as f64).sqrt()).sum::<f64>();
            check((oracle - 318.8).abs() < 0.1, || {
                format!("oracle drifted from the expected magnitude: {oracle}")
            })?;
            let analytic =
                expected_time_lone_radical_equal(&params, 50).map_err(|e| e.to_string())?;
            check((analytic - oracle).abs() / oracle < 1e-12, || {
                format!("closed form {analytic} vs oracle {oracle}")
            })?;
            let run = run_trials(&TrialJob::Lone(params), 50, 10_000, 101)
                .map_err(|e| e.to_string())?;
            within_ci(&run, analytic)
        },
    );
}

#[test]
fn acceptance_02_radical_half_probability_closed_form_vs_monte_carlo() {
    criterion(
        "criterion 2: radical p=0.5 closed form lies in the Monte Carlo 99.7% CI for L in {1,2,20}",
        Duration::from_secs(10),
        || {
            let params = radical(100.0, 200.0);
            // Hand enumeration for L=2: 25 * (1 + (0.5 + 0.5/sqrt(2))).
            let hand = 25.0 * (1.0 + 0.5 + 0.5 / 2f64.sqrt());
            check((hand - 46.33883).abs() < 1e-5, || {
                format!("hand enumeration drifted: {hand}")
            })?;
            for length in [1u64, 2, 20] {
                let model = AttackModel::new(&params, length).map_err(|e| e.to_string())?;
                let analytic = expected_time_lone_radical(&model).map_err(|e| e.to_string())?;
                if length == 2 {
                    check((analytic - hand).abs() / hand < 1e-12, || {
                        format!("closed form {analytic} vs hand enumeration {hand}")
                    })?;
                }
                let run = run_trials(&TrialJob::Lone(params), length, 10_000, 200 + length)
                    .map_err(|e| e.to_string())?;
                within_ci(&run, analytic).map_err(|e| format!("L={length}: {e}"))?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_03_log_closed_form_vs_monte_carlo() {
    criterion(
        "criterion 3: logarithmic closed forms lie in the Monte Carlo 99.7% CI (p=1 and p=0.5)",
        Duration::from_secs(10),
        || {
            let equal = logarithmic(100.0, 100.0, 4.0);
            let hand: f64 = 100.0 * (0.5 + 1.0 / 3.0);
            check((hand - 83.33333).abs() < 1e-5, || {
                format!("hand enumeration drifted: {hand}")
            })?;
            let analytic = expected_time_lone_log_equal(&equal, 2).map_err(|e| e.to_string())?;
            check((analytic - hand).abs() / hand < 1e-12, || {
                format!("closed form {analytic} vs hand enumeration {hand}")
            })?;
            let run =
                run_trials(&TrialJob::Lone(equal), 2, 10_000, 301).map_err(|e| e.to_string())?;
            within_ci(&run, analytic)?;

            let half = logarithmic(100.0, 200.0, 4.0);
            let model = AttackModel::new(&half, 2).map_err(|e| e.to_string())?;
            let analytic_half = expected_time_lone_log(&model).map_err(|e| e.to_string())?;
            // Two-term enumeration at p = 0.5: 100 * (1/2 + (1/4 + 1/6)).
            let hand_half = 100.0 * (0.5 + (0.25 + 1.0 / 6.0));
            check((analytic_half - hand_half).abs() / hand_half < 1e-12, || {
                format!("closed form {analytic_half} vs hand enumeration {hand_half}")
            })?;
            let run =
                run_trials(&TrialJob::Lone(half), 2, 10_000, 302).map_err(|e| e.to_string())?;
            within_ci(&run, analytic_half)
        },
    );
}

#[test]
fn acceptance_04_inner_sum_bound_grids() {
    criterion(
        "criterion 4: inner sums never exceed their bounds on the full default grids",
        Duration::from_secs(30),
        || {
            let spec = GridSpec::default();
            let radical_rows = radical_bound_rows(&spec);
            check(radical_rows.len() == 201 * 9 * 10, || {
                format!("unexpected radical grid size {}", radical_rows.len())
            })?;
            let log_rows = log_bound_rows(&spec);
            check(log_rows.len() == 201 * 4 * 10, || {
                format!("unexpected log grid size {}", log_rows.len())
            })?;
            for row in radical_rows.iter().chain(&log_rows) {
                check(row.satisfied, || {
                    format!(
                        "{} violated at {}: {} > {}",
                        row.check_name, row.parameters, row.lhs, row.rhs
                    )
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_05_pointwise_proof_inequalities() {
    criterion(
        "criterion 5: pointwise inequalities hold on the x-grid for k <= 1000",
        Duration::from_secs(5),
        || {
            let spec = GridSpec::default();
            let linear = linear_share_rows(&spec);
            let product = log_product_rows(&spec);
            check(linear.len() == 1001 && product.len() == 1001, || {
                format!("unexpected row counts {} / {}", linear.len(), product.len())
            })?;
            for row in linear.iter().chain(&product) {
                check(row.satisfied, || {
                    format!(
                        "{} violated at {}: {} < {}",
                        row.check_name, row.parameters, row.lhs, row.rhs
                    )
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_06_party_bounds() {
    criterion(
        "criterion 6: simulated party means stay below the coalition bounds",
        Duration::from_secs(30),
        || {
            let dist = StakeShareDistribution::point_mass(vec![0.25; 4]).unwrap();

            let radical_params = radical(100.0, 100.0);
            let model = AttackModel::new(&radical_params, 20).map_err(|e| e.to_string())?;
            let bound = party_bound_radical(&model, &dist, SumIndexing::Printed)
                .map_err(|e| e.to_string())?;
            let config = PartyConfig::new(
                radical_params,
                4,
                ShareMode::Exogenous {
                    dist: dist.clone(),
                    redraw: RedrawPolicy::PerChain,
                },
            )
            .map_err(|e| e.to_string())?;
            let run = run_trials(&TrialJob::Party(config), 20, 10_000, 601)
                .map_err(|e| e.to_string())?;
            check(
                run.stats.mean <= bound + 3.0 * run.stats.std_error,
                || {
                    format!(
                        "radical party mean {} exceeded bound {bound} + 3 x {}",
                        run.stats.mean, run.stats.std_error
                    )
                },
            )?;

            let log_params = logarithmic(100.0, 100.0, 16.0);
            let model = AttackModel::new(&log_params, 20).map_err(|e| e.to_string())?;
            let bound = party_bound_log(&model, &dist, SumIndexing::Printed)
                .map_err(|e| e.to_string())?;
            let config = PartyConfig::new(
                log_params,
                4,
                ShareMode::Exogenous {
                    dist,
                    redraw: RedrawPolicy::PerChain,
                },
            )
            .map_err(|e| e.to_string())?;
            let run = run_trials(&TrialJob::Party(config), 20, 10_000, 602)
                .map_err(|e| e.to_string())?;
            check(
                run.stats.mean <= bound + 3.0 * run.stats.std_error,
                || {
                    format!(
                        "log party mean {} exceeded bound {bound} + 3 x {}",
                        run.stats.mean, run.stats.std_error
                    )
                },
            )
        },
    );
}

/// Point mass distributions whose vectors all put strictly more than `1/m`
/// on at least `min_holders` coordinates.
fn random_spread_distribution(
    rng: &mut ChaCha12Rng,
    m: usize,
    min_holders: usize,
) -> StakeShareDistribution {
    let vectors = rng.random_range(1..=3usize);
    let mut support = Vec::with_capacity(vectors);
    let raw_masses: Vec<f64> = (0..vectors).map(|_| rng.random_range(0.2..1.0)).collect();
    let mass_total: f64 = raw_masses.iter().sum();
    let mut masses: Vec<f64> = raw_masses.iter().map(|w| w / mass_total).collect();
    let correction: f64 = 1.0 - masses.iter().sum::<f64>();
    masses[0] += correction;

    for mass in masses {
        let holders = rng.random_range(min_holders..m);
        let spare = 1.0 - holders as f64 / m as f64;
        let alpha: f64 = rng.random_range(0.1..0.9);
        let mut deltas: Vec<f64> = (0..holders).map(|_| rng.random_range(0.1..1.0)).collect();
        let delta_total: f64 = deltas.iter().sum();
        for delta in &mut deltas {
            *delta *= spare * alpha / delta_total;
        }
        let mut shares = vec![0.0f64; m];
        for i in 0..holders {
            shares[i] = 1.0 / m as f64 + deltas[i];
        }
        let rest = spare * (1.0 - alpha) / (m - holders) as f64;
        for share in shares.iter_mut().take(m).skip(holders) {
            *share = rest;
        }
        let correction: f64 = 1.0 - shares.iter().sum::<f64>();
        shares[0] += correction;
        support.push((shares, mass));
    }
    StakeShareDistribution::new(support).unwrap()
}

#[test]
fn acceptance_07_radical_concentration() {
    criterion(
        "criterion 7: spread share distributions keep the inverse power-sum expectation below 1/c",
        Duration::from_secs(10),
        || {
            // 16 nodes, 8 holders of 1/8 each, c = 2.
            let mut shares = vec![0.0f64; 16];
            for share in shares.iter_mut().take(8) {
                *share = 0.125;
            }
            let dist = StakeShareDistribution::point_mass(shares).unwrap();
            let report = concentration_check_radical(&dist, 0.5, 2.0);
            check(report.hypothesis_holds, || {
                "construction unexpectedly missed the spread hypothesis".to_string()
            })?;
            check(
                (report.expectation - 0.35355339059327373).abs() < 1e-12,
                || format!("expectation {} drifted from 1/(2 sqrt 2)", report.expectation),
            )?;
            check(report.expectation <= report.bound, || {
                format!("{} > {}", report.expectation, report.bound)
            })?;

            let mut rng = ChaCha12Rng::seed_from_u64(7007);
            for i in 0..100 {
                let dist = random_spread_distribution(&mut rng, 16, 8);
                let report = concentration_check_radical(&dist, 0.5, 2.0);
                check(report.hypothesis_holds, || {
                    format!("random family member {i} missed the hypothesis")
                })?;
                check(report.expectation <= report.bound + 1e-12, || {
                    format!(
                        "random family member {i}: expectation {} > bound {}",
                        report.expectation, report.bound
                    )
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_08_reductions() {
    criterion(
        "criterion 8: constant system reduces to proof of work; unit-vector party reduces to the lone miner",
        Duration::from_secs(30),
        || {
            let constant =
                SystemParams::new(Variant::Constant, 1e6, 100.0, 100.0, 0.0, 16.0).unwrap();
            let pow =
                SystemParams::new(Variant::ProofOfWork, 1e6, 100.0, 100.0, 0.0, 16.0).unwrap();
            let expected = expected_time_lone(&constant, 30).map_err(|e| e.to_string())?;
            check(expected == 3000.0, || {
                format!("constant closed form {expected} != 3000")
            })?;
            let pow_expected = expected_time_lone(&pow, 30).map_err(|e| e.to_string())?;
            check(pow_expected == expected, || {
                format!("proof-of-work {pow_expected} != constant {expected}")
            })?;
            let run = run_trials(&TrialJob::Lone(constant), 30, 5_000, 801)
                .map_err(|e| e.to_string())?;
            within_ci(&run, expected)?;

            // Unit-vector party against the lone miner, two-sample at 3 sigma.
            let params = radical(100.0, 100.0);
            let lone = run_trials(&TrialJob::Lone(params), 20, 6_000, 802)
                .map_err(|e| e.to_string())?;
            let dist = StakeShareDistribution::point_mass(vec![1.0, 0.0]).unwrap();
            let config = PartyConfig::new(
                params,
                2,
                ShareMode::Exogenous {
                    dist,
                    redraw: RedrawPolicy::PerChain,
                },
            )
            .map_err(|e| e.to_string())?;
            let party = run_trials(&TrialJob::Party(config), 20, 6_000, 803)
                .map_err(|e| e.to_string())?;
            let gap = (lone.stats.mean - party.stats.mean).abs();
            let spread =
                (lone.stats.std_error.powi(2) + party.stats.std_error.powi(2)).sqrt();
            check(gap <= 3.0 * spread, || {
                format!(
                    "lone mean {} vs degenerate party mean {}: gap {gap} > 3 x {spread}",
                    lone.stats.mean, party.stats.mean
                )
            })
        },
    );
}

#[test]
fn acceptance_09_threshold_subadditivity() {
    criterion(
        "criterion 9: radical and logarithmic thresholds are subadditive on random stake pairs",
        Duration::from_secs(10),
        || {
            let mut rng = ChaCha12Rng::seed_from_u64(909);
            for i in 0..10_000 {
                let exponent: f64 = rng.random_range(0.05..0.95);
                let stake_reward: f64 = rng.random_range(0.5..1000.0);
                let params = SystemParams::new(
                    Variant::Radical { exponent },
                    1000.0,
                    100.0,
                    100.0,
                    0.0,
                    stake_reward,
                )
                .unwrap();
                let s1: f64 = rng.random_range(0.0..1e6);
                let s2: f64 = rng.random_range(0.0..1e6);
                let lhs = params.coin_threshold(s1 + s2, 0.0);
                let rhs = params.coin_threshold(s1, 0.0) + params.coin_threshold(s2, 0.0);
                check(lhs <= rhs + 1e-12 * rhs.max(1.0), || {
                    format!("radical pair {i}: f({s1}+{s2}) = {lhs} > {rhs}")
                })?;
            }
            for i in 0..10_000 {
                let stake_reward: f64 = rng.random_range(2.0..1000.0);
                let params = SystemParams::new(
                    Variant::Logarithmic,
                    1000.0,
                    100.0,
                    100.0,
                    0.0,
                    stake_reward,
                )
                .unwrap();
                let s1: f64 = rng.random_range(0.0..1e6);
                let s2: f64 = rng.random_range(0.0..1e6);
                let lhs = params.coin_threshold(s1 + s2, 0.0);
                let rhs = params.coin_threshold(s1, 0.0) + params.coin_threshold(s2, 0.0);
                check(lhs <= rhs + 1e-12 * rhs.max(1.0), || {
                    format!("log pair {i}: g({s1}+{s2}) = {lhs} > {rhs}")
                })?;
            }
            Ok(())
        },
    );
}

#[test]
fn acceptance_10_cli_determinism_across_thread_counts() {
    criterion(
        "criterion 10: identical CSV bytes for the same seed at --threads 1 and --threads 8",
        Duration::from_secs(30),
        || {
            let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
            let config_path = dir.path().join("determinism.toml");
            std::fs::write(
                &config_path,
                r#"
[system]
variant = "radical"
scale = 1e9
coin_difficulty = 100.0
stake_difficulty = 200.0
stake_reward = 16.0
exponent = 0.5

[run]
chain_length = 10
trials = 500
seed = 99
"#,
            )
            .map_err(|e| e.to_string())?;

            let run = |threads: &str, out: &std::path::Path| -> Result<(), String> {
                let status = std::process::Command::new(env!("CARGO_BIN_EXE_stakesim"))
                    .arg("simulate")
                    .arg("--config")
                    .arg(&config_path)
                    .arg("--threads")
                    .arg(threads)
                    .arg("--out")
                    .arg(out)
                    .status()
                    .map_err(|e| e.to_string())?;
                check(status.success(), || format!("run failed: {status}"))
            };

            let single = dir.path().join("single.csv");
            let many = dir.path().join("many.csv");
            let repeat = dir.path().join("repeat.csv");
            run("1", &single)?;
            run("8", &many)?;
            run("1", &repeat)?;

            let single_bytes = std::fs::read(&single).map_err(|e| e.to_string())?;
            let many_bytes = std::fs::read(&many).map_err(|e| e.to_string())?;
            let repeat_bytes = std::fs::read(&repeat).map_err(|e| e.to_string())?;
            check(single_bytes == many_bytes, || {
                "outputs diverged between --threads 1 and --threads 8".to_string()
            })?;
            check(single_bytes == repeat_bytes, || {
                "outputs diverged between repeated --threads 1 runs".to_string()
            })
        },
    );
}
