//! Job execution: turns a resolved plan into the emitted artifact text.

use std::fmt::Write as _;

use stakesim_core::{
    concentration_check_log, concentration_check_radical, expected_time_lone, party_bound_log,
    party_bound_radical, race, run_trials, standard_rows, upper_bound_lone, AttackModel, CheckRow,
    ShareMode, SumIndexing, SystemParams, TrialJob, Variant,
};

use crate::config::{ConcentrationPlan, ConfigError, JobPlan, OutputFormat};
use crate::output::{csv_field, fmt_f64, fmt_opt_f64, json_f64, json_opt_f64, json_string};

/// A finished job: the artifact text, the process exit code, and any
/// warnings for stderr.
pub struct JobOutput {
    pub text: String,
    pub exit_code: i32,
    pub warnings: Vec<String>,
}

pub fn run_plan(plan: &JobPlan, format: OutputFormat) -> Result<JobOutput, ConfigError> {
    match plan {
        JobPlan::Analytic { params, lengths } => run_analytic(params, lengths, format),
        JobPlan::Simulate {
            job,
            chain_length,
            trials,
            master_seed,
            indexing,
        } => run_simulate(job, *chain_length, *trials, *master_seed, *indexing, format),
        JobPlan::Race {
            config,
            trials,
            master_seed,
        } => run_race(config, *trials, *master_seed, format),
        JobPlan::VerifyBounds {
            grid,
            concentration,
        } => run_verify(grid, concentration.as_ref(), format),
    }
}

fn run_analytic(
    params: &SystemParams,
    lengths: &[u64],
    format: OutputFormat,
) -> Result<JobOutput, ConfigError> {
    let mut rows = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let expected = expected_time_lone(params, length)
            .map_err(|e| ConfigError(format!("analytic: {e}")))?;
        let bound =
            upper_bound_lone(params, length).map_err(|e| ConfigError(format!("analytic: {e}")))?;
        rows.push((length, expected, bound));
    }
    let p = params.stake_reward_ratio();
    let variant = params.variant().name();

    let text = match format {
        OutputFormat::Csv => {
            let mut out = String::from("variant,L,p,expected_time,upper_bound\n");
            for (length, expected, bound) in &rows {
                let _ = writeln!(
                    out,
                    "{variant},{length},{},{},{}",
                    fmt_f64(p),
                    fmt_f64(*expected),
                    fmt_f64(*bound)
                );
            }
            out
        }
        OutputFormat::Json => {
            let mut out = String::from("{\"job\":\"analytic\",\"rows\":[");
            for (i, (length, expected, bound)) in rows.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"variant\":{},\"L\":{length},\"p\":{},\"expected_time\":{},\"upper_bound\":{}}}",
                    json_string(variant),
                    json_f64(p),
                    json_f64(*expected),
                    json_f64(*bound)
                );
            }
            out.push_str("]}\n");
            out
        }
    };
    Ok(JobOutput {
        text,
        exit_code: 0,
        warnings: Vec::new(),
    })
}

/// Reference value for the simulate summary: the closed-form expected time
/// for lone jobs, the coalition bound for exogenous parties.
fn simulate_reference(job: &TrialJob, chain_length: u64, indexing: SumIndexing) -> Option<f64> {
    match job {
        TrialJob::Lone(params) => expected_time_lone(params, chain_length).ok(),
        TrialJob::Party(config) => match config.share_mode() {
            ShareMode::Exogenous { dist, .. } => {
                let model = AttackModel::new(config.params(), chain_length).ok()?;
                match config.params().variant() {
                    Variant::Radical { .. } => party_bound_radical(&model, dist, indexing).ok(),
                    Variant::Logarithmic => party_bound_log(&model, dist, indexing).ok(),
                    _ => None,
                }
            }
            ShareMode::Endogenous => None,
        },
    }
}

fn run_simulate(
    job: &TrialJob,
    chain_length: u64,
    trials: u64,
    master_seed: u64,
    indexing: SumIndexing,
    format: OutputFormat,
) -> Result<JobOutput, ConfigError> {
    let run = run_trials(job, chain_length, trials, master_seed)
        .map_err(|e| ConfigError(format!("simulate: {e}")))?;
    let mut warnings = Vec::new();
    if run.any_capped() {
        warnings.push(
            "some trials ran with capped success probabilities; closed forms do not apply"
                .to_string(),
        );
    }
    let analytic_value = simulate_reference(job, chain_length, indexing);
    let z_score = analytic_value.map(|v| (run.stats.mean - v) / run.stats.std_error);
    let stats = &run.stats;

    let text = match format {
        OutputFormat::Csv => {
            let mut out = String::from("trial,elapsed,stake_rewards\n");
            for record in &run.records {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    record.trial, record.elapsed, record.stake_rewards
                );
            }
            out.push_str("mean,std_error,ci95_low,ci95_high,analytic_value,z_score\n");
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_f64(stats.mean),
                fmt_f64(stats.std_error),
                fmt_f64(stats.ci95_low),
                fmt_f64(stats.ci95_high),
                fmt_opt_f64(analytic_value),
                fmt_opt_f64(z_score)
            );
            out
        }
        OutputFormat::Json => {
            let mut out = String::from("{\"job\":\"simulate\",\"rows\":[");
            for (i, record) in run.records.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"trial\":{},\"elapsed\":{},\"stake_rewards\":{}}}",
                    record.trial, record.elapsed, record.stake_rewards
                );
            }
            let _ = write!(
                out,
                "],\"summary\":{{\"mean\":{},\"std_error\":{},\"ci95_low\":{},\"ci95_high\":{},\"analytic_value\":{},\"z_score\":{}}}}}\n",
                json_f64(stats.mean),
                json_f64(stats.std_error),
                json_f64(stats.ci95_low),
                json_f64(stats.ci95_high),
                json_opt_f64(analytic_value),
                json_opt_f64(z_score)
            );
            out
        }
    };
    Ok(JobOutput {
        text,
        exit_code: 0,
        warnings,
    })
}

fn run_race(
    config: &stakesim_core::RaceConfig,
    trials: u64,
    master_seed: u64,
    format: OutputFormat,
) -> Result<JobOutput, ConfigError> {
    let report =
        race(config, master_seed, trials).map_err(|e| ConfigError(format!("race: {e}")))?;
    let summary = &report.summary;

    let text = match format {
        OutputFormat::Csv => {
            let mut out = String::from("honest_length,attacker_length,attacker_led\n");
            for record in &report.records {
                let _ = writeln!(
                    out,
                    "{},{},{}",
                    record.honest_length, record.attacker_length, record.attacker_led
                );
            }
            out.push_str("trials,attacker_led_freq,attacker_ever_led_freq,tie_freq,label\n");
            let _ = writeln!(
                out,
                "{},{},{},{},exploratory",
                summary.trials,
                fmt_f64(summary.attacker_led_freq),
                fmt_f64(summary.attacker_ever_led_freq),
                fmt_f64(summary.tie_freq)
            );
            out
        }
        OutputFormat::Json => {
            let mut out = String::from("{\"job\":\"race\",\"rows\":[");
            for (i, record) in report.records.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"honest_length\":{},\"attacker_length\":{},\"attacker_led\":{}}}",
                    record.honest_length, record.attacker_length, record.attacker_led
                );
            }
            let _ = write!(
                out,
                "],\"summary\":{{\"trials\":{},\"attacker_led_freq\":{},\"attacker_ever_led_freq\":{},\"tie_freq\":{},\"label\":\"exploratory\"}}}}\n",
                summary.trials,
                json_f64(summary.attacker_led_freq),
                json_f64(summary.attacker_ever_led_freq),
                json_f64(summary.tie_freq)
            );
            out
        }
    };
    Ok(JobOutput {
        text,
        exit_code: 0,
        warnings: Vec::new(),
    })
}

fn concentration_rows(plan: &ConcentrationPlan) -> Result<Vec<CheckRow>, ConfigError> {
    let mut rows = Vec::new();
    let cutoff_counts = |required: f64, family: &'static str| {
        plan.dist
            .support()
            .enumerate()
            .map(|(index, (shares, _))| {
                let cutoff = 1.0 / shares.len() as f64;
                let count = shares.iter().filter(|x| **x > cutoff).count() as f64;
                CheckRow {
                    check_name: family,
                    parameters: format!("vector={index};c={:?}", plan.c),
                    lhs: count,
                    rhs: required,
                    satisfied: count >= required,
                    mandatory: false,
                }
            })
            .collect::<Vec<_>>()
    };

    match plan.params.variant() {
        Variant::Radical { exponent } => {
            let report = concentration_check_radical(&plan.dist, exponent, plan.c);
            let required = plan.c * (plan.dist.node_count() as f64).powf(exponent);
            rows.extend(cutoff_counts(required, "radical_concentration_count"));
            rows.push(CheckRow {
                check_name: "radical_concentration_expectation",
                parameters: format!("c={:?};hypothesis_holds={}", plan.c, report.hypothesis_holds),
                lhs: report.expectation,
                rhs: report.bound,
                satisfied: !report.hypothesis_holds || report.expectation <= report.bound + 1e-12,
                mandatory: false,
            });
        }
        Variant::Logarithmic => {
            let report = concentration_check_log(
                &plan.dist,
                plan.c,
                plan.params.stake_reward(),
                plan.kernel_k_max,
            )
            .map_err(|e| ConfigError(format!("verify.concentration_c: {e}")))?;
            let required = 2.0 * plan.c * (plan.dist.node_count() as f64).log2();
            rows.extend(cutoff_counts(required, "log_concentration_count"));
            for point in &report.kernel_worst {
                let violated = report
                    .kernel_violations
                    .iter()
                    .any(|v| v.support_index == point.support_index);
                rows.push(CheckRow {
                    check_name: "log_concentration_kernel",
                    parameters: format!(
                        "vector={};k={};k_max={}",
                        point.support_index, point.reward_count, plan.kernel_k_max
                    ),
                    lhs: point.lhs,
                    rhs: point.rhs,
                    satisfied: !violated,
                    mandatory: false,
                });
            }
            for violation in &report.kernel_violations {
                rows.push(CheckRow {
                    check_name: "log_concentration_kernel_violation",
                    parameters: format!(
                        "vector={};k={}",
                        violation.support_index, violation.reward_count
                    ),
                    lhs: violation.lhs,
                    rhs: violation.rhs,
                    satisfied: false,
                    mandatory: false,
                });
            }
        }
        _ => unreachable!("validated at resolve time"),
    }
    Ok(rows)
}

fn run_verify(
    grid: &stakesim_core::GridSpec,
    concentration: Option<&ConcentrationPlan>,
    format: OutputFormat,
) -> Result<JobOutput, ConfigError> {
    let mut rows = standard_rows(grid);
    if let Some(plan) = concentration {
        rows.extend(concentration_rows(plan)?);
    }
    let failed = rows.iter().any(|row| row.mandatory && !row.satisfied);

    let text = match format {
        OutputFormat::Csv => {
            let mut out = String::from("check_name,parameters,lhs,rhs,satisfied\n");
            for row in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_field(row.check_name),
                    csv_field(&row.parameters),
                    fmt_f64(row.lhs),
                    fmt_f64(row.rhs),
                    row.satisfied
                );
            }
            out
        }
        OutputFormat::Json => {
            let mut out = String::from("{\"job\":\"verify-bounds\",\"rows\":[");
            for (i, row) in rows.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let _ = write!(
                    out,
                    "{{\"check_name\":{},\"parameters\":{},\"lhs\":{},\"rhs\":{},\"satisfied\":{}}}",
                    json_string(row.check_name),
                    json_string(&row.parameters),
                    json_f64(row.lhs),
                    json_f64(row.rhs),
                    row.satisfied
                );
            }
            let _ = write!(out, "],\"all_mandatory_satisfied\":{}}}\n", !failed);
            out
        }
    };
    Ok(JobOutput {
        text,
        exit_code: if failed { 1 } else { 0 },
        warnings: Vec::new(),
    })
}
