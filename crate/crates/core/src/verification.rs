//! Grid verification of the inequalities behind the expected-time bounds.
//!
//! Each check evaluates an inequality over a parameter grid and emits one
//! [`CheckRow`] per reported point. The two inner-sum bound checks report
//! every `(n, ., p)` grid point. The two dense pointwise inequalities sweep
//! an x-grid per `k` and report the worst margin found for that `k`, so the
//! output stays readable while every grid point is still evaluated.

use crate::analytics::{inner_bound_log, inner_bound_radical, inner_sum_log, inner_sum_radical};

/// Grid parameters for the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Inner sums are checked for all `n` in `0..=n_max`.
    pub n_max: u64,
    /// Radical exponents swept by the radical bound check.
    pub exponents: Vec<f64>,
    /// Stake-reward probabilities swept by both bound checks.
    pub success_probs: Vec<f64>,
    /// Stake rewards swept by the logarithmic bound check.
    pub stake_rewards: Vec<f64>,
    /// Step of the x-grid on `[0, 1]` for the pointwise inequalities.
    pub x_step: f64,
    /// Pointwise inequalities are checked for `k` in `0..=k_max`.
    pub k_max: u64,
    /// Slack added to the right-hand side of every comparison.
    pub tolerance: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n_max: 200,
            exponents: (1..=9).map(|i| i as f64 / 10.0).collect(),
            success_probs: (1..=10).map(|i| i as f64 / 10.0).collect(),
            stake_rewards: vec![2.0, 4.0, 16.0, 256.0],
            x_step: 1e-3,
            k_max: 1000,
            tolerance: 1e-12,
        }
    }
}

/// One verified grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckRow {
    pub check_name: &'static str,
    pub parameters: String,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
    /// Informational rows never fail a verification run.
    pub mandatory: bool,
}

/// Radical inner sums against their closed-form bound over the full
/// `(n, exponent, p)` grid.
pub fn radical_bound_rows(spec: &GridSpec) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for &exponent in &spec.exponents {
        for &p in &spec.success_probs {
            for n in 0..=spec.n_max {
                let lhs = inner_sum_radical(n, exponent, p);
                let rhs = inner_bound_radical(n, exponent, p);
                rows.push(CheckRow {
                    check_name: "radical_inner_sum_bound",
                    parameters: format!("n={n};a={exponent:?};p={p:?}"),
                    lhs,
                    rhs,
                    satisfied: lhs <= rhs + spec.tolerance,
                    mandatory: true,
                });
            }
        }
    }
    rows
}

/// Logarithmic inner sums against their closed-form bound over the full
/// `(n, stake_reward, p)` grid.
pub fn log_bound_rows(spec: &GridSpec) -> Vec<CheckRow> {
    let mut rows = Vec::new();
    for &stake_reward in &spec.stake_rewards {
        for &p in &spec.success_probs {
            for n in 0..=spec.n_max {
                let lhs = inner_sum_log(n, stake_reward, p);
                let rhs = inner_bound_log(n, stake_reward, p);
                rows.push(CheckRow {
                    check_name: "log_inner_sum_bound",
                    parameters: format!("n={n};stake_reward={stake_reward:?};p={p:?}"),
                    lhs,
                    rhs,
                    satisfied: lhs <= rhs + spec.tolerance,
                    mandatory: true,
                });
            }
        }
    }
    rows
}

fn x_grid_len(x_step: f64) -> u64 {
    (1.0 / x_step).round() as u64
}

/// Pointwise check of `k x + 1 >= (k + 1) x` on the x-grid; one row per `k`
/// at the worst-margin x.
pub fn linear_share_rows(spec: &GridSpec) -> Vec<CheckRow> {
    let steps = x_grid_len(spec.x_step);
    (0..=spec.k_max)
        .map(|k| {
            let mut worst_margin = f64::INFINITY;
            let mut worst = (0.0, 0.0, 0.0);
            for j in 0..=steps {
                let x = j as f64 * spec.x_step;
                let lhs = k as f64 * x + 1.0;
                let rhs = (k + 1) as f64 * x;
                let margin = lhs - rhs;
                if margin < worst_margin {
                    worst_margin = margin;
                    worst = (x, lhs, rhs);
                }
            }
            CheckRow {
                check_name: "linear_share_inequality",
                parameters: format!("k={k};x={:?}", worst.0),
                lhs: worst.1,
                rhs: worst.2,
                satisfied: worst_margin >= -spec.tolerance,
                mandatory: true,
            }
        })
        .collect()
}

/// Pointwise check of `log2(1 + k x) >= log2(1 + k) * log2(1 + x)` on the
/// x-grid; one row per `k` at the worst-margin x.
pub fn log_product_rows(spec: &GridSpec) -> Vec<CheckRow> {
    let steps = x_grid_len(spec.x_step);
    (0..=spec.k_max)
        .map(|k| {
            let mut worst_margin = f64::INFINITY;
            let mut worst = (0.0, 0.0, 0.0);
            for j in 0..=steps {
                let x = j as f64 * spec.x_step;
                let lhs = (1.0 + k as f64 * x).log2();
                let rhs = (1.0 + k as f64).log2() * (1.0 + x).log2();
                let margin = lhs - rhs;
                if margin < worst_margin {
                    worst_margin = margin;
                    worst = (x, lhs, rhs);
                }
            }
            CheckRow {
                check_name: "log_product_inequality",
                parameters: format!("k={k};x={:?}", worst.0),
                lhs: worst.1,
                rhs: worst.2,
                satisfied: worst_margin >= -spec.tolerance,
                mandatory: true,
            }
        })
        .collect()
}

/// Every mandatory check in one pass, in a stable order.
pub fn standard_rows(spec: &GridSpec) -> Vec<CheckRow> {
    let mut rows = radical_bound_rows(spec);
    rows.extend(log_bound_rows(spec));
    rows.extend(linear_share_rows(spec));
    rows.extend(log_product_rows(spec));
    rows
}
