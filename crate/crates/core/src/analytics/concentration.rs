//! Concentration checks: when every reachable share vector spreads stake over
//! enough nodes, the inverse-sum expectations are bounded away from 1, which
//! quantifies how much slower a colluding party builds chains.

use super::party::{inv_log_sum_expectation, inv_power_sum_expectation, StakeShareDistribution};
use super::AnalyticsError;

/// Result of the radical concentration check.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    /// True when every support vector has at least `c * m^exponent`
    /// coordinates strictly above `1/m`.
    pub hypothesis_holds: bool,
    pub expectation: f64,
    /// `1 / c`; dominates `expectation` whenever the hypothesis holds.
    pub bound: f64,
}

/// One evaluated point of the per-reward-count kernel inequality.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPoint {
    pub support_index: usize,
    pub reward_count: u64,
    pub lhs: f64,
    pub rhs: f64,
}

/// A grid point where the per-reward-count kernel inequality failed.
pub type KernelViolation = KernelPoint;

/// Result of the logarithmic concentration check.
///
/// The conclusion being probed is the kernel inequality
/// `sum_i (log2 R + log2(k x_i + 1)) >= c (log2 R + log2(k + 1))`,
/// which is what caps the party's expected time at `1/c` of the lone form.
/// It is evaluated pointwise for every hypothesis-satisfying support vector
/// and every reward count `k` on the grid; violations are reported, not
/// asserted away. The inverse-log-sum expectation is included for reference
/// and is not itself claimed to stay below `bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogConcentrationReport {
    pub hypothesis_holds: bool,
    pub expectation: f64,
    pub bound: f64,
    pub kernel_violations: Vec<KernelViolation>,
    /// Worst-margin grid point of each hypothesis-satisfying support vector.
    pub kernel_worst: Vec<KernelPoint>,
    pub kernel_points_checked: u64,
}

fn count_above_average(shares: &[f64]) -> usize {
    let cutoff = 1.0 / shares.len() as f64;
    shares.iter().filter(|x| **x > cutoff).count()
}

/// Checks whether every support vector has at least `c * m^exponent`
/// coordinates strictly above `1/m`, and reports the power-sum expectation
/// against the `1/c` bound. Requires `c > 1`.
pub fn concentration_check_radical(
    dist: &StakeShareDistribution,
    exponent: f64,
    c: f64,
) -> ConcentrationReport {
    assert!(c > 1.0, "concentration factor must exceed 1, got {c}");
    let required = c * (dist.node_count() as f64).powf(exponent);
    let hypothesis_holds = dist
        .support()
        .all(|(shares, _)| count_above_average(shares) as f64 >= required);
    ConcentrationReport {
        hypothesis_holds,
        expectation: inv_power_sum_expectation(dist, exponent),
        bound: 1.0 / c,
    }
}

/// Logarithmic counterpart. Requires `m > 2`, `1 < c <= m / log2(m + 1)`,
/// and `stake_reward >= 2`; the spread requirement is `2 c log2 m`
/// coordinates strictly above `1/m`. The kernel inequality is evaluated for
/// `k` in `0..=kernel_k_max` on every hypothesis-satisfying support vector.
pub fn concentration_check_log(
    dist: &StakeShareDistribution,
    c: f64,
    stake_reward: f64,
    kernel_k_max: u64,
) -> Result<LogConcentrationReport, AnalyticsError> {
    let m = dist.node_count();
    if m <= 2 {
        return Err(AnalyticsError::ConcentrationNodeCount(m));
    }
    let c_max = m as f64 / ((m + 1) as f64).log2();
    if !(c > 1.0 && c <= c_max) {
        return Err(AnalyticsError::ConcentrationFactorRange {
            c,
            nodes: m,
            max: c_max,
        });
    }
    if stake_reward < 2.0 {
        return Err(AnalyticsError::StakeRewardRange(stake_reward));
    }

    let required = 2.0 * c * (m as f64).log2();
    let hypothesis_holds = dist
        .support()
        .all(|(shares, _)| count_above_average(shares) as f64 >= required);

    let log2_reward = stake_reward.log2();
    let mut kernel_violations = Vec::new();
    let mut kernel_worst = Vec::new();
    let mut kernel_points_checked = 0u64;
    for (support_index, (shares, _)) in dist.support().enumerate() {
        if (count_above_average(shares) as f64) < required {
            continue;
        }
        let mut worst: Option<KernelPoint> = None;
        for k in 0..=kernel_k_max {
            let lhs: f64 = shares
                .iter()
                .map(|x| log2_reward + (k as f64 * x + 1.0).log2())
                .sum();
            let rhs = c * (log2_reward + ((k + 1) as f64).log2());
            kernel_points_checked += 1;
            let point = KernelPoint {
                support_index,
                reward_count: k,
                lhs,
                rhs,
            };
            if worst
                .as_ref()
                .map(|w| lhs - rhs < w.lhs - w.rhs)
                .unwrap_or(true)
            {
                worst = Some(point.clone());
            }
            if lhs + 1e-12 < rhs {
                kernel_violations.push(point);
            }
        }
        if let Some(point) = worst {
            kernel_worst.push(point);
        }
    }

    Ok(LogConcentrationReport {
        hypothesis_holds,
        expectation: inv_log_sum_expectation(dist),
        bound: 1.0 / c,
        kernel_violations,
        kernel_worst,
        kernel_points_checked,
    })
}
