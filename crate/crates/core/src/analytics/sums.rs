//! Numerically stable evaluation of the weighted binomial sums that drive
//! every expected-time formula.
//!
//! Each binomial term is assembled in log space as
//! `exp(ln C(n,k) + k ln p + (n-k) ln q)` with `ln C` computed from
//! log-gamma, which keeps the terms finite out to `n ~ 1e4` where the raw
//! binomial coefficients would overflow. `p = 1` collapses every sum to its
//! single `k = n` term and is handled exactly.

use statrs::function::gamma::ln_gamma;

fn ln_choose(n: u64, k: u64) -> f64 {
    // The edge coefficients are exactly 1; the log-gamma route would leave
    // them off by a rounding ulp.
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma((n + 1) as f64) - ln_gamma((k + 1) as f64) - ln_gamma((n - k + 1) as f64)
}

/// `sum_{k=0}^{n} weight(k) C(n,k) p^k q^(n-k)` for `0 < p < 1`.
fn binomial_expectation(n: u64, p: f64, weight: impl Fn(u64) -> f64) -> f64 {
    let q = 1.0 - p;
    let ln_p = p.ln();
    let ln_q = q.ln();
    let mut sum = 0.0;
    for k in 0..=n {
        let ln_pmf = ln_choose(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q;
        sum += ln_pmf.exp() * weight(k);
    }
    sum
}

fn check_probability(p: f64) {
    assert!(p > 0.0 && p <= 1.0, "p must lie in (0, 1], got {p}");
}

/// `sum_{k=0}^{n} (k+1)^(-exponent) C(n,k) p^k q^(n-k)`.
pub fn inner_sum_radical(n: u64, exponent: f64, p: f64) -> f64 {
    assert!(
        exponent > 0.0 && exponent < 1.0,
        "exponent must lie in (0, 1), got {exponent}"
    );
    check_probability(p);
    if p == 1.0 {
        return ((n + 1) as f64).powf(-exponent);
    }
    binomial_expectation(n, p, |k| ((k + 1) as f64).powf(-exponent))
}

/// Upper bound `(1/p) (1 - q^(n+1)) / (n+1)^exponent` on
/// [`inner_sum_radical`]; tight at `p = 1`.
pub fn inner_bound_radical(n: u64, exponent: f64, p: f64) -> f64 {
    assert!(
        exponent > 0.0 && exponent < 1.0,
        "exponent must lie in (0, 1), got {exponent}"
    );
    check_probability(p);
    let q = 1.0 - p;
    // Written with powf(-exponent) so the p = 1 case collapses to exactly
    // the same expression as the inner sum.
    (1.0 / p) * (1.0 - q.powf((n + 1) as f64)) * ((n + 1) as f64).powf(-exponent)
}

/// `sum_{k=0}^{n} C(n,k) p^k q^(n-k) / (log2(k+1) + log2(stake_reward))`.
pub fn inner_sum_log(n: u64, stake_reward: f64, p: f64) -> f64 {
    assert!(
        stake_reward >= 2.0,
        "stake_reward must be at least 2, got {stake_reward}"
    );
    check_probability(p);
    let log2_reward = stake_reward.log2();
    if p == 1.0 {
        return 1.0 / (((n + 1) as f64).log2() + log2_reward);
    }
    binomial_expectation(n, p, |k| 1.0 / (((k + 1) as f64).log2() + log2_reward))
}

/// Upper bound `(1/p) (1 - q^(n+1)) / (log2(n+1) + log2(stake_reward))` on
/// [`inner_sum_log`]; tight at `p = 1`.
pub fn inner_bound_log(n: u64, stake_reward: f64, p: f64) -> f64 {
    assert!(
        stake_reward >= 2.0,
        "stake_reward must be at least 2, got {stake_reward}"
    );
    check_probability(p);
    let q = 1.0 - p;
    (1.0 / p) * (1.0 - q.powf((n + 1) as f64)) / (((n + 1) as f64).log2() + stake_reward.log2())
}
