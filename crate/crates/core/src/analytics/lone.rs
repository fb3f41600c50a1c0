//! Expected chain-build times and their closed-form upper bounds for a lone
//! attacker.

use crate::protocol::{SystemParams, Variant};

use super::sums::{inner_sum_log, inner_sum_radical};
use super::{AnalyticsError, AttackModel};

/// Expected hash-attempt time for a lone node to build a chain of the model's
/// length in a radical system:
/// `(CoinD / StakRwd^a) * sum_{n=0}^{L-1} inner_sum_radical(n, a, p)`.
pub fn expected_time_lone_radical(model: &AttackModel) -> Result<f64, AnalyticsError> {
    let exponent = model.radical_exponent()?;
    let params = model.params();
    let prefactor = params.coin_difficulty() / params.stake_reward().powf(exponent);
    let sum: f64 = (0..model.chain_length())
        .map(|n| inner_sum_radical(n, exponent, model.p()))
        .sum();
    Ok(prefactor * sum)
}

/// Equal-difficulty form `(CoinD / StakRwd^a) * sum_{n=0}^{L-1} (n+1)^(-a)`.
/// Agrees with [`expected_time_lone_radical`] bit for bit when
/// `coin_difficulty == stake_difficulty`.
pub fn expected_time_lone_radical_equal(
    params: &SystemParams,
    chain_length: u64,
) -> Result<f64, AnalyticsError> {
    if params.coin_difficulty() != params.stake_difficulty() {
        return Err(AnalyticsError::UnequalDifficulties {
            coin_difficulty: params.coin_difficulty(),
            stake_difficulty: params.stake_difficulty(),
        });
    }
    let model = AttackModel::new(params, chain_length)?;
    let exponent = model.radical_exponent()?;
    let prefactor = params.coin_difficulty() / params.stake_reward().powf(exponent);
    let sum: f64 = (0..chain_length)
        .map(|n| inner_sum_radical(n, exponent, 1.0))
        .sum();
    Ok(prefactor * sum)
}

/// Expected time in a logarithmic system:
/// `CoinD * sum_{n=0}^{L-1} inner_sum_log(n, StakRwd, p)`.
pub fn expected_time_lone_log(model: &AttackModel) -> Result<f64, AnalyticsError> {
    model.require_logarithmic()?;
    let params = model.params();
    let sum: f64 = (0..model.chain_length())
        .map(|n| inner_sum_log(n, params.stake_reward(), model.p()))
        .sum();
    Ok(params.coin_difficulty() * sum)
}

/// Equal-difficulty form
/// `CoinD * sum_{n=0}^{L-1} 1 / (log2(n+1) + log2(StakRwd))`.
pub fn expected_time_lone_log_equal(
    params: &SystemParams,
    chain_length: u64,
) -> Result<f64, AnalyticsError> {
    if params.coin_difficulty() != params.stake_difficulty() {
        return Err(AnalyticsError::UnequalDifficulties {
            coin_difficulty: params.coin_difficulty(),
            stake_difficulty: params.stake_difficulty(),
        });
    }
    let model = AttackModel::new(params, chain_length)?;
    model.require_logarithmic()?;
    let sum: f64 = (0..chain_length)
        .map(|n| inner_sum_log(n, params.stake_reward(), 1.0))
        .sum();
    Ok(params.coin_difficulty() * sum)
}

/// Aggregate upper bound `(StakD / StakRwd^a) * sum_{n=0}^{L-1} (n+1)^(-a)`:
/// the expected time if the node only counted blocks clearing the stake
/// threshold.
pub fn upper_bound_lone_radical(model: &AttackModel) -> Result<f64, AnalyticsError> {
    let exponent = model.radical_exponent()?;
    let params = model.params();
    let prefactor = params.stake_difficulty() / params.stake_reward().powf(exponent);
    let sum: f64 = (0..model.chain_length())
        .map(|n| ((n + 1) as f64).powf(-exponent))
        .sum();
    Ok(prefactor * sum)
}

/// Aggregate upper bound `StakD * sum_{n=0}^{L-1} 1/(log2(n+1)+log2(StakRwd))`.
pub fn upper_bound_lone_log(model: &AttackModel) -> Result<f64, AnalyticsError> {
    model.require_logarithmic()?;
    let params = model.params();
    let log2_reward = params.stake_reward().log2();
    let sum: f64 = (0..model.chain_length())
        .map(|n| 1.0 / (((n + 1) as f64).log2() + log2_reward))
        .sum();
    Ok(params.stake_difficulty() * sum)
}

/// Expected lone-attacker time for any variant that has a closed form.
///
/// Constant and proof-of-work systems have stake-independent thresholds, so
/// the expected time is `chain_length * coin_difficulty` exactly. Linear and
/// proof-of-stake systems carry no closed form here; use the simulator.
pub fn expected_time_lone(
    params: &SystemParams,
    chain_length: u64,
) -> Result<f64, AnalyticsError> {
    if chain_length == 0 {
        return Err(AnalyticsError::ZeroChainLength);
    }
    match params.variant() {
        Variant::ProofOfWork | Variant::Constant => {
            flat_saturation_check(params)?;
            Ok(chain_length as f64 * params.coin_difficulty())
        }
        Variant::Radical { .. } => {
            expected_time_lone_radical(&AttackModel::new(params, chain_length)?)
        }
        Variant::Logarithmic => expected_time_lone_log(&AttackModel::new(params, chain_length)?),
        other @ (Variant::Linear | Variant::ProofOfStake) => {
            Err(AnalyticsError::NoClosedForm(other.name()))
        }
    }
}

/// Upper bound companion to [`expected_time_lone`]: the stake-threshold
/// waiting time for flat variants, the aggregate bounds otherwise.
pub fn upper_bound_lone(params: &SystemParams, chain_length: u64) -> Result<f64, AnalyticsError> {
    if chain_length == 0 {
        return Err(AnalyticsError::ZeroChainLength);
    }
    match params.variant() {
        Variant::ProofOfWork => {
            flat_saturation_check(params)?;
            Ok(chain_length as f64 * params.coin_difficulty())
        }
        Variant::Constant => {
            flat_saturation_check(params)?;
            Ok(chain_length as f64 * params.stake_difficulty())
        }
        Variant::Radical { .. } => {
            upper_bound_lone_radical(&AttackModel::new(params, chain_length)?)
        }
        Variant::Logarithmic => upper_bound_lone_log(&AttackModel::new(params, chain_length)?),
        other @ (Variant::Linear | Variant::ProofOfStake) => {
            Err(AnalyticsError::NoClosedForm(other.name()))
        }
    }
}

fn flat_saturation_check(params: &SystemParams) -> Result<(), AnalyticsError> {
    let threshold = params.coin_threshold(0.0, 0.0);
    if threshold > params.scale() {
        return Err(AnalyticsError::Saturated {
            threshold,
            scale: params.scale(),
            stake: 0.0,
        });
    }
    Ok(())
}
