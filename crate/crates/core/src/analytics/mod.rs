//! Closed-form expected times, bounds, and expectation functionals for the
//! radical and logarithmic stake systems.
//!
//! Every function here is pure and deterministic. Inputs are validated at
//! construction ([`AttackModel`], [`StakeShareDistribution`]); the evaluation
//! paths themselves cannot fail once the inputs exist.

mod concentration;
mod lone;
mod party;
mod sums;

pub use concentration::{
    concentration_check_log, concentration_check_radical, ConcentrationReport, KernelPoint,
    KernelViolation, LogConcentrationReport,
};
pub use lone::{
    expected_time_lone, expected_time_lone_log, expected_time_lone_log_equal,
    expected_time_lone_radical, expected_time_lone_radical_equal, upper_bound_lone,
    upper_bound_lone_log, upper_bound_lone_radical,
};
pub use party::{
    inv_log_sum_expectation, inv_power_sum_expectation, party_bound_log, party_bound_radical,
    StakeShareDistribution, SumIndexing,
};
pub use sums::{inner_bound_log, inner_bound_radical, inner_sum_log, inner_sum_radical};

use thiserror::Error;

use crate::protocol::{SystemParams, Variant};

/// Absolute tolerance on share-vector and mass normalization.
pub const MASS_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticsError {
    #[error("expected-time forms require a radical or logarithmic variant (got {0})")]
    UnsupportedVariant(&'static str),
    #[error("no closed-form expected time is available for the {0} variant")]
    NoClosedForm(&'static str),
    #[error("chain_length must be at least 1")]
    ZeroChainLength,
    #[error(
        "coin-issue threshold {threshold} exceeds the hash scale {scale} at stake {stake}; \
         closed forms do not apply in the saturated regime"
    )]
    Saturated {
        threshold: f64,
        scale: f64,
        stake: f64,
    },
    #[error("this form requires coin_difficulty == stake_difficulty (got {coin_difficulty} and {stake_difficulty})")]
    UnequalDifficulties {
        coin_difficulty: f64,
        stake_difficulty: f64,
    },
    #[error("share distribution needs at least 2 nodes (got {0})")]
    TooFewNodes(usize),
    #[error("share distribution support must not be empty")]
    EmptySupport,
    #[error("share vector {index} has {got} coordinates, expected {expected}")]
    ShareVectorLength {
        index: usize,
        got: usize,
        expected: usize,
    },
    #[error("share vector {index} coordinates must be nonnegative and finite")]
    InvalidShare { index: usize },
    #[error("share vector {index} must sum to 1 within 1e-12 (got {sum})")]
    ShareSum { index: usize, sum: f64 },
    #[error("support masses must be positive and finite (mass {mass} at index {index})")]
    InvalidMass { index: usize, mass: f64 },
    #[error("support masses must sum to 1 within 1e-12 (got {0})")]
    MassSum(f64),
    #[error("concentration factor must satisfy 1 < c <= {max} for {nodes} nodes (got {c})")]
    ConcentrationFactorRange { c: f64, nodes: usize, max: f64 },
    #[error("the logarithmic concentration check requires more than 2 nodes (got {0})")]
    ConcentrationNodeCount(usize),
    #[error("stake_reward must be at least 2 for logarithmic forms (got {0})")]
    StakeRewardRange(f64),
}

/// A lone-attacker scenario: radical or logarithmic parameters plus a target
/// chain length, with the stake-reward probability `p` and `q = 1 - p`
/// derived once. Construction rejects regimes where the coin threshold would
/// saturate the hash scale anywhere on the reachable stake range
/// `[0, chain_length * stake_reward]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackModel {
    params: SystemParams,
    chain_length: u64,
    p: f64,
    q: f64,
}

impl AttackModel {
    pub fn new(params: &SystemParams, chain_length: u64) -> Result<Self, AnalyticsError> {
        match params.variant() {
            Variant::Radical { .. } | Variant::Logarithmic => {}
            other => return Err(AnalyticsError::UnsupportedVariant(other.name())),
        }
        if chain_length == 0 {
            return Err(AnalyticsError::ZeroChainLength);
        }
        let max_stake = chain_length as f64 * params.stake_reward();
        let threshold = params.coin_threshold(max_stake, 0.0);
        if threshold > params.scale() {
            return Err(AnalyticsError::Saturated {
                threshold,
                scale: params.scale(),
                stake: max_stake,
            });
        }
        let p = params.stake_reward_ratio();
        Ok(Self {
            params: *params,
            chain_length,
            p,
            q: 1.0 - p,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn chain_length(&self) -> u64 {
        self.chain_length
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub(crate) fn radical_exponent(&self) -> Result<f64, AnalyticsError> {
        match self.params.variant() {
            Variant::Radical { exponent } => Ok(exponent),
            other => Err(AnalyticsError::UnsupportedVariant(other.name())),
        }
    }

    pub(crate) fn require_logarithmic(&self) -> Result<(), AnalyticsError> {
        match self.params.variant() {
            Variant::Logarithmic => Ok(()),
            other => Err(AnalyticsError::UnsupportedVariant(other.name())),
        }
    }
}
