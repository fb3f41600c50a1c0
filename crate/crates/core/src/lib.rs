//! Model library for dual-threshold block-chain stake systems.
//!
//! A stake system rewards every valid block with coins and, when the block
//! hash also clears a second stake-issue threshold, with stakes. Thresholds
//! that grow sublinearly in the creator's stake (power-law or logarithmic)
//! penalize stake concentration, which is what makes rebuilding a long chain
//! alone expensive. This crate provides:
//!
//! - [`protocol`]: validated parameters, threshold functions for all
//!   variants, and the block/ledger model;
//! - [`analytics`]: closed-form expected chain-build times, their upper
//!   bounds, party (coalition) bounds, and concentration checks;
//! - [`verification`]: grid verification of the inequalities behind the
//!   bounds;
//! - [`simulation`]: a deterministic, parallel Monte Carlo miner for lone
//!   nodes, coalitions, and attacker-versus-honest races.

pub mod analytics;
pub mod protocol;
pub mod simulation;
pub mod verification;

pub use analytics::{
    concentration_check_log, concentration_check_radical, expected_time_lone,
    expected_time_lone_log, expected_time_lone_log_equal, expected_time_lone_radical,
    expected_time_lone_radical_equal, inner_bound_log, inner_bound_radical, inner_sum_log,
    inner_sum_radical, inv_log_sum_expectation, inv_power_sum_expectation, party_bound_log,
    party_bound_radical, upper_bound_lone, upper_bound_lone_log, upper_bound_lone_radical,
    AnalyticsError, AttackModel, StakeShareDistribution, SumIndexing,
};
pub use protocol::{
    Block, Chain, ChainError, LedgerError, LedgerState, NodeId, ParamsError, ParentRef,
    SuccessProbabilities, SystemParams, Variant,
};
pub use simulation::{
    mine_lone_chain, mine_party_chain, race, run_trials, trial_seed, LoneOutcome, PartyConfig,
    PartyOutcome, RaceConfig, RaceReport, RaceSample, RaceSummary, RaceTrialRecord, RedrawPolicy,
    ShareMode, SimError, StopRule, TrialJob, TrialRecord, TrialRun, TrialStats,
};
pub use verification::{
    linear_share_rows, log_bound_rows, log_product_rows, radical_bound_rows, standard_rows,
    CheckRow, GridSpec,
};
