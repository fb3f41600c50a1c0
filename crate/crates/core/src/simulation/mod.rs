//! Stochastic mining engine: lone attackers, m-node parties, trial batches,
//! and attacker-versus-honest length races.
//!
//! Trials are independent and run in parallel; every trial derives its own
//! RNG substream from `(master_seed, trial_index)` and results are reduced in
//! trial order, so outputs are bit-identical regardless of thread count.

mod engine;
mod seeding;

pub use engine::{mine_lone_chain, mine_party_chain, LoneOutcome, PartyOutcome};
pub use seeding::trial_seed;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytics::StakeShareDistribution;
use crate::protocol::SystemParams;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("at least 2 trials are required (got {0})")]
    TooFewTrials(u64),
    #[error("chain_length must be at least 1")]
    ZeroChainLength,
    #[error("a party needs at least one node")]
    NoNodes,
    #[error("share distribution covers {dist} nodes but the party has {party}")]
    NodeCountMismatch { party: u32, dist: usize },
    #[error("initial block success probability is zero; mining cannot progress")]
    ZeroSuccessProbability,
    #[error("the race stop criterion must be positive")]
    InvalidStopRule,
}

/// How exogenous share vectors are refreshed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RedrawPolicy {
    /// One draw per chain (default).
    PerChain,
    /// A fresh draw before every block.
    PerBlock,
}

/// Where party nodes' stakes come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ShareMode {
    /// Node `i` holds `reward_count * x_i * stake_reward`, with the share
    /// vector drawn from `dist`. Matches the share-proportion model behind
    /// the party bounds.
    Exogenous {
        dist: StakeShareDistribution,
        redraw: RedrawPolicy,
    },
    /// Stakes follow the actual ledger: each node keeps what it mined.
    Endogenous,
}

/// A mining coalition: protocol parameters, node count, and share mode.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyConfig {
    params: SystemParams,
    node_count: u32,
    share_mode: ShareMode,
}

impl PartyConfig {
    pub fn new(
        params: SystemParams,
        node_count: u32,
        share_mode: ShareMode,
    ) -> Result<Self, SimError> {
        if node_count == 0 {
            return Err(SimError::NoNodes);
        }
        if let ShareMode::Exogenous { dist, .. } = &share_mode {
            if dist.node_count() != node_count as usize {
                return Err(SimError::NodeCountMismatch {
                    party: node_count,
                    dist: dist.node_count(),
                });
            }
        }
        if params.success_probabilities(0.0, 0.0).p_block <= 0.0 {
            return Err(SimError::ZeroSuccessProbability);
        }
        Ok(Self {
            params,
            node_count,
            share_mode,
        })
    }

    /// Single endogenous node; used as a race participant.
    pub fn solo(params: SystemParams) -> Result<Self, SimError> {
        Self::new(params, 1, ShareMode::Endogenous)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn node_count(&self) -> u32 {
        self.node_count
    }

    pub fn share_mode(&self) -> &ShareMode {
        &self.share_mode
    }
}

/// Sample statistics over per-trial elapsed times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub trials: u64,
    pub mean: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

impl TrialStats {
    /// Mean, standard error, and the 1.96-sigma interval of the samples.
    pub fn from_elapsed(samples: &[u64]) -> Result<Self, SimError> {
        let n = samples.len() as u64;
        if n < 2 {
            return Err(SimError::TooFewTrials(n));
        }
        let mean = samples.iter().map(|&x| x as f64).sum::<f64>() / n as f64;
        let variance = samples
            .iter()
            .map(|&x| {
                let d = x as f64 - mean;
                d * d
            })
            .sum::<f64>()
            / (n - 1) as f64;
        let std_error = (variance / n as f64).sqrt();
        Ok(Self {
            trials: n,
            mean,
            std_error,
            ci95_low: mean - 1.96 * std_error,
            ci95_high: mean + 1.96 * std_error,
        })
    }
}

/// What to mine in each trial.
#[derive(Debug, Clone, PartialEq)]
pub enum TrialJob {
    Lone(SystemParams),
    Party(PartyConfig),
}

/// One trial's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial: u64,
    pub elapsed: u64,
    pub stake_rewards: u64,
    pub capped: bool,
}

/// A full trial batch: per-trial records in trial order plus aggregate
/// statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub stats: TrialStats,
    pub records: Vec<TrialRecord>,
}

impl TrialRun {
    /// True when any trial ran with capped probabilities.
    pub fn any_capped(&self) -> bool {
        self.records.iter().any(|r| r.capped)
    }
}

/// Runs `trials` independent chain builds. Trial `t` is seeded from
/// `(master_seed, t)`; the result does not depend on scheduling or thread
/// count.
pub fn run_trials(
    job: &TrialJob,
    chain_length: u64,
    trials: u64,
    master_seed: u64,
) -> Result<TrialRun, SimError> {
    if trials < 2 {
        return Err(SimError::TooFewTrials(trials));
    }
    if chain_length == 0 {
        return Err(SimError::ZeroChainLength);
    }
    if let TrialJob::Lone(params) = job {
        if params.success_probabilities(0.0, 0.0).p_block <= 0.0 {
            return Err(SimError::ZeroSuccessProbability);
        }
    }
    let records: Vec<TrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, trial);
            let (elapsed, stake_rewards, capped) = match job {
                TrialJob::Lone(params) => {
                    let outcome = mine_lone_chain(params, chain_length, seed);
                    (outcome.elapsed, outcome.stake_rewards, outcome.capped)
                }
                TrialJob::Party(config) => {
                    let outcome = mine_party_chain(config, chain_length, seed);
                    (outcome.elapsed, outcome.stake_rewards, outcome.capped)
                }
            };
            TrialRecord {
                trial,
                elapsed,
                stake_rewards,
                capped,
            }
        })
        .collect();
    let elapsed: Vec<u64> = records.iter().map(|r| r.elapsed).collect();
    Ok(TrialRun {
        stats: TrialStats::from_elapsed(&elapsed)?,
        records,
    })
}

/// Race stop criterion; exactly one applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopRule {
    /// Mine both chains to this length and compare finish times.
    TargetLength(u64),
    /// Mine both chains for this many ticks and compare lengths.
    TimeHorizon(u64),
}

/// An attacker-versus-honest race. The two sides mine independent chains
/// from the same genesis under their own configurations; there is no block
/// withholding or publication strategy, just length competition.
#[derive(Debug, Clone, PartialEq)]
pub struct RaceConfig {
    honest: PartyConfig,
    attacker: PartyConfig,
    stop: StopRule,
    sample_stride: u64,
}

impl RaceConfig {
    /// `sample_stride` > 0 records per-trial length series every that many
    /// ticks; 0 disables series recording.
    pub fn new(
        honest: PartyConfig,
        attacker: PartyConfig,
        stop: StopRule,
        sample_stride: u64,
    ) -> Result<Self, SimError> {
        match stop {
            StopRule::TargetLength(0) | StopRule::TimeHorizon(0) => {
                return Err(SimError::InvalidStopRule)
            }
            _ => {}
        }
        Ok(Self {
            honest,
            attacker,
            stop,
            sample_stride,
        })
    }

    pub fn honest(&self) -> &PartyConfig {
        &self.honest
    }

    pub fn attacker(&self) -> &PartyConfig {
        &self.attacker
    }

    pub fn stop(&self) -> StopRule {
        self.stop
    }

    pub fn sample_stride(&self) -> u64 {
        self.sample_stride
    }
}

/// Chain lengths at one sampled tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RaceSample {
    pub tick: u64,
    pub honest_length: u64,
    pub attacker_length: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceTrialRecord {
    pub trial: u64,
    pub honest_length: u64,
    pub attacker_length: u64,
    /// Attacker strictly ahead at the stop point (finished first under a
    /// target length; strictly longer at the horizon).
    pub attacker_led: bool,
    /// Attacker was strictly ahead at any moment of the race.
    pub attacker_ever_led: bool,
    /// Stride-sampled leader-over-time series; empty when sampling is off.
    pub series: Vec<RaceSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceSummary {
    pub trials: u64,
    pub attacker_led_freq: f64,
    pub attacker_ever_led_freq: f64,
    pub tie_freq: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RaceReport {
    pub records: Vec<RaceTrialRecord>,
    pub summary: RaceSummary,
}

fn length_at(completions: &[u64], tick: u64) -> u64 {
    completions.partition_point(|&c| c <= tick) as u64
}

/// Strict attacker leadership at any completion event.
fn attacker_ever_leads(honest: &[u64], attacker: &[u64]) -> bool {
    let mut hi = 0usize;
    let mut ai = 0usize;
    while hi < honest.len() || ai < attacker.len() {
        let next_h = honest.get(hi).copied().unwrap_or(u64::MAX);
        let next_a = attacker.get(ai).copied().unwrap_or(u64::MAX);
        let tick = next_h.min(next_a);
        while hi < honest.len() && honest[hi] == tick {
            hi += 1;
        }
        while ai < attacker.len() && attacker[ai] == tick {
            ai += 1;
        }
        if ai > hi {
            return true;
        }
    }
    false
}

/// Runs `trials` independent races. Exploratory: there is no closed-form
/// reference for race outcomes, only the reported frequencies.
pub fn race(config: &RaceConfig, master_seed: u64, trials: u64) -> Result<RaceReport, SimError> {
    if trials == 0 {
        return Err(SimError::TooFewTrials(0));
    }
    let records: Vec<RaceTrialRecord> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(master_seed, trial);
            let mut honest_rng = seeding::stream_rng(seed, seeding::STREAM_HONEST);
            let mut attacker_rng = seeding::stream_rng(seed, seeding::STREAM_ATTACKER);
            let (max_blocks, max_ticks) = match config.stop {
                StopRule::TargetLength(length) => (Some(length), None),
                StopRule::TimeHorizon(horizon) => (None, Some(horizon)),
            };
            let honest =
                engine::mine_party_trace(&config.honest, &mut honest_rng, max_blocks, max_ticks);
            let attacker = engine::mine_party_trace(
                &config.attacker,
                &mut attacker_rng,
                max_blocks,
                max_ticks,
            );

            let honest_length = honest.completion_ticks.len() as u64;
            let attacker_length = attacker.completion_ticks.len() as u64;
            let attacker_led = match config.stop {
                StopRule::TargetLength(_) => {
                    let honest_finish = honest.completion_ticks.last().copied().unwrap_or(0);
                    let attacker_finish = attacker.completion_ticks.last().copied().unwrap_or(0);
                    attacker_finish < honest_finish
                }
                StopRule::TimeHorizon(_) => attacker_length > honest_length,
            };

            let end_tick = match config.stop {
                StopRule::TimeHorizon(horizon) => horizon,
                StopRule::TargetLength(_) => honest
                    .completion_ticks
                    .last()
                    .copied()
                    .unwrap_or(0)
                    .max(attacker.completion_ticks.last().copied().unwrap_or(0)),
            };
            let mut series = Vec::new();
            if config.sample_stride > 0 {
                let mut tick = config.sample_stride;
                while tick <= end_tick {
                    series.push(RaceSample {
                        tick,
                        honest_length: length_at(&honest.completion_ticks, tick),
                        attacker_length: length_at(&attacker.completion_ticks, tick),
                    });
                    tick += config.sample_stride;
                }
            }

            RaceTrialRecord {
                trial,
                honest_length,
                attacker_length,
                attacker_led,
                attacker_ever_led: attacker_ever_leads(
                    &honest.completion_ticks,
                    &attacker.completion_ticks,
                ),
                series,
            }
        })
        .collect();

    let led = records.iter().filter(|r| r.attacker_led).count() as f64;
    let ever = records.iter().filter(|r| r.attacker_ever_led).count() as f64;
    let ties = match config.stop {
        StopRule::TargetLength(_) => records
            .iter()
            .filter(|r| r.honest_length == r.attacker_length && !r.attacker_led)
            .count(),
        StopRule::TimeHorizon(_) => records
            .iter()
            .filter(|r| r.honest_length == r.attacker_length)
            .count(),
    } as f64;
    let n = trials as f64;
    let summary = RaceSummary {
        trials,
        attacker_led_freq: led / n,
        attacker_ever_led_freq: ever / n,
        tie_freq: ties / n,
    };
    Ok(RaceReport { records, summary })
}
