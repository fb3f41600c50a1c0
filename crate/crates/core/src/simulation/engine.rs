//! Mining engines.
//!
//! The lone engine draws inter-block times directly from the geometric
//! distribution on `{1, 2, ...}`. The party engine walks individual ticks:
//! every active node makes one attempt per tick, the block goes to the first
//! successful node, and simultaneous successes are broken uniformly at
//! random. Success probabilities only move at block boundaries, so they are
//! computed once per block.

use rand::Rng;

use crate::protocol::{Block, LedgerState, NodeId, ParentRef, SuccessProbabilities, SystemParams};

use super::{PartyConfig, RedrawPolicy, ShareMode};

/// Time to first success of repeated Bernoulli(`p`) attempts, support
/// `{1, 2, ...}`, sampled by inversion. `p` must be positive.
pub(crate) fn sample_geometric<R: Rng>(rng: &mut R, p: f64) -> u64 {
    assert!(p > 0.0, "geometric sampling needs a positive success probability");
    if p >= 1.0 {
        return 1;
    }
    let u: f64 = rng.random();
    let ratio = (1.0 - u).ln() / (1.0 - p).ln();
    1u64.saturating_add(ratio as u64)
}

fn parent_ref(height: u64) -> ParentRef {
    if height == 0 {
        ParentRef::Genesis
    } else {
        ParentRef::Block { height }
    }
}

/// Full record of one lone-miner chain build.
#[derive(Debug, Clone, PartialEq)]
pub struct LoneOutcome {
    /// Total hash attempts spent.
    pub elapsed: u64,
    /// Attempts spent on each block, in mining order.
    pub per_block_times: Vec<u64>,
    /// Miner stake after each block.
    pub stake_trajectory: Vec<f64>,
    /// Number of stake-rewarded blocks.
    pub stake_rewards: u64,
    /// True when any block was mined with capped probabilities.
    pub capped: bool,
}

/// Mines a chain of `chain_length` blocks with a single node. Each block
/// takes Geometric(p_block) attempts at the node's current holdings and earns
/// the stake reward with probability `p_stake_given_block`; the ledger is
/// advanced by replaying the freshly built block. Deterministic given `seed`.
///
/// Panics if the initial block success probability is zero (thresholds are
/// nondecreasing in holdings, so a positive start stays positive).
pub fn mine_lone_chain(params: &SystemParams, chain_length: u64, seed: u64) -> LoneOutcome {
    let mut rng = super::seeding::stream_rng(seed, super::seeding::STREAM_LONE);
    mine_lone_with(params, chain_length, &mut rng)
}

pub(crate) fn mine_lone_with<R: Rng>(
    params: &SystemParams,
    chain_length: u64,
    rng: &mut R,
) -> LoneOutcome {
    let node = NodeId(0);
    let mut ledger = LedgerState::new();
    let mut outcome = LoneOutcome {
        elapsed: 0,
        per_block_times: Vec::with_capacity(chain_length as usize),
        stake_trajectory: Vec::with_capacity(chain_length as usize),
        stake_rewards: 0,
        capped: false,
    };
    for height in 0..chain_length {
        let probs = params.success_probabilities(ledger.stake_of(node), ledger.balance_of(node));
        outcome.capped |= probs.capped;
        let time = sample_geometric(rng, probs.p_block);
        let rewarded = rng.random::<f64>() < probs.p_stake_given_block;
        let block = Block::new(node, parent_ref(height), rewarded);
        ledger = ledger
            .apply_block(&block, params)
            .expect("blocks are built on the replay position");
        outcome.elapsed += time;
        outcome.per_block_times.push(time);
        outcome.stake_trajectory.push(ledger.stake_of(node));
        outcome.stake_rewards += u64::from(rewarded);
    }
    outcome
}

/// Full record of one party chain build. Time is counted in ticks (one
/// attempt per node per tick), not total attempts.
#[derive(Debug, Clone, PartialEq)]
pub struct PartyOutcome {
    pub elapsed: u64,
    pub per_block_times: Vec<u64>,
    /// Party-wide stake-reward count after each block.
    pub reward_count_trajectory: Vec<u64>,
    pub stake_rewards: u64,
    pub capped: bool,
}

/// Low-level trace shared by the chain and race drivers: cumulative
/// completion ticks per block plus reward flags.
#[derive(Debug, Clone, Default)]
pub(crate) struct PartyTrace {
    pub completion_ticks: Vec<u64>,
    pub rewarded: Vec<bool>,
    pub capped: bool,
}

/// Runs the party tick loop until `max_blocks` blocks are built or the tick
/// counter reaches `max_ticks`, whichever comes first.
pub(crate) fn mine_party_trace<R: Rng>(
    config: &PartyConfig,
    rng: &mut R,
    max_blocks: Option<u64>,
    max_ticks: Option<u64>,
) -> PartyTrace {
    let params = config.params();
    let node_count = config.node_count();
    let mut ledger = LedgerState::new();
    let mut reward_count: u64 = 0;
    let mut trace = PartyTrace::default();

    let (dist, redraw_each_block) = match config.share_mode() {
        ShareMode::Exogenous { dist, redraw } => {
            (Some(dist), *redraw == RedrawPolicy::PerBlock)
        }
        ShareMode::Endogenous => (None, false),
    };
    let mut shares: Option<Vec<f64>> =
        dist.map(|d| d.shares_at(d.sample_index(rng.random())).to_vec());

    let mut ticks: u64 = 0;
    let mut height: u64 = 0;
    let mut attempts: Vec<(u32, SuccessProbabilities)> = Vec::with_capacity(node_count as usize);
    let mut winners: Vec<usize> = Vec::with_capacity(node_count as usize);

    'blocks: loop {
        if let Some(max) = max_blocks {
            if height >= max {
                break;
            }
        }
        if redraw_each_block {
            let d = dist.expect("redraw implies an exogenous distribution");
            shares = Some(d.shares_at(d.sample_index(rng.random())).to_vec());
        }

        // Per-node success probabilities for this block. Under exogenous
        // shares, node i holds reward_count * x_i * stake_reward; nodes with
        // a zero share hold nothing and sit the block out, which keeps a
        // point mass on a unit vector identical to the lone miner.
        attempts.clear();
        for node in 0..node_count {
            let stake = match &shares {
                Some(x) => {
                    if x[node as usize] == 0.0 {
                        continue;
                    }
                    reward_count as f64 * x[node as usize] * params.stake_reward()
                }
                None => ledger.stake_of(NodeId(node)),
            };
            let probs = params.success_probabilities(stake, ledger.balance_of(NodeId(node)));
            trace.capped |= probs.capped;
            attempts.push((node, probs));
        }

        let (winner, winner_probs) = loop {
            if let Some(max) = max_ticks {
                if ticks >= max {
                    break 'blocks;
                }
            }
            ticks += 1;
            winners.clear();
            for (index, (_, probs)) in attempts.iter().enumerate() {
                if rng.random::<f64>() < probs.p_block {
                    winners.push(index);
                }
            }
            let pick = match winners.len() {
                0 => continue,
                1 => winners[0],
                _ => winners[rng.random_range(0..winners.len())],
            };
            break attempts[pick];
        };

        let rewarded = rng.random::<f64>() < winner_probs.p_stake_given_block;
        let block = Block::new(NodeId(winner), parent_ref(height), rewarded);
        ledger = ledger
            .apply_block(&block, params)
            .expect("blocks are built on the replay position");
        height += 1;
        reward_count += u64::from(rewarded);
        trace.completion_ticks.push(ticks);
        trace.rewarded.push(rewarded);
    }
    trace
}

/// Mines a party chain of `chain_length` blocks. Deterministic given `seed`.
pub fn mine_party_chain(config: &PartyConfig, chain_length: u64, seed: u64) -> PartyOutcome {
    let mut rng = super::seeding::stream_rng(seed, super::seeding::STREAM_PARTY);
    let trace = mine_party_trace(config, &mut rng, Some(chain_length), None);
    party_outcome(trace)
}

pub(crate) fn party_outcome(trace: PartyTrace) -> PartyOutcome {
    let mut per_block_times = Vec::with_capacity(trace.completion_ticks.len());
    let mut previous = 0u64;
    for &tick in &trace.completion_ticks {
        per_block_times.push(tick - previous);
        previous = tick;
    }
    let mut reward_count_trajectory = Vec::with_capacity(trace.rewarded.len());
    let mut count = 0u64;
    for &rewarded in &trace.rewarded {
        count += u64::from(rewarded);
        reward_count_trajectory.push(count);
    }
    PartyOutcome {
        elapsed: trace.completion_ticks.last().copied().unwrap_or(0),
        per_block_times,
        reward_count_trajectory,
        stake_rewards: count,
        capped: trace.capped,
    }
}
