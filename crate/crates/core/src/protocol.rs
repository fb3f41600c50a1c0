//! Protocol parameters, threshold rules, and the block/ledger model.
//!
//! A stake system issues coins for every valid block and additionally issues
//! stakes when the block hash clears a second, smaller threshold. Both
//! thresholds are functions of the creator's current holdings; the variants
//! differ only in that function. Hashing itself is modeled probabilistically:
//! an attempt draws uniformly from `[0, scale)` and succeeds when the draw is
//! at most the threshold, so success probability is `threshold / scale`
//! capped at 1.

use std::collections::HashMap;

use thiserror::Error;

/// Threshold schedule selector.
///
/// `ProofOfWork` and `ProofOfStake` are single-threshold reference systems
/// (one difficulty, coins only); the remaining variants are dual-threshold
/// stake systems.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Variant {
    ProofOfWork,
    ProofOfStake,
    Constant,
    Linear,
    /// Thresholds proportional to `(stake_reward + stake)^exponent` with
    /// `0 < exponent < 1`.
    Radical { exponent: f64 },
    /// Thresholds proportional to `log2(stake_reward + stake)`; requires
    /// `stake_reward >= 2` so the threshold stays positive at zero stake.
    Logarithmic,
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::ProofOfWork => "proof-of-work",
            Variant::ProofOfStake => "proof-of-stake",
            Variant::Constant => "constant",
            Variant::Linear => "linear",
            Variant::Radical { .. } => "radical",
            Variant::Logarithmic => "logarithmic",
        }
    }

    /// Single-threshold systems use one difficulty and award coins only.
    pub fn is_single_threshold(&self) -> bool {
        matches!(self, Variant::ProofOfWork | Variant::ProofOfStake)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamsError {
    #[error("scale must be positive and finite (got {0})")]
    Scale(f64),
    #[error("coin_difficulty must be positive and finite (got {0})")]
    CoinDifficulty(f64),
    #[error("stake_difficulty must be positive and finite (got {0})")]
    StakeDifficulty(f64),
    #[error("stake_difficulty >= coin_difficulty violated ({stake_difficulty} < {coin_difficulty})")]
    DifficultyOrder {
        coin_difficulty: f64,
        stake_difficulty: f64,
    },
    #[error("coin_reward must be nonnegative and finite (got {0})")]
    CoinReward(f64),
    #[error("stake_reward must be positive and finite (got {0})")]
    StakeReward(f64),
    #[error("radical exponent must lie strictly in (0, 1) (got {0})")]
    Exponent(f64),
    #[error("logarithmic variant requires stake_reward >= 2 (got {0})")]
    LogStakeReward(f64),
}

/// Success probabilities of a single mining attempt at a given holding state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuccessProbabilities {
    /// Probability the attempt produces a valid block.
    pub p_block: f64,
    /// Probability a produced block also earns the stake reward.
    pub p_stake_given_block: f64,
    /// True when a threshold exceeds the hash scale; probabilities are then
    /// capped and the closed-form analytics no longer apply.
    pub capped: bool,
}

/// Validated protocol constants: hash scale, difficulties, rewards, and the
/// threshold variant. Immutable once constructed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    variant: Variant,
    scale: f64,
    coin_difficulty: f64,
    stake_difficulty: f64,
    coin_reward: f64,
    stake_reward: f64,
}

impl SystemParams {
    pub fn new(
        variant: Variant,
        scale: f64,
        coin_difficulty: f64,
        stake_difficulty: f64,
        coin_reward: f64,
        stake_reward: f64,
    ) -> Result<Self, ParamsError> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(ParamsError::Scale(scale));
        }
        if !(coin_difficulty.is_finite() && coin_difficulty > 0.0) {
            return Err(ParamsError::CoinDifficulty(coin_difficulty));
        }
        if !(stake_difficulty.is_finite() && stake_difficulty > 0.0) {
            return Err(ParamsError::StakeDifficulty(stake_difficulty));
        }
        if stake_difficulty < coin_difficulty {
            return Err(ParamsError::DifficultyOrder {
                coin_difficulty,
                stake_difficulty,
            });
        }
        if !(coin_reward.is_finite() && coin_reward >= 0.0) {
            return Err(ParamsError::CoinReward(coin_reward));
        }
        if !(stake_reward.is_finite() && stake_reward > 0.0) {
            return Err(ParamsError::StakeReward(stake_reward));
        }
        match variant {
            Variant::Radical { exponent } => {
                if !(exponent.is_finite() && exponent > 0.0 && exponent < 1.0) {
                    return Err(ParamsError::Exponent(exponent));
                }
            }
            Variant::Logarithmic => {
                if stake_reward < 2.0 {
                    return Err(ParamsError::LogStakeReward(stake_reward));
                }
            }
            _ => {}
        }
        Ok(Self {
            variant,
            scale,
            coin_difficulty,
            stake_difficulty,
            coin_reward,
            stake_reward,
        })
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn coin_difficulty(&self) -> f64 {
        self.coin_difficulty
    }

    pub fn stake_difficulty(&self) -> f64 {
        self.stake_difficulty
    }

    pub fn coin_reward(&self) -> f64 {
        self.coin_reward
    }

    pub fn stake_reward(&self) -> f64 {
        self.stake_reward
    }

    /// The probability `p` that a freshly mined block also earns a stake
    /// reward: the ratio of coin difficulty to stake difficulty for
    /// dual-threshold variants, and 1 for single-threshold variants.
    pub fn stake_reward_ratio(&self) -> f64 {
        if self.variant.is_single_threshold() {
            1.0
        } else {
            self.coin_difficulty / self.stake_difficulty
        }
    }

    fn threshold_numerator(&self, stake: f64, balance: f64) -> f64 {
        match self.variant {
            Variant::ProofOfWork | Variant::Constant => self.scale,
            Variant::ProofOfStake => self.scale * (balance + self.coin_reward),
            Variant::Linear => self.scale * (stake + self.stake_reward),
            Variant::Radical { exponent } => {
                self.scale * (self.stake_reward + stake).powf(exponent)
            }
            Variant::Logarithmic => self.scale * (self.stake_reward + stake).log2(),
        }
    }

    /// Hash bound a block must meet to be valid (and earn the coin reward).
    /// May exceed `scale`; capping happens in [`Self::success_probabilities`].
    pub fn coin_threshold(&self, stake: f64, balance: f64) -> f64 {
        self.threshold_numerator(stake, balance) / self.coin_difficulty
    }

    /// Hash bound that additionally earns the stake reward. Equal to the coin
    /// threshold for single-threshold variants, otherwise majored by it.
    pub fn stake_threshold(&self, stake: f64, balance: f64) -> f64 {
        if self.variant.is_single_threshold() {
            self.coin_threshold(stake, balance)
        } else {
            self.threshold_numerator(stake, balance) / self.stake_difficulty
        }
    }

    pub fn success_probabilities(&self, stake: f64, balance: f64) -> SuccessProbabilities {
        let coin = self.coin_threshold(stake, balance);
        let stake_t = self.stake_threshold(stake, balance);
        let p_block = (coin / self.scale).min(1.0);
        // The thresholds share their numerator, so the conditional reward
        // probability min(1, stake_t / coin) is the difficulty ratio itself;
        // computing it directly keeps it exact instead of one double
        // division away from it.
        let p_stake_given_block = if coin <= 0.0 {
            0.0
        } else {
            self.stake_reward_ratio()
        };
        SuccessProbabilities {
            p_block,
            p_stake_given_block,
            capped: coin > self.scale || stake_t > self.scale,
        }
    }
}

/// Node identifier within a simulated system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub u32);

/// Reference to the block a new block chains after.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParentRef {
    Genesis,
    Block { height: u64 },
}

impl ParentRef {
    pub fn height(&self) -> u64 {
        match self {
            ParentRef::Genesis => 0,
            ParentRef::Block { height } => *height,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    creator: NodeId,
    height: u64,
    parent: ParentRef,
    stake_rewarded: bool,
}

impl Block {
    /// Builds a block chained after `parent`; the height is the parent height
    /// plus one (genesis sits at height 0).
    pub fn new(creator: NodeId, parent: ParentRef, stake_rewarded: bool) -> Self {
        Self {
            creator,
            height: parent.height() + 1,
            parent,
            stake_rewarded,
        }
    }

    pub fn creator(&self) -> NodeId {
        self.creator
    }

    pub fn height(&self) -> u64 {
        self.height
    }

    pub fn parent(&self) -> ParentRef {
        self.parent
    }

    pub fn stake_rewarded(&self) -> bool {
        self.stake_rewarded
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChainError {
    #[error("block parent height {parent_height} does not match chain tip {tip_height}")]
    ParentMismatch { parent_height: u64, tip_height: u64 },
}

/// A single parent-linked path of blocks starting at genesis. The length
/// counts non-genesis blocks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Chain {
    blocks: Vec<Block>,
}

impl Chain {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> u64 {
        self.blocks.len() as u64
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Height of the tip block; 0 when the chain holds only genesis.
    pub fn tip_height(&self) -> u64 {
        self.len()
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn push(&mut self, block: Block) -> Result<(), ChainError> {
        if block.parent().height() != self.tip_height() {
            return Err(ChainError::ParentMismatch {
                parent_height: block.parent().height(),
                tip_height: self.tip_height(),
            });
        }
        self.blocks.push(block);
        Ok(())
    }

    /// Appends a freshly built block on the current tip.
    pub fn append(&mut self, creator: NodeId, stake_rewarded: bool) -> &Block {
        let parent = if self.is_empty() {
            ParentRef::Genesis
        } else {
            ParentRef::Block {
                height: self.tip_height(),
            }
        };
        self.blocks.push(Block::new(creator, parent, stake_rewarded));
        self.blocks.last().expect("just pushed")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("block height {got} does not match the ledger replay position {expected}")]
    HeightMismatch { expected: u64, got: u64 },
}

/// Per-node stake and coin balances obtained by replaying a chain from
/// genesis. All rewards are credited to block creators; stake transfers are
/// disabled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LedgerState {
    stakes: HashMap<NodeId, f64>,
    balances: HashMap<NodeId, f64>,
    applied: u64,
}

impl LedgerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn stake_of(&self, node: NodeId) -> f64 {
        self.stakes.get(&node).copied().unwrap_or(0.0)
    }

    pub fn balance_of(&self, node: NodeId) -> f64 {
        self.balances.get(&node).copied().unwrap_or(0.0)
    }

    /// Height of the last applied block.
    pub fn applied_height(&self) -> u64 {
        self.applied
    }

    fn apply_unchecked(&mut self, block: &Block, params: &SystemParams) {
        *self.balances.entry(block.creator()).or_insert(0.0) += params.coin_reward();
        if block.stake_rewarded() {
            *self.stakes.entry(block.creator()).or_insert(0.0) += params.stake_reward();
        }
        self.applied = block.height();
    }

    /// Credits the block creator and returns the advanced ledger. The block
    /// must sit directly on the replay position.
    pub fn apply_block(mut self, block: &Block, params: &SystemParams) -> Result<Self, LedgerError> {
        if block.height() != self.applied + 1 {
            return Err(LedgerError::HeightMismatch {
                expected: self.applied + 1,
                got: block.height(),
            });
        }
        self.apply_unchecked(block, params);
        Ok(self)
    }

    /// Replays a whole chain from genesis. Chain construction guarantees
    /// sequential heights, so this cannot fail.
    pub fn replay(chain: &Chain, params: &SystemParams) -> Self {
        let mut ledger = Self::new();
        for block in chain.blocks() {
            ledger.apply_unchecked(block, params);
        }
        ledger
    }

    /// Stake-transfer hook. Transfers are disabled in this version (the
    /// expected-time results assume nodes conduct no stake transactions), so
    /// the call has no effect on any balance.
    pub fn transfer_stakes(&mut self, _from: NodeId, _to: NodeId, _amount: f64) {}
}
