//! Experiment configuration: the TOML file schema, flag overrides, and
//! validation into fully resolved job plans.
//!
//! Configuration files are TOML with the tables `[system]`, `[run]`,
//! `[party]`, `[race]`, and `[verify]`; unknown keys are rejected. Flags
//! override file values. A resolved configuration can be emitted back as
//! TOML and reloads to an identical plan.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use stakesim_core::{
    GridSpec, PartyConfig, RaceConfig, RedrawPolicy, ShareMode, StakeShareDistribution, StopRule,
    SumIndexing, SystemParams, TrialJob, Variant,
};

pub const DEFAULT_TRIALS: u64 = 10_000;
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_KERNEL_K_MAX: u64 = 10_000;

/// A configuration or validation problem; exits with code 2.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobKind {
    Analytic,
    Simulate,
    Race,
    VerifyBounds,
}

impl JobKind {
    pub fn name(self) -> &'static str {
        match self {
            JobKind::Analytic => "analytic",
            JobKind::Simulate => "simulate",
            JobKind::Race => "race",
            JobKind::VerifyBounds => "verify-bounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariantKind {
    ProofOfWork,
    ProofOfStake,
    Constant,
    Linear,
    Radical,
    Logarithmic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShareModeKind {
    Exogenous,
    Endogenous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RedrawKind {
    PerChain,
    PerBlock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IndexingKind {
    Printed,
    Shifted,
}

impl From<IndexingKind> for SumIndexing {
    fn from(kind: IndexingKind) -> Self {
        match kind {
            IndexingKind::Printed => SumIndexing::Printed,
            IndexingKind::Shifted => SumIndexing::Shifted,
        }
    }
}

/// Top-level file schema.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub job: Option<JobKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemTable>,
    #[serde(default)]
    pub run: RunTable,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub party: Option<PartyTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub race: Option<RaceTable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verify: Option<VerifyTable>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    /// Emission half of the resolved-config round trip.
    #[allow(dead_code)]
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemTable {
    pub variant: VariantKind,
    pub scale: f64,
    pub coin_difficulty: f64,
    pub stake_difficulty: f64,
    #[serde(default)]
    pub coin_reward: f64,
    pub stake_reward: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
}

impl SystemTable {
    fn resolve(&self, key: &str) -> Result<SystemParams, ConfigError> {
        let variant = match self.variant {
            VariantKind::Radical => {
                let Some(exponent) = self.exponent else {
                    return err(format!("{key}.exponent: required for the radical variant"));
                };
                Variant::Radical { exponent }
            }
            other => {
                if self.exponent.is_some() {
                    return err(format!(
                        "{key}.exponent: only meaningful for the radical variant"
                    ));
                }
                match other {
                    VariantKind::ProofOfWork => Variant::ProofOfWork,
                    VariantKind::ProofOfStake => Variant::ProofOfStake,
                    VariantKind::Constant => Variant::Constant,
                    VariantKind::Linear => Variant::Linear,
                    VariantKind::Logarithmic => Variant::Logarithmic,
                    VariantKind::Radical => unreachable!(),
                }
            }
        };
        SystemParams::new(
            variant,
            self.scale,
            self.coin_difficulty,
            self.stake_difficulty,
            self.coin_reward,
            self.stake_reward,
        )
        .map_err(|e| ConfigError(format!("{key}: {e}")))
    }

    #[allow(dead_code)]
    pub fn from_params(params: &SystemParams) -> Self {
        let (variant, exponent) = match params.variant() {
            Variant::ProofOfWork => (VariantKind::ProofOfWork, None),
            Variant::ProofOfStake => (VariantKind::ProofOfStake, None),
            Variant::Constant => (VariantKind::Constant, None),
            Variant::Linear => (VariantKind::Linear, None),
            Variant::Radical { exponent } => (VariantKind::Radical, Some(exponent)),
            Variant::Logarithmic => (VariantKind::Logarithmic, None),
        };
        Self {
            variant,
            scale: params.scale(),
            coin_difficulty: params.coin_difficulty(),
            stake_difficulty: params.stake_difficulty(),
            coin_reward: params.coin_reward(),
            stake_reward: params.stake_reward(),
            exponent,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<OutputFormat>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SupportRow {
    pub shares: Vec<f64>,
    pub mass: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PartyTable {
    pub nodes: u32,
    pub mode: ShareModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redraw: Option<RedrawKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub support: Vec<SupportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sum_indexing: Option<IndexingKind>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SideTable {
    pub nodes: u32,
    pub mode: ShareModeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redraw: Option<RedrawKind>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub support: Vec<SupportRow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub system: Option<SystemTable>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RaceTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_length: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<u64>,
    pub honest: SideTable,
    pub attacker: SideTable,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyTable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponents: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub success_probs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stake_rewards: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_k_max: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration_c: Option<f64>,
}

/// Flag-level overrides of file values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub threads: Option<usize>,
    pub format: Option<OutputFormat>,
    pub out: Option<PathBuf>,
}

/// Concentration checks attached to a verify-bounds run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationPlan {
    pub params: SystemParams,
    pub dist: StakeShareDistribution,
    pub c: f64,
    pub kernel_k_max: u64,
}

/// A fully validated job.
#[derive(Debug, Clone, PartialEq)]
pub enum JobPlan {
    Analytic {
        params: SystemParams,
        lengths: Vec<u64>,
    },
    Simulate {
        job: TrialJob,
        chain_length: u64,
        trials: u64,
        master_seed: u64,
        indexing: SumIndexing,
    },
    Race {
        config: RaceConfig,
        trials: u64,
        master_seed: u64,
    },
    VerifyBounds {
        grid: GridSpec,
        concentration: Option<ConcentrationPlan>,
    },
}

/// Resolved experiment: the plan plus output disposition.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub job: JobKind,
    pub plan: JobPlan,
    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

fn build_distribution(support: &[SupportRow], key: &str) -> Result<StakeShareDistribution, ConfigError> {
    if support.is_empty() {
        return err(format!(
            "{key}: exogenous parties need at least one support row"
        ));
    }
    StakeShareDistribution::new(
        support
            .iter()
            .map(|row| (row.shares.clone(), row.mass))
            .collect(),
    )
    .map_err(|e| ConfigError(format!("{key}: {e}")))
}

fn build_share_mode(
    mode: ShareModeKind,
    redraw: Option<RedrawKind>,
    support: &[SupportRow],
    key: &str,
) -> Result<ShareMode, ConfigError> {
    match mode {
        ShareModeKind::Endogenous => {
            if !support.is_empty() {
                return err(format!(
                    "{key}.support: only meaningful for exogenous parties"
                ));
            }
            if redraw.is_some() {
                return err(format!(
                    "{key}.redraw: only meaningful for exogenous parties"
                ));
            }
            Ok(ShareMode::Endogenous)
        }
        ShareModeKind::Exogenous => {
            let dist = build_distribution(support, &format!("{key}.support"))?;
            let redraw = match redraw.unwrap_or(RedrawKind::PerChain) {
                RedrawKind::PerChain => RedrawPolicy::PerChain,
                RedrawKind::PerBlock => RedrawPolicy::PerBlock,
            };
            Ok(ShareMode::Exogenous { dist, redraw })
        }
    }
}

fn build_party(
    params: SystemParams,
    nodes: u32,
    mode: ShareModeKind,
    redraw: Option<RedrawKind>,
    support: &[SupportRow],
    key: &str,
) -> Result<PartyConfig, ConfigError> {
    let share_mode = build_share_mode(mode, redraw, support, key)?;
    PartyConfig::new(params, nodes, share_mode).map_err(|e| ConfigError(format!("{key}: {e}")))
}

/// Resolves a parsed file plus overrides into a validated experiment for the
/// subcommand `job` (the subcommand wins over a `job` key in the file).
pub fn resolve(
    job: JobKind,
    file: &ConfigFile,
    overrides: &Overrides,
) -> Result<ExperimentConfig, ConfigError> {
    let trials = overrides
        .trials
        .or(file.run.trials)
        .unwrap_or(DEFAULT_TRIALS);
    let master_seed = overrides.seed.or(file.run.seed).unwrap_or(DEFAULT_SEED);
    let format = overrides.format.or(file.run.format).unwrap_or_default();
    let out = overrides.out.clone().or_else(|| file.run.out.clone());
    let threads = overrides.threads.or(file.run.threads);

    let system = || -> Result<SystemParams, ConfigError> {
        match &file.system {
            Some(table) => table.resolve("system"),
            None => err(format!("system: required for {} jobs", job.name())),
        }
    };

    let plan = match job {
        JobKind::Analytic => {
            let params = system()?;
            let lengths = match (&file.run.lengths, file.run.chain_length) {
                (Some(lengths), _) => {
                    if lengths.is_empty() || lengths.iter().any(|&l| l == 0) {
                        return err("run.lengths: lengths must be positive");
                    }
                    lengths.clone()
                }
                (None, Some(length)) => {
                    if length == 0 {
                        return err("run.chain_length: must be at least 1");
                    }
                    (1..=length).collect()
                }
                (None, None) => {
                    return err("run.chain_length or run.lengths: required for analytic jobs")
                }
            };
            JobPlan::Analytic { params, lengths }
        }
        JobKind::Simulate => {
            let params = system()?;
            let Some(chain_length) = file.run.chain_length else {
                return err("run.chain_length: required for simulate jobs");
            };
            if chain_length == 0 {
                return err("run.chain_length: must be at least 1");
            }
            if trials < 2 {
                return err(format!("run.trials: at least 2 trials required (got {trials})"));
            }
            let (job, indexing) = match &file.party {
                Some(party) => {
                    let config = build_party(
                        params,
                        party.nodes,
                        party.mode,
                        party.redraw,
                        &party.support,
                        "party",
                    )?;
                    let indexing = party
                        .sum_indexing
                        .map(SumIndexing::from)
                        .unwrap_or_default();
                    (TrialJob::Party(config), indexing)
                }
                None => (TrialJob::Lone(params), SumIndexing::default()),
            };
            if let TrialJob::Lone(p) = &job {
                if p.success_probabilities(0.0, 0.0).p_block <= 0.0 {
                    return err("system: initial block success probability is zero");
                }
            }
            JobPlan::Simulate {
                job,
                chain_length,
                trials,
                master_seed,
                indexing,
            }
        }
        JobKind::Race => {
            let Some(race) = &file.race else {
                return err("race: required for race jobs");
            };
            if trials < 2 {
                return err(format!("run.trials: at least 2 trials required (got {trials})"));
            }
            let stop = match (race.target_length, race.horizon) {
                (Some(length), None) => StopRule::TargetLength(length),
                (None, Some(horizon)) => StopRule::TimeHorizon(horizon),
                (Some(_), Some(_)) => {
                    return err("race: set exactly one of target_length and horizon, not both")
                }
                (None, None) => return err("race: set exactly one of target_length and horizon"),
            };
            let side = |table: &SideTable, key: &str| -> Result<PartyConfig, ConfigError> {
                let params = match &table.system {
                    Some(system) => system.resolve(&format!("{key}.system"))?,
                    None => match &file.system {
                        Some(system) => system.resolve("system")?,
                        None => {
                            return err(format!(
                                "{key}.system: required (no top-level system to inherit)"
                            ))
                        }
                    },
                };
                build_party(params, table.nodes, table.mode, table.redraw, &table.support, key)
            };
            let honest = side(&race.honest, "race.honest")?;
            let attacker = side(&race.attacker, "race.attacker")?;
            let config = RaceConfig::new(honest, attacker, stop, race.sample_stride.unwrap_or(0))
                .map_err(|e| ConfigError(format!("race: {e}")))?;
            JobPlan::Race {
                config,
                trials,
                master_seed,
            }
        }
        JobKind::VerifyBounds => {
            let defaults = GridSpec::default();
            let table = file.verify.clone().unwrap_or_default();
            let grid = GridSpec {
                n_max: table.n_max.unwrap_or(defaults.n_max),
                exponents: table.exponents.unwrap_or(defaults.exponents),
                success_probs: table.success_probs.unwrap_or(defaults.success_probs),
                stake_rewards: table.stake_rewards.unwrap_or(defaults.stake_rewards),
                x_step: table.x_step.unwrap_or(defaults.x_step),
                k_max: table.k_max.unwrap_or(defaults.k_max),
                tolerance: table.tolerance.unwrap_or(defaults.tolerance),
            };
            if grid.exponents.iter().any(|a| !(a > &0.0 && a < &1.0)) {
                return err("verify.exponents: exponents must lie in (0, 1)");
            }
            if grid.success_probs.iter().any(|p| !(p > &0.0 && p <= &1.0)) {
                return err("verify.success_probs: probabilities must lie in (0, 1]");
            }
            if grid.stake_rewards.iter().any(|r| *r < 2.0) {
                return err("verify.stake_rewards: rewards must be at least 2");
            }
            if !(grid.x_step > 0.0 && grid.x_step <= 1.0) {
                return err("verify.x_step: must lie in (0, 1]");
            }
            let concentration = match table.concentration_c {
                None => None,
                Some(c) => {
                    let Some(party) = &file.party else {
                        return err(
                            "verify.concentration_c: needs a [party] table with exogenous support",
                        );
                    };
                    let dist = build_distribution(&party.support, "party.support")?;
                    if dist.node_count() != party.nodes as usize {
                        return err(format!(
                            "party.nodes: share vectors cover {} nodes but nodes = {}",
                            dist.node_count(),
                            party.nodes
                        ));
                    }
                    let params = system()?;
                    match params.variant() {
                        Variant::Radical { .. } | Variant::Logarithmic => {}
                        other => {
                            return err(format!(
                                "verify.concentration_c: needs a radical or logarithmic system \
                                 (got {})",
                                other.name()
                            ))
                        }
                    }
                    Some(ConcentrationPlan {
                        params,
                        dist,
                        c,
                        kernel_k_max: table.kernel_k_max.unwrap_or(DEFAULT_KERNEL_K_MAX),
                    })
                }
            };
            JobPlan::VerifyBounds {
                grid,
                concentration,
            }
        }
    };

    Ok(ExperimentConfig {
        job,
        plan,
        format,
        out,
        threads,
    })
}

impl ExperimentConfig {
    /// Emits the resolved form; reloading it yields an identical config.
    #[allow(dead_code)]
    pub fn to_file_dto(&self) -> ConfigFile {
        let mut file = ConfigFile {
            job: Some(self.job),
            ..ConfigFile::default()
        };
        file.run.threads = self.threads;
        file.run.format = Some(self.format);
        file.run.out = self.out.clone();

        match &self.plan {
            JobPlan::Analytic { params, lengths } => {
                file.system = Some(SystemTable::from_params(params));
                file.run.lengths = Some(lengths.clone());
            }
            JobPlan::Simulate {
                job,
                chain_length,
                trials,
                master_seed,
                indexing,
            } => {
                file.run.chain_length = Some(*chain_length);
                file.run.trials = Some(*trials);
                file.run.seed = Some(*master_seed);
                match job {
                    TrialJob::Lone(params) => {
                        file.system = Some(SystemTable::from_params(params));
                    }
                    TrialJob::Party(config) => {
                        file.system = Some(SystemTable::from_params(config.params()));
                        file.party = Some(party_table(config, Some(*indexing)));
                    }
                }
            }
            JobPlan::Race {
                config,
                trials,
                master_seed,
            } => {
                file.run.trials = Some(*trials);
                file.run.seed = Some(*master_seed);
                let (target_length, horizon) = match config.stop() {
                    StopRule::TargetLength(length) => (Some(length), None),
                    StopRule::TimeHorizon(horizon) => (None, Some(horizon)),
                };
                file.race = Some(RaceTable {
                    target_length,
                    horizon,
                    sample_stride: Some(config.sample_stride()),
                    honest: side_table(config.honest()),
                    attacker: side_table(config.attacker()),
                });
            }
            JobPlan::VerifyBounds {
                grid,
                concentration,
            } => {
                file.verify = Some(VerifyTable {
                    n_max: Some(grid.n_max),
                    exponents: Some(grid.exponents.clone()),
                    success_probs: Some(grid.success_probs.clone()),
                    stake_rewards: Some(grid.stake_rewards.clone()),
                    x_step: Some(grid.x_step),
                    k_max: Some(grid.k_max),
                    tolerance: Some(grid.tolerance),
                    kernel_k_max: concentration.as_ref().map(|c| c.kernel_k_max),
                    concentration_c: concentration.as_ref().map(|c| c.c),
                });
                if let Some(plan) = concentration {
                    file.system = Some(SystemTable::from_params(&plan.params));
                    file.party = Some(PartyTable {
                        nodes: plan.dist.node_count() as u32,
                        mode: ShareModeKind::Exogenous,
                        redraw: None,
                        support: support_rows(&plan.dist),
                        sum_indexing: None,
                    });
                }
            }
        }
        file
    }
}

#[allow(dead_code)]
fn support_rows(dist: &StakeShareDistribution) -> Vec<SupportRow> {
    dist.support()
        .map(|(shares, mass)| SupportRow {
            shares: shares.to_vec(),
            mass,
        })
        .collect()
}

#[allow(dead_code)]
fn share_mode_fields(mode: &ShareMode) -> (ShareModeKind, Option<RedrawKind>, Vec<SupportRow>) {
    match mode {
        ShareMode::Endogenous => (ShareModeKind::Endogenous, None, Vec::new()),
        ShareMode::Exogenous { dist, redraw } => (
            ShareModeKind::Exogenous,
            Some(match redraw {
                RedrawPolicy::PerChain => RedrawKind::PerChain,
                RedrawPolicy::PerBlock => RedrawKind::PerBlock,
            }),
            support_rows(dist),
        ),
    }
}

#[allow(dead_code)]
fn party_table(config: &PartyConfig, indexing: Option<SumIndexing>) -> PartyTable {
    let (mode, redraw, support) = share_mode_fields(config.share_mode());
    PartyTable {
        nodes: config.node_count(),
        mode,
        redraw,
        support,
        sum_indexing: indexing.map(|i| match i {
            SumIndexing::Printed => IndexingKind::Printed,
            SumIndexing::Shifted => IndexingKind::Shifted,
        }),
    }
}

#[allow(dead_code)]
fn side_table(config: &PartyConfig) -> SideTable {
    let (mode, redraw, support) = share_mode_fields(config.share_mode());
    SideTable {
        nodes: config.node_count(),
        mode,
        redraw,
        support,
        system: Some(SystemTable::from_params(config.params())),
    }
}
