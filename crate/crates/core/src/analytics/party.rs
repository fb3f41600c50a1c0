//! Stake-share distributions for m-node parties and the party expected-time
//! bounds built on them.

use super::sums::{inner_sum_log, inner_sum_radical};
use super::{AnalyticsError, AttackModel, MASS_TOLERANCE};

/// Finite-support probability mass function over stake-share vectors
/// `(x_1, ..., x_m)` with `x_i >= 0` and `sum x_i = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct StakeShareDistribution {
    node_count: usize,
    support: Vec<(Vec<f64>, f64)>,
}

impl StakeShareDistribution {
    pub fn new(support: Vec<(Vec<f64>, f64)>) -> Result<Self, AnalyticsError> {
        let Some((first, _)) = support.first() else {
            return Err(AnalyticsError::EmptySupport);
        };
        let node_count = first.len();
        if node_count < 2 {
            return Err(AnalyticsError::TooFewNodes(node_count));
        }
        let mut mass_sum = 0.0;
        for (index, (shares, mass)) in support.iter().enumerate() {
            if shares.len() != node_count {
                return Err(AnalyticsError::ShareVectorLength {
                    index,
                    got: shares.len(),
                    expected: node_count,
                });
            }
            if shares.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return Err(AnalyticsError::InvalidShare { index });
            }
            let sum: f64 = shares.iter().sum();
            if (sum - 1.0).abs() > MASS_TOLERANCE {
                return Err(AnalyticsError::ShareSum { index, sum });
            }
            if !mass.is_finite() || *mass <= 0.0 {
                return Err(AnalyticsError::InvalidMass {
                    index,
                    mass: *mass,
                });
            }
            mass_sum += mass;
        }
        if (mass_sum - 1.0).abs() > MASS_TOLERANCE {
            return Err(AnalyticsError::MassSum(mass_sum));
        }
        Ok(Self {
            node_count,
            support,
        })
    }

    /// Distribution concentrated on a single share vector.
    pub fn point_mass(shares: Vec<f64>) -> Result<Self, AnalyticsError> {
        Self::new(vec![(shares, 1.0)])
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn support(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.support.iter().map(|(shares, mass)| (shares.as_slice(), *mass))
    }

    /// Index of the support vector selected by the uniform draw `u` in
    /// `[0, 1)`, via cumulative-mass inversion.
    pub fn sample_index(&self, u: f64) -> usize {
        let mut acc = 0.0;
        for (index, (_, mass)) in self.support.iter().enumerate() {
            acc += mass;
            if u < acc {
                return index;
            }
        }
        self.support.len() - 1
    }

    pub fn shares_at(&self, index: usize) -> &[f64] {
        &self.support[index].0
    }
}

/// Outer index range of the party-bound sums.
///
/// The bound statements sum over `n = 1..=L`; the lone-attacker forms sum
/// over `n = 0..=L-1`. `Printed` follows the bound statements exactly,
/// `Shifted` aligns with the lone forms for consistency experiments.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SumIndexing {
    #[default]
    Printed,
    Shifted,
}

impl SumIndexing {
    fn outer_range(self, chain_length: u64) -> std::ops::Range<u64> {
        match self {
            SumIndexing::Printed => 1..chain_length + 1,
            SumIndexing::Shifted => 0..chain_length,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SumIndexing::Printed => "printed",
            SumIndexing::Shifted => "shifted",
        }
    }
}

/// `E[(sum_i X_i^exponent)^(-1)]` over the share distribution.
pub fn inv_power_sum_expectation(dist: &StakeShareDistribution, exponent: f64) -> f64 {
    assert!(
        exponent > 0.0 && exponent < 1.0,
        "exponent must lie in (0, 1), got {exponent}"
    );
    dist.support()
        .map(|(shares, mass)| {
            let denom: f64 = shares.iter().map(|x| x.powf(exponent)).sum();
            // A share vector summing to 1 has sum_i x_i^a >= 1 for a < 1.
            assert!(denom > 1e-15, "degenerate power sum {denom}");
            mass / denom
        })
        .sum()
}

/// `E[(sum_i log2(1 + X_i))^(-1)]` over the share distribution.
pub fn inv_log_sum_expectation(dist: &StakeShareDistribution) -> f64 {
    dist.support()
        .map(|(shares, mass)| {
            let denom: f64 = shares.iter().map(|x| (1.0 + x).log2()).sum();
            // Bounded below by log2(1 + sum x_i) = 1.
            assert!(denom > 1e-15, "degenerate log sum {denom}");
            mass / denom
        })
        .sum()
}

/// Expected-time upper bound for an m-node party in a radical system:
/// `E[(sum X_i^a)^(-1)] * (CoinD / StakRwd^a) * sum_n inner_sum_radical(n, a, p)`
/// with the outer range chosen by `indexing`.
pub fn party_bound_radical(
    model: &AttackModel,
    dist: &StakeShareDistribution,
    indexing: SumIndexing,
) -> Result<f64, AnalyticsError> {
    let exponent = model.radical_exponent()?;
    let params = model.params();
    let expectation = inv_power_sum_expectation(dist, exponent);
    let prefactor = params.coin_difficulty() / params.stake_reward().powf(exponent);
    let sum: f64 = indexing
        .outer_range(model.chain_length())
        .map(|n| inner_sum_radical(n, exponent, model.p()))
        .sum();
    Ok(expectation * prefactor * sum)
}

/// Logarithmic counterpart:
/// `CoinD * E[(sum log2(1+X_i))^(-1)] * sum_n inner_sum_log(n, StakRwd, p)`.
pub fn party_bound_log(
    model: &AttackModel,
    dist: &StakeShareDistribution,
    indexing: SumIndexing,
) -> Result<f64, AnalyticsError> {
    model.require_logarithmic()?;
    let params = model.params();
    let expectation = inv_log_sum_expectation(dist);
    let sum: f64 = indexing
        .outer_range(model.chain_length())
        .map(|n| inner_sum_log(n, params.stake_reward(), model.p()))
        .sum();
    Ok(expectation * params.coin_difficulty() * sum)
}
