//! Shared fixtures for the benchmark targets.

use stakesim_core::{SystemParams, Variant};

pub fn radical_params(coin_difficulty: f64, stake_difficulty: f64) -> SystemParams {
    SystemParams::new(
        Variant::Radical { exponent: 0.5 },
        1e9,
        coin_difficulty,
        stake_difficulty,
        0.0,
        16.0,
    )
    .expect("valid benchmark parameters")
}

pub fn log_params(coin_difficulty: f64, stake_difficulty: f64) -> SystemParams {
    SystemParams::new(
        Variant::Logarithmic,
        1e9,
        coin_difficulty,
        stake_difficulty,
        0.0,
        16.0,
    )
    .expect("valid benchmark parameters")
}
