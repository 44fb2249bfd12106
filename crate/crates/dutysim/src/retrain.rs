//! Stochastic model of on-device retraining.
//!
//! Validation accuracy follows a logistic curve in the dataset size with a
//! uniform noise band that shrinks geometrically as more samples are used;
//! energy cost is linear in the number of images.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{Energy, EnergyTable};
use crate::rng::RandomStream;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("retraining requires at least one sample (got {0})")]
pub struct InvalidSampleCount(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetrainOutcome {
    /// Simulated post-retrain validation accuracy, clamped to [0, 1].
    pub v_accuracy: f64,
    /// Energy spent: train_per_image × n_samples, charged even on failure.
    pub e_consumed: Energy,
    pub n_samples: u32,
}

/// Noise-free accuracy for a dataset of `n` images.
pub fn accuracy_center(n: u32) -> f64 {
    let n = n as f64;
    1.0 / (1.0 + (-0.6 * n.ln()).exp()) - 0.4 / n
}

/// Half-width of the accuracy noise band for a dataset of `n` images.
pub fn accuracy_half_width(n: u32) -> f64 {
    0.1 * 0.95f64.powi(n as i32)
}

/// Simulates one retraining attempt. Consumes exactly one draw from the
/// retrain stream.
pub fn simulate_retrain(
    n_samples: u32,
    table: &EnergyTable,
    stream: &mut RandomStream,
) -> Result<RetrainOutcome, InvalidSampleCount> {
    if n_samples < 1 {
        return Err(InvalidSampleCount(n_samples));
    }
    let r = stream.uniform();
    let offset = ((2.0 * r - 1.0) / 10.0) * 0.95f64.powi(n_samples as i32);
    let result = accuracy_center(n_samples) - offset;
    Ok(RetrainOutcome {
        v_accuracy: result.clamp(0.0, 1.0),
        e_consumed: table.train_per_image.saturating_mul(n_samples as u64),
        n_samples,
    })
}
