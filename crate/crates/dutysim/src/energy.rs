//! Energy quantities and the per-action energy table.
//!
//! All energy is carried as integer microwatt-hours so that ledger
//! bookkeeping stays exact over the full life of a battery.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Non-negative energy in microwatt-hours (µWh).
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Energy(u64);

impl Energy {
    pub const ZERO: Energy = Energy(0);

    pub const fn from_uwh(uwh: u64) -> Self {
        Energy(uwh)
    }

    pub const fn from_mwh(mwh: u64) -> Self {
        Energy(mwh * 1000)
    }

    pub const fn uwh(self) -> u64 {
        self.0
    }

    pub fn as_mwh(self) -> f64 {
        self.0 as f64 / 1000.0
    }

    pub fn checked_sub(self, rhs: Energy) -> Option<Energy> {
        self.0.checked_sub(rhs.0).map(Energy)
    }

    pub fn saturating_mul(self, n: u64) -> Energy {
        Energy(self.0.saturating_mul(n))
    }
}

impl Add for Energy {
    type Output = Energy;
    fn add(self, rhs: Energy) -> Energy {
        Energy(self.0 + rhs.0)
    }
}

impl AddAssign for Energy {
    fn add_assign(&mut self, rhs: Energy) {
        self.0 += rhs.0;
    }
}

impl Sum for Energy {
    fn sum<I: Iterator<Item = Energy>>(iter: I) -> Energy {
        iter.fold(Energy::ZERO, Add::add)
    }
}

impl fmt::Display for Energy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} µWh", self.0)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EnergyTableError {
    #[error("energy table entry `{0}` must be strictly positive")]
    NonPositive(&'static str),
    #[error("energy table ordering violated: {0}")]
    Ordering(&'static str),
}

/// Per-state/action energy costs driving the simulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyTable {
    /// Sleep cost charged once per sampling iteration.
    pub sleep_per_iteration: Energy,
    pub image_capture: Energy,
    pub infer: Energy,
    pub upload: Energy,
    pub train_per_image: Energy,
}

impl Default for EnergyTable {
    fn default() -> Self {
        EnergyTable {
            sleep_per_iteration: Energy::from_uwh(50),
            image_capture: Energy::from_uwh(180),
            infer: Energy::from_uwh(17),
            upload: Energy::from_uwh(3000),
            train_per_image: Energy::from_uwh(556),
        }
    }
}

impl EnergyTable {
    /// Rejects tables that break the cost ordering the policies rely on:
    /// uploads and per-image training must dominate capture and inference.
    pub fn validate(&self) -> Result<(), EnergyTableError> {
        let entries = [
            (self.sleep_per_iteration, "sleep_per_iteration"),
            (self.image_capture, "image_capture"),
            (self.infer, "infer"),
            (self.upload, "upload"),
            (self.train_per_image, "train_per_image"),
        ];
        for (e, name) in entries {
            if e == Energy::ZERO {
                return Err(EnergyTableError::NonPositive(name));
            }
        }
        if self.upload <= self.image_capture {
            return Err(EnergyTableError::Ordering("upload must exceed image_capture"));
        }
        if self.upload <= self.infer {
            return Err(EnergyTableError::Ordering("upload must exceed infer"));
        }
        if self.train_per_image <= self.infer {
            return Err(EnergyTableError::Ordering("train_per_image must exceed infer"));
        }
        Ok(())
    }

    /// Baseline cost of one anomaly-free sampling iteration.
    pub fn idle_iteration(&self) -> Energy {
        self.sleep_per_iteration + self.image_capture + self.infer
    }
}
