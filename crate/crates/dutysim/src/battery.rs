//! Ideal single-use battery with exact integer accounting.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::Energy;

#[derive(Debug, Error, PartialEq, Eq)]
#[error("battery exhausted: requested {requested} with {remaining} remaining")]
pub struct Exhausted {
    pub requested: Energy,
    pub remaining: Energy,
}

/// Finite ideal battery. `remaining` never exceeds `capacity` and never
/// increases; a draw larger than what is left fails without taking anything.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Battery {
    capacity: Energy,
    remaining: Energy,
}

impl Battery {
    /// Default deliverable energy: 5 V × 3.5 Ah = 17.5 Wh.
    pub const DEFAULT_CAPACITY_UWH: u64 = 17_500_000;

    pub fn new(capacity: Energy) -> Self {
        Battery { capacity, remaining: capacity }
    }

    pub fn capacity(&self) -> Energy {
        self.capacity
    }

    pub fn remaining(&self) -> Energy {
        self.remaining
    }

    pub fn fraction(&self) -> f64 {
        if self.capacity == Energy::ZERO {
            0.0
        } else {
            self.remaining.uwh() as f64 / self.capacity.uwh() as f64
        }
    }

    /// Draws `amount` from the battery, or fails with `Exhausted` leaving the
    /// charge untouched.
    pub fn consume(&mut self, amount: Energy) -> Result<(), Exhausted> {
        match self.remaining.checked_sub(amount) {
            Some(left) => {
                self.remaining = left;
                Ok(())
            }
            None => Err(Exhausted { requested: amount, remaining: self.remaining }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consume_upload_from_full() {
        let mut b = Battery::new(Energy::from_uwh(17_500_000));
        b.consume(Energy::from_uwh(3_000)).unwrap();
        assert_eq!(b.remaining(), Energy::from_uwh(17_497_000));
    }

    #[test]
    fn zero_consume_is_identity() {
        let mut b = Battery::new(Energy::from_uwh(12345));
        b.consume(Energy::ZERO).unwrap();
        assert_eq!(b.remaining(), Energy::from_uwh(12345));
    }

    #[test]
    fn overdraw_is_exhausted_and_non_destructive() {
        let mut b = Battery::new(Energy::from_uwh(100));
        let err = b.consume(Energy::from_uwh(247)).unwrap_err();
        assert_eq!(err.remaining, Energy::from_uwh(100));
        assert_eq!(b.remaining(), Energy::from_uwh(100));
    }

    #[test]
    fn exact_boundary_drains_to_zero() {
        let mut b = Battery::new(Energy::from_uwh(50));
        b.consume(Energy::from_uwh(50)).unwrap();
        assert_eq!(b.remaining(), Energy::ZERO);
        assert!(b.consume(Energy::from_uwh(1)).is_err());
    }
}
