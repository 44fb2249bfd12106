//! Tabular Q-value storage with a fixed 800-byte payload.
//!
//! The state space is the discretized (battery fraction, classified-image
//! count) pair: 10 × 10 bins × 2 actions × 4-byte entries = 800 B. The
//! on-disk format adds a 16-byte header for exactly 816 bytes per file.

use std::io::{self, Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::rng::RandomStream;

pub const BATTERY_BINS: usize = 10;
pub const COUNT_BINS: usize = 10;
pub const ACTIONS: usize = 2;
pub const ENTRY_COUNT: usize = BATTERY_BINS * COUNT_BINS * ACTIONS;
pub const PAYLOAD_BYTES: usize = ENTRY_COUNT * 4;
pub const HEADER_BYTES: usize = 16;
pub const FILE_BYTES: usize = HEADER_BYTES + PAYLOAD_BYTES;

const MAGIC: [u8; 4] = *b"QTBL";
const VERSION: u16 = 1;

/// Action index inside the table. `Continue` is index 0 and wins ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Continue = 0,
    Retrain = 1,
}

impl Action {
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Action {
        if i == 0 { Action::Continue } else { Action::Retrain }
    }
}

/// Discretized policy-visible state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateBins {
    pub battery_bin: usize,
    pub count_bin: usize,
}

/// Maps the continuous node state onto table bins.
pub fn discretize(battery_fraction: f64, n_classified: u32) -> StateBins {
    let battery_bin = ((battery_fraction * 10.0).floor() as i64).clamp(0, 9) as usize;
    let count_bin = ((n_classified / 5) as usize).min(COUNT_BINS - 1);
    StateBins { battery_bin, count_bin }
}

#[derive(Debug, Error)]
pub enum QTableFileError {
    #[error("io error: {0}")]
    Io(#[from] io::Error),
    #[error("bad magic bytes (not a Q-table file)")]
    BadMagic,
    #[error("unsupported Q-table version {0}")]
    BadVersion(u16),
    #[error("unexpected table geometry {0}x{1}x{2} entries of {3} bytes")]
    BadGeometry(u8, u8, u8, u8),
}

/// Dense 10×10×2 table of f32 Q-values, battery-bin major.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    values: [f32; ENTRY_COUNT],
}

impl Default for QTable {
    fn default() -> Self {
        Self::zeroed()
    }
}

impl QTable {
    pub fn zeroed() -> Self {
        QTable { values: [0.0; ENTRY_COUNT] }
    }

    /// Table with every entry set to `v`, e.g. a pessimistic prior for
    /// training so unexplored states never look attractive.
    pub fn filled(v: f32) -> Self {
        QTable { values: [v; ENTRY_COUNT] }
    }

    fn offset(s: StateBins, a: Action) -> usize {
        (s.battery_bin * COUNT_BINS + s.count_bin) * ACTIONS + a.index()
    }

    pub fn get(&self, s: StateBins, a: Action) -> f32 {
        self.values[Self::offset(s, a)]
    }

    pub fn set(&mut self, s: StateBins, a: Action, v: f32) {
        self.values[Self::offset(s, a)] = v;
    }

    /// Greedy action with ties broken toward `Continue`.
    pub fn argmax(&self, s: StateBins) -> Action {
        if self.get(s, Action::Retrain) > self.get(s, Action::Continue) {
            Action::Retrain
        } else {
            Action::Continue
        }
    }

    pub fn max_value(&self, s: StateBins) -> f32 {
        self.get(s, Action::Continue).max(self.get(s, Action::Retrain))
    }

    /// Fraction of states with at least one entry that moved off `baseline`
    /// (the value the table was initialized with).
    pub fn visited_fraction(&self, baseline: f32) -> f64 {
        let visited = self
            .values
            .chunks_exact(ACTIONS)
            .filter(|pair| pair.iter().any(|&v| v != baseline))
            .count();
        visited as f64 / (BATTERY_BINS * COUNT_BINS) as f64
    }

    pub fn payload_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(PAYLOAD_BYTES);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(FILE_BYTES);
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(BATTERY_BINS as u8);
        out.push(COUNT_BINS as u8);
        out.push(ACTIONS as u8);
        out.push(4); // entry size
        out.extend_from_slice(&[0u8; 6]);
        out.extend(self.payload_bytes());
        debug_assert_eq!(out.len(), FILE_BYTES);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self, QTableFileError> {
        if bytes.len() != FILE_BYTES {
            return Err(QTableFileError::Io(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("expected {FILE_BYTES} bytes, got {}", bytes.len()),
            )));
        }
        if bytes[0..4] != MAGIC {
            return Err(QTableFileError::BadMagic);
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != VERSION {
            return Err(QTableFileError::BadVersion(version));
        }
        let (bb, cb, na, es) = (bytes[6], bytes[7], bytes[8], bytes[9]);
        if (bb as usize, cb as usize, na as usize, es) != (BATTERY_BINS, COUNT_BINS, ACTIONS, 4) {
            return Err(QTableFileError::BadGeometry(bb, cb, na, es));
        }
        let mut values = [0.0f32; ENTRY_COUNT];
        for (i, chunk) in bytes[HEADER_BYTES..].chunks_exact(4).enumerate() {
            values[i] = f32::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(QTable { values })
    }

    pub fn save(&self, path: &Path) -> Result<(), QTableFileError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, QTableFileError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::from_bytes(&bytes)
    }
}

/// Decayed epsilon-greedy selection. With probability `epsilon` a uniform
/// random action is taken; otherwise the greedy one. `epsilon == 0` consumes
/// no draws from the stream.
pub fn q_select(
    table: &QTable,
    s: StateBins,
    epsilon: f64,
    stream: &mut RandomStream,
) -> Action {
    if epsilon > 0.0 && stream.uniform() < epsilon {
        if stream.uniform() < 0.5 {
            Action::Continue
        } else {
            Action::Retrain
        }
    } else {
        table.argmax(s)
    }
}

/// One temporal-difference update. `next` is `None` on a terminal
/// transition, where the bootstrap term drops out.
pub fn q_update(
    table: &mut QTable,
    s: StateBins,
    a: Action,
    reward: f64,
    next: Option<StateBins>,
    alpha: f64,
    gamma: f64,
) {
    let bootstrap = next.map_or(0.0, |sn| gamma * table.max_value(sn) as f64);
    let old = table.get(s, a) as f64;
    let updated = old + alpha * (reward + bootstrap - old);
    table.set(s, a, updated as f32);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;

    #[test]
    fn footprint_is_exact() {
        let t = QTable::zeroed();
        assert_eq!(ENTRY_COUNT, 200);
        assert_eq!(t.payload_bytes().len(), 800);
        assert_eq!(t.to_bytes().len(), 816);
    }

    #[test]
    fn roundtrip_preserves_values() {
        let mut t = QTable::zeroed();
        t.set(StateBins { battery_bin: 3, count_bin: 7 }, Action::Retrain, -1.5);
        t.set(StateBins { battery_bin: 9, count_bin: 0 }, Action::Continue, 2.25);
        let back = QTable::from_bytes(&t.to_bytes()).unwrap();
        assert_eq!(t, back);
    }

    #[test]
    fn corrupt_files_rejected() {
        let mut bytes = QTable::zeroed().to_bytes();
        bytes[0] = b'X';
        assert!(matches!(QTable::from_bytes(&bytes), Err(QTableFileError::BadMagic)));
        assert!(QTable::from_bytes(&bytes[..100]).is_err());
    }

    #[test]
    fn discretize_boundaries() {
        assert_eq!(discretize(1.0, 0), StateBins { battery_bin: 9, count_bin: 0 });
        assert_eq!(discretize(0.0, 0).battery_bin, 0);
        assert_eq!(discretize(0.5, 50).count_bin, 9);
        assert_eq!(discretize(0.5, 24).count_bin, 4);
        assert_eq!(discretize(0.5, 25).count_bin, 5);
        assert_eq!(discretize(0.999, 255).battery_bin, 9);
    }

    #[test]
    fn greedy_select_and_tie_break() {
        let mut t = QTable::zeroed();
        let s = StateBins { battery_bin: 1, count_bin: 1 };
        let mut stream = RandomStream::new(1, StreamId::Exploration);
        // Equal values tie toward Continue.
        assert_eq!(q_select(&t, s, 0.0, &mut stream), Action::Continue);
        t.set(s, Action::Continue, 1.0);
        t.set(s, Action::Retrain, 2.0);
        assert_eq!(q_select(&t, s, 0.0, &mut stream), Action::Retrain);
    }

    #[test]
    fn zero_epsilon_consumes_no_draws() {
        let t = QTable::zeroed();
        let s = StateBins { battery_bin: 0, count_bin: 0 };
        let mut a = RandomStream::new(3, StreamId::Exploration);
        let mut b = RandomStream::new(3, StreamId::Exploration);
        q_select(&t, s, 0.0, &mut a);
        assert_eq!(a.next_u64(), b.next_u64());
    }

    #[test]
    fn full_epsilon_is_uniform_over_actions() {
        let t = QTable::zeroed();
        let s = StateBins { battery_bin: 0, count_bin: 0 };
        let mut stream = RandomStream::new(11, StreamId::Exploration);
        let n = 100_000;
        let retrains = (0..n)
            .filter(|_| q_select(&t, s, 1.0, &mut stream) == Action::Retrain)
            .count();
        let fraction = retrains as f64 / n as f64;
        assert!((fraction - 0.5).abs() < 0.01, "fraction = {fraction}");
    }

    #[test]
    fn update_formula() {
        let mut t = QTable::zeroed();
        let s = StateBins { battery_bin: 2, count_bin: 2 };
        let s2 = StateBins { battery_bin: 2, count_bin: 3 };
        q_update(&mut t, s, Action::Retrain, 1.0, Some(s2), 0.2, 0.95);
        assert!((t.get(s, Action::Retrain) - 0.2).abs() < 1e-7);
        // Zero learning rate leaves the table unchanged.
        let before = t.clone();
        q_update(&mut t, s, Action::Continue, -5.0, Some(s2), 0.0, 0.95);
        assert_eq!(t, before);
    }

    #[test]
    fn argmax_invariant_under_positive_scaling() {
        let mut t = QTable::zeroed();
        for b in 0..BATTERY_BINS {
            for c in 0..COUNT_BINS {
                let s = StateBins { battery_bin: b, count_bin: c };
                t.set(s, Action::Continue, (b as f32) - 4.0);
                t.set(s, Action::Retrain, (c as f32) - 4.5);
            }
        }
        let mut scaled = t.clone();
        for v in scaled.values.iter_mut() {
            *v *= 3.25;
        }
        for b in 0..BATTERY_BINS {
            for c in 0..COUNT_BINS {
                let s = StateBins { battery_bin: b, count_bin: c };
                assert_eq!(t.argmax(s), scaled.argmax(s));
            }
        }
    }
}
