//! Anomaly sample stream and the onboard classification budget.

use crate::rng::RandomStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleKind {
    Normal,
    Anomaly,
}

/// Bernoulli anomaly source. One draw is consumed per sample regardless of
/// outcome so the sequence stays aligned across policies with different
/// action histories.
#[derive(Debug)]
pub struct AnomalyStream {
    ratio: f64,
    stream: RandomStream,
}

impl AnomalyStream {
    pub fn new(ratio: f64, stream: RandomStream) -> Self {
        debug_assert!((0.0..=1.0).contains(&ratio));
        AnomalyStream { ratio, stream }
    }

    pub fn next_sample(&mut self) -> SampleKind {
        if self.stream.uniform() < self.ratio {
            SampleKind::Anomaly
        } else {
            SampleKind::Normal
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Disposition {
    /// The onboard model recognizes the anomaly; no upload needed.
    Onboard,
    /// Budget spent; the anomaly must be uploaded for server classification.
    Unknown,
}

/// Number of anomalies the onboard model can still identify before the next
/// one is treated as unknown. Replenished only by a successful retrain.
#[derive(Debug, Clone, Copy)]
pub struct ClassificationBudget {
    remaining: u32,
    reset_value: u32,
}

impl ClassificationBudget {
    /// Starts empty: the freshly deployed model recognizes nothing yet.
    pub fn new(reset_value: u32) -> Self {
        ClassificationBudget { remaining: 0, reset_value }
    }

    pub fn remaining(&self) -> u32 {
        self.remaining
    }

    pub fn classify_anomaly(&mut self) -> Disposition {
        if self.remaining > 0 {
            self.remaining -= 1;
            Disposition::Onboard
        } else {
            Disposition::Unknown
        }
    }

    pub fn replenish(&mut self) {
        self.remaining = self.reset_value;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamId;

    fn env(ratio: f64, seed: u64) -> AnomalyStream {
        AnomalyStream::new(ratio, RandomStream::new(seed, StreamId::Environment))
    }

    #[test]
    fn degenerate_ratios() {
        let mut always_normal = env(0.0, 1);
        let mut always_anomaly = env(1.0, 1);
        for _ in 0..1000 {
            assert_eq!(always_normal.next_sample(), SampleKind::Normal);
            assert_eq!(always_anomaly.next_sample(), SampleKind::Anomaly);
        }
    }

    #[test]
    fn empirical_fraction_tracks_ratio() {
        let mut e = env(0.05, 99);
        let n = 100_000;
        let anomalies = (0..n)
            .filter(|_| e.next_sample() == SampleKind::Anomaly)
            .count();
        let fraction = anomalies as f64 / n as f64;
        assert!((fraction - 0.05).abs() < 0.005, "fraction = {fraction}");
    }

    #[test]
    fn budget_counts_down_then_unknown() {
        let mut b = ClassificationBudget::new(50);
        assert_eq!(b.classify_anomaly(), Disposition::Unknown);
        b.replenish();
        for i in 0..50 {
            assert_eq!(b.classify_anomaly(), Disposition::Onboard, "i = {i}");
        }
        assert_eq!(b.classify_anomaly(), Disposition::Unknown);
    }

    #[test]
    fn budget_decrement_by_one() {
        let mut b = ClassificationBudget::new(50);
        b.replenish();
        b.classify_anomaly();
        b.classify_anomaly();
        b.classify_anomaly();
        assert_eq!(b.remaining(), 47);
    }
}
