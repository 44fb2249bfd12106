//! Property tests for the simulator's structural invariants.

use proptest::prelude::*;

use dutysim::retrain::{accuracy_center, accuracy_half_width};
use dutysim::{
    run_episode, simulate_retrain, Action, Energy, EnergyTable, PolicyKind, QTable, RandomStream,
    SimConfig, StateBins, StreamId,
};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Every µWh drawn from the battery lands in exactly one ledger slot.
    #[test]
    fn ledger_conserves_battery_capacity(
        ratio in 0.0f64..=1.0,
        seed in any::<u64>(),
        capacity in 10_000u64..2_000_000,
    ) {
        let mut cfg = SimConfig::default();
        cfg.anomaly_ratio = ratio;
        cfg.seed = seed;
        cfg.battery_capacity = Energy::from_uwh(capacity);
        for kind in [PolicyKind::Static, PolicyKind::Dynamic] {
            let r = run_episode(&cfg, kind, None);
            prop_assert_eq!(r.ledger.total() + r.remaining, cfg.battery_capacity);
        }
    }

    #[test]
    fn qtable_bytes_roundtrip(values in proptest::collection::vec(-1e6f32..1e6, 200)) {
        let mut t = QTable::zeroed();
        let mut i = 0;
        for b in 0..10 {
            for c in 0..10 {
                let s = StateBins { battery_bin: b, count_bin: c };
                t.set(s, Action::Continue, values[i]);
                t.set(s, Action::Retrain, values[i + 1]);
                i += 2;
            }
        }
        let restored = QTable::from_bytes(&t.to_bytes()).unwrap();
        prop_assert_eq!(restored, t);
    }

    #[test]
    fn retrain_accuracy_within_envelope(n in 1u32..=255, seed in any::<u64>()) {
        let table = EnergyTable::default();
        let mut stream = RandomStream::new(seed, StreamId::Retrain);
        let o = simulate_retrain(n, &table, &mut stream).unwrap();
        let lo = (accuracy_center(n) - accuracy_half_width(n)).clamp(0.0, 1.0);
        let hi = (accuracy_center(n) + accuracy_half_width(n)).clamp(0.0, 1.0);
        prop_assert!(o.v_accuracy >= lo - 1e-12 && o.v_accuracy <= hi + 1e-12);
        prop_assert_eq!(o.e_consumed.uwh(), 556 * n as u64);
    }
}

#[test]
fn qtable_file_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.bin");
    let mut t = QTable::zeroed();
    t.set(StateBins { battery_bin: 3, count_bin: 7 }, Action::Retrain, -42.5);
    t.save(&path).unwrap();
    assert_eq!(std::fs::metadata(&path).unwrap().len(), 816);
    assert_eq!(QTable::load(&path).unwrap(), t);
}
