#!/usr/bin/env python3
"""Smoke test for the dutysim_py extension module.

Build and place the module next to this script first:

    cargo build -p dutysim-py --features extension-module --release
    cp target/release/libdutysim_py.so python/dutysim_py.so

Then run: python3 python/smoke_test.py
"""

import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import dutysim_py as ds


def main():
    # Zero anomaly ratio has a closed form: 17,500,000 / 247 µWh per hour.
    cfg = ds.SimConfig(anomaly_ratio=0.0)
    for policy in ("static", "dynamic"):
        r = ds.simulate(cfg, policy)
        assert r.battery_life_hours == 70850, (policy, r.battery_life_hours)

    # Ledger accounts for every µWh drawn.
    cfg = ds.SimConfig(anomaly_ratio=0.2, battery_capacity_uwh=500_000, seed=7)
    r = ds.simulate(cfg, "dynamic")
    spent = sum(r.ledger().values())
    assert spent <= 500_000, spent
    # The aborted final iteration may have sampled before dying.
    assert r.counts()["samples"] - r.completed_iterations in (0, 1)

    # Same config, same result.
    again = ds.simulate(cfg, "dynamic")
    assert again.battery_life_hours == r.battery_life_hours

    # Training emits a fixed 816-byte table image usable for simulation.
    train_cfg = ds.SimConfig(
        anomaly_ratio=0.2, battery_capacity_uwh=875_000, seed=1, train_episodes=50
    )
    table = ds.train(train_cfg)
    assert len(table) == 816, len(table)
    auto = ds.simulate(cfg, "autonomous", table)
    assert auto.policy == "autonomous" and auto.battery_life_hours > 0

    # The autonomous policy refuses to run without a table.
    try:
        ds.simulate(cfg, "autonomous")
    except ValueError:
        pass
    else:
        raise AssertionError("expected ValueError without a Q-table")

    # Deterministic named streams.
    assert ds.uniform_draws(42, 5) == ds.uniform_draws(42, 5)
    acc, energy = ds.retrain_outcome(35, 9)
    assert 0.86 <= acc <= 0.90, acc
    assert energy == 556 * 35

    hp = ds.default_hyperparams()
    assert hp["alpha"] == 0.2 and hp["epsilon"] == 1.0

    print("smoke test passed:", r, "->", auto)


if __name__ == "__main__":
    main()
