//! Deterministic battery-life simulator for a TinyML image-anomaly-detection
//! IoT node, benchmarking static, dynamic, and Q-learning duty-cycle
//! optimization policies.

pub mod battery;
pub mod config;
pub mod energy;
pub mod environment;
pub mod policy;
pub mod qtable;
pub mod report;
pub mod retrain;
pub mod rng;
pub mod sim;

pub use battery::{Battery, Exhausted};
pub use energy::{Energy, EnergyTable};
pub use environment::{AnomalyStream, ClassificationBudget, Disposition, SampleKind};
pub use policy::{Decision, DynamicPolicy, NodeState, Policy, QHyperparams, QPolicy, StaticPolicy};
pub use qtable::{discretize, q_select, q_update, Action, QTable, StateBins};
pub use retrain::{simulate_retrain, RetrainOutcome};
pub use rng::{RandomStream, StreamId};
pub use sim::{
    run_episode, run_sweep, train_qtable, Counts, Ledger, PolicyKind, SimConfig, SimResult,
};
