//! Duty-cycle optimization policies: static threshold, adaptive threshold,
//! and tabular Q-learning behind one decision interface.

use crate::energy::Energy;
use crate::qtable::{discretize, q_select, q_update, Action, QTable, StateBins};
use crate::retrain::RetrainOutcome;
use crate::rng::RandomStream;

/// Policy-visible snapshot of the node at a decision point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub battery_fraction: f64,
    /// Server-classified anomaly images held for retraining.
    pub n_classified: u32,
    /// Latest sample anomaly status. Always true at a decision point, since
    /// decisions only follow a server classification.
    pub anomaly_flag: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Retrain,
}

/// Retrain-or-continue decision maker, driven by the simulation engine.
///
/// `observe_energy` and `end_iteration` are bookkeeping hooks: the engine
/// reports every battery draw in consumption order and every completed
/// sampling iteration, which is all a learning policy needs to reconstruct
/// per-step rewards. Non-learning policies ignore them.
pub trait Policy {
    fn decide(&mut self, state: NodeState) -> Decision;

    /// Outcome of a retrain this policy requested. `success` reflects the
    /// engine's validation threshold.
    fn observe_retrain(&mut self, _outcome: &RetrainOutcome, _success: bool) {}

    fn observe_energy(&mut self, _energy: Energy) {}

    fn end_iteration(&mut self) {}

    /// Battery exhausted; the episode is over.
    fn on_terminal(&mut self) {}
}

/// Fixed-threshold policy: retrain once 35 classified anomalies are held.
#[derive(Debug, Clone)]
pub struct StaticPolicy {
    threshold: u32,
}

impl StaticPolicy {
    pub fn new() -> Self {
        StaticPolicy { threshold: 35 }
    }
}

impl Default for StaticPolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl Policy for StaticPolicy {
    fn decide(&mut self, state: NodeState) -> Decision {
        if state.n_classified >= self.threshold {
            Decision::Retrain
        } else {
            Decision::Continue
        }
    }
}

/// Adaptive-threshold policy: the retrain threshold rises on failed
/// validations and falls after a streak of successes.
#[derive(Debug, Clone)]
pub struct DynamicPolicy {
    threshold: u32,
    successes: u32,
    streak_target: u32,
    min_threshold: u32,
}

impl DynamicPolicy {
    pub fn new() -> Self {
        DynamicPolicy { threshold: 10, successes: 0, streak_target: 5, min_threshold: 1 }
    }

    pub fn threshold(&self) -> u32 {
        self.threshold
    }

    pub fn successes(&self) -> u32 {
        self.successes
    }
}

impl Default for DynamicPolicy {
    fn default() -> Self {
        Self::new()
    }
}

impl Policy for DynamicPolicy {
    fn decide(&mut self, state: NodeState) -> Decision {
        if state.n_classified >= self.threshold {
            Decision::Retrain
        } else {
            Decision::Continue
        }
    }

    fn observe_retrain(&mut self, _outcome: &RetrainOutcome, success: bool) {
        if success {
            self.successes += 1;
            if self.successes >= self.streak_target && self.threshold > self.min_threshold {
                self.threshold -= 1;
            }
        } else {
            self.successes = 0;
            self.threshold += 1;
        }
    }
}

/// Learning-rate/exploration schedule for Q-table training.
#[derive(Debug, Clone, Copy)]
pub struct QHyperparams {
    pub alpha: f64,
    pub gamma: f64,
    pub epsilon: f64,
    pub alpha_decay: f64,
    pub epsilon_decay: f64,
    /// When set, discounting is applied per elapsed hour instead of per
    /// decision step, so long gaps between decisions are weighted by their
    /// real duration.
    pub gamma_per_hour: Option<f64>,
    /// Initial value for every table entry at the start of training. A
    /// pessimistic (very negative) prior keeps never-visited states from
    /// outshining explored ones when all rewards are negative.
    pub q_init: f32,
}

impl Default for QHyperparams {
    fn default() -> Self {
        QHyperparams {
            alpha: 0.2,
            gamma: 0.95,
            epsilon: 1.0,
            alpha_decay: 0.995,
            epsilon_decay: 0.99,
            gamma_per_hour: None,
            q_init: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
struct LearnState {
    hp: QHyperparams,
    stream: RandomStream,
    /// Pending transition: bins, action, and the learning rate in force
    /// when the action was selected.
    prev: Option<(StateBins, Action, f64)>,
    /// Energy since the previous decision, discounted to that decision's
    /// timestamp when per-hour discounting is active.
    step_energy_mwh: f64,
    step_hours: f64,
    steps: u64,
}

impl LearnState {
    // Schedules are computed as decay^k from the step counter so they are
    // exact powers, not drifting products.
    fn alpha(&self) -> f64 {
        self.hp.alpha * self.hp.alpha_decay.powi(self.steps as i32)
    }

    fn epsilon(&self) -> f64 {
        self.hp.epsilon * self.hp.epsilon_decay.powi(self.steps as i32)
    }

    fn hourly_discount(&self, hours: f64) -> f64 {
        match self.hp.gamma_per_hour {
            Some(gh) => gh.powf(hours),
            None => 1.0,
        }
    }

    fn step_gamma(&self) -> f64 {
        match self.hp.gamma_per_hour {
            Some(gh) => gh.powf(self.step_hours),
            None => self.hp.gamma,
        }
    }
}

/// Q-table policy, usable frozen (evaluation) or learning (training and
/// optional online adaptation).
#[derive(Debug, Clone)]
pub struct QPolicy {
    table: QTable,
    learn: Option<LearnState>,
}

impl QPolicy {
    /// Frozen greedy policy over a trained table. Consumes no random draws.
    pub fn frozen(table: QTable) -> Self {
        QPolicy { table, learn: None }
    }

    pub fn learning(table: QTable, hp: QHyperparams, exploration: RandomStream) -> Self {
        let learn = LearnState {
            hp,
            stream: exploration,
            prev: None,
            step_energy_mwh: 0.0,
            step_hours: 0.0,
            steps: 0,
        };
        QPolicy { table, learn: Some(learn) }
    }

    pub fn table(&self) -> &QTable {
        &self.table
    }

    pub fn into_table(self) -> QTable {
        self.table
    }

    pub fn epsilon(&self) -> f64 {
        self.learn.as_ref().map_or(0.0, |l| l.epsilon())
    }

    pub fn alpha(&self) -> f64 {
        self.learn.as_ref().map_or(0.0, |l| l.alpha())
    }

    pub fn decision_steps(&self) -> u64 {
        self.learn.as_ref().map_or(0, |l| l.steps)
    }

    /// Carries learning state into a fresh episode: schedules keep decaying
    /// across episodes, but the pending transition is dropped.
    pub fn reset_episode(&mut self) {
        if let Some(l) = &mut self.learn {
            l.prev = None;
            l.step_energy_mwh = 0.0;
            l.step_hours = 0.0;
        }
    }

    fn finish_step(&mut self, next: Option<StateBins>) {
        let Some(l) = &mut self.learn else { return };
        if let Some((s, a, alpha)) = l.prev.take() {
            let reward = -l.step_energy_mwh;
            let gamma = l.step_gamma();
            q_update(&mut self.table, s, a, reward, next, alpha, gamma);
        }
        l.step_energy_mwh = 0.0;
        l.step_hours = 0.0;
    }
}

impl Policy for QPolicy {
    fn decide(&mut self, state: NodeState) -> Decision {
        let bins = discretize(state.battery_fraction, state.n_classified);
        self.finish_step(Some(bins));
        let action = match &mut self.learn {
            Some(l) => {
                l.steps += 1;
                let a = q_select(&self.table, bins, l.epsilon(), &mut l.stream);
                l.prev = Some((bins, a, l.alpha()));
                a
            }
            None => self.table.argmax(bins),
        };
        match action {
            Action::Continue => Decision::Continue,
            Action::Retrain => Decision::Retrain,
        }
    }

    fn observe_energy(&mut self, energy: Energy) {
        if let Some(l) = &mut self.learn {
            let w = l.hourly_discount(l.step_hours);
            l.step_energy_mwh += w * energy.as_mwh();
        }
    }

    fn end_iteration(&mut self) {
        if let Some(l) = &mut self.learn {
            l.step_hours += 1.0;
        }
    }

    fn on_terminal(&mut self) {
        self.finish_step(None);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::EnergyTable;
    use crate::rng::StreamId;

    fn state(n: u32) -> NodeState {
        NodeState { battery_fraction: 0.8, n_classified: n, anomaly_flag: true }
    }

    fn outcome(acc: f64) -> RetrainOutcome {
        RetrainOutcome {
            v_accuracy: acc,
            e_consumed: EnergyTable::default().train_per_image,
            n_samples: 1,
        }
    }

    #[test]
    fn static_threshold_at_35() {
        let mut p = StaticPolicy::new();
        assert_eq!(p.decide(state(34)), Decision::Continue);
        assert_eq!(p.decide(state(35)), Decision::Retrain);
        // Threshold never moves, regardless of outcomes.
        p.observe_retrain(&outcome(0.9), true);
        p.observe_retrain(&outcome(0.5), false);
        assert_eq!(p.decide(state(34)), Decision::Continue);
        assert_eq!(p.decide(state(35)), Decision::Retrain);
    }

    #[test]
    fn dynamic_success_failure_transitions() {
        let mut p = DynamicPolicy::new();
        assert_eq!(p.decide(state(9)), Decision::Continue);
        assert_eq!(p.decide(state(10)), Decision::Retrain);

        p.observe_retrain(&outcome(0.88), true);
        assert_eq!(p.successes(), 1);
        assert_eq!(p.threshold(), 10);

        p.observe_retrain(&outcome(0.70), false);
        assert_eq!(p.successes(), 0);
        assert_eq!(p.threshold(), 11);
    }

    #[test]
    fn dynamic_threshold_drops_after_streak() {
        let mut p = DynamicPolicy::new();
        for _ in 0..4 {
            p.observe_retrain(&outcome(0.9), true);
        }
        assert_eq!(p.threshold(), 10);
        p.observe_retrain(&outcome(0.9), true);
        assert_eq!(p.threshold(), 9);
        // Streak continues: every further success keeps lowering it.
        p.observe_retrain(&outcome(0.9), true);
        assert_eq!(p.threshold(), 8);
    }

    #[test]
    fn dynamic_threshold_floored_at_one() {
        let mut p = DynamicPolicy::new();
        for _ in 0..100 {
            p.observe_retrain(&outcome(0.9), true);
        }
        assert_eq!(p.threshold(), 1);
    }

    #[test]
    fn epsilon_schedule_is_exact_powers() {
        let stream = RandomStream::new(1, StreamId::Exploration);
        let mut p = QPolicy::learning(QTable::zeroed(), QHyperparams::default(), stream);
        for k in 1..=200u32 {
            p.decide(state(3));
            assert_eq!(p.epsilon(), 0.99f64.powi(k as i32), "k = {k}");
        }
    }

    #[test]
    fn frozen_policy_is_greedy_and_deterministic() {
        let mut table = QTable::zeroed();
        let bins = discretize(0.8, 27);
        table.set(bins, Action::Retrain, 5.0);
        let mut p = QPolicy::frozen(table);
        assert_eq!(p.decide(state(27)), Decision::Retrain);
        assert_eq!(p.decide(state(3)), Decision::Continue);
    }
}
