//! Python bindings for the battery-life simulator.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict};

use dutysim::qtable::QTable;
use dutysim::sim::{run_episode, train_qtable, PolicyKind, SimConfig, SimResult};
use dutysim::{Energy, QHyperparams, RandomStream, StreamId};

/// Simulation parameters. Unset fields keep the built-in defaults.
#[pyclass(name = "SimConfig", from_py_object)]
#[derive(Clone)]
struct PySimConfig {
    inner: SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (
        anomaly_ratio = None,
        battery_capacity_uwh = None,
        seed = None,
        classification_reset = None,
        train_episodes = None,
        online_learning = None,
    ))]
    fn new(
        anomaly_ratio: Option<f64>,
        battery_capacity_uwh: Option<u64>,
        seed: Option<u64>,
        classification_reset: Option<u32>,
        train_episodes: Option<u32>,
        online_learning: Option<bool>,
    ) -> PyResult<Self> {
        let mut cfg = SimConfig::default();
        if let Some(r) = anomaly_ratio {
            if !(0.0..=1.0).contains(&r) {
                return Err(PyValueError::new_err("anomaly_ratio must be in [0, 1]"));
            }
            cfg.anomaly_ratio = r;
        }
        if let Some(c) = battery_capacity_uwh {
            cfg.battery_capacity = Energy::from_uwh(c);
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        if let Some(n) = classification_reset {
            cfg.classification_reset = n;
        }
        if let Some(e) = train_episodes {
            cfg.train_episodes = e;
        }
        if let Some(o) = online_learning {
            cfg.online_learning = o;
        }
        Ok(PySimConfig { inner: cfg })
    }

    #[getter]
    fn anomaly_ratio(&self) -> f64 {
        self.inner.anomaly_ratio
    }

    #[getter]
    fn battery_capacity_uwh(&self) -> u64 {
        self.inner.battery_capacity.uwh()
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }
}

#[pyclass(name = "SimResult")]
struct PySimResult {
    inner: SimResult,
}

#[pymethods]
impl PySimResult {
    #[getter]
    fn policy(&self) -> &'static str {
        self.inner.policy.name()
    }

    #[getter]
    fn battery_life_hours(&self) -> u64 {
        self.inner.battery_life_hours
    }

    #[getter]
    fn completed_iterations(&self) -> u64 {
        self.inner.completed_iterations
    }

    fn ledger<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let l = &self.inner.ledger;
        d.set_item("sleep_uwh", l.sleep.uwh())?;
        d.set_item("capture_uwh", l.capture.uwh())?;
        d.set_item("infer_uwh", l.infer.uwh())?;
        d.set_item("upload_uwh", l.upload.uwh())?;
        d.set_item("train_uwh", l.train.uwh())?;
        Ok(d)
    }

    fn counts<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let d = PyDict::new(py);
        let c = &self.inner.counts;
        d.set_item("samples", c.samples)?;
        d.set_item("anomalies", c.anomalies)?;
        d.set_item("onboard_classified", c.onboard_classified)?;
        d.set_item("uploads", c.uploads)?;
        d.set_item("retrain_attempts", c.retrain_attempts)?;
        d.set_item("retrain_successes", c.retrain_successes)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!(
            "SimResult(policy='{}', battery_life_hours={})",
            self.inner.policy.name(),
            self.inner.battery_life_hours
        )
    }
}

fn parse_policy(name: &str) -> PyResult<PolicyKind> {
    name.parse().map_err(PyValueError::new_err)
}

/// Runs one episode to battery exhaustion.
#[pyfunction]
#[pyo3(signature = (config, policy, qtable = None))]
fn simulate(config: &PySimConfig, policy: &str, qtable: Option<&[u8]>) -> PyResult<PySimResult> {
    let kind = parse_policy(policy)?;
    let table = match qtable {
        Some(bytes) => Some(QTable::from_bytes(bytes).map_err(|e| PyValueError::new_err(e.to_string()))?),
        None => {
            if kind == PolicyKind::Autonomous {
                return Err(PyValueError::new_err("the autonomous policy requires qtable bytes"));
            }
            None
        }
    };
    Ok(PySimResult { inner: run_episode(&config.inner, kind, table.as_ref()) })
}

/// Trains a Q-table and returns the 816-byte serialized file image.
#[pyfunction]
#[pyo3(signature = (config, episodes = None))]
fn train<'py>(py: Python<'py>, config: &PySimConfig, episodes: Option<u32>) -> PyResult<Bound<'py, PyBytes>> {
    let episodes = episodes.unwrap_or(config.inner.train_episodes);
    let (table, _summary) = train_qtable(&config.inner, episodes, config.inner.hyperparams);
    Ok(PyBytes::new(py, &table.to_bytes()))
}

/// Loads a Q-table file and returns its byte image, validating the format.
#[pyfunction]
fn load_qtable<'py>(py: Python<'py>, path: &str) -> PyResult<Bound<'py, PyBytes>> {
    let table = QTable::load(std::path::Path::new(path))
        .map_err(|e| PyIOError::new_err(e.to_string()))?;
    Ok(PyBytes::new(py, &table.to_bytes()))
}

/// Simulated retraining outcome for a dataset of `n_samples` images.
#[pyfunction]
fn retrain_outcome(n_samples: u32, seed: u64) -> PyResult<(f64, u64)> {
    let table = dutysim::EnergyTable::default();
    let mut stream = RandomStream::new(seed, StreamId::Retrain);
    let outcome = dutysim::simulate_retrain(n_samples, &table, &mut stream)
        .map_err(|e| PyValueError::new_err(e.to_string()))?;
    Ok((outcome.v_accuracy, outcome.e_consumed.uwh()))
}

/// Deterministic uniform draws from a named stream.
#[pyfunction]
fn uniform_draws(seed: u64, count: usize) -> Vec<f64> {
    let mut stream = RandomStream::new(seed, StreamId::Environment);
    (0..count).map(|_| stream.uniform()).collect()
}

#[pyfunction]
fn default_hyperparams(py: Python<'_>) -> PyResult<Bound<'_, PyDict>> {
    let hp = QHyperparams::default();
    let d = PyDict::new(py);
    d.set_item("alpha", hp.alpha)?;
    d.set_item("gamma", hp.gamma)?;
    d.set_item("epsilon", hp.epsilon)?;
    d.set_item("alpha_decay", hp.alpha_decay)?;
    d.set_item("epsilon_decay", hp.epsilon_decay)?;
    d.set_item("gamma_per_hour", hp.gamma_per_hour)?;
    d.set_item("q_init", hp.q_init)?;
    Ok(d)
}

#[pymodule]
fn dutysim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_class::<PySimResult>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(load_qtable, m)?)?;
    m.add_function(wrap_pyfunction!(retrain_outcome, m)?)?;
    m.add_function(wrap_pyfunction!(uniform_draws, m)?)?;
    m.add_function(wrap_pyfunction!(default_hyperparams, m)?)?;
    Ok(())
}
