//! Python bindings. Small value types are wrapped as classes; batch runs
//! exchange JSON strings that mirror the CLI outputs.

use pyo3::exceptions::{PyOSError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use tagtrack_core::harness::{self, BenchConfig, ScenarioConfig};
use tagtrack_core::planner::DecisionOutcome;
use tagtrack_core::rng::{stream_rng, Stream};
use tagtrack_core::{ConfigError, HarnessError, ObjectBelief, ObjectState, PlanContext, PlannerKind, UavState};

fn config_err(e: ConfigError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn harness_err(e: HarnessError) -> PyErr {
    match e {
        HarnessError::Config(c) => config_err(c),
        HarnessError::Io { .. } | HarnessError::Csv { .. } => PyOSError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Parses a scenario from JSON; `None` gives the defaults.
fn scenario(config: Option<&str>) -> PyResult<ScenarioConfig> {
    let cfg = match config {
        Some(text) => ScenarioConfig::from_json(text).map_err(config_err)?,
        None => ScenarioConfig::default(),
    };
    cfg.validate().map_err(config_err)?;
    Ok(cfg)
}

fn planner_kind(name: &str, void_enabled: bool, alpha: f64) -> PyResult<PlannerKind> {
    let kind = match name {
        "lavapilot" => PlannerKind::lavapilot(void_enabled),
        "renyi" => PlannerKind::renyi(alpha, void_enabled),
        "shannon" => PlannerKind::shannon(void_enabled),
        other => return Err(PyValueError::new_err(format!("unknown planner `{other}`"))),
    };
    kind.validate().map_err(config_err)?;
    Ok(kind)
}

#[pyclass(name = "UavState", module = "tagtrack", skip_from_py_object)]
#[derive(Clone)]
struct PyUavState {
    inner: UavState,
}

#[pymethods]
impl PyUavState {
    #[new]
    #[pyo3(signature = (x, y, z = 30.0, heading = 0.0))]
    fn new(x: f64, y: f64, z: f64, heading: f64) -> Self {
        Self {
            inner: UavState::new([x, y, z], heading),
        }
    }

    #[getter]
    fn position(&self) -> (f64, f64, f64) {
        let [x, y, z] = self.inner.position;
        (x, y, z)
    }

    #[getter]
    fn heading(&self) -> f64 {
        self.inner.heading
    }

    #[getter]
    fn speed(&self) -> f64 {
        self.inner.speed
    }

    fn __repr__(&self) -> String {
        let [x, y, z] = self.inner.position;
        format!("UavState(x={x:.3}, y={y:.3}, z={z:.3}, heading={:.4}, speed={:.3})", self.inner.heading, self.inner.speed)
    }
}

#[pyclass(name = "ObjectBelief", module = "tagtrack", skip_from_py_object)]
#[derive(Clone)]
struct PyObjectBelief {
    inner: ObjectBelief,
}

#[pymethods]
impl PyObjectBelief {
    /// Weighted particles `[(x, y, z), ...]`; weights default to equal.
    #[new]
    #[pyo3(signature = (tag_id, particles, weights = None))]
    fn new(tag_id: usize, particles: Vec<[f64; 3]>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let weights = weights.unwrap_or_else(|| vec![1.0; particles.len()]);
        ObjectBelief::from_particles(tag_id, particles, weights)
            .map(|inner| Self { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// `count` particles uniform over the scenario area.
    #[staticmethod]
    #[pyo3(signature = (tag_id, count, seed, config = None))]
    fn uniform(tag_id: usize, count: usize, seed: u64, config: Option<&str>) -> PyResult<Self> {
        let cfg = scenario(config)?;
        let tracker = tagtrack_core::TrackerConfig {
            particle_count: count,
            ..cfg.tracker
        };
        let mut rng = stream_rng(seed, Stream::Filter(tag_id));
        Ok(Self {
            inner: ObjectBelief::uniform(tag_id, &cfg.area, cfg.tag_height, &tracker, &mut rng),
        })
    }

    #[staticmethod]
    #[pyo3(signature = (tag_id, position, count = 1))]
    fn point_mass(tag_id: usize, position: [f64; 3], count: usize) -> Self {
        Self {
            inner: ObjectBelief::point_mass(tag_id, position, count),
        }
    }

    #[getter]
    fn tag_id(&self) -> usize {
        self.inner.tag_id
    }

    #[getter]
    fn localized(&self) -> bool {
        self.inner.localized
    }

    #[getter]
    fn particles(&self) -> Vec<[f64; 3]> {
        self.inner.particles().to_vec()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    fn estimate(&self) -> [f64; 3] {
        self.inner.estimate()
    }

    /// Largest per-axis weighted standard deviation, metres.
    fn uncertainty(&self) -> f64 {
        self.inner.uncertainty()
    }

    fn void_probability(&self, uav: &PyUavState, r_min: f64) -> f64 {
        tagtrack_core::void_probability(&self.inner, &uav.inner, r_min)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// Noise-free RSSI (dBm) of a tag at `position` seen from `uav`.
#[pyfunction]
#[pyo3(signature = (position, uav, frequency_mhz = 150.0, config = None))]
fn received_power(position: [f64; 3], uav: &PyUavState, frequency_mhz: f64, config: Option<&str>) -> PyResult<f64> {
    let cfg = scenario(config)?.propagation.with_frequency_mhz(frequency_mhz);
    tagtrack_core::received_power(&ObjectState::new(1, position), &uav.inner, &cfg)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Poses reached every `period` seconds while flying toward `waypoint`.
#[pyfunction]
#[pyo3(signature = (uav, waypoint, horizon, period = 1.0, config = None))]
fn uav_rollout(uav: &PyUavState, waypoint: [f64; 2], horizon: usize, period: f64, config: Option<&str>) -> PyResult<Vec<PyUavState>> {
    let cfg = scenario(config)?;
    Ok(tagtrack_core::uav_rollout(&uav.inner, waypoint, &cfg.kinematics, &cfg.area, horizon, period)
        .into_iter()
        .map(|inner| PyUavState { inner })
        .collect())
}

#[pyfunction]
fn trajectory_void_probability(beliefs: Vec<PyRef<'_, PyObjectBelief>>, rollout: Vec<PyRef<'_, PyUavState>>, r_min: f64) -> f64 {
    let beliefs: Vec<ObjectBelief> = beliefs.iter().map(|b| b.inner.clone()).collect();
    let rollout: Vec<UavState> = rollout.iter().map(|u| u.inner).collect();
    tagtrack_core::trajectory_void_probability(&beliefs, &rollout, r_min)
}

/// One planning decision, as a dict, or `None` when every tag is localized.
#[pyfunction]
#[pyo3(signature = (beliefs, uav, planner = "lavapilot", void = true, alpha = 0.5, config = None))]
fn select_action<'py>(
    py: Python<'py>,
    beliefs: Vec<PyRef<'py, PyObjectBelief>>,
    uav: &PyUavState,
    planner: &str,
    void: bool,
    alpha: f64,
    config: Option<&str>,
) -> PyResult<Option<Bound<'py, PyDict>>> {
    let cfg = scenario(config)?;
    let kind = planner_kind(planner, void, alpha)?;
    let beliefs: Vec<ObjectBelief> = beliefs.iter().map(|b| b.inner.clone()).collect();
    let propagation = ScenarioConfig {
        tag_count: beliefs.len(),
        ..cfg.clone()
    }
    .tag_propagation();
    let ctx = PlanContext {
        beliefs: &beliefs,
        propagation: &propagation,
        uav: &uav.inner,
        kinematics: &cfg.kinematics,
        area: &cfg.area,
        void: &cfg.void,
    };
    let Some(decision) = tagtrack_core::select_action(&ctx, &kind) else {
        return Ok(None);
    };
    let outcome = match decision.outcome {
        DecisionOutcome::Selected => "selected",
        DecisionOutcome::Escape => "escape",
        DecisionOutcome::Fallback => "fallback",
    };
    let d = PyDict::new(py);
    d.set_item("label", decision.action.label.to_string())?;
    d.set_item("outcome", outcome)?;
    d.set_item("waypoint", decision.action.waypoint)?;
    d.set_item("void_prob", decision.action.void_prob)?;
    d.set_item("target_tag", decision.target_tag)?;
    d.set_item("reward", decision.reward)?;
    d.set_item(
        "rollout",
        decision.action.rollout.iter().map(|p| p.position).collect::<Vec<_>>(),
    )?;
    Ok(Some(d))
}

/// Default scenario config as JSON.
#[pyfunction]
fn default_config() -> PyResult<String> {
    to_json(&ScenarioConfig::default())
}

/// Runs one mission; returns the full record as JSON.
#[pyfunction]
#[pyo3(signature = (config = None))]
fn run_mission(py: Python<'_>, config: Option<&str>) -> PyResult<String> {
    let cfg = scenario(config)?;
    let record = py.detach(|| harness::run_mission(&cfg)).map_err(harness_err)?;
    to_json(&record)
}

/// Runs a Monte-Carlo batch; returns the summary as JSON.
#[pyfunction]
#[pyo3(signature = (config = None, trials = 20, parallel = 1))]
fn run_montecarlo(py: Python<'_>, config: Option<&str>, trials: usize, parallel: usize) -> PyResult<String> {
    let cfg = scenario(config)?;
    let summary = py.detach(|| harness::run_montecarlo(&cfg, trials, parallel)).map_err(harness_err)?;
    to_json(&summary)
}

/// Times one decision per planner on a fixed snapshot; returns JSON.
#[pyfunction(name = "bench")]
#[pyo3(signature = (particles = 10_000, tags = 10, actions = 12, horizon = 11, reps = 20, seed = 0))]
fn bench_planners(py: Python<'_>, particles: usize, tags: usize, actions: usize, horizon: usize, reps: usize, seed: u64) -> PyResult<String> {
    let cfg = BenchConfig {
        particles,
        tags,
        actions,
        horizon,
        repetitions: reps,
        seed,
        ..BenchConfig::default()
    };
    let report = py.detach(|| harness::bench_planners(&cfg)).map_err(config_err)?;
    to_json(&report)
}

#[pymodule]
fn tagtrack(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyUavState>()?;
    m.add_class::<PyObjectBelief>()?;
    m.add_function(wrap_pyfunction!(received_power, m)?)?;
    m.add_function(wrap_pyfunction!(uav_rollout, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_void_probability, m)?)?;
    m.add_function(wrap_pyfunction!(select_action, m)?)?;
    m.add_function(wrap_pyfunction!(default_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_mission, m)?)?;
    m.add_function(wrap_pyfunction!(run_montecarlo, m)?)?;
    m.add_function(wrap_pyfunction!(bench_planners, m)?)?;
    m.add("SCHEMA_VERSION", harness::SCHEMA_VERSION)?;
    Ok(())
}
