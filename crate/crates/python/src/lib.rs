use pyo3::exceptions::{PyKeyError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use dyngrid::eval::evaluate as run_eval;
use dyngrid::level::{sample_instance, LevelRegistry, Mode};
use dyngrid::oracle::{self, PolicyKind};
use dyngrid::{Action, Episode, Error, Observation, StepInfo, TextMode};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::UnknownLevel(_) => PyKeyError::new_err(e.to_string()),
        Error::InvalidAction(_) | Error::Parse(_) | Error::InvalidArgument(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

fn obs_dict<'py>(py: Python<'py>, obs: &Observation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("grid", obs.grid.to_flat())?;
    d.set_item("descriptions", obs.descriptions.clone())?;
    d.set_item("instruction", obs.instruction.clone())?;
    Ok(d)
}

fn info_dict<'py>(py: Python<'py>, info: &StepInfo) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("time", info.time)?;
    d.set_item("steps", info.steps)?;
    d.set_item("outcome", info.outcome.name())?;
    Ok(d)
}

/// One environment. `grid` observations are 147 bytes laid out
/// as [row][col][channel] over the 7x7 egocentric window.
#[pyclass(module = "pydyngrid")]
struct Env {
    registry: LevelRegistry,
    level: String,
    mode: Mode,
    text: TextMode,
    episode: Option<Episode>,
}

#[pymethods]
impl Env {
    #[new]
    #[pyo3(signature = (level, mode = "train", text = "descriptive"))]
    fn new(level: &str, mode: &str, text: &str) -> PyResult<Self> {
        let registry = LevelRegistry::default();
        registry.get(level).map_err(to_py)?;
        Ok(Env {
            registry,
            level: level.to_string(),
            mode: parse(mode)?,
            text: parse(text)?,
            episode: None,
        })
    }

    fn reset<'py>(&mut self, py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyDict>> {
        let spec = self.registry.get(&self.level).map_err(to_py)?;
        let (obs, ep) = Episode::reset_with_text(spec, self.mode, seed, self.text).map_err(to_py)?;
        self.episode = Some(ep);
        obs_dict(py, &obs)
    }

    /// Returns (observation, reward, done, info).
    fn step<'py>(
        &mut self,
        py: Python<'py>,
        action: i64,
    ) -> PyResult<(Bound<'py, PyDict>, f64, bool, Bound<'py, PyDict>)> {
        let action = Action::try_from(action).map_err(to_py)?;
        let ep = self
            .episode
            .as_mut()
            .ok_or_else(|| PyRuntimeError::new_err("step before reset"))?;
        let r = ep.step(action).map_err(to_py)?;
        Ok((obs_dict(py, &r.observation)?, r.reward, r.done, info_dict(py, &r.info)?))
    }

    /// The optimal action ids from the current state.
    fn plan_optimal(&self) -> PyResult<Vec<u8>> {
        let ep = self
            .episode
            .as_ref()
            .ok_or_else(|| PyRuntimeError::new_err("plan before reset"))?;
        let inst = ep.instance();
        let plan = oracle::plan_from(ep.grid(), &inst.dynamics, &inst.mission).map_err(to_py)?;
        Ok(plan.actions.iter().map(|a| a.id()).collect())
    }

    fn trace_json(&self) -> PyResult<String> {
        self.episode
            .as_ref()
            .map(|e| e.record_trace().to_json_line())
            .ok_or_else(|| PyRuntimeError::new_err("no episode"))
    }

    #[getter]
    fn max_steps(&self) -> PyResult<u32> {
        Ok(self.registry.get(&self.level).map_err(to_py)?.max_steps)
    }
}

#[pyfunction]
fn levels() -> Vec<String> {
    LevelRegistry::default().names().map(str::to_string).collect()
}

/// Optimal action ids and total time for a sampled instance.
#[pyfunction]
#[pyo3(signature = (level, seed, mode = "train"))]
fn plan_optimal(level: &str, seed: u64, mode: &str) -> PyResult<(Vec<u8>, f64)> {
    let registry = LevelRegistry::default();
    let inst = sample_instance(registry.get(level).map_err(to_py)?, parse(mode)?, seed).map_err(to_py)?;
    let plan = oracle::plan_optimal(&inst).map_err(to_py)?;
    Ok((plan.actions.iter().map(|a| a.id()).collect(), plan.total_time))
}

/// Mean and standard error of Succ, R_avg and N_epi for a scripted policy.
#[pyfunction]
#[pyo3(signature = (policy, level, mode = "test", n = 1000, base_seed = 0, policy_seed = 0))]
fn evaluate<'py>(
    py: Python<'py>,
    policy: &str,
    level: &str,
    mode: &str,
    n: usize,
    base_seed: u64,
    policy_seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let registry = LevelRegistry::default();
    let spec = registry.get(level).map_err(to_py)?;
    let kind: PolicyKind = parse(policy)?;
    let mode: Mode = parse(mode)?;
    let (stats, _) = py
        .detach(|| run_eval(kind, policy_seed, spec, mode, n, base_seed))
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("n", stats.n)?;
    d.set_item("succ", (stats.succ_mean, stats.succ_se))?;
    d.set_item("reward", (stats.r_mean, stats.r_se))?;
    d.set_item("n_epi", (stats.nepi_mean, stats.nepi_se))?;
    Ok(d)
}

#[pymodule]
fn pydyngrid(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Env>()?;
    m.add_function(wrap_pyfunction!(levels, m)?)?;
    m.add_function(wrap_pyfunction!(plan_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add("ACTIONS", Action::ALL.iter().map(|a| a.name()).collect::<Vec<_>>())?;
    Ok(())
}
