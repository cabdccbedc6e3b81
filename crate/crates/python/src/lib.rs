//! Python bindings for redspec.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use redspec::dynamics;
use redspec::groups::{GroupKind, GroupModel};
use redspec::hamiltonian::{HamiltonianModel, Potential as CorePotential};
use redspec::oracle::{self, OracleConfig};
use redspec::quantum::{Bump, GridPolicy, SpectrumSource};
use redspec::reduction;
use redspec::runner::{self, ExperimentConfig};
use redspec::verify::{self, PeakSearch, Sector as CoreSector, Tolerances, VerificationReport};
use redspec::Error;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Config { .. } | Error::InvalidArgument(_) | Error::DegenerateWindow { .. } | Error::Stratum(_) => {
            PyValueError::new_err(err.to_string())
        }
        _ => PyRuntimeError::new_err(err.to_string()),
    }
}

fn group(name: &str) -> PyResult<GroupKind> {
    name.parse().map_err(to_py)
}

fn json<T: serde::Serialize>(value: &T) -> PyResult<String> {
    serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// Radial potential V₀(r) plus a constant offset.
#[pyclass(frozen, skip_from_py_object, module = "redspec_py")]
#[derive(Clone, Copy)]
struct Potential(CorePotential);

#[pymethods]
impl Potential {
    /// V₀ = r².
    #[staticmethod]
    fn harmonic() -> Self {
        Self(CorePotential::harmonic())
    }

    /// V₀ = r² + λ r⁴.
    #[staticmethod]
    fn anharmonic(lam: f64) -> Self {
        Self(CorePotential::anharmonic(lam))
    }

    /// V₀ = (r² − a)².
    #[staticmethod]
    fn double_well(a: f64) -> Self {
        Self(CorePotential::double_well(a))
    }

    fn shifted(&self, offset: f64) -> Self {
        Self(self.0.shifted(offset))
    }

    fn value(&self, r: f64) -> f64 {
        self.0.value(r)
    }

    fn critical_values(&self) -> Vec<f64> {
        self.0.critical_values()
    }

    fn __repr__(&self) -> String {
        format!("Potential({})", self.0.id())
    }
}

/// One symmetry sector: a group, an irreducible label n and a potential.
#[pyclass(frozen, module = "redspec_py")]
struct Sector(CoreSector);

#[pymethods]
impl Sector {
    #[new]
    fn new(group_name: &str, n: i64, potential: &Potential) -> PyResult<Self> {
        let kind = group(group_name)?;
        GroupModel::new(kind).character(n).map_err(to_py)?;
        Ok(Self(CoreSector::new(kind, n, potential.0)))
    }

    #[getter]
    fn group(&self) -> String {
        self.0.group.to_string()
    }

    #[getter]
    fn n(&self) -> i64 {
        self.0.n
    }

    /// Character degree d_χ.
    fn degree(&self) -> PyResult<usize> {
        Ok(GroupModel::new(self.0.group).character(self.0.n).map_err(to_py)?.degree())
    }

    /// Multiplicity of the trivial representation in ρ_χ restricted to the
    /// principal stabilizer.
    fn multiplicity(&self) -> PyResult<usize> {
        self.0.multiplicity().map_err(to_py)
    }

    /// Radial eigenvalues in [lo, hi] and their error estimates.
    fn spectrum(&self, py: Python<'_>, h: f64, lo: f64, hi: f64) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let query = self.0.query(h);
        let s = py
            .detach(|| GridPolicy::default().spectrum(&query, lo, hi))
            .map_err(to_py)?;
        Ok((s.eigenvalues, s.errors))
    }

    /// Leading Weyl term of the counting function on [e1, e2] at h.
    fn weyl_prediction(&self, e1: f64, e2: f64, h: f64) -> PyResult<f64> {
        Ok(verify::WeylPrediction::counting(&self.0, e1, e2).map_err(to_py)?.at(h))
    }

    /// Counting function against its Weyl prediction over a list of h.
    #[pyo3(signature = (e1, e2, h, coefficient_rel=0.05, exponent_abs=0.1))]
    fn weyl_verify(
        &self,
        py: Python<'_>,
        e1: f64,
        e2: f64,
        h: Vec<f64>,
        coefficient_rel: f64,
        exponent_abs: f64,
    ) -> PyResult<Report> {
        let tol = Tolerances {
            coefficient_rel,
            exponent_abs,
        };
        let sector = self.0;
        py.detach(|| verify::weyl_verify(&sector, e1, e2, &h, tol, &GridPolicy::default()))
            .map(Report)
            .map_err(to_py)
    }

    /// Weak trace with a smooth bump of the given centre and half-width.
    #[pyo3(signature = (centre, half_width, h, coefficient_rel=0.05, exponent_abs=0.1))]
    fn weak_verify(
        &self,
        py: Python<'_>,
        centre: f64,
        half_width: f64,
        h: Vec<f64>,
        coefficient_rel: f64,
        exponent_abs: f64,
    ) -> PyResult<Report> {
        let tol = Tolerances {
            coefficient_rel,
            exponent_abs,
        };
        let sector = self.0;
        let f = Bump::new(centre, half_width);
        py.detach(|| verify::weak_verify(&sector, &f, &h, tol, &GridPolicy::default()))
            .map(Report)
            .map_err(to_py)
    }

    /// Peaks (t, relative height) of the time signal |Y(t; h)| on (0, t_max].
    fn peaks(&self, py: Python<'_>, energy: f64, h: f64, t_max: f64) -> PyResult<Vec<(f64, f64)>> {
        let sector = self.0;
        let report = py
            .detach(|| verify::gutzwiller_peaks(&sector, &PeakSearch::new(energy, h, t_max), &GridPolicy::default()))
            .map_err(to_py)?;
        Ok(report.peaks.iter().map(|p| (p.t, p.height)).collect())
    }

    /// Action recovered from the phase of the smoothed trace; JSON report.
    fn action_regression(&self, py: Python<'_>, energy: f64, t0: f64, h: Vec<f64>) -> PyResult<String> {
        let sector = self.0;
        let est = py
            .detach(|| verify::action_regression(&sector, energy, t0, &h, &GridPolicy::default()))
            .map_err(to_py)?;
        json(&est)
    }

    fn __repr__(&self) -> String {
        format!("Sector({}, n={}, {})", self.0.group, self.0.n, self.0.potential.id())
    }
}

/// Outcome of an h-sweep comparison with a leading-order prediction.
#[pyclass(frozen, module = "redspec_py")]
struct Report(VerificationReport);

#[pymethods]
impl Report {
    #[getter]
    fn passed(&self) -> bool {
        self.0.pass
    }

    #[getter]
    fn h(&self) -> Vec<f64> {
        self.0.h.clone()
    }

    #[getter]
    fn measured(&self) -> Vec<f64> {
        self.0.measured.clone()
    }

    #[getter]
    fn predicted(&self) -> Vec<f64> {
        self.0.predicted.clone()
    }

    #[getter]
    fn fitted_exponent(&self) -> Option<f64> {
        self.0.fitted_exponent
    }

    #[getter]
    fn coefficient_error(&self) -> f64 {
        self.0.coefficient_error
    }

    fn to_json(&self) -> PyResult<String> {
        json(&self.0)
    }

    fn __repr__(&self) -> String {
        format!(
            "Report({}, pass={}, exponent={:?}, coefficient_error={:.3e})",
            self.0.kind, self.0.pass, self.0.fitted_exponent, self.0.coefficient_error
        )
    }
}

/// Reduced phase-space volume of e1 ≤ H̃ ≤ e2 and its error estimate.
#[pyfunction]
fn reduced_volume(group_name: &str, potential: &Potential, e1: f64, e2: f64) -> PyResult<(f64, f64)> {
    let kind = group(group_name)?;
    let model = HamiltonianModel::for_group(kind, potential.0);
    let v = reduction::reduced_volume(&GroupModel::new(kind), &model, e1, e2).map_err(to_py)?;
    Ok((v.value, v.error))
}

/// Period T(E) and action S(E) of the reduced orbit.
#[pyfunction]
fn period_action(group_name: &str, potential: &Potential, energy: f64) -> PyResult<(f64, f64)> {
    let model = HamiltonianModel::for_group(group(group_name)?, potential.0);
    dynamics::period_action(&model, energy).map_err(to_py)
}

/// Periods k·T with |k·T| ≤ t_max, as (t, repetition, action).
#[pyfunction]
fn period_set(group_name: &str, potential: &Potential, energy: f64, t_max: f64) -> PyResult<Vec<(f64, i64, f64)>> {
    let model = HamiltonianModel::for_group(group(group_name)?, potential.0);
    Ok(dynamics::reduced_period_set(&model, energy, t_max)
        .map_err(to_py)?
        .into_iter()
        .map(|p| (p.t0, p.repetition, p.action))
        .collect())
}

/// Polar-grid projector oracle for planar SO(2); returns (status, JSON report).
#[pyfunction]
#[pyo3(signature = (h, potential, sectors=vec![0, 1, 2]))]
fn projector_oracle(py: Python<'_>, h: f64, potential: &Potential, sectors: Vec<i64>) -> PyResult<(String, String)> {
    let config = OracleConfig {
        sectors,
        ..OracleConfig::coarse(h, potential.0)
    };
    let report = py
        .detach(|| oracle::grid_projector_oracle(&config, &GridPolicy::default()))
        .map_err(to_py)?;
    let status = json(&report.status)?.trim_matches('"').to_string();
    Ok((status, json(&report)?))
}

/// Names of the built-in experiments.
#[pyfunction]
fn presets() -> Vec<String> {
    runner::presets().into_iter().map(|p| p.name.to_string()).collect()
}

/// TOML text of a built-in experiment.
#[pyfunction]
fn preset_toml(name: &str) -> PyResult<String> {
    runner::preset(name)
        .map(|c| c.to_toml())
        .ok_or_else(|| PyValueError::new_err(format!("unknown preset `{name}`")))
}

/// Runs an experiment given as TOML; returns (exit code, manifest JSON).
#[pyfunction]
fn run_experiment(py: Python<'_>, toml_text: &str) -> PyResult<(i32, String)> {
    let config = ExperimentConfig::from_toml(toml_text).map_err(to_py)?;
    let manifest = py.detach(|| runner::run(&config)).map_err(to_py)?;
    Ok((manifest.exit_code(), json(&manifest)?))
}

#[pymodule]
fn redspec_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Potential>()?;
    m.add_class::<Sector>()?;
    m.add_class::<Report>()?;
    m.add_function(wrap_pyfunction!(reduced_volume, m)?)?;
    m.add_function(wrap_pyfunction!(period_action, m)?)?;
    m.add_function(wrap_pyfunction!(period_set, m)?)?;
    m.add_function(wrap_pyfunction!(projector_oracle, m)?)?;
    m.add_function(wrap_pyfunction!(presets, m)?)?;
    m.add_function(wrap_pyfunction!(preset_toml, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
