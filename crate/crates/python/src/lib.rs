//! Python bindings: fields, damping profiles, models, the one-step and
//! Picard integrators, and the Helmholtz inverses.

use bbm_core::operators::{helmholtz_inverse_neumann, helmholtz_inverse_periodic};
use bbm_core::timestep::picard_solve as core_picard_solve;
use bbm_core::{
    BbmError, DampingProfile, FeedbackCoefficients, Field1D, Grid, IntegrationConfig, Integrator,
    IntervalGrid, Model, PicardSettings, TorusGrid,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: BbmError) -> PyErr {
    match e {
        BbmError::Instability { .. } | BbmError::WindowCollapsed { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn torus(n: usize) -> PyResult<TorusGrid> {
    TorusGrid::new(n).map_err(err)
}

#[pyclass(name = "Field", module = "bbm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField(Field1D);

#[pymethods]
impl PyField {
    /// Nodal values on the 2π torus, `x_j = 2πj/N`.
    #[staticmethod]
    fn torus(values: Vec<f64>) -> PyResult<Self> {
        let grid = torus(values.len())?;
        Field1D::new(grid, values).map(Self).map_err(err)
    }

    /// Nodal values on `[0, length]` including both endpoints.
    #[staticmethod]
    fn interval(length: f64, values: Vec<f64>) -> PyResult<Self> {
        if values.len() < 2 {
            return Err(PyValueError::new_err("an interval field needs at least 2 values"));
        }
        let grid = IntervalGrid::new(length, values.len() - 1).map_err(err)?;
        Field1D::new(grid, values).map(Self).map_err(err)
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn nodes(&self) -> Vec<f64> {
        self.0.grid().nodes()
    }

    #[getter]
    fn domain(&self) -> &'static str {
        self.0.grid().kind()
    }

    #[getter]
    fn length(&self) -> f64 {
        self.0.grid().length()
    }

    fn __len__(&self) -> usize {
        self.0.values().len()
    }

    fn derivative(&self) -> PyResult<Self> {
        self.0.derivative().map(Self).map_err(err)
    }

    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        self.0.sobolev_norm(s).map_err(err)
    }

    fn mean(&self) -> PyResult<f64> {
        self.0.mean().map_err(err)
    }

    fn energy(&self) -> PyResult<f64> {
        bbm_core::operators::energy(&self.0).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Field(domain={}, n={})", self.0.grid().kind(), self.0.values().len())
    }
}

#[pyclass(name = "DampingProfile", module = "bbm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyDamping(DampingProfile);

#[pymethods]
impl PyDamping {
    #[staticmethod]
    fn bump(n_points: usize, center: f64, radius: f64, amplitude: f64) -> PyResult<Self> {
        DampingProfile::bump(&torus(n_points)?, center, radius, amplitude)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn constant(n_points: usize, amplitude: f64) -> PyResult<Self> {
        DampingProfile::constant(&torus(n_points)?, amplitude).map(Self).map_err(err)
    }

    /// Piecewise-linear periodic interpolation of `(x, a)` pairs.
    #[staticmethod]
    fn table(n_points: usize, points: Vec<(f64, f64)>) -> PyResult<Self> {
        DampingProfile::from_table(&torus(n_points)?, &points)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn band(&self) -> (f64, f64) {
        self.0.band()
    }
}

#[pyclass(name = "Model", module = "bbm", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyModel(Model);

#[pymethods]
impl PyModel {
    /// Variant A: `+ a(x) u` damping.
    #[staticmethod]
    fn local_damping(damping: &PyDamping) -> Self {
        Self(Model::local_damping(damping.0.clone()))
    }

    /// Variant B: `− (a(x) u_x)_x` damping.
    #[staticmethod]
    fn gradient_damping(damping: &PyDamping) -> Self {
        Self(Model::gradient_damping(damping.0.clone()))
    }

    /// Variant C: boundary feedback on an interval.
    #[staticmethod]
    fn boundary_feedback(alpha: f64, beta: f64) -> PyResult<Self> {
        let coeffs = FeedbackCoefficients::new(alpha, beta).map_err(err)?;
        Ok(Self(Model::boundary_feedback(coeffs)))
    }

    #[getter]
    fn variant(&self) -> &'static str {
        self.0.variant().tag()
    }

    fn rhs(&self, u: &PyField) -> PyResult<PyField> {
        self.0.rhs(&u.0).map(PyField).map_err(err)
    }

    fn energy(&self, u: &PyField) -> PyResult<f64> {
        self.0.energy(&u.0).map_err(err)
    }

    fn dissipation_rate(&self, u: &PyField) -> PyResult<f64> {
        self.0.dissipation_rate(&u.0).map_err(err)
    }
}

#[pyclass(name = "Run", module = "bbm", frozen, skip_from_py_object)]
struct PyRun {
    #[pyo3(get)]
    times: Vec<f64>,
    #[pyo3(get)]
    energy: Vec<f64>,
    #[pyo3(get)]
    mean: Vec<f64>,
    #[pyo3(get)]
    dissipation_rate: Vec<f64>,
    #[pyo3(get)]
    cumulative_dissipation: Vec<f64>,
    #[pyo3(get)]
    balance_residual: Vec<f64>,
    snapshots: Vec<(f64, Field1D)>,
    final_field: Field1D,
}

#[pymethods]
impl PyRun {
    #[getter]
    fn snapshots(&self) -> Vec<(f64, PyField)> {
        self.snapshots.iter().map(|(t, f)| (*t, PyField(f.clone()))).collect()
    }

    #[getter]
    fn final_field(&self) -> PyField {
        PyField(self.final_field.clone())
    }

    /// The ledger in the CSV format written by the CLI.
    fn ledger_csv(&self) -> String {
        let mut out = String::from(bbm_core::diagnostics::LEDGER_HEADER);
        out.push('\n');
        for i in 0..self.times.len() {
            out += &format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.times[i],
                self.energy[i],
                self.mean[i],
                self.dissipation_rate[i],
                self.cumulative_dissipation[i],
                self.balance_residual[i]
            );
        }
        out
    }
}

fn picard_settings(window: f64, tolerance: f64, max_iterations: usize, spacing: f64) -> PicardSettings {
    PicardSettings {
        window,
        fixed_point_tolerance: tolerance,
        max_iterations,
        sample_spacing: spacing,
        ..PicardSettings::default()
    }
}

#[pyfunction]
#[pyo3(signature = (u0, horizon, model, dt, record_stride=1, snapshot_stride=0, integrator="onestep", picard_window=0.5))]
#[allow(clippy::too_many_arguments)]
fn integrate(
    py: Python<'_>,
    u0: &PyField,
    horizon: f64,
    model: &PyModel,
    dt: f64,
    record_stride: usize,
    snapshot_stride: usize,
    integrator: &str,
    picard_window: f64,
) -> PyResult<PyRun> {
    let integrator = match integrator {
        "onestep" | "rk4" => Integrator::OneStep,
        "picard" => Integrator::Picard(picard_settings(picard_window, 1e-12, 50, dt)),
        other => return Err(PyValueError::new_err(format!("unknown integrator {other:?}"))),
    };
    let config = IntegrationConfig {
        integrator,
        dt,
        record_stride,
        snapshot_stride,
    };
    let run = py
        .detach(|| bbm_core::integrate(&u0.0, horizon, &model.0, &config))
        .map_err(err)?;
    let r = &run.ledger.records;
    Ok(PyRun {
        times: r.iter().map(|x| x.t).collect(),
        energy: r.iter().map(|x| x.energy).collect(),
        mean: r.iter().map(|x| x.mean).collect(),
        dissipation_rate: r.iter().map(|x| x.dissipation_rate).collect(),
        cumulative_dissipation: r.iter().map(|x| x.cumulative_dissipation).collect(),
        balance_residual: r.iter().map(|x| x.balance_residual).collect(),
        snapshots: run.trajectory.snapshots.into_iter().map(|s| (s.t, s.field)).collect(),
        final_field: run.final_state.u,
    })
}

/// Fixed-point iteration on one window. Returns the final state, the
/// window actually used, and the iteration count.
#[pyfunction]
#[pyo3(signature = (u0, window, model, tolerance=1e-12, max_iterations=50, sample_spacing=1e-3))]
fn picard_solve(
    py: Python<'_>,
    u0: &PyField,
    window: f64,
    model: &PyModel,
    tolerance: f64,
    max_iterations: usize,
    sample_spacing: f64,
) -> PyResult<(PyField, f64, usize)> {
    let settings = picard_settings(window, tolerance, max_iterations, sample_spacing);
    let sol = py
        .detach(|| core_picard_solve(&u0.0, window, &settings, &model.0))
        .map_err(err)?;
    Ok((PyField(sol.path.last().clone()), sol.window, sol.iterations))
}

/// `(1 − ∂x²)⁻¹ f`: spectral on the torus, Neumann finite differences on an interval.
#[pyfunction]
fn helmholtz_inverse(f: &PyField) -> PyResult<PyField> {
    match f.0.grid() {
        Grid::Torus(_) => helmholtz_inverse_periodic(&f.0),
        Grid::Interval(_) => helmholtz_inverse_neumann(&f.0),
    }
    .map(PyField)
    .map_err(err)
}

#[pymodule]
fn bbm(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyDamping>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyRun>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(picard_solve, m)?)?;
    m.add_function(wrap_pyfunction!(helmholtz_inverse, m)?)?;
    Ok(())
}
