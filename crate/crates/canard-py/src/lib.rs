//! Python bindings for the slow-fast model library. Thin wrappers: models
//! are built once, evaluation methods return plain floats, and report
//! structures come back as dicts and lists.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

use canard::cycles::{sweep_breaking, SweepFamily};
use canard::lienard::{self, ModelRef};
use canard::ode::IntegratorConfig;
use canard::transition::{validate_transition, TransitionSpec};
use canard::verify;

fn lift(e: canard::Error) -> PyErr {
    match &e {
        canard::Error::InvalidParameter { .. } | canard::Error::Config(_) => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, item) in map {
                dict.set_item(k, json_to_py(py, item)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    json_to_py(py, &v)
}

/// Slow-fast family with a turning point at the origin. The transition
/// function is built eagerly so evaluation methods never fail.
#[pyclass(frozen)]
pub struct HopfModel {
    model: lienard::HopfModel,
    spec: TransitionSpec,
}

#[pymethods]
impl HopfModel {
    #[new]
    #[pyo3(signature = (delta=0.01, seeds=None, c_plus=3.0, c_minus=1.0, rho=None))]
    pub fn new(
        delta: f64,
        seeds: Option<Vec<f64>>,
        c_plus: f64,
        c_minus: f64,
        rho: Option<f64>,
    ) -> PyResult<Self> {
        let seeds = seeds.unwrap_or_else(|| vec![0.3]);
        let model = match rho {
            Some(r) => lienard::HopfModel::with_rho(delta, &seeds, c_plus, c_minus, r),
            None => lienard::HopfModel::new(delta, &seeds, c_plus, c_minus),
        }
        .map_err(lift)?;
        let spec = model.transition().map_err(lift)?;
        Ok(HopfModel { model, spec })
    }

    #[getter]
    pub fn delta(&self) -> f64 {
        self.model.delta()
    }

    #[getter]
    pub fn seeds(&self) -> Vec<f64> {
        self.model.seeds().to_vec()
    }

    #[getter]
    pub fn c_plus(&self) -> f64 {
        self.model.c_plus()
    }

    #[getter]
    pub fn c_minus(&self) -> f64 {
        self.model.c_minus()
    }

    #[getter]
    pub fn rho(&self) -> f64 {
        self.model.rho()
    }

    #[getter]
    pub fn x_window(&self) -> f64 {
        self.model.x_window()
    }

    /// Critical curve height F(x).
    pub fn big_f(&self, x: f64) -> f64 {
        self.model.big_f(x)
    }

    /// Transition function value.
    pub fn phi(&self, x: f64) -> f64 {
        self.spec.eval(x)
    }

    /// Transition function derivative.
    pub fn phi_d1(&self, x: f64) -> f64 {
        self.spec.d1(x)
    }

    /// Slow divergence integral at one point.
    pub fn sdi(&self, x: f64) -> PyResult<f64> {
        lienard::sdi_hopf(&self.model, x).map_err(lift)
    }

    /// Shape report for the transition function.
    pub fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &validate_transition(&self.spec))
    }

    /// Sampled divergence-integral profile with certified zeros.
    #[pyo3(signature = (n_grid=400, interval=None))]
    pub fn sdi_profile(
        &self,
        py: Python<'_>,
        n_grid: usize,
        interval: Option<(f64, f64)>,
    ) -> PyResult<Py<PyAny>> {
        let profile =
            lienard::find_sdi_zeros(ModelRef::Hopf(&self.model), interval, n_grid).map_err(lift)?;
        to_py(py, &profile)
    }

    /// Singular balanced cycle through the point (x, F(x)).
    pub fn canard_cycle(&self, py: Python<'_>, x: f64) -> PyResult<Py<PyAny>> {
        let spec = lienard::canard_cycle(ModelRef::Hopf(&self.model), x).map_err(lift)?;
        to_py(py, &spec)
    }

    /// Sweep the breaking parameter and report detected limit cycles.
    #[pyo3(signature = (eps, lo=-5e-3, hi=5e-3, n=21))]
    pub fn sweep_cycles(
        &self,
        py: Python<'_>,
        eps: f64,
        lo: f64,
        hi: f64,
        n: usize,
    ) -> PyResult<Py<PyAny>> {
        let report = sweep_breaking(
            SweepFamily::Hopf(&self.model),
            eps,
            (lo, hi),
            n,
            &IntegratorConfig::default(),
        )
        .map_err(lift)?;
        to_py(py, &report)
    }
}

/// Slow-fast family with a fold: two-well transition function and a
/// breaking parameter b carried inside the critical curve.
#[pyclass(frozen)]
pub struct JumpModel {
    model: lienard::JumpModel,
    spec: TransitionSpec,
}

#[pymethods]
impl JumpModel {
    #[new]
    #[pyo3(signature = (eta=0.5, b=0.0, delta=0.01, seeds=None, c_plus=3.0, c_minus=1.0, rho=None))]
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        eta: f64,
        b: f64,
        delta: f64,
        seeds: Option<Vec<f64>>,
        c_plus: f64,
        c_minus: f64,
        rho: Option<f64>,
    ) -> PyResult<Self> {
        let seeds = seeds.unwrap_or_else(|| vec![0.75, 0.85]);
        let model = match rho {
            Some(r) => lienard::JumpModel::with_rho(eta, b, delta, &seeds, c_plus, c_minus, r),
            None => lienard::JumpModel::new(eta, b, delta, &seeds, c_plus, c_minus),
        }
        .map_err(lift)?;
        let spec = model.transition().map_err(lift)?;
        Ok(JumpModel { model, spec })
    }

    #[getter]
    pub fn eta(&self) -> f64 {
        self.model.eta()
    }

    #[getter]
    pub fn b(&self) -> f64 {
        self.model.b()
    }

    #[getter]
    pub fn delta(&self) -> f64 {
        self.model.delta()
    }

    #[getter]
    pub fn seeds(&self) -> Vec<f64> {
        self.model.seeds().to_vec()
    }

    #[getter]
    pub fn c_plus(&self) -> f64 {
        self.model.c_plus()
    }

    #[getter]
    pub fn c_minus(&self) -> f64 {
        self.model.c_minus()
    }

    #[getter]
    pub fn rho(&self) -> f64 {
        self.model.rho()
    }

    #[getter]
    pub fn x_window(&self) -> f64 {
        self.model.x_window()
    }

    /// Same family at a different breaking value.
    pub fn with_b(&self, b: f64) -> PyResult<Self> {
        let model = self.model.with_b(b).map_err(lift)?;
        let spec = model.transition().map_err(lift)?;
        Ok(JumpModel { model, spec })
    }

    /// Unbroken critical curve height.
    pub fn f0(&self, x: f64) -> f64 {
        self.model.f0(x)
    }

    /// Broken critical curve height.
    pub fn fb(&self, x: f64) -> f64 {
        self.model.fb(x)
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.spec.eval(x)
    }

    pub fn phi_d1(&self, x: f64) -> f64 {
        self.spec.d1(x)
    }

    pub fn sdi(&self, x: f64) -> PyResult<f64> {
        lienard::sdi_jump(&self.model, x).map_err(lift)
    }

    /// Leading-order divergence integral, a polynomial in closed form.
    pub fn i1(&self, x: f64) -> PyResult<f64> {
        lienard::i1(&self.model, x).map_err(lift)
    }

    /// Landing points of the fast jump through the broken fold.
    pub fn jump_points(&self) -> PyResult<(f64, f64)> {
        lienard::jump_points(&self.model).map_err(lift)
    }

    pub fn validate(&self, py: Python<'_>) -> PyResult<Py<PyAny>> {
        to_py(py, &validate_transition(&self.spec))
    }

    #[pyo3(signature = (n_grid=400, interval=None))]
    pub fn sdi_profile(
        &self,
        py: Python<'_>,
        n_grid: usize,
        interval: Option<(f64, f64)>,
    ) -> PyResult<Py<PyAny>> {
        let profile =
            lienard::find_sdi_zeros(ModelRef::Jump(&self.model), interval, n_grid).map_err(lift)?;
        to_py(py, &profile)
    }

    pub fn canard_cycle(&self, py: Python<'_>, x: f64) -> PyResult<Py<PyAny>> {
        let spec = lienard::canard_cycle(ModelRef::Jump(&self.model), x).map_err(lift)?;
        to_py(py, &spec)
    }

    #[pyo3(signature = (eps, lo=-5e-3, hi=5e-3, n=21))]
    pub fn sweep_cycles(
        &self,
        py: Python<'_>,
        eps: f64,
        lo: f64,
        hi: f64,
        n: usize,
    ) -> PyResult<Py<PyAny>> {
        let report = sweep_breaking(
            SweepFamily::Jump(&self.model),
            eps,
            (lo, hi),
            n,
            &IntegratorConfig::default(),
        )
        .map_err(lift)?;
        to_py(py, &report)
    }
}

/// Run the fast invariant checks; returns one dict per check.
#[pyfunction]
fn verify_quick(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let checks = verify::run_quick().map_err(lift)?;
    to_py(py, &checks)
}

/// Run every invariant check, including slow cycle detection.
#[pyfunction]
fn verify_full(py: Python<'_>) -> PyResult<Py<PyAny>> {
    let checks = verify::run_full().map_err(lift)?;
    to_py(py, &checks)
}

#[pymodule]
fn canard_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<HopfModel>()?;
    m.add_class::<JumpModel>()?;
    m.add_function(wrap_pyfunction!(verify_quick, m)?)?;
    m.add_function(wrap_pyfunction!(verify_full, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrappers_build_and_evaluate() {
        let h = HopfModel::new(0.01, None, 3.0, 1.0, None).unwrap();
        assert_eq!(h.phi(1.1), 1.0);
        assert_eq!(h.phi(-1.1), -1.0);
        assert!((h.big_f(0.3) - 0.045).abs() < 1e-3);

        let j = JumpModel::new(0.5, 0.0, 0.01, None, 3.0, 1.0, None).unwrap();
        assert_eq!(j.eta(), 0.5);
        let shifted = j.with_b(0.01).unwrap();
        assert_eq!(shifted.b(), 0.01);
    }

    #[test]
    fn bad_parameters_surface_as_value_errors() {
        assert!(HopfModel::new(f64::NAN, None, 3.0, 1.0, None).is_err());
        assert!(JumpModel::new(0.5, 0.0, 0.01, Some(vec![0.2]), 3.0, 1.0, None).is_err());
    }
}
