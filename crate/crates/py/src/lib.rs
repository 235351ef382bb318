//! Python bindings for the localization toolkit: 1D densities, the
//! localization coefficients, and the spectral experiment pipelines.

use locz_core::density::{
    self, less_concentrated, Density, GaussFamilyParams, GridDensity1D, Interval,
    StepFamilyParams,
};
use locz_core::neumann_poincare as np_ops;
use locz_core::ot;
use locz_core::poisson;
use locz_core::sturm;
use locz_core::transport1d as t1;
use locz_core::Error as CoreError;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: CoreError) -> PyErr {
    match err {
        CoreError::InvalidParameter(_) => PyValueError::new_err(err.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

/// Piecewise-constant nonnegative density on a uniform grid over (x0, x1).
#[pyclass(name = "Density1D", from_py_object)]
#[derive(Clone)]
struct PyDensity1D {
    inner: GridDensity1D,
}

#[pymethods]
impl PyDensity1D {
    #[new]
    fn new(x0: f64, x1: f64, values: Vec<f64>) -> PyResult<Self> {
        let interval = Interval::new(x0, x1).map_err(to_py)?;
        Ok(Self { inner: GridDensity1D::new(interval, values).map_err(to_py)? })
    }

    /// Two normalized indicator bumps of half-width b at a and a + d on (0, 1).
    #[staticmethod]
    #[pyo3(signature = (a, d, b, n, allow_overlap = false))]
    fn step_family(a: f64, d: f64, b: f64, n: usize, allow_overlap: bool) -> PyResult<Self> {
        let u = density::make_step_family(&StepFamilyParams { a, d, b }, n, allow_overlap)
            .map_err(to_py)?;
        Ok(Self { inner: u })
    }

    /// Centered Gaussian-minus-offset family on (0, 1), normalized.
    #[staticmethod]
    fn gauss_family(sigma: f64, n: usize) -> PyResult<Self> {
        let u = density::make_gauss_family(&GaussFamilyParams { sigma }, n).map_err(to_py)?;
        Ok(Self { inner: u })
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values().to_vec()
    }

    fn mass(&self) -> f64 {
        self.inner.mass()
    }

    fn normalized(&self) -> PyResult<Self> {
        Ok(Self { inner: self.inner.clone().normalized().map_err(to_py)? })
    }

    /// L^p norm; pass float('inf') for the sup norm.
    fn lp_norm(&self, p: f64) -> PyResult<f64> {
        self.inner.lp_norm(p).map_err(to_py)
    }

    fn participation_ratio(&self, p: f64, q: f64) -> PyResult<f64> {
        self.inner.participation_ratio(p, q).map_err(to_py)
    }

    /// Wasserstein-2 distance to the uniform density (quantile formula).
    fn beta_w2(&self) -> PyResult<f64> {
        t1::w2_quantile(&self.inner).map_err(to_py)
    }

    /// The same distance through the Sobolev (H^-1) route.
    fn beta_sobolev(&self) -> PyResult<f64> {
        t1::h_minus1_1d(&self.inner).map_err(to_py)
    }

    /// Transport distance to the uniform density on (-margin, 1 + margin).
    fn beta_extended(&self, margin: f64) -> PyResult<f64> {
        t1::extended_domain_beta(&self.inner, margin).map_err(to_py)
    }

    /// Decreasing rearrangement as (cell_width, values).
    fn decreasing_rearrangement(&self) -> PyResult<(f64, Vec<f64>)> {
        let star = self.inner.decreasing_rearrangement().map_err(to_py)?;
        Ok((star.cell_width(), star.values().to_vec()))
    }

    /// Sandwich bounds (lower, upper) on the Wasserstein distance from the
    /// weighted Sobolev norm.
    fn peyre_bounds(&self) -> PyResult<(f64, f64)> {
        let b = poisson::peyre_bounds_1d(&self.inner, None).map_err(to_py)?;
        Ok((b.lower, b.upper))
    }

    fn __len__(&self) -> usize {
        self.inner.n()
    }

    fn __repr__(&self) -> String {
        format!(
            "Density1D(({}, {}), n={}, mass={:.6})",
            self.inner.interval().x0(),
            self.inner.interval().x1(),
            self.inner.n(),
            self.inner.mass()
        )
    }
}

/// Whether `u` is less concentrated than `v` (ties hold both ways).
#[pyfunction]
#[pyo3(name = "less_concentrated")]
fn less_concentrated_py(u: &PyDensity1D, v: &PyDensity1D) -> PyResult<bool> {
    less_concentrated(&u.inner, &v.inner).map_err(to_py)
}

/// Exact LP transport cost between two unit-mass densities on (0, 1) under
/// the squared-Euclidean cost; returns the squared cost.
#[pyfunction]
fn transport_cost(u: &PyDensity1D, v: &PyDensity1D) -> PyResult<f64> {
    let mu = ot::atomize_1d(&u.inner).map_err(to_py)?;
    let nu = ot::atomize_1d(&v.inner).map_err(to_py)?;
    let plan = ot::solve_exact(&mu, &nu, &ot::CostKernel::SquaredEuclidean).map_err(to_py)?;
    Ok(plan.cost)
}

/// Periodized transport distance between two unit-mass densities on (0, 1).
#[pyfunction]
fn periodized_w2(u: &PyDensity1D, v: &PyDensity1D) -> PyResult<f64> {
    t1::periodized_w2_1d(&u.inner, &v.inner).map_err(to_py)
}

/// Localization scores of the reference Sturm-Liouville problem:
/// list of (index, eigenvalue, alpha24_inv, beta).
#[pyfunction]
#[pyo3(signature = (n = 2048, count = 40))]
fn sturm_scores(n: usize, count: usize) -> PyResult<Vec<(usize, f64, f64, f64)>> {
    let problem = sturm::SlProblem::new(sturm::reference_metric, n, count).map_err(to_py)?;
    let pairs = sturm::eigensolve(&sturm::discretize_sl(&problem), count).map_err(to_py)?;
    let scores =
        sturm::score_localization(&pairs, sturm::ScoreMode::Standard).map_err(to_py)?;
    Ok(scores.iter().map(|s| (s.index, s.eigenvalue, s.alpha24_inv, s.beta)).collect())
}

/// Localization scores of Neumann-Poincare eigenfunctions on one of the three
/// reference curves (1-based): list of (eigenvalue, alpha24_inv, beta).
#[pyfunction]
#[pyo3(signature = (curve = 1, n = 256, count = 12))]
fn np_curve_scores(curve: usize, n: usize, count: usize) -> PyResult<Vec<(f64, f64, f64)>> {
    let curves = np_ops::reference_curves();
    let params = curves
        .get(curve.wrapping_sub(1))
        .ok_or_else(|| PyValueError::new_err("curve must be 1, 2 or 3"))?;
    let sampled = np_ops::sample_curve(params, n).map_err(to_py)?;
    let pairs =
        np_ops::np_eigensolve(&np_ops::np_matrix(&sampled), &sampled, count).map_err(to_py)?;
    let scores = np_ops::score_np_localization(&pairs).map_err(to_py)?;
    Ok(scores.iter().map(|s| (s.eigenvalue, s.alpha24_inv, s.beta)).collect())
}

#[pymodule]
fn locz_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensity1D>()?;
    m.add_function(wrap_pyfunction!(less_concentrated_py, m)?)?;
    m.add_function(wrap_pyfunction!(transport_cost, m)?)?;
    m.add_function(wrap_pyfunction!(periodized_w2, m)?)?;
    m.add_function(wrap_pyfunction!(sturm_scores, m)?)?;
    m.add_function(wrap_pyfunction!(np_curve_scores, m)?)?;
    Ok(())
}
