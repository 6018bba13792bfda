//! Python bindings: grids, fields, energies, constructions, bound checks and
//! the minimizer. Dense data crosses the boundary as flat lists in storage
//! order (`i * ny + j`).

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use wellscape::bounds::{self, BoundReport};
use wellscape::calibration::Calibration;
use wellscape::constructions::{self, BranchedSpec, BumpSpec, PotentialSpec};
use wellscape::landscape::{self, MinimizeConfig};
use wellscape::{EnergyBreakdown, EnergyParams, Grid, ScalarField, Variant};

fn py_err(e: wellscape::Error) -> PyErr {
    if e.is_numerical() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn params(epsilon: f64, delta: f64, variant: u8) -> PyResult<EnergyParams> {
    let v = Variant::try_from(variant).map_err(PyValueError::new_err)?;
    EnergyParams::new(epsilon, delta, v).map_err(py_err)
}

fn breakdown_dict<'py>(py: Python<'py>, b: &EnergyBreakdown) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("surface", b.surface)?;
    d.set_item("elastic", b.elastic)?;
    d.set_item("well", b.well)?;
    d.set_item("total", b.total)?;
    d.set_item("area_B", b.area_b)?;
    d.set_item("area_A", b.area_a)?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &BoundReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("check", &r.check)?;
    d.set_item("context", &r.context)?;
    d.set_item("lhs", r.lhs)?;
    d.set_item("rhs", r.rhs)?;
    d.set_item("slack", r.slack)?;
    d.set_item("holds", r.holds)?;
    Ok(d)
}

/// Uniform grid on `[0, L] x [0, 1)`, periodic in `y`.
#[pyclass(name = "Grid", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGrid {
    inner: Grid,
}

#[pymethods]
impl PyGrid {
    #[new]
    #[pyo3(signature = (l, nx, ny))]
    fn new(l: f64, nx: usize, ny: usize) -> PyResult<Self> {
        Grid::new(l, nx, ny).map(|inner| PyGrid { inner }).map_err(py_err)
    }

    #[getter]
    fn l(&self) -> f64 {
        self.inner.l
    }

    #[getter]
    fn nx(&self) -> usize {
        self.inner.nx
    }

    #[getter]
    fn ny(&self) -> usize {
        self.inner.ny
    }

    #[getter]
    fn hx(&self) -> f64 {
        self.inner.hx
    }

    #[getter]
    fn hy(&self) -> f64 {
        self.inner.hy
    }

    fn __repr__(&self) -> String {
        format!("Grid(l={}, nx={}, ny={})", self.inner.l, self.inner.nx, self.inner.ny)
    }
}

/// Nodal scalar field on a [`Grid`].
#[pyclass(name = "Field", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyField {
    inner: ScalarField,
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn zeros(grid: &PyGrid) -> Self {
        PyField { inner: ScalarField::zeros(grid.inner) }
    }

    #[staticmethod]
    fn from_values(grid: &PyGrid, values: Vec<f64>) -> PyResult<Self> {
        ScalarField::from_values(grid.inner, values).map(|inner| PyField { inner }).map_err(py_err)
    }

    #[staticmethod]
    fn from_wsf(text: &str) -> PyResult<Self> {
        wellscape::wsf::from_str(text).map(|inner| PyField { inner }).map_err(py_err)
    }

    fn to_wsf(&self) -> String {
        wellscape::wsf::to_string(&self.inner)
    }

    #[getter]
    fn grid(&self) -> PyGrid {
        PyGrid { inner: self.inner.grid }
    }

    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    fn at(&self, i: usize, j: usize) -> PyResult<f64> {
        let g = self.inner.grid;
        if i > g.nx || j >= g.ny {
            return Err(PyValueError::new_err(format!("index ({i}, {j}) outside {}x{}", g.nx + 1, g.ny)));
        }
        Ok(self.inner.at(i, j))
    }

    fn scaled(&self, a: f64) -> Self {
        PyField { inner: self.inner.scaled(a) }
    }

    fn l2_norm(&self) -> f64 {
        wellscape::field::l2_norm(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.values.len()
    }

    fn __repr__(&self) -> String {
        let g = self.inner.grid;
        format!("Field({}x{}, max|u|={:e})", g.nx, g.ny, self.inner.max_abs())
    }
}

/// Sharp energy breakdown as a dict.
#[pyfunction]
#[pyo3(signature = (field, epsilon, delta, variant = 1))]
fn energy<'py>(py: Python<'py>, field: &PyField, epsilon: f64, delta: f64, variant: u8) -> PyResult<Bound<'py, PyDict>> {
    let p = params(epsilon, delta, variant)?;
    let b = wellscape::energy::energy(&field.inner, &p).map_err(py_err)?;
    breakdown_dict(py, &b)
}

/// Gradient of the smoothed energy.
#[pyfunction]
#[pyo3(signature = (field, epsilon, delta, variant = 1, smooth_w = 0.25))]
fn energy_gradient(field: &PyField, epsilon: f64, delta: f64, variant: u8, smooth_w: f64) -> PyResult<PyField> {
    let p = params(epsilon, delta, variant)?.with_smoothing(smooth_w);
    p.validate().map_err(py_err)?;
    wellscape::energy::energy_gradient(&field.inner, &p).map(|inner| PyField { inner }).map_err(py_err)
}

#[pyfunction]
fn branched_seed(epsilon: f64, grid: &PyGrid) -> PyResult<PyField> {
    let spec = BranchedSpec::new(epsilon, grid.inner.l).map_err(py_err)?;
    constructions::branched_seed(&spec, &grid.inner).map(|inner| PyField { inner }).map_err(py_err)
}

#[pyfunction]
fn nucleation_bump(a: f64, delta_x: f64, lam: f64, grid: &PyGrid) -> PyResult<PyField> {
    let spec = BumpSpec::new(a, delta_x, lam, grid.inner.l).map_err(py_err)?;
    constructions::nucleation_bump(&spec, &grid.inner).map(|inner| PyField { inner }).map_err(py_err)
}

#[pyfunction]
fn potential_seed(j: u32, grid: &PyGrid) -> PyResult<PyField> {
    let spec = PotentialSpec::new(j, grid.inner.l).map_err(py_err)?;
    constructions::potential_seed(&spec, &grid.inner).map(|inner| PyField { inner }).map_err(py_err)
}

/// Discrete 1D obstacle problem; returns `{"value", "multipliers"}`.
#[pyfunction]
#[pyo3(signature = (y1, y2, nodes = 512))]
fn obstacle_qp<'py>(py: Python<'py>, y1: f64, y2: f64, nodes: usize) -> PyResult<Bound<'py, PyDict>> {
    let qp = bounds::obstacle_qp(y1, y2, nodes).map_err(py_err)?;
    let d = PyDict::new(py);
    d.set_item("value", qp.value)?;
    d.set_item("multipliers", qp.multipliers.to_vec())?;
    Ok(d)
}

#[pyfunction]
fn lemma1_check<'py>(py: Python<'py>, field: &PyField) -> PyResult<Bound<'py, PyDict>> {
    let r = bounds::lemma1_check(&field.inner).map_err(py_err)?;
    report_dict(py, &r)
}

/// `(r, s)` for a given constant.
#[pyfunction]
fn theorem2_bounds(epsilon: f64, delta: f64, l: f64, c: f64) -> (f64, f64) {
    bounds::theorem2_bounds(epsilon, delta, l, c)
}

/// Runs the continuation minimizer; returns the final field and its sharp
/// energy breakdown.
#[pyfunction]
#[pyo3(signature = (field, epsilon, delta, variant = 1, max_iters = 400))]
fn minimize<'py>(
    py: Python<'py>,
    field: &PyField,
    epsilon: f64,
    delta: f64,
    variant: u8,
    max_iters: usize,
) -> PyResult<(PyField, Bound<'py, PyDict>)> {
    let p = params(epsilon, delta, variant)?;
    let cfg = MinimizeConfig { max_iters, ..MinimizeConfig::default() };
    let start = field.inner.clone();
    let r = py.detach(move || landscape::minimize(&start, &p, &cfg)).map_err(py_err)?;
    let d = breakdown_dict(py, &r.breakdown)?;
    Ok((PyField { inner: r.field }, d))
}

/// Bisection bracket `(lo, hi)` for the critical well depth.
#[pyfunction]
#[pyo3(signature = (epsilon, grid, variant = 1, tol_rel = 0.25))]
fn critical_delta(py: Python<'_>, epsilon: f64, grid: &PyGrid, variant: u8, tol_rel: f64) -> PyResult<(f64, f64)> {
    let v = Variant::try_from(variant).map_err(PyValueError::new_err)?;
    let cal = Calibration::load().map_err(py_err)?;
    let g = grid.inner;
    let r = py
        .detach(move || landscape::critical_delta(epsilon, v, &g, &MinimizeConfig::default(), tol_rel, &cal))
        .map_err(py_err)?;
    Ok((r.delta_lo, r.delta_hi))
}

#[pymodule]
pub fn wellscape_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGrid>()?;
    m.add_class::<PyField>()?;
    m.add_function(wrap_pyfunction!(energy, m)?)?;
    m.add_function(wrap_pyfunction!(energy_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(branched_seed, m)?)?;
    m.add_function(wrap_pyfunction!(nucleation_bump, m)?)?;
    m.add_function(wrap_pyfunction!(potential_seed, m)?)?;
    m.add_function(wrap_pyfunction!(obstacle_qp, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1_check, m)?)?;
    m.add_function(wrap_pyfunction!(theorem2_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(minimize, m)?)?;
    m.add_function(wrap_pyfunction!(critical_delta, m)?)?;
    Ok(())
}
