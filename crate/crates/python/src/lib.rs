//! Python bindings: states, Bloch tensors, invariants, canonical forms and
//! the equivalence decision.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use lueq::bloch;
use lueq::canonical;
use lueq::equivalence;
use lueq::invariants::{InvariantSet3, TwoQubitSet};
use lueq::local_action;
use lueq::orbit_dim;
use lueq::reconstruct;
use lueq::states::{self, CMatrix, SystemShape};

fn to_py(e: lueq::Error) -> PyErr {
    if e.is_parse() || e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyArithmeticError::new_err(e.to_string())
    }
}

fn shape(dims: Vec<usize>) -> PyResult<SystemShape> {
    SystemShape::new(dims).map_err(to_py)
}

fn two_qubit_set(set: &str) -> PyResult<TwoQubitSet> {
    match set {
        "minimal" => Ok(TwoQubitSet::Minimal),
        "full" => Ok(TwoQubitSet::Full),
        other => Err(PyValueError::new_err(format!("set must be 'minimal' or 'full', got {other:?}"))),
    }
}

/// A validated density matrix on a product of qudits.
#[pyclass(name = "DensityMatrix", module = "pylueq", frozen)]
pub struct PyDensityMatrix {
    inner: states::DensityMatrix,
}

#[pymethods]
impl PyDensityMatrix {
    /// Validate `matrix` (rows of complex numbers) against `dims`.
    #[new]
    #[pyo3(signature = (dims, matrix, repair = false))]
    fn new(dims: Vec<usize>, matrix: Vec<Vec<Complex64>>, repair: bool) -> PyResult<Self> {
        let s = shape(dims)?;
        let d = matrix.len();
        if matrix.iter().any(|row| row.len() != d) {
            return Err(PyValueError::new_err("matrix must be square"));
        }
        let m = CMatrix::from_fn(d, d, |r, c| matrix[r][c]);
        let inner = states::validate_with(m, s, states::ValidateOptions { repair }).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn maximally_mixed(dims: Vec<usize>) -> PyResult<Self> {
        Ok(Self { inner: states::DensityMatrix::maximally_mixed(shape(dims)?) })
    }

    #[staticmethod]
    fn pure(dims: Vec<usize>, amplitudes: Vec<Complex64>) -> PyResult<Self> {
        let inner = states::DensityMatrix::pure(shape(dims)?, &amplitudes).map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Seeded random state of the given rank (full rank by default).
    #[staticmethod]
    #[pyo3(signature = (dims, seed, rank = None))]
    fn random(dims: Vec<usize>, seed: u64, rank: Option<usize>) -> PyResult<Self> {
        let s = shape(dims)?;
        let rank = rank.unwrap_or(s.total_dim());
        Ok(Self { inner: states::random_state(&s, rank, seed).map_err(to_py)? })
    }

    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        Ok(Self { inner: states::read_state(path).map_err(to_py)? })
    }

    fn write(&self, path: &str) -> PyResult<()> {
        states::write_state(&self.inner, path).map_err(to_py)
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.shape().dims().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        let m = self.inner.matrix();
        (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
    }

    /// Eigenvalues in increasing order.
    fn eigenvalues(&self) -> Vec<f64> {
        self.inner.eigenvalues()
    }

    fn purity(&self) -> f64 {
        self.inner.purity()
    }

    /// Conjugate by a seeded Haar-random local unitary.
    fn haar_rotated(&self, seed: u64) -> PyResult<Self> {
        let u = local_action::haar_local(self.inner.shape(), seed);
        Ok(Self { inner: local_action::apply(&u, &self.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("DensityMatrix(dims={})", self.inner.shape())
    }
}

/// Pauli-basis coefficients of a 1-, 2- or 3-qubit state.
#[pyclass(name = "BlochTensor", module = "pylueq", frozen)]
pub struct PyBlochTensor {
    inner: bloch::BlochTensor,
}

fn rows(m: &nalgebra::Matrix3<f64>) -> Vec<Vec<f64>> {
    (0..3).map(|r| (0..3).map(|c| m[(r, c)]).collect()).collect()
}

#[pymethods]
impl PyBlochTensor {
    /// Rebuild from the flat coordinate list (`4^n - 1` values).
    #[new]
    fn new(n: usize, coords: Vec<f64>) -> PyResult<Self> {
        Ok(Self { inner: bloch::BlochTensor::from_coords(n, &coords).map_err(to_py)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn alpha(&self) -> Vec<f64> {
        self.inner.alpha.iter().copied().collect()
    }

    #[getter]
    fn beta(&self) -> Vec<f64> {
        self.inner.beta.iter().copied().collect()
    }

    #[getter]
    fn gamma(&self) -> Vec<f64> {
        self.inner.gamma.iter().copied().collect()
    }

    #[getter]
    fn pair_12(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.pair_12)
    }

    #[getter]
    fn pair_13(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.pair_13)
    }

    #[getter]
    fn pair_23(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.pair_23)
    }

    /// The 27 triple coefficients, flat with index `9i + 3j + k`.
    #[getter]
    fn triple(&self) -> Vec<f64> {
        self.inner.triple.as_slice().to_vec()
    }

    fn coords(&self) -> Vec<f64> {
        self.inner.to_coords()
    }

    fn max_abs_diff(&self, other: &PyBlochTensor) -> f64 {
        self.inner.max_abs_diff(&other.inner)
    }

    fn to_state(&self) -> PyResult<PyDensityMatrix> {
        Ok(PyDensityMatrix { inner: bloch::reconstruct(&self.inner).map_err(to_py)? })
    }

    fn __repr__(&self) -> String {
        format!("BlochTensor(n={})", self.inner.n())
    }
}

/// Canonical representative with its genericity margins.
#[pyclass(name = "CanonicalPoint", module = "pylueq", frozen)]
pub struct PyCanonicalPoint {
    inner: canonical::CanonicalPoint,
}

#[pymethods]
impl PyCanonicalPoint {
    #[getter]
    fn tensor(&self) -> PyBlochTensor {
        PyBlochTensor { inner: self.inner.tensor.clone() }
    }

    #[getter]
    fn generic(&self) -> bool {
        self.inner.report.generic
    }

    #[getter]
    fn eigengaps(&self) -> Vec<f64> {
        self.inner.report.eigengaps.clone()
    }

    fn failures(&self) -> Vec<String> {
        self.inner.report.failures()
    }

    /// Per-site rotation matrices, or `None` for reconstructed points.
    #[getter]
    fn gauge(&self) -> Option<Vec<Vec<Vec<f64>>>> {
        self.inner.gauge.as_ref().map(|g| g.rotations().iter().map(rows).collect())
    }
}

#[pyfunction]
fn expand(rho: &PyDensityMatrix) -> PyResult<PyBlochTensor> {
    Ok(PyBlochTensor { inner: bloch::expand(&rho.inner).map_err(to_py)? })
}

/// Invariant names and values for a 1-, 2- or 3-qubit state.
#[pyfunction]
#[pyo3(signature = (rho, set = "full"))]
fn invariants<'py>(
    py: Python<'py>,
    rho: &PyDensityMatrix,
    set: &str,
) -> PyResult<Bound<'py, PyDict>> {
    let t = bloch::expand(&rho.inner).map_err(to_py)?;
    let rec = lueq::invariants::record(&t, two_qubit_set(set)?).map_err(to_py)?;
    let out = PyDict::new(py);
    for (name, value) in rec.names.iter().zip(&rec.values) {
        out.set_item(name, value)?;
    }
    Ok(out)
}

/// `(I, tr rho^2)` for a qubit, satisfying `tr rho^2 = 1/2 + 2 I`.
#[pyfunction]
fn one_qubit_invariant(rho: &PyDensityMatrix) -> PyResult<(f64, f64)> {
    let t = bloch::expand(&rho.inner).map_err(to_py)?;
    let v = lueq::invariants::invariant1(&t).map_err(to_py)?;
    Ok((v.invariant, v.purity))
}

#[pyfunction]
fn canonicalize(rho: &PyDensityMatrix) -> PyResult<PyCanonicalPoint> {
    let t = bloch::expand(&rho.inner).map_err(to_py)?;
    Ok(PyCanonicalPoint { inner: canonical::canonicalize(&t).map_err(to_py)? })
}

/// Rebuild the 3-qubit canonical point from the 75 invariant values.
#[pyfunction]
fn reconstruct_canonical(values: Vec<f64>) -> PyResult<PyCanonicalPoint> {
    let inv = InvariantSet3::from_vec(&values).map_err(to_py)?;
    Ok(PyCanonicalPoint { inner: reconstruct::reconstruct_canonical(&inv).map_err(to_py)? })
}

/// `(verdict, witness description or None)`.
#[pyfunction]
fn decide(a: &PyDensityMatrix, b: &PyDensityMatrix) -> PyResult<(String, Option<String>)> {
    let v = equivalence::decide(&a.inner, &b.inner).map_err(to_py)?;
    Ok((v.verdict.to_string(), v.witness.map(|w| w.describe())))
}

/// `(residual, best start index)` from the multi-start local search.
#[pyfunction]
#[pyo3(signature = (a, b, restarts = 20, seed = 0))]
fn oracle_search(
    a: &PyDensityMatrix,
    b: &PyDensityMatrix,
    restarts: usize,
    seed: u64,
) -> PyResult<(f64, usize)> {
    let o = equivalence::oracle_search(&a.inner, &b.inner, restarts, seed).map_err(to_py)?;
    Ok((o.residual, o.restart))
}

/// `(dimension, singular values decreasing)`.
#[pyfunction]
fn orbit_dimension(rho: &PyDensityMatrix) -> (usize, Vec<f64>) {
    let od = orbit_dim::orbit_dimension(&rho.inner);
    (od.dimension, od.singular_values)
}

#[pyfunction]
fn invariant_count(dims: Vec<usize>) -> PyResult<u128> {
    Ok(orbit_dim::invariant_count_formula(&shape(dims)?).value)
}

#[pyfunction]
fn invariant_count_numeric(rho: &PyDensityMatrix) -> usize {
    orbit_dim::invariant_count_numeric(&rho.inner)
}

#[pymodule]
fn pylueq(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDensityMatrix>()?;
    m.add_class::<PyBlochTensor>()?;
    m.add_class::<PyCanonicalPoint>()?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(invariants, m)?)?;
    m.add_function(wrap_pyfunction!(one_qubit_invariant, m)?)?;
    m.add_function(wrap_pyfunction!(canonicalize, m)?)?;
    m.add_function(wrap_pyfunction!(reconstruct_canonical, m)?)?;
    m.add_function(wrap_pyfunction!(decide, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_search, m)?)?;
    m.add_function(wrap_pyfunction!(orbit_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_count, m)?)?;
    m.add_function(wrap_pyfunction!(invariant_count_numeric, m)?)?;
    m.add("INVARIANT_NAMES_3", InvariantSet3::names())?;
    Ok(())
}
