//! Python bindings for the state toolkit: state construction, Schmidt
//! analysis, the product decision with witnesses, randomized probing,
//! partial traces, brute-force oracles, and state-file I/O.

use std::path::PathBuf;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use prodstate::criterion::{
    check_mixed_product, check_pure_product, probe_condition, Factorization, ProductVerdict,
};
use prodstate::op_schmidt::operator_schmidt_decompose;
use prodstate::oracle::{oracle_mixed_product, oracle_pure_product};
use prodstate::schmidt::schmidt_decompose;
use prodstate::statefile::{load_state as load_state_file, save_state as save_state_file};
use prodstate::tensor::partial_trace;
use prodstate::{states, BipartiteSplit, Dims, State};

fn pyerr(e: prodstate::Error) -> PyErr {
    match &e {
        prodstate::Error::Io(_) => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn make_dims(dims: Vec<usize>) -> PyResult<Dims> {
    Dims::new(dims).map_err(pyerr)
}

fn make_split(cut: usize, dims: &Dims) -> PyResult<BipartiteSplit> {
    BipartiteSplit::new(cut, dims).map_err(pyerr)
}

fn matrix_from_rows(rows: Vec<Vec<C64>>) -> PyResult<Array2<C64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("matrix rows must form a square"));
    }
    let flat: Vec<C64> = rows.into_iter().flatten().collect();
    Array2::from_shape_vec((n, n), flat)
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn matrix_to_rows(m: &Array2<C64>) -> Vec<Vec<C64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Outcome of a product decision: a factorization or a witness violation.
#[pyclass]
struct Verdict {
    #[pyo3(get)]
    is_product: bool,
    #[pyo3(get)]
    residual: f64,
    #[pyo3(get)]
    violation: Option<f64>,
    #[pyo3(get)]
    factors_pure: Option<Vec<Vec<C64>>>,
    #[pyo3(get)]
    factors_mixed: Option<Vec<Vec<Vec<C64>>>>,
}

impl Verdict {
    fn from_core(v: ProductVerdict) -> Self {
        let (mut factors_pure, mut factors_mixed) = (None, None);
        match v.factors {
            Some(Factorization::Pure(fs)) => {
                factors_pure = Some(fs.iter().map(|f| f.to_vec()).collect());
            }
            Some(Factorization::Mixed(fs)) => {
                factors_mixed = Some(fs.iter().map(matrix_to_rows).collect());
            }
            None => {}
        }
        Verdict {
            is_product: v.is_product,
            residual: v.residual,
            violation: v.witness.as_ref().map(|w| w.max_violation),
            factors_pure,
            factors_mixed,
        }
    }
}

#[pymethods]
impl Verdict {
    fn __repr__(&self) -> String {
        match self.violation {
            Some(v) => format!(
                "Verdict(is_product={}, residual={:e}, violation={:e})",
                self.is_product, self.residual, v
            ),
            None => format!(
                "Verdict(is_product={}, residual={:e})",
                self.is_product, self.residual
            ),
        }
    }
}

/// A normalized state vector over a tensor product of finite factors.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct PureState {
    inner: prodstate::PureState,
}

#[pymethods]
impl PureState {
    #[new]
    fn new(dims: Vec<usize>, amplitudes: Vec<C64>) -> PyResult<Self> {
        let dims = make_dims(dims)?;
        let amp = Array1::from_vec(amplitudes);
        let inner = prodstate::PureState::new(dims, amp).map_err(pyerr)?;
        Ok(PureState { inner })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().factors().to_vec()
    }

    fn amplitudes(&self) -> Vec<C64> {
        self.inner.amplitudes().to_vec()
    }

    fn norm(&self) -> f64 {
        self.inner.norm()
    }

    /// Schmidt decomposition across the cut separating the first `cut`
    /// factors from the rest: `(weights, left_vectors, right_vectors)`.
    #[pyo3(signature = (cut, tol = 1e-12))]
    fn schmidt(&self, cut: usize, tol: f64) -> PyResult<(Vec<f64>, Vec<Vec<C64>>, Vec<Vec<C64>>)> {
        let split = make_split(cut, self.inner.dims())?;
        let sd = schmidt_decompose(&self.inner, split, tol).map_err(pyerr)?;
        Ok((
            sd.lambdas().to_vec(),
            sd.left_vectors().iter().map(|v| v.to_vec()).collect(),
            sd.right_vectors().iter().map(|v| v.to_vec()).collect(),
        ))
    }

    /// Decide whether the state is a product across every factor.
    #[pyo3(signature = (tol = 1e-8))]
    fn check_product(&self, tol: f64) -> PyResult<Verdict> {
        let v = check_pure_product(&self.inner, tol).map_err(pyerr)?;
        Ok(Verdict::from_core(v))
    }

    /// Randomized violation search: `(max_violation, probes_evaluated)`.
    #[pyo3(signature = (probes = 200, seed = 0, tol = 1e-8))]
    fn probe(&self, probes: usize, seed: u64, tol: f64) -> PyResult<(f64, usize)> {
        let report = probe_condition(&State::Pure(self.inner.clone()), probes, seed, tol)
            .map_err(pyerr)?;
        Ok((report.max_violation, report.probes_evaluated))
    }

    /// Alternating-least-squares product fit: `(is_product, overlap)`.
    #[pyo3(signature = (tol = 1e-8, max_iters = 400))]
    fn oracle(&self, tol: f64, max_iters: usize) -> PyResult<(bool, f64)> {
        let out = oracle_pure_product(&self.inner, tol, max_iters).map_err(pyerr)?;
        Ok((out.is_product, out.overlap))
    }

    fn density_matrix(&self) -> PyResult<MixedState> {
        let inner = self.inner.density_matrix().map_err(pyerr)?;
        Ok(MixedState { inner })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_state_file(&path, &State::Pure(self.inner.clone())).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("PureState(dims={:?})", self.inner.dims().factors())
    }
}

/// A density matrix over a tensor product of finite factors.
#[pyclass(skip_from_py_object)]
#[derive(Clone)]
struct MixedState {
    inner: prodstate::MixedState,
}

#[pymethods]
impl MixedState {
    #[new]
    fn new(dims: Vec<usize>, matrix: Vec<Vec<C64>>) -> PyResult<Self> {
        let dims = make_dims(dims)?;
        let m = matrix_from_rows(matrix)?;
        let inner = prodstate::MixedState::new(dims, m).map_err(pyerr)?;
        Ok(MixedState { inner })
    }

    #[getter]
    fn dims(&self) -> Vec<usize> {
        self.inner.dims().factors().to_vec()
    }

    fn matrix(&self) -> Vec<Vec<C64>> {
        matrix_to_rows(self.inner.matrix())
    }

    /// Reduced state on the kept factors, in their original order.
    fn partial_trace(&self, keep: Vec<usize>) -> PyResult<MixedState> {
        let inner = partial_trace(&self.inner, &keep).map_err(pyerr)?;
        Ok(MixedState { inner })
    }

    /// Operator Schmidt coefficients across the cut after the first `cut`
    /// factors, optionally in the hermitian-respecting form.
    #[pyo3(signature = (cut, tol = 1e-12, hermitian = true))]
    fn operator_schmidt_coefficients(
        &self,
        cut: usize,
        tol: f64,
        hermitian: bool,
    ) -> PyResult<Vec<f64>> {
        let split = make_split(cut, self.inner.dims())?;
        let osd = operator_schmidt_decompose(
            &self.inner.matrix().view(),
            self.inner.dims(),
            split,
            tol,
            hermitian,
        )
        .map_err(pyerr)?;
        Ok(osd.coefficients().to_vec())
    }

    /// Decide whether the state is a product across every factor.
    #[pyo3(signature = (tol = 1e-8))]
    fn check_product(&self, tol: f64) -> PyResult<Verdict> {
        let v = check_mixed_product(&self.inner, tol).map_err(pyerr)?;
        Ok(Verdict::from_core(v))
    }

    /// Randomized violation search: `(max_violation, probes_evaluated)`.
    #[pyo3(signature = (probes = 200, seed = 0, tol = 1e-8))]
    fn probe(&self, probes: usize, seed: u64, tol: f64) -> PyResult<(f64, usize)> {
        let report = probe_condition(&State::Mixed(self.inner.clone()), probes, seed, tol)
            .map_err(pyerr)?;
        Ok((report.max_violation, report.probes_evaluated))
    }

    /// Distance to the product of the single-factor marginals:
    /// `(is_product, trace_distance)`.
    #[pyo3(signature = (tol = 1e-8))]
    fn oracle(&self, tol: f64) -> PyResult<(bool, f64)> {
        let out = oracle_mixed_product(&self.inner, tol).map_err(pyerr)?;
        Ok((out.is_product, out.distance))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_state_file(&path, &State::Mixed(self.inner.clone())).map_err(pyerr)
    }

    fn __repr__(&self) -> String {
        format!("MixedState(dims={:?})", self.inner.dims().factors())
    }
}

/// Load a state file, returning a [`PureState`] or [`MixedState`].
#[pyfunction]
fn load_state(py: Python<'_>, path: PathBuf) -> PyResult<Py<PyAny>> {
    match load_state_file(&path).map_err(pyerr)? {
        State::Pure(inner) => Ok(Py::new(py, PureState { inner })?.into_any()),
        State::Mixed(inner) => Ok(Py::new(py, MixedState { inner })?.into_any()),
    }
}

#[pyfunction]
fn bell() -> PureState {
    PureState {
        inner: states::bell(),
    }
}

#[pyfunction]
fn ghz(n: usize) -> PureState {
    PureState {
        inner: states::ghz(n),
    }
}

#[pyfunction]
fn w() -> PureState {
    PureState {
        inner: states::w(),
    }
}

#[pyfunction]
fn classically_correlated() -> MixedState {
    MixedState {
        inner: states::classically_correlated(),
    }
}

#[pyfunction]
fn blocked_bell() -> MixedState {
    MixedState {
        inner: states::blocked_bell(),
    }
}

#[pymodule]
fn prodstate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PureState>()?;
    m.add_class::<MixedState>()?;
    m.add_class::<Verdict>()?;
    m.add_function(wrap_pyfunction!(load_state, m)?)?;
    m.add_function(wrap_pyfunction!(bell, m)?)?;
    m.add_function(wrap_pyfunction!(ghz, m)?)?;
    m.add_function(wrap_pyfunction!(w, m)?)?;
    m.add_function(wrap_pyfunction!(classically_correlated, m)?)?;
    m.add_function(wrap_pyfunction!(blocked_bell, m)?)?;
    Ok(())
}
