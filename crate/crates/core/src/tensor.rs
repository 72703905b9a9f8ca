//! States on tensor products of finite-dimensional spaces, and the basic
//! operations on them: Kronecker products, local embeddings, partial traces
//! and norms.
//!
//! Composite index convention: the basis vector `e_{a0} ⊗ e_{a1} ⊗ ... ⊗
//! e_{a(n-1)}` of a product of spaces with dimensions `d0, ..., d(n-1)` maps
//! to the flat index `a0*(d1*...*d(n-1)) + a1*(d2*...*d(n-1)) + ... + a(n-1)`.
//! Factor 0 is the most significant digit (row-major order), so flattening a
//! multi-dimensional array in C order and reading coefficients off a flat
//! vector agree everywhere in the crate.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Default tolerance for state validation (hermiticity, trace, positivity).
pub const VALIDATION_TOL: f64 = 1e-9;

/// Factor dimensions of a tensor-product space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dims {
    factors: Vec<usize>,
}

impl Dims {
    /// Every dimension must be at least 1 and the list nonempty.
    pub fn new(factors: Vec<usize>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyFactorSet);
        }
        if factors.iter().any(|&d| d == 0) {
            return Err(Error::DimensionMismatch(
                "factor dimensions must be at least 1".into(),
            ));
        }
        Ok(Dims { factors })
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn n_factors(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, i: usize) -> usize {
        self.factors[i]
    }

    /// Total dimension, the product of all factor dimensions.
    pub fn total(&self) -> usize {
        self.factors.iter().product()
    }

    /// Flat index of a multi-index, factor 0 most significant.
    pub fn composite(&self, multi: &[usize]) -> usize {
        debug_assert_eq!(multi.len(), self.factors.len());
        let mut idx = 0;
        for (a, d) in multi.iter().zip(&self.factors) {
            debug_assert!(a < d);
            idx = idx * d + a;
        }
        idx
    }

    /// Multi-index of a flat index, inverse of [`Dims::composite`].
    pub fn multi(&self, mut composite: usize) -> Vec<usize> {
        let mut multi = vec![0; self.factors.len()];
        for (slot, d) in multi.iter_mut().zip(&self.factors).rev() {
            *slot = composite % d;
            composite /= d;
        }
        multi
    }

    /// Dimensions of the first `cut` factors and of the rest.
    pub fn split(&self, split: BipartiteSplit) -> (Dims, Dims) {
        let cut = split.cut();
        (
            Dims { factors: self.factors[..cut].to_vec() },
            Dims { factors: self.factors[cut..].to_vec() },
        )
    }

    fn check_factor(&self, i: usize) -> Result<()> {
        if i >= self.factors.len() {
            return Err(Error::FactorOutOfRange {
                index: i,
                n_factors: self.factors.len(),
            });
        }
        Ok(())
    }
}

/// A cut separating the first `cut` factors from the rest.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct BipartiteSplit {
    cut: usize,
}

impl BipartiteSplit {
    pub fn new(cut: usize, dims: &Dims) -> Result<Self> {
        if cut == 0 || cut >= dims.n_factors() {
            return Err(Error::InvalidCut {
                cut,
                n_factors: dims.n_factors(),
            });
        }
        Ok(BipartiteSplit { cut })
    }

    pub fn cut(&self) -> usize {
        self.cut
    }

    /// Dimension of the left side of the cut.
    pub fn left_dim(&self, dims: &Dims) -> usize {
        dims.factors()[..self.cut].iter().product()
    }

    /// Dimension of the right side of the cut.
    pub fn right_dim(&self, dims: &Dims) -> usize {
        dims.factors()[self.cut..].iter().product()
    }
}

/// A vector on a tensor-product space, stored as flat amplitudes in the
/// composite index convention. Not required to be normalized; operations
/// that need a unit vector check explicitly.
#[derive(Clone, Debug)]
pub struct PureState {
    dims: Dims,
    amplitudes: Array1<C64>,
}

impl PureState {
    pub fn new(dims: Dims, amplitudes: Array1<C64>) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for total dimension {}",
                amplitudes.len(),
                dims.total()
            )));
        }
        Ok(PureState { dims, amplitudes })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Errors unless the norm is within `tol` of 1.
    pub fn check_unit(&self, tol: f64) -> Result<()> {
        let dev = (self.norm() - 1.0).abs();
        if dev > tol {
            return Err(Error::validation("unit norm", dev));
        }
        Ok(())
    }

    /// Tensor product of single-factor vectors.
    pub fn product(factors: &[Array1<C64>]) -> Result<Self> {
        let dims = Dims::new(factors.iter().map(|f| f.len()).collect())?;
        let mut amp = Array1::from_elem(1, C64::new(1.0, 0.0));
        for f in factors {
            amp = kron_vec(&amp, f);
        }
        PureState::new(dims, amp)
    }

    /// The outer product of the normalized vector with itself, a density
    /// matrix of trace 1.
    pub fn density_matrix(&self) -> Result<MixedState> {
        let n2 = self.amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>();
        if n2 <= 0.0 {
            return Err(Error::ZeroVector);
        }
        let d = self.amplitudes.len();
        let m = Array2::from_shape_fn((d, d), |(i, j)| {
            self.amplitudes[i] * self.amplitudes[j].conj() / n2
        });
        Ok(MixedState::trusted(self.dims.clone(), m))
    }
}

/// A density matrix on a tensor-product space. Construction validates
/// hermiticity, unit trace and positive semidefiniteness.
#[derive(Clone, Debug)]
pub struct MixedState {
    dims: Dims,
    matrix: Array2<C64>,
}

impl MixedState {
    pub fn new(dims: Dims, matrix: Array2<C64>) -> Result<Self> {
        Self::with_tolerance(dims, matrix, VALIDATION_TOL)
    }

    pub fn with_tolerance(dims: Dims, matrix: Array2<C64>, tol: f64) -> Result<Self> {
        Self::validate(&dims, &matrix, tol)?;
        Ok(MixedState { dims, matrix })
    }

    /// Checks that `matrix` is a density matrix on the space described by
    /// `dims`: square of the right size, hermitian, trace 1 and positive
    /// semidefinite, each within `tol`.
    pub fn validate(dims: &Dims, matrix: &Array2<C64>, tol: f64) -> Result<()> {
        let d = dims.total();
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        if rows != d {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix for total dimension {d}"
            )));
        }
        let mut herm_dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                herm_dev = herm_dev.max((matrix[[i, j]] - matrix[[j, i]].conj()).norm());
            }
        }
        if herm_dev > tol {
            return Err(Error::validation("hermiticity", herm_dev));
        }
        let trace_dev = (trace(&matrix.view()).re - 1.0).abs();
        if trace_dev > tol {
            return Err(Error::validation("unit trace", trace_dev));
        }
        let herm = Array2::from_shape_fn((d, d), |(i, j)| {
            (matrix[[i, j]] + matrix[[j, i]].conj()) * 0.5
        });
        let (eigs, _) = herm.eigh(UPLO::Lower)?;
        let min_eig = eigs.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_eig < -tol {
            return Err(Error::validation("positive semidefiniteness", -min_eig));
        }
        Ok(())
    }

    /// Skips validation; for results of operations that preserve validity.
    pub(crate) fn trusted(dims: Dims, matrix: Array2<C64>) -> Self {
        MixedState { dims, matrix }
    }

    pub fn from_pure(phi: &PureState) -> Result<Self> {
        phi.density_matrix()
    }

    /// Tensor product of single-factor density matrices.
    pub fn product(factors: &[Array2<C64>]) -> Result<Self> {
        let dims = Dims::new(factors.iter().map(|f| f.nrows()).collect())?;
        let mut m = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
        for f in factors {
            m = kron(&m.view(), &f.view());
        }
        MixedState::new(dims, m)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }
}

/// Either kind of state; what the file formats and the condition probes
/// operate on.
#[derive(Clone, Debug)]
pub enum State {
    Pure(PureState),
    Mixed(MixedState),
}

impl State {
    pub fn dims(&self) -> &Dims {
        match self {
            State::Pure(p) => p.dims(),
            State::Mixed(m) => m.dims(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            State::Pure(_) => "pure",
            State::Mixed(_) => "mixed",
        }
    }
}

/// Kronecker product of matrices, `out[[i*p+k, j*q+l]] = a[[i,j]] * b[[k,l]]`
/// for `b` of shape `(p, q)`.
pub fn kron(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Array2<C64> {
    let (m, n) = a.dim();
    let (p, q) = b.dim();
    let mut out = Array2::zeros((m * p, n * q));
    for i in 0..m {
        for j in 0..n {
            let aij = a[[i, j]];
            let mut block = out.slice_mut(ndarray::s![i * p..(i + 1) * p, j * q..(j + 1) * q]);
            block.zip_mut_with(b, |o, &bkl| *o = aij * bkl);
        }
    }
    out
}

/// Kronecker product of a list of matrices, left to right.
pub fn kron_all(mats: &[Array2<C64>]) -> Array2<C64> {
    let mut out = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for m in mats {
        out = kron(&out.view(), &m.view());
    }
    out
}

/// Kronecker product of vectors, `out[i*q+k] = a[i] * b[k]` for `b` of
/// length `q`.
pub fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, &ai) in a.iter().enumerate() {
        for (k, &bk) in b.iter().enumerate() {
            out[i * b.len() + k] = ai * bk;
        }
    }
    out
}

/// `I ⊗ ... ⊗ a ⊗ ... ⊗ I` with `a` acting on the given factor.
pub fn embed_local(a: &ArrayView2<C64>, factor: usize, dims: &Dims) -> Result<Array2<C64>> {
    dims.check_factor(factor)?;
    let d = dims.factor(factor);
    if a.dim() != (d, d) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} operator for factor of dimension {d}",
            a.nrows(),
            a.ncols()
        )));
    }
    let left: usize = dims.factors()[..factor].iter().product();
    let right: usize = dims.factors()[factor + 1..].iter().product();
    let eye_left = Array2::eye(left);
    let eye_right = Array2::eye(right);
    Ok(kron(&kron(&eye_left.view(), a).view(), &eye_right.view()))
}

/// Traces out every factor not in `keep`. The kept factors stay in their
/// original relative order; `keep` must be strictly increasing.
pub fn partial_trace(rho: &MixedState, keep: &[usize]) -> Result<MixedState> {
    let reduced = partial_trace_matrix(&rho.matrix().view(), rho.dims(), keep)?;
    let kept_dims = Dims::new(keep.iter().map(|&i| rho.dims().factor(i)).collect())?;
    Ok(MixedState::trusted(kept_dims, reduced))
}

/// Partial trace on a raw matrix in the composite index convention.
pub fn partial_trace_matrix(
    m: &ArrayView2<C64>,
    dims: &Dims,
    keep: &[usize],
) -> Result<Array2<C64>> {
    if keep.is_empty() {
        return Err(Error::EmptyFactorSet);
    }
    for w in keep.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::DimensionMismatch(
                "keep list must be strictly increasing".into(),
            ));
        }
    }
    for &i in keep {
        dims.check_factor(i)?;
    }
    let total = dims.total();
    if m.dim() != (total, total) {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix for total dimension {total}",
            m.nrows(),
            m.ncols()
        )));
    }
    let kept_dims = Dims::new(keep.iter().map(|&i| dims.factor(i)).collect())?;
    let is_kept: Vec<bool> = (0..dims.n_factors()).map(|i| keep.contains(&i)).collect();

    // For each flat index, precompute the flat index of its kept part and of
    // its traced part.
    let mut kept_part = vec![0usize; total];
    let mut traced_part = vec![0usize; total];
    for idx in 0..total {
        let multi = dims.multi(idx);
        let mut k = 0;
        let mut t = 0;
        for (i, &a) in multi.iter().enumerate() {
            if is_kept[i] {
                k = k * dims.factor(i) + a;
            } else {
                t = t * dims.factor(i) + a;
            }
        }
        kept_part[idx] = k;
        traced_part[idx] = t;
    }

    let dk = kept_dims.total();
    let mut out = Array2::zeros((dk, dk));
    for r in 0..total {
        for c in 0..total {
            if traced_part[r] == traced_part[c] {
                out[[kept_part[r], kept_part[c]]] += m[[r, c]];
            }
        }
    }
    Ok(out)
}

/// Conjugate transpose.
pub fn dagger(a: &ArrayView2<C64>) -> Array2<C64> {
    let (m, n) = a.dim();
    Array2::from_shape_fn((n, m), |(i, j)| a[[j, i]].conj())
}

pub fn trace(a: &ArrayView2<C64>) -> C64 {
    a.diag().sum()
}

/// Hilbert-Schmidt (Frobenius) norm.
pub fn hs_norm(a: &ArrayView2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Operator norm `||A||`, the largest singular value.
pub fn op_norm(a: &ArrayView2<C64>) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let (_, s, _) = a.to_owned().svd(false, false)?;
    Ok(s.iter().cloned().fold(0.0, f64::max))
}

/// Trace norm `||A||_1`, the sum of singular values. Requires a square
/// matrix.
pub fn trace_norm(a: &ArrayView2<C64>) -> Result<f64> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Ok(0.0);
    }
    let (_, s, _) = a.to_owned().svd(false, false)?;
    Ok(s.sum())
}

/// Largest entrywise absolute difference between two matrices of equal shape.
pub fn max_abs_diff(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> f64 {
    debug_assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Largest entrywise absolute difference between two vectors of equal length.
pub fn max_abs_diff_vec(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}
