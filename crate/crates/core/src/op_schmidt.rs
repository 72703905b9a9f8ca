//! Schmidt decomposition of operators in Hilbert-Schmidt space.
//!
//! An operator `R` on `H_L (x) H_R` decomposes as `R = sum_k s_k A_k (x)
//! B_k` with `s_k > 0` descending and the `A_k` (resp. `B_k`)
//! orthonormal under the Hilbert-Schmidt inner product `<A, B> = tr[A^dag
//! B]`. The complex variant comes from the singular value decomposition of
//! the reshuffled matrix; the hermitian variant expands in a hermitian
//! operator basis and uses a real decomposition, so a hermitian `R` gets
//! hermitian factors.

use ndarray::{Array1, Array2, ArrayView2};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{dagger, kron, max_abs_diff, BipartiteSplit, Dims};

/// Hilbert-Schmidt inner product `tr[A^dag B]`, conjugate-linear in the
/// first argument. The operands must have equal shape.
pub fn hs_inner(a: &ArrayView2<C64>, b: &ArrayView2<C64>) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{} operands",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum())
}

/// Result of [`operator_schmidt_decompose`]: coefficients descending, one
/// left and one right operator per retained coefficient, each with unit
/// Hilbert-Schmidt norm.
#[derive(Clone, Debug)]
pub struct OperatorSchmidtDecomposition {
    dims: Dims,
    split: BipartiteSplit,
    coefficients: Vec<f64>,
    left_ops: Vec<Array2<C64>>,
    right_ops: Vec<Array2<C64>>,
    hermitian: bool,
}

impl OperatorSchmidtDecomposition {
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn split(&self) -> BipartiteSplit {
        self.split
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn left_ops(&self) -> &[Array2<C64>] {
        &self.left_ops
    }

    pub fn right_ops(&self) -> &[Array2<C64>] {
        &self.right_ops
    }

    pub fn hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    /// `sum_k s_k A_k (x) B_k`.
    pub fn reconstruct(&self) -> Array2<C64> {
        let dl = self.split.left_dim(&self.dims);
        let dr = self.split.right_dim(&self.dims);
        let mut out = Array2::zeros((dl * dr, dl * dr));
        for ((s, a), b) in self
            .coefficients
            .iter()
            .zip(&self.left_ops)
            .zip(&self.right_ops)
        {
            let term = kron(&a.view(), &b.view());
            out.zip_mut_with(&term, |o, &t| *o += t * *s);
        }
        out
    }
}

/// Reshuffle of a matrix on `H_L (x) H_R`:
/// `M[(a*dl + c), (b*dr + d)] = R[(a*dr + b), (c*dr + d)]`,
/// so that `R = A (x) B` becomes the rank-1 outer product
/// `M = vec(A) vec(B)^T` with `vec` taken row-major.
fn reshuffle(r: &ArrayView2<C64>, dl: usize, dr: usize) -> Array2<C64> {
    Array2::from_shape_fn((dl * dl, dr * dr), |(ac, bd)| {
        let (a, c) = (ac / dl, ac % dl);
        let (b, d) = (bd / dr, bd % dr);
        r[[a * dr + b, c * dr + d]]
    })
}

fn unvec(v: &Array1<C64>, d: usize) -> Array2<C64> {
    Array2::from_shape_fn((d, d), |(i, j)| v[i * d + j])
}

/// Hilbert-Schmidt-orthonormal basis of hermitian `d x d` matrices:
/// the diagonal units `E_ii`, then for each pair `i < j` in lexicographic
/// order `(E_ij + E_ji)/sqrt(2)` followed by `i (E_ij - E_ji)/sqrt(2)`.
pub fn hermitian_basis(d: usize) -> Vec<Array2<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut basis = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut m = Array2::zeros((d, d));
        m[[i, i]] = C64::new(1.0, 0.0);
        basis.push(m);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut m = Array2::zeros((d, d));
            m[[i, j]] = C64::new(s, 0.0);
            m[[j, i]] = C64::new(s, 0.0);
            basis.push(m);
            let mut m = Array2::zeros((d, d));
            m[[i, j]] = C64::new(0.0, s);
            m[[j, i]] = C64::new(0.0, -s);
            basis.push(m);
        }
    }
    basis
}

fn check_shape(r: &ArrayView2<C64>, dims: &Dims, split: BipartiteSplit) -> Result<(usize, usize)> {
    if split.cut() >= dims.n_factors() {
        return Err(Error::InvalidCut {
            cut: split.cut(),
            n_factors: dims.n_factors(),
        });
    }
    let dl = split.left_dim(dims);
    let dr = split.right_dim(dims);
    let (rows, cols) = r.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    if rows != dl * dr {
        return Err(Error::DimensionMismatch(format!(
            "{rows}x{cols} operator for total dimension {}",
            dl * dr
        )));
    }
    Ok((dl, dr))
}

/// Operator Schmidt decomposition of `R` across the cut. Coefficients below
/// `tol * s_max` are discarded. With `hermitian` set, `R` must be hermitian
/// within 1e-9 and the returned factors are hermitian; the sign convention
/// makes the largest basis coefficient of each left factor positive. Without
/// it, the phase convention makes the largest entry of each left factor real
/// and positive.
pub fn operator_schmidt_decompose(
    r: &ArrayView2<C64>,
    dims: &Dims,
    split: BipartiteSplit,
    tol: f64,
    hermitian: bool,
) -> Result<OperatorSchmidtDecomposition> {
    let (dl, dr) = check_shape(r, dims, split)?;
    if hermitian {
        let dev = max_abs_diff(r, &dagger(r).view());
        if dev > 1e-9 {
            return Err(Error::validation("hermiticity", dev));
        }
    }
    let m = reshuffle(r, dl, dr);

    let mut coefficients = Vec::new();
    let mut left_ops = Vec::new();
    let mut right_ops = Vec::new();

    if hermitian {
        // Coefficient matrix of R in the hermitian product basis:
        // c[mu, nu] = tr[(G_mu (x) G_nu) R] = (BL^dag M conj(BR))[mu, nu]
        // with BL, BR holding the vectorized basis matrices as columns.
        let gl = hermitian_basis(dl);
        let gr = hermitian_basis(dr);
        let bl = Array2::from_shape_fn((dl * dl, dl * dl), |(p, mu)| gl[mu][[p / dl, p % dl]]);
        let br = Array2::from_shape_fn((dr * dr, dr * dr), |(q, nu)| gr[nu][[q / dr, q % dr]]);
        let c = dagger(&bl.view()).dot(&m).dot(&br.mapv(|z| z.conj()));
        let c_real = c.mapv(|z| z.re);
        let (u, s, vt) = c_real.svd(true, true)?;
        let u = u.expect("requested");
        let vt = vt.expect("requested");
        let smax = s.iter().cloned().fold(0.0, f64::max);
        if smax <= 0.0 {
            return Err(Error::ZeroVector);
        }
        for (k, &sk) in s.iter().enumerate() {
            if sk < tol * smax || sk == 0.0 {
                continue;
            }
            let mut uk: Array1<f64> = u.column(k).to_owned();
            let mut vk: Array1<f64> = vt.row(k).to_owned();
            let mut mumax = 0;
            for (mu, x) in uk.iter().enumerate() {
                if x.abs() > uk[mumax].abs() {
                    mumax = mu;
                }
            }
            if uk[mumax] < 0.0 {
                uk.mapv_inplace(|x| -x);
                vk.mapv_inplace(|x| -x);
            }
            let mut a = Array2::zeros((dl, dl));
            for (mu, &w) in uk.iter().enumerate() {
                a.zip_mut_with(&gl[mu], |o, &g| *o += g * w);
            }
            let mut b = Array2::zeros((dr, dr));
            for (nu, &w) in vk.iter().enumerate() {
                b.zip_mut_with(&gr[nu], |o, &g| *o += g * w);
            }
            coefficients.push(sk);
            left_ops.push(a);
            right_ops.push(b);
        }
    } else {
        let (u, s, vt) = m.svd(true, true)?;
        let u = u.expect("requested");
        let vt = vt.expect("requested");
        let smax = s.iter().cloned().fold(0.0, f64::max);
        if smax <= 0.0 {
            return Err(Error::ZeroVector);
        }
        for (k, &sk) in s.iter().enumerate() {
            if sk < tol * smax || sk == 0.0 {
                continue;
            }
            let mut av: Array1<C64> = u.column(k).to_owned();
            let mut bv: Array1<C64> = vt.row(k).to_owned();
            let mut jmax = 0;
            for (j, z) in av.iter().enumerate() {
                if z.norm() > av[jmax].norm() {
                    jmax = j;
                }
            }
            let phase = av[jmax] / av[jmax].norm();
            av.mapv_inplace(|z| z * phase.conj());
            bv.mapv_inplace(|z| z * phase);
            coefficients.push(sk);
            left_ops.push(unvec(&av, dl));
            right_ops.push(unvec(&bv, dr));
        }
    }

    Ok(OperatorSchmidtDecomposition {
        dims: dims.clone(),
        split,
        coefficients,
        left_ops,
        right_ops,
        hermitian,
    })
}

/// Number of operator Schmidt coefficients above the relative cutoff
/// (complex variant).
pub fn operator_schmidt_rank(
    r: &ArrayView2<C64>,
    dims: &Dims,
    split: BipartiteSplit,
    tol: f64,
) -> Result<usize> {
    Ok(operator_schmidt_decompose(r, dims, split, tol, false)?.rank())
}
