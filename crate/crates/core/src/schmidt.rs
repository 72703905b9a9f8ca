//! Schmidt decomposition of a vector across a bipartite cut.
//!
//! A vector on `H_L (x) H_R` with coefficient matrix `C[a, b] = <e_a (x)
//! f_b, phi>` decomposes as `phi = sum_k sigma_k e_k (x) f_k` with
//! orthonormal `{e_k}`, `{f_k}` and `sigma_k > 0` descending; the weights
//! are `lambda_k = sigma_k^2`. The decomposition comes from the singular
//! value decomposition of `C`.

use ndarray::{Array1, Array2};
use ndarray_linalg::SVD;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{kron_vec, BipartiteSplit, Dims, PureState};

/// Result of [`schmidt_decompose`]: weights descending, one left and one
/// right unit vector per retained weight.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    dims: Dims,
    split: BipartiteSplit,
    lambdas: Vec<f64>,
    left_vectors: Vec<Array1<C64>>,
    right_vectors: Vec<Array1<C64>>,
}

impl SchmidtDecomposition {
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn split(&self) -> BipartiteSplit {
        self.split
    }

    /// Schmidt weights `lambda_k = sigma_k^2`, descending.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn left_vectors(&self) -> &[Array1<C64>] {
        &self.left_vectors
    }

    pub fn right_vectors(&self) -> &[Array1<C64>] {
        &self.right_vectors
    }

    pub fn rank(&self) -> usize {
        self.lambdas.len()
    }

    /// `sum_k sqrt(lambda_k) e_k (x) f_k` as a vector on the full space.
    /// Errors if the decomposition is empty.
    pub fn reconstruct(&self) -> Result<PureState> {
        if self.lambdas.is_empty() {
            return Err(Error::ZeroVector);
        }
        let total = self.dims.total();
        let mut amp = Array1::zeros(total);
        for ((lam, e), f) in self
            .lambdas
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            let term = kron_vec(e, f);
            amp.zip_mut_with(&term, |a, &t| *a += t * lam.sqrt());
        }
        PureState::new(self.dims.clone(), amp)
    }
}

/// The coefficient matrix of `phi` across the cut: entry `[a, b]` is the
/// amplitude of `e_a (x) f_b`, i.e. the flat amplitudes reshaped row-major
/// to `(left_dim, right_dim)`.
pub fn coefficient_matrix(phi: &PureState, split: BipartiteSplit) -> Result<Array2<C64>> {
    let dims = phi.dims();
    if split.cut() >= dims.n_factors() {
        return Err(Error::InvalidCut {
            cut: split.cut(),
            n_factors: dims.n_factors(),
        });
    }
    let l = split.left_dim(dims);
    let r = split.right_dim(dims);
    Ok(Array2::from_shape_vec((l, r), phi.amplitudes().to_vec()).expect("length checked"))
}

/// Schmidt decomposition across the cut. Singular values below
/// `tol * sigma_max` are discarded. Phase convention: in each left vector
/// the entry of largest magnitude (smallest index on ties) is made real
/// and positive, with the compensating phase folded into the right vector.
pub fn schmidt_decompose(
    phi: &PureState,
    split: BipartiteSplit,
    tol: f64,
) -> Result<SchmidtDecomposition> {
    let c = coefficient_matrix(phi, split)?;
    let (u, s, vt) = c.svd(true, true)?;
    let u = u.expect("requested");
    let vt = vt.expect("requested");
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let mut lambdas = Vec::new();
    let mut left_vectors = Vec::new();
    let mut right_vectors = Vec::new();
    for (k, &sk) in s.iter().enumerate() {
        if sk < tol * smax || sk == 0.0 {
            continue;
        }
        let mut e: Array1<C64> = u.column(k).to_owned();
        let mut f: Array1<C64> = vt.row(k).to_owned();
        let mut jmax = 0;
        for (j, z) in e.iter().enumerate() {
            if z.norm() > e[jmax].norm() {
                jmax = j;
            }
        }
        let phase = e[jmax] / e[jmax].norm();
        e.mapv_inplace(|z| z * phase.conj());
        f.mapv_inplace(|z| z * phase);
        lambdas.push(sk * sk);
        left_vectors.push(e);
        right_vectors.push(f);
    }
    Ok(SchmidtDecomposition {
        dims: phi.dims().clone(),
        split,
        lambdas,
        left_vectors,
        right_vectors,
    })
}

/// Number of Schmidt weights above the relative cutoff.
pub fn schmidt_rank(phi: &PureState, split: BipartiteSplit, tol: f64) -> Result<usize> {
    Ok(schmidt_decompose(phi, split, tol)?.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states;
    use crate::tensor::max_abs_diff_vec;
    use ndarray::array;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn two_qubit_split() -> (Dims, BipartiteSplit) {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let split = BipartiteSplit::new(1, &dims).unwrap();
        (dims, split)
    }

    #[test]
    fn bell_coefficient_matrix_is_diagonal() {
        let bell = states::bell();
        let split = BipartiteSplit::new(1, bell.dims()).unwrap();
        let cm = coefficient_matrix(&bell, split).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((cm[[0, 0]].re - s).abs() < 1e-15);
        assert!((cm[[1, 1]].re - s).abs() < 1e-15);
        assert_eq!(cm[[0, 1]], c(0.0, 0.0));
        assert_eq!(cm[[1, 0]], c(0.0, 0.0));
    }

    #[test]
    fn ghz_coefficient_matrix_shape_follows_cut() {
        let ghz = states::ghz(3);
        let split = BipartiteSplit::new(1, ghz.dims()).unwrap();
        assert_eq!(coefficient_matrix(&ghz, split).unwrap().dim(), (2, 4));
        let split = BipartiteSplit::new(2, ghz.dims()).unwrap();
        assert_eq!(coefficient_matrix(&ghz, split).unwrap().dim(), (4, 2));
    }

    #[test]
    fn product_state_has_rank_one() {
        let phi = PureState::product(&[states::basis_vector(2, 0), states::plus()]).unwrap();
        let split = BipartiteSplit::new(1, phi.dims()).unwrap();
        let sd = schmidt_decompose(&phi, split, 1e-10).unwrap();
        assert_eq!(sd.rank(), 1);
        assert!((sd.lambdas()[0] - 1.0).abs() < 1e-12);
        assert_eq!(schmidt_rank(&phi, split, 1e-10).unwrap(), 1);
    }

    #[test]
    fn bell_weights_are_half_half() {
        let bell = states::bell();
        let split = BipartiteSplit::new(1, bell.dims()).unwrap();
        let sd = schmidt_decompose(&bell, split, 1e-10).unwrap();
        assert_eq!(sd.rank(), 2);
        assert!((sd.lambdas()[0] - 0.5).abs() < 1e-12);
        assert!((sd.lambdas()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn weights_sorted_descending() {
        let (dims, split) = two_qubit_split();
        let a = 0.8_f64.sqrt();
        let b = 0.2_f64.sqrt();
        let phi = PureState::new(
            dims,
            array![c(a, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(b, 0.0)],
        )
        .unwrap();
        let sd = schmidt_decompose(&phi, split, 1e-10).unwrap();
        assert!((sd.lambdas()[0] - 0.8).abs() < 1e-12);
        assert!((sd.lambdas()[1] - 0.2).abs() < 1e-12);
    }

    #[test]
    fn ghz_across_first_cut_has_rank_two() {
        let ghz = states::ghz(3);
        let split = BipartiteSplit::new(1, ghz.dims()).unwrap();
        let sd = schmidt_decompose(&ghz, split, 1e-10).unwrap();
        assert_eq!(sd.rank(), 2);
        assert!((sd.lambdas()[0] - 0.5).abs() < 1e-12);
        assert!((sd.lambdas()[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn relative_cutoff_discards_small_values() {
        let (dims, split) = two_qubit_split();
        let phi = PureState::new(
            dims,
            array![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1e-12, 0.0)],
        )
        .unwrap();
        assert_eq!(schmidt_rank(&phi, split, 1e-10).unwrap(), 1);
        assert_eq!(schmidt_rank(&phi, split, 1e-14).unwrap(), 2);
    }

    #[test]
    fn zero_vector_is_rejected() {
        let (dims, split) = two_qubit_split();
        let phi = PureState::new(dims, Array1::zeros(4)).unwrap();
        assert!(matches!(
            schmidt_decompose(&phi, split, 1e-10),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn reconstruct_round_trips() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(11);
        let dims = Dims::new(vec![3, 4]).unwrap();
        let split = BipartiteSplit::new(1, &dims).unwrap();
        let phi = crate::random::haar_pure_state(&dims, &mut rng);
        let sd = schmidt_decompose(&phi, split, 1e-12).unwrap();
        let back = sd.reconstruct().unwrap();
        assert!(max_abs_diff_vec(back.amplitudes(), phi.amplitudes()) < 1e-12);
    }

    #[test]
    fn reconstruct_of_empty_errors() {
        let (dims, split) = two_qubit_split();
        let sd = SchmidtDecomposition {
            dims,
            split,
            lambdas: vec![],
            left_vectors: vec![],
            right_vectors: vec![],
        };
        assert!(matches!(sd.reconstruct(), Err(Error::ZeroVector)));
    }

    #[test]
    fn left_vector_phase_is_pinned() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(4);
        let dims = Dims::new(vec![3, 3]).unwrap();
        let split = BipartiteSplit::new(1, &dims).unwrap();
        for _ in 0..5 {
            let phi = crate::random::haar_pure_state(&dims, &mut rng);
            let sd = schmidt_decompose(&phi, split, 1e-10).unwrap();
            for e in sd.left_vectors() {
                let mut jmax = 0;
                for (j, z) in e.iter().enumerate() {
                    if z.norm() > e[jmax].norm() {
                        jmax = j;
                    }
                }
                assert!(e[jmax].im.abs() < 1e-12);
                assert!(e[jmax].re > 0.0);
            }
        }
    }

    #[test]
    fn vectors_satisfy_the_defining_eigenproblems() {
        // e_k are eigenvectors of C C^dag, f_k of C^T conj(C), both with
        // eigenvalue lambda_k, and C^T conj(e_k) = sigma_k f_k.
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(12);
        let dims = Dims::new(vec![3, 2, 2]).unwrap();
        let split = BipartiteSplit::new(1, &dims).unwrap();
        let phi = crate::random::haar_pure_state(&dims, &mut rng);
        let cm = coefficient_matrix(&phi, split).unwrap();
        let cdag = crate::tensor::dagger(&cm.view());
        let ccd = cm.dot(&cdag);
        let ct = cm.t().to_owned();
        let cbar = cm.mapv(|z| z.conj());
        let ctcbar = ct.dot(&cbar);
        let sd = schmidt_decompose(&phi, split, 1e-10).unwrap();
        for k in 0..sd.rank() {
            let lam = sd.lambdas()[k];
            let e = &sd.left_vectors()[k];
            let f = &sd.right_vectors()[k];
            let lhs = ccd.dot(e);
            assert!(max_abs_diff_vec(&lhs, &e.mapv(|z| z * lam)) < 1e-10);
            let rhs = ctcbar.dot(f);
            assert!(max_abs_diff_vec(&rhs, &f.mapv(|z| z * lam)) < 1e-10);
            let mapped = ct.dot(&e.mapv(|z| z.conj()));
            assert!(max_abs_diff_vec(&mapped, &f.mapv(|z| z * lam.sqrt())) < 1e-10);
        }
    }
}
