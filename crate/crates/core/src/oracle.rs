//! Brute-force reference checks, independent of the decomposition-based
//! decision procedures.
//!
//! Three routes: rank-1 fitting of pure states by alternating least
//! squares, comparison of a mixed state against the product of its own
//! marginals, and exhaustive evaluation of the factorization conditions
//! over the projector-basis grid. Decision code never calls these; tests
//! use them as ground truth.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criterion::{grid_search, grid_tuples, ViolationReport, DEFAULT_GRID_CAP, UNIT_REJECT_TOL};
use crate::error::{Error, Result};
use crate::random::haar_vector;
use crate::tensor::{kron_all, partial_trace, trace_norm, Dims, MixedState, PureState, State};

/// Fixed seed for the alternating-least-squares restarts; the oracle has
/// no seed parameter and must stay deterministic.
const RESTART_SEED: u64 = 2718281828;

/// Eigenvalue gap under which a reduced state's top eigenvector is
/// considered degenerate and random restarts are added.
const DEGENERACY_GAP: f64 = 1e-8;

const RESTARTS: usize = 3;

/// Result of [`oracle_pure_product`]: the best rank-1 (product) fit found,
/// its overlap `|<Phi, (x)_i phi_i>|`, and the sweeps used by the best
/// run.
#[derive(Clone, Debug)]
pub struct PureOracleOutcome {
    pub is_product: bool,
    pub factors: Vec<Array1<C64>>,
    pub overlap: f64,
    pub iterations: usize,
}

/// Result of [`oracle_mixed_product`]: trace distance between the state
/// and the product of its marginals, which vanishes exactly on product
/// states.
#[derive(Clone, Debug)]
pub struct MixedOracleOutcome {
    pub is_product: bool,
    pub distance: f64,
    pub marginals: Vec<Array2<C64>>,
}

fn multi_indices(dims: &Dims) -> Vec<Vec<usize>> {
    (0..dims.total()).map(|i| dims.multi(i)).collect()
}

/// One pass of factor-wise overlap maximization until convergence of the
/// overlap or `max_iters` sweeps.
fn als_sweeps(
    phi: &PureState,
    multis: &[Vec<usize>],
    mut factors: Vec<Array1<C64>>,
    max_iters: usize,
) -> (f64, Vec<Array1<C64>>, usize) {
    let n = phi.dims().n_factors();
    let amp = phi.amplitudes();
    let mut last = -1.0;
    let mut sweeps = 0;
    for _ in 0..max_iters {
        sweeps += 1;
        let mut overlap = 0.0;
        for i in 0..n {
            let d = phi.dims().factor(i);
            let mut c: Array1<C64> = Array1::zeros(d);
            for (flat, multi) in multis.iter().enumerate() {
                let mut weight = amp[flat];
                for k in 0..n {
                    if k != i {
                        weight *= factors[k][multi[k]].conj();
                    }
                }
                c[multi[i]] += weight;
            }
            let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-15 {
                return (0.0, factors, sweeps);
            }
            factors[i] = c.mapv(|z| z / norm);
            overlap = norm;
        }
        if (overlap - last).abs() < 1e-12 {
            return (overlap, factors, sweeps);
        }
        last = overlap;
    }
    (last, factors, sweeps)
}

/// Best product (rank-1) approximation of a unit vector by alternating
/// least squares: factors start from the top eigenvectors of the
/// single-factor reduced states, each sweep replaces one factor by the
/// normalized contraction of the state against the others, and the overlap
/// is nondecreasing along sweeps. When some reduced state has a degenerate
/// top eigenvalue (gap below 1e-8) the fit restarts from 3 seeded random
/// initializations and keeps the best overlap. `is_product` iff the final
/// overlap is at least `1 - tol`.
pub fn oracle_pure_product(
    phi: &PureState,
    tol: f64,
    max_iters: usize,
) -> Result<PureOracleOutcome> {
    phi.check_unit(UNIT_REJECT_TOL)?;
    let dims = phi.dims().clone();
    let n = dims.n_factors();
    let multis = multi_indices(&dims);

    let rho = phi.density_matrix()?;
    let mut degenerate = false;
    let mut init: Vec<Array1<C64>> = Vec::with_capacity(n);
    for i in 0..n {
        let red = partial_trace(&rho, &[i])?;
        let (vals, vecs) = red.matrix().eigh(UPLO::Lower)?;
        let d = dims.factor(i);
        if d >= 2 && vals[d - 1] - vals[d - 2] < DEGENERACY_GAP {
            degenerate = true;
        }
        // eigh on row-major input yields eigenvectors as conjugated columns.
        init.push(vecs.column(d - 1).mapv(|z| z.conj()));
    }

    let (mut overlap, mut factors, mut iterations) = als_sweeps(phi, &multis, init, max_iters);
    if degenerate {
        for restart in 0..RESTARTS {
            let mut rng = ChaCha8Rng::seed_from_u64(RESTART_SEED);
            rng.set_stream(restart as u64);
            let init: Vec<Array1<C64>> = dims
                .factors()
                .iter()
                .map(|&d| haar_vector(d, &mut rng))
                .collect();
            let (o, f, it) = als_sweeps(phi, &multis, init, max_iters);
            if o > overlap {
                overlap = o;
                factors = f;
                iterations = it;
            }
        }
    }

    for f in factors.iter_mut() {
        let mut jmax = 0;
        for (j, z) in f.iter().enumerate() {
            if z.norm() > f[jmax].norm() {
                jmax = j;
            }
        }
        if f[jmax].norm() > 0.0 {
            let phase = f[jmax] / f[jmax].norm();
            f.mapv_inplace(|z| z * phase.conj());
        }
    }

    Ok(PureOracleOutcome {
        is_product: overlap >= 1.0 - tol,
        factors,
        overlap,
        iterations,
    })
}

/// Compares a state against the tensor product of its own single-factor
/// marginals in trace norm; a state is product exactly when this distance
/// vanishes.
pub fn oracle_mixed_product(rho: &MixedState, tol: f64) -> Result<MixedOracleOutcome> {
    let n = rho.dims().n_factors();
    let marginals: Vec<Array2<C64>> = (0..n)
        .map(|i| Ok(partial_trace(rho, &[i])?.matrix().clone()))
        .collect::<Result<_>>()?;
    let candidate = kron_all(&marginals);
    let diff = rho.matrix() - &candidate;
    let distance = trace_norm(&diff.view())?;
    Ok(MixedOracleOutcome {
        is_product: distance <= tol,
        distance,
        marginals,
    })
}

/// Exhaustive evaluation of the applicable factorization condition over
/// every projector-basis tuple (identity markers included for mixed
/// states), with the default tuple cap.
pub fn oracle_condition_grid(state: &State, tol: f64) -> Result<ViolationReport> {
    oracle_condition_grid_with_cap(state, tol, DEFAULT_GRID_CAP)
}

/// As [`oracle_condition_grid`] with an explicit cap; errors when the grid
/// would need more than `cap` tuples.
pub fn oracle_condition_grid_with_cap(
    state: &State,
    tol: f64,
    cap: usize,
) -> Result<ViolationReport> {
    if let State::Pure(p) = state {
        p.check_unit(UNIT_REJECT_TOL)?;
    }
    let tuples = grid_tuples(state.dims());
    if tuples > cap {
        return Err(Error::GridCapExceeded { tuples, cap });
    }
    let (max_violation, witness, evaluated) = grid_search(state)?;
    Ok(ViolationReport {
        max_violation,
        witness: if max_violation > tol { witness } else { Vec::new() },
        probes_evaluated: evaluated,
        seed: 0,
    })
}
