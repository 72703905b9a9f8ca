//! Measurement statistics of local observables.
//!
//! A hermitian observable on one factor has a finite spectral measure; a
//! tuple of local observables induces a joint distribution of outcomes on
//! a composite state. On product states the joint distribution is the
//! outer product of its marginals, so the largest deviation from that
//! factorization measures the statistical dependence the state creates
//! between local measurements.

use ndarray::{Array2, ArrayD, IxDyn};
use ndarray_linalg::{Eigh, UPLO};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::tensor::{dagger, kron_all, max_abs_diff, MixedState};

/// Default relative tolerance for merging nearly equal eigenvalues into
/// one spectral atom.
pub const CLUSTER_TOL: f64 = 1e-8;

/// A hermitian matrix acting on one factor.
#[derive(Clone, Debug)]
pub struct Observable {
    factor: usize,
    matrix: Array2<C64>,
}

impl Observable {
    /// Requires hermiticity within 1e-10.
    pub fn new(factor: usize, matrix: Array2<C64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::NotSquare { rows, cols });
        }
        let dev = max_abs_diff(&matrix.view(), &dagger(&matrix.view()).view());
        if dev > 1e-10 {
            return Err(Error::validation("observable hermiticity", dev));
        }
        Ok(Observable { factor, matrix })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// One atom of a spectral measure: an outcome value and the orthogonal
/// projector onto its eigenspace.
#[derive(Clone, Debug)]
pub struct SpectralAtom {
    pub value: f64,
    pub projector: Array2<C64>,
}

/// Finite spectral measure of a hermitian matrix, outcome values strictly
/// increasing.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    atoms: Vec<SpectralAtom>,
}

impl SpectralMeasure {
    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn values(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.value).collect()
    }

    /// `sum_k value_k * projector_k`.
    pub fn reconstruct(&self, d: usize) -> Array2<C64> {
        let mut out = Array2::zeros((d, d));
        for atom in &self.atoms {
            out.zip_mut_with(&atom.projector, |o, &p| *o += p * atom.value);
        }
        out
    }
}

/// Eigendecomposition with clustering: ascending eigenvalues are merged
/// into one atom while consecutive values differ by at most
/// `cluster_tol * (1 + |previous|)`; each atom's projector sums the
/// eigenprojectors of its cluster and its value is the cluster mean.
pub fn spectral_measure(obs: &Observable, cluster_tol: f64) -> Result<SpectralMeasure> {
    let d = obs.dim();
    let (vals, vecs) = obs.matrix().eigh(UPLO::Lower)?;
    let mut atoms: Vec<SpectralAtom> = Vec::new();
    let mut cluster: Vec<usize> = Vec::new();

    let flush = |cluster: &[usize], atoms: &mut Vec<SpectralAtom>| {
        if cluster.is_empty() {
            return;
        }
        let mean = cluster.iter().map(|&k| vals[k]).sum::<f64>() / cluster.len() as f64;
        let mut projector = Array2::zeros((d, d));
        for &k in cluster {
            // eigh on row-major input yields eigenvectors as conjugated
            // columns, so u = conj(v) and P += u u^dag.
            let v = vecs.column(k);
            for i in 0..d {
                for j in 0..d {
                    projector[[i, j]] += v[i].conj() * v[j];
                }
            }
        }
        atoms.push(SpectralAtom {
            value: mean,
            projector,
        });
    };

    for k in 0..d {
        if let Some(&last) = cluster.last() {
            if (vals[k] - vals[last]).abs() <= cluster_tol * (1.0 + vals[last].abs()) {
                cluster.push(k);
                continue;
            }
            flush(&cluster, &mut atoms);
            cluster.clear();
        }
        cluster.push(k);
    }
    flush(&cluster, &mut atoms);
    Ok(SpectralMeasure { atoms })
}

/// Joint outcome distribution of one observable per factor: per-factor
/// outcome value lists and the probability table over outcome tuples.
#[derive(Clone, Debug)]
pub struct JointDistribution {
    outcome_values: Vec<Vec<f64>>,
    table: ArrayD<f64>,
}

impl JointDistribution {
    pub fn outcome_values(&self) -> &[Vec<f64>] {
        &self.outcome_values
    }

    pub fn table(&self) -> &ArrayD<f64> {
        &self.table
    }

    pub fn prob(&self, idx: &[usize]) -> f64 {
        self.table[IxDyn(idx)]
    }

    /// Outcome distribution of factor `i`, all other factors summed out.
    pub fn marginal(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.outcome_values[i].len()];
        for (idx, &p) in self.table.indexed_iter() {
            out[idx[i]] += p;
        }
        out
    }

    pub fn n_factors(&self) -> usize {
        self.outcome_values.len()
    }
}

/// `p(a_1,...,a_n) = tr[(E_1(a_1) (x) ... (x) E_n(a_n)) rho]` over all
/// tuples of spectral atoms. Entries may dip to -1e-12 numerically and are
/// clamped to 0; anything lower, or a total off 1 by more than 1e-8, is a
/// numerical failure.
pub fn joint_distribution(rho: &MixedState, obs: &[Observable]) -> Result<JointDistribution> {
    let dims = rho.dims();
    let n = dims.n_factors();
    if obs.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} observables for {} factors",
            obs.len(),
            n
        )));
    }
    let mut measures: Vec<SpectralMeasure> = Vec::with_capacity(n);
    for (i, o) in obs.iter().enumerate() {
        if o.factor() != i {
            return Err(Error::DimensionMismatch(
                "observables must list factors 0..n in order".into(),
            ));
        }
        if o.dim() != dims.factor(i) {
            return Err(Error::DimensionMismatch(format!(
                "observable of side {} on factor {i} of dimension {}",
                o.dim(),
                dims.factor(i)
            )));
        }
        measures.push(spectral_measure(o, CLUSTER_TOL)?);
    }

    let shape: Vec<usize> = measures.iter().map(|m| m.atoms().len()).collect();
    let mut table = ArrayD::zeros(IxDyn(&shape));
    let rho_m = rho.matrix();
    let total_dim = dims.total();
    for (idx, slot) in table.indexed_iter_mut() {
        let mats: Vec<Array2<C64>> = (0..n)
            .map(|i| measures[i].atoms()[idx[i]].projector.clone())
            .collect();
        let op = kron_all(&mats);
        let mut val = C64::new(0.0, 0.0);
        for r in 0..total_dim {
            for c in 0..total_dim {
                val += op[[r, c]] * rho_m[[c, r]];
            }
        }
        let p = val.re;
        if p < -1e-12 {
            return Err(Error::Numerical(format!(
                "joint probability {p:.3e} below zero"
            )));
        }
        *slot = p.max(0.0);
    }
    let total: f64 = table.sum();
    if (total - 1.0).abs() > 1e-8 {
        return Err(Error::Numerical(format!(
            "joint probabilities sum to {total}"
        )));
    }

    Ok(JointDistribution {
        outcome_values: measures.iter().map(|m| m.values()).collect(),
        table,
    })
}

/// Largest deviation of the joint table from the product of its
/// marginals.
pub fn independence_violation(jd: &JointDistribution) -> f64 {
    let marginals: Vec<Vec<f64>> = (0..jd.n_factors()).map(|i| jd.marginal(i)).collect();
    let mut worst: f64 = 0.0;
    for (idx, &p) in jd.table().indexed_iter() {
        let mut prod = 1.0;
        for i in 0..jd.n_factors() {
            prod *= marginals[i][idx[i]];
        }
        worst = worst.max((p - prod).abs());
    }
    worst
}

/// `n` independent draws from the joint distribution via inverse CDF over
/// the flattened table; returns one outcome-value tuple per draw.
/// Deterministic given `seed`.
pub fn sample_outcomes(
    rho: &MixedState,
    obs: &[Observable],
    n: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    let jd = joint_distribution(rho, obs)?;
    let flat: Vec<f64> = jd.table().iter().cloned().collect();
    let mut cdf = Vec::with_capacity(flat.len());
    let mut acc = 0.0;
    for &p in &flat {
        acc += p;
        cdf.push(acc);
    }
    let total = acc;
    let shape: Vec<usize> = jd.outcome_values().iter().map(|v| v.len()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let r: f64 = rng.random::<f64>() * total;
        let mut lo = 0;
        let mut hi = cdf.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if cdf[mid] > r {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        let mut rest = lo;
        let mut tuple_idx = vec![0usize; shape.len()];
        for i in (0..shape.len()).rev() {
            tuple_idx[i] = rest % shape[i];
            rest /= shape[i];
        }
        out.push(
            tuple_idx
                .iter()
                .enumerate()
                .map(|(i, &k)| jd.outcome_values()[i][k])
                .collect(),
        );
    }
    Ok(out)
}
