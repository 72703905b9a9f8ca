//! Product-state conditions and decision procedures.
//!
//! A pure state is a product across all factors iff the expectation of
//! every tensor product of local rank-1 projectors factorizes into the
//! product of the local expectations; for mixed states the same holds with
//! projectors of any rank, identity included. This module evaluates those
//! conditions, decides productness by recursion over 1|rest cuts, builds
//! explicit violation witnesses when the decision is negative, and probes
//! the conditions on random and exhaustive projector tuples.

use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::op_schmidt::operator_schmidt_decompose;
use crate::random::{haar_orthonormal, haar_vector};
use crate::schmidt::schmidt_decompose;
use crate::tensor::{
    embed_local, kron_all, partial_trace_matrix, trace, trace_norm, BipartiteSplit, Dims,
    MixedState, PureState, State,
};

/// Default decision tolerance: a state is declared product when every
/// recursion step's discarded Schmidt weight is at most this.
pub const DECISION_TOL: f64 = 1e-8;

/// States whose norm (pure) deviates from 1 by more than this are rejected
/// rather than renormalized.
pub const UNIT_REJECT_TOL: f64 = 1e-6;

/// Largest admissible residual when expanding an operator in the rank-1
/// projector basis.
pub const EXPANSION_RESIDUAL_TOL: f64 = 1e-10;

/// Default cap on the number of tuples an exhaustive projector grid may
/// evaluate.
pub const DEFAULT_GRID_CAP: usize = 4096;

/// Probability that a mixed-state probe draws the identity marker for a
/// factor.
pub const IDENTITY_PROBE_PROB: f64 = 0.2;

/// Unit vector spanning the range of a rank-1 projector on one factor.
#[derive(Clone, Debug)]
pub struct Rank1Projector {
    factor: usize,
    vector: Array1<C64>,
}

impl Rank1Projector {
    /// Stores `v / ||v||`; errors on (numerically) zero input.
    pub fn new(factor: usize, v: Array1<C64>) -> Result<Self> {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(Rank1Projector {
            factor,
            vector: v.mapv(|z| z / n),
        })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn vector(&self) -> &Array1<C64> {
        &self.vector
    }

    /// The projector matrix `v v^dag`.
    pub fn matrix(&self) -> Array2<C64> {
        let d = self.vector.len();
        Array2::from_shape_fn((d, d), |(i, j)| self.vector[i] * self.vector[j].conj())
    }
}

/// Range data of an orthogonal projector: an explicit orthonormal spanning
/// list, or the identity marker.
#[derive(Clone, Debug)]
pub enum ProjectorKind {
    Identity,
    Orthonormal(Vec<Array1<C64>>),
}

impl ProjectorKind {
    /// Projector matrix on a space of dimension `d`.
    pub fn matrix(&self, d: usize) -> Result<Array2<C64>> {
        match self {
            ProjectorKind::Identity => Ok(Array2::eye(d).mapv(|x: f64| C64::new(x, 0.0))),
            ProjectorKind::Orthonormal(cols) => {
                let mut m = Array2::zeros((d, d));
                for v in cols {
                    if v.len() != d {
                        return Err(Error::DimensionMismatch(format!(
                            "projector column of length {} on a factor of dimension {d}",
                            v.len()
                        )));
                    }
                    for i in 0..d {
                        for j in 0..d {
                            m[[i, j]] += v[i] * v[j].conj();
                        }
                    }
                }
                Ok(m)
            }
        }
    }

    fn check_orthonormal(&self) -> Result<()> {
        if let ProjectorKind::Orthonormal(cols) = self {
            if cols.is_empty() {
                return Err(Error::EmptyFactorSet);
            }
            let mut dev: f64 = 0.0;
            for (i, a) in cols.iter().enumerate() {
                for (j, b) in cols.iter().enumerate() {
                    let ip: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    dev = dev.max((ip - C64::new(expect, 0.0)).norm());
                }
            }
            if dev > 1e-10 {
                return Err(Error::validation("projector column orthonormality", dev));
            }
        }
        Ok(())
    }
}

/// An orthogonal projector attached to one factor.
#[derive(Clone, Debug)]
pub struct Projector {
    factor: usize,
    kind: ProjectorKind,
}

impl Projector {
    /// Projector with the given orthonormal range columns. Columns must be
    /// orthonormal within 1e-10.
    pub fn new(factor: usize, columns: Vec<Array1<C64>>) -> Result<Self> {
        let kind = ProjectorKind::Orthonormal(columns);
        kind.check_orthonormal()?;
        Ok(Projector { factor, kind })
    }

    pub fn identity(factor: usize) -> Self {
        Projector {
            factor,
            kind: ProjectorKind::Identity,
        }
    }

    pub fn rank1(factor: usize, v: Array1<C64>) -> Result<Self> {
        let p = Rank1Projector::new(factor, v)?;
        Ok(Projector {
            factor,
            kind: ProjectorKind::Orthonormal(vec![p.vector().clone()]),
        })
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn kind(&self) -> &ProjectorKind {
        &self.kind
    }
}

/// One projector of a witness, acting jointly on a contiguous run of
/// factors. Decision witnesses group all factors after the failing cut
/// into one block (the recursion works across 1|rest cuts); probe
/// witnesses use singleton blocks throughout.
#[derive(Clone, Debug)]
pub struct WitnessProjector {
    pub factors: Vec<usize>,
    pub kind: ProjectorKind,
}

impl WitnessProjector {
    pub fn identity(factor: usize) -> Self {
        WitnessProjector {
            factors: vec![factor],
            kind: ProjectorKind::Identity,
        }
    }

    pub fn rank1(factor: usize, v: Array1<C64>) -> Result<Self> {
        let p = Rank1Projector::new(factor, v)?;
        Ok(WitnessProjector {
            factors: vec![factor],
            kind: ProjectorKind::Orthonormal(vec![p.vector().clone()]),
        })
    }

    pub fn rank1_group(factors: Vec<usize>, v: Array1<C64>) -> Result<Self> {
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n < 1e-12 {
            return Err(Error::ZeroVector);
        }
        Ok(WitnessProjector {
            factors,
            kind: ProjectorKind::Orthonormal(vec![v.mapv(|z| z / n)]),
        })
    }
}

/// Outcome of a condition search: the largest violation seen and the
/// projector tuple achieving it. The witness is kept only when the
/// violation exceeds the reporting tolerance, and is empty otherwise.
#[derive(Clone, Debug)]
pub struct ViolationReport {
    pub max_violation: f64,
    pub witness: Vec<WitnessProjector>,
    pub probes_evaluated: usize,
    pub seed: u64,
}

/// Per-factor states recovered from a positive product decision.
#[derive(Clone, Debug)]
pub enum Factorization {
    Pure(Vec<Array1<C64>>),
    Mixed(Vec<Array2<C64>>),
}

/// Decision result: either a factorization with its reconstruction
/// residual, or a violation witness.
#[derive(Clone, Debug)]
pub struct ProductVerdict {
    pub is_product: bool,
    pub factors: Option<Factorization>,
    pub residual: f64,
    pub witness: Option<ViolationReport>,
}

/// Violation found for one subset under the weakened condition.
#[derive(Clone, Debug)]
pub struct SubsetViolation {
    pub subset: Vec<usize>,
    pub max_violation: f64,
    pub violated: bool,
}

/// The `d^2` vectors `{e_i} ∪ {(e_i+e_j)/√2, i<j} ∪ {(e_i+i·e_j)/√2, i<j}`
/// whose rank-1 projectors are linearly independent and span the `d x d`
/// operator space.
pub fn projector_basis(d: usize) -> Vec<Array1<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        let mut v = Array1::zeros(d);
        v[i] = C64::new(1.0, 0.0);
        out.push(v);
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut v = Array1::zeros(d);
            v[i] = C64::new(s, 0.0);
            v[j] = C64::new(s, 0.0);
            out.push(v);
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            let mut v = Array1::zeros(d);
            v[i] = C64::new(s, 0.0);
            v[j] = C64::new(0.0, s);
            out.push(v);
        }
    }
    out
}

/// Coefficients `c_k` with `sum_k c_k P_k = A` over the projector basis of
/// the matching dimension. The residual of the solved system must stay
/// below [`EXPANSION_RESIDUAL_TOL`]; a larger residual is reported as a
/// numerical failure.
pub fn expand_in_projector_basis(a: &Array2<C64>) -> Result<Vec<C64>> {
    let (rows, cols) = a.dim();
    if rows != cols {
        return Err(Error::NotSquare { rows, cols });
    }
    let d = rows;
    let basis = projector_basis(d);
    // Column k holds vec(P_k), row-major.
    let system = Array2::from_shape_fn((d * d, d * d), |(p, k)| {
        let v = &basis[k];
        v[p / d] * v[p % d].conj()
    });
    let rhs = Array1::from_shape_fn(d * d, |p| a[[p / d, p % d]]);
    let coeff = system.solve(&rhs)?;
    let back = system.dot(&coeff);
    let resid = back
        .iter()
        .zip(rhs.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if resid > EXPANSION_RESIDUAL_TOL {
        return Err(Error::Numerical(format!(
            "projector-basis expansion residual {resid:.3e}"
        )));
    }
    Ok(coeff.to_vec())
}

fn expect_pure(phi: &PureState, op: &Array2<C64>) -> f64 {
    let amp = phi.amplitudes();
    let mut acc = C64::new(0.0, 0.0);
    for (i, a) in amp.iter().enumerate() {
        let mut row = C64::new(0.0, 0.0);
        for (j, b) in amp.iter().enumerate() {
            row += op[[i, j]] * b;
        }
        acc += a.conj() * row;
    }
    acc.re
}

fn expect_mixed(rho: &MixedState, op: &Array2<C64>) -> f64 {
    let m = rho.matrix();
    let d = m.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += op[[i, j]] * m[[j, i]];
        }
    }
    acc.re
}

fn expect(state: &State, op: &Array2<C64>) -> f64 {
    match state {
        State::Pure(p) => expect_pure(p, op),
        State::Mixed(m) => expect_mixed(m, op),
    }
}

/// Evaluates the applicable condition on a witness: the absolute difference
/// between the joint expectation of the tensor product of the witness
/// projectors and the product of their marginal expectations. The witness
/// blocks must cover the factors contiguously and in order.
pub fn witness_violation(state: &State, witness: &[WitnessProjector]) -> Result<f64> {
    let dims = state.dims();
    let mut next = 0;
    for g in witness {
        if g.factors.is_empty() {
            return Err(Error::EmptyFactorSet);
        }
        for (offset, &f) in g.factors.iter().enumerate() {
            if f != next + offset {
                return Err(Error::DimensionMismatch(
                    "witness blocks must cover the factors contiguously and in order".into(),
                ));
            }
        }
        next += g.factors.len();
    }
    if next != dims.n_factors() {
        return Err(Error::DimensionMismatch(format!(
            "witness covers {next} of {} factors",
            dims.n_factors()
        )));
    }

    let block_dims: Vec<usize> = witness
        .iter()
        .map(|g| g.factors.iter().map(|&i| dims.factor(i)).product())
        .collect();
    let mats: Vec<Array2<C64>> = witness
        .iter()
        .zip(&block_dims)
        .map(|(g, &d)| g.kind.matrix(d))
        .collect::<Result<_>>()?;

    let joint_op = kron_all(&mats);
    let joint = expect(state, &joint_op);
    let mut marginals = 1.0;
    for (k, m) in mats.iter().enumerate() {
        if matches!(witness[k].kind, ProjectorKind::Identity) {
            continue;
        }
        let mut embedded: Vec<Array2<C64>> = Vec::with_capacity(witness.len());
        for (l, &bd) in block_dims.iter().enumerate() {
            if l == k {
                embedded.push(m.clone());
            } else {
                embedded.push(Array2::eye(bd).mapv(|x: f64| C64::new(x, 0.0)));
            }
        }
        marginals *= expect(state, &kron_all(&embedded));
    }
    Ok((joint - marginals).abs())
}

/// The pure-state condition deficit `|<Phi,(P_1 (x) ... (x) P_n)Phi> -
/// prod_i <Phi, Pbar_i Phi>|` for one rank-1 projector per factor; exactly
/// 0 on product states.
pub fn pure_condition_violation(phi: &PureState, ps: &[Rank1Projector]) -> Result<f64> {
    phi.check_unit(UNIT_REJECT_TOL)?;
    let dims = phi.dims();
    check_one_per_factor(dims, ps.len(), ps.iter().map(|p| p.factor()))?;
    let mats: Vec<Array2<C64>> = ps.iter().map(|p| p.matrix()).collect();
    for (i, m) in mats.iter().enumerate() {
        if m.nrows() != dims.factor(i) {
            return Err(Error::DimensionMismatch(format!(
                "projector of side {} on factor {i} of dimension {}",
                m.nrows(),
                dims.factor(i)
            )));
        }
    }
    let joint = expect_pure(phi, &kron_all(&mats));
    let mut marginals = 1.0;
    for (i, m) in mats.iter().enumerate() {
        let embedded = embed_local(&m.view(), i, dims)?;
        marginals *= expect_pure(phi, &embedded);
    }
    Ok((joint - marginals).abs())
}

/// The mixed-state condition deficit `|tr[((x)_i P_i) rho] - prod_i
/// tr[Pbar_i rho]|` for one projector per factor, identity markers
/// allowed.
pub fn mixed_condition_violation(rho: &MixedState, ps: &[Projector]) -> Result<f64> {
    let dims = rho.dims();
    check_one_per_factor(dims, ps.len(), ps.iter().map(|p| p.factor()))?;
    let witness: Vec<WitnessProjector> = ps
        .iter()
        .map(|p| WitnessProjector {
            factors: vec![p.factor()],
            kind: p.kind().clone(),
        })
        .collect();
    witness_violation(&State::Mixed(rho.clone()), &witness)
}

fn check_one_per_factor(
    dims: &Dims,
    len: usize,
    factors: impl Iterator<Item = usize>,
) -> Result<()> {
    if len != dims.n_factors() {
        return Err(Error::DimensionMismatch(format!(
            "{len} projectors for {} factors",
            dims.n_factors()
        )));
    }
    for (i, f) in factors.enumerate() {
        if f != i {
            return Err(Error::DimensionMismatch(
                "projectors must list factors 0..n in order".into(),
            ));
        }
    }
    Ok(())
}

/// Decides whether a unit vector is a product across all factors.
///
/// Recursion over 1|rest cuts: Schmidt-decompose the remaining tail at cut
/// 1; a discarded weight (everything past the top term) above `tol` means
/// entangled, with a witness built from the top Schmidt pair at the failing
/// cut; otherwise the top left vector is peeled off and the top right
/// vector becomes the new tail. On a positive decision the peeled factors
/// are returned with the reconstruction residual `||Phi - (x)_i phi_i||`.
pub fn check_pure_product(phi: &PureState, tol: f64) -> Result<ProductVerdict> {
    phi.check_unit(UNIT_REJECT_TOL)?;
    let dims = phi.dims().clone();
    let n = dims.n_factors();
    if n == 1 {
        return Ok(ProductVerdict {
            is_product: true,
            factors: Some(Factorization::Pure(vec![phi.amplitudes().clone()])),
            residual: 0.0,
            witness: None,
        });
    }

    let mut tail = phi.clone();
    let mut tail_dims = dims.clone();
    let mut peeled: Vec<Array1<C64>> = Vec::with_capacity(n);
    let mut witness: Option<ViolationReport> = None;

    for step in 0..n - 1 {
        let split = BipartiteSplit::new(1, &tail_dims)?;
        let sd = schmidt_decompose(&tail, split, 0.0)?;
        let discarded: f64 = sd.lambdas()[1..].iter().sum();
        if witness.is_none() && discarded > tol {
            let mut blocks: Vec<WitnessProjector> = Vec::with_capacity(step + 2);
            for (i, v) in peeled.iter().enumerate() {
                blocks.push(WitnessProjector::rank1(i, v.clone())?);
            }
            let mut e1 = WitnessProjector::rank1(step, sd.left_vectors()[0].clone())?;
            e1.factors = vec![step];
            blocks.push(e1);
            blocks.push(WitnessProjector::rank1_group(
                (step + 1..n).collect(),
                sd.right_vectors()[0].clone(),
            )?);
            let max_violation = witness_violation(&State::Pure(phi.clone()), &blocks)?;
            witness = Some(ViolationReport {
                max_violation,
                witness: blocks,
                probes_evaluated: 0,
                seed: 0,
            });
        }
        peeled.push(sd.left_vectors()[0].clone());
        let (_, rest_dims) = tail_dims.split(split);
        tail = PureState::new(rest_dims.clone(), sd.right_vectors()[0].clone())?;
        tail_dims = rest_dims;
    }
    peeled.push(tail.amplitudes().clone());

    let candidate = PureState::product(&peeled)?;
    let residual = phi
        .amplitudes()
        .iter()
        .zip(candidate.amplitudes().iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();

    Ok(match witness {
        None => ProductVerdict {
            is_product: true,
            factors: Some(Factorization::Pure(peeled)),
            residual,
            witness: None,
        },
        Some(w) => ProductVerdict {
            is_product: false,
            factors: None,
            residual,
            witness: Some(w),
        },
    })
}

/// Decides whether a density matrix is a product across all factors.
///
/// Recursion over 1|rest cuts in Hilbert-Schmidt space: operator
/// Schmidt decomposition (hermitian variant) of the remaining tail at cut
/// 1; discarded weight above `tol` means not product, with a rank-1
/// witness pair located through the projector-basis expansion of the
/// decomposition term with the largest factorization deficit. The peel
/// takes the single-factor marginal as the front factor and the marginal
/// of the rest as the new tail; on product blocks this agrees with the
/// top decomposition pair but stays well defined when that pair is
/// traceless (degenerate coefficients on maximally entangled blocks).
/// The residual is `||rho - (x)_i rho_i||_1` against the peeled
/// marginals, whatever the verdict.
pub fn check_mixed_product(rho: &MixedState, tol: f64) -> Result<ProductVerdict> {
    let dims = rho.dims().clone();
    let n = dims.n_factors();
    if n == 1 {
        return Ok(ProductVerdict {
            is_product: true,
            factors: Some(Factorization::Mixed(vec![rho.matrix().clone()])),
            residual: 0.0,
            witness: None,
        });
    }

    let mut tail = rho.matrix().clone();
    let mut tail_dims = dims.clone();
    let mut peeled: Vec<Array2<C64>> = Vec::with_capacity(n);
    let mut witness: Option<ViolationReport> = None;

    for step in 0..n - 1 {
        let split = BipartiteSplit::new(1, &tail_dims)?;
        let osd = operator_schmidt_decompose(&tail.view(), &tail_dims, split, 0.0, true)?;
        let discarded: f64 = osd.coefficients()[1..].iter().map(|s| s * s).sum();
        if witness.is_none() && discarded > tol {
            witness = Some(mixed_witness(rho, step, &osd)?);
        }

        let rest: Vec<usize> = (1..tail_dims.n_factors()).collect();
        let front = partial_trace_matrix(&tail.view(), &tail_dims, &[0])?;
        let new_tail = partial_trace_matrix(&tail.view(), &tail_dims, &rest)?;
        peeled.push(front);
        tail = new_tail;
        let (_, rest_dims) = tail_dims.split(split);
        tail_dims = rest_dims;
    }
    peeled.push(tail);

    let candidate = kron_all(&peeled);
    let diff = rho.matrix() - &candidate;
    let residual = trace_norm(&diff.view())?;

    Ok(match witness {
        None => ProductVerdict {
            is_product: true,
            factors: Some(Factorization::Mixed(peeled)),
            residual,
            witness: None,
        },
        Some(w) => ProductVerdict {
            is_product: false,
            factors: None,
            residual,
            witness: Some(w),
        },
    })
}

/// Builds a rank-1 witness for a failing mixed-state cut.
///
/// With the tail decomposed as `sum_i s_i A_i (x) B_i` and more than one
/// term present, the bilinear condition deficit cannot vanish on every
/// decomposition pair: `D(A_i, B_i) = s_i (1 - s_i tr[A_i] tr[B_i])`, and
/// if every such value were 0 the trace identity `sum_i s_i tr[A_i]
/// tr[B_i] = 1` would force a single term. The pair with the largest
/// deficit is expanded in the rank-1 projector basis, over whose support
/// the bilinear deficit must stay nonzero somewhere; the strongest rank-1
/// pair becomes the witness, evaluated on the original state with identity
/// markers on the already-peeled factors.
fn mixed_witness(
    rho: &MixedState,
    step: usize,
    osd: &crate::op_schmidt::OperatorSchmidtDecomposition,
) -> Result<ViolationReport> {
    let n = rho.dims().n_factors();
    let state = State::Mixed(rho.clone());

    let mut best_i = 0;
    let mut best_delta = -1.0;
    for (i, &s) in osd.coefficients().iter().enumerate() {
        let ta = trace(&osd.left_ops()[i].view()).re;
        let tb = trace(&osd.right_ops()[i].view()).re;
        let delta = (s * (1.0 - s * ta * tb)).abs();
        if delta > best_delta {
            best_delta = delta;
            best_i = i;
        }
    }

    let a_coeffs = expand_in_projector_basis(&osd.left_ops()[best_i])?;
    let b_coeffs = expand_in_projector_basis(&osd.right_ops()[best_i])?;
    let left_basis = projector_basis(osd.left_ops()[best_i].nrows());
    let right_basis = projector_basis(osd.right_ops()[best_i].nrows());

    let mut best: Option<(f64, Vec<WitnessProjector>)> = None;
    let mut evaluated = 0;
    for (mu, ca) in a_coeffs.iter().enumerate() {
        if ca.norm() < 1e-12 {
            continue;
        }
        for (nu, cb) in b_coeffs.iter().enumerate() {
            if cb.norm() < 1e-12 {
                continue;
            }
            let mut blocks: Vec<WitnessProjector> = Vec::with_capacity(step + 2);
            for i in 0..step {
                blocks.push(WitnessProjector::identity(i));
            }
            let mut front = WitnessProjector::rank1(step, left_basis[mu].clone())?;
            front.factors = vec![step];
            blocks.push(front);
            blocks.push(WitnessProjector::rank1_group(
                (step + 1..n).collect(),
                right_basis[nu].clone(),
            )?);
            let v = witness_violation(&state, &blocks)?;
            evaluated += 1;
            if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                best = Some((v, blocks));
            }
        }
    }
    let (max_violation, blocks) =
        best.ok_or_else(|| Error::Numerical("empty projector-basis expansion support".into()))?;
    Ok(ViolationReport {
        max_violation,
        witness: blocks,
        probes_evaluated: evaluated,
        seed: 0,
    })
}

/// Dispatches to [`check_pure_product`] or [`check_mixed_product`].
pub fn check_product(state: &State, tol: f64) -> Result<ProductVerdict> {
    match state {
        State::Pure(p) => check_pure_product(p, tol),
        State::Mixed(m) => check_mixed_product(m, tol),
    }
}

/// One choice of projector per factor during a grid or probe search.
enum FactorChoice {
    Identity,
    Vector(Array1<C64>),
    Columns(Vec<Array1<C64>>),
}

impl FactorChoice {
    fn to_witness(&self, factor: usize) -> Result<WitnessProjector> {
        Ok(match self {
            FactorChoice::Identity => WitnessProjector::identity(factor),
            FactorChoice::Vector(v) => WitnessProjector::rank1(factor, v.clone())?,
            FactorChoice::Columns(cols) => WitnessProjector {
                factors: vec![factor],
                kind: ProjectorKind::Orthonormal(cols.clone()),
            },
        })
    }
}

/// Exhaustive search over the per-factor projector-basis grid. Mixed
/// states additionally get the identity marker as a per-factor choice.
/// Returns (max violation, argmax witness, tuples evaluated).
pub(crate) fn grid_search(state: &State) -> Result<(f64, Vec<WitnessProjector>, usize)> {
    let dims = state.dims();
    let n = dims.n_factors();
    let mixed = matches!(state, State::Mixed(_));
    let choices: Vec<Vec<FactorChoice>> = dims
        .factors()
        .iter()
        .map(|&d| {
            let mut c: Vec<FactorChoice> = projector_basis(d)
                .into_iter()
                .map(FactorChoice::Vector)
                .collect();
            if mixed {
                c.push(FactorChoice::Identity);
            }
            c
        })
        .collect();

    let mut odometer = vec![0usize; n];
    let mut best = 0.0;
    let mut best_witness: Vec<WitnessProjector> = Vec::new();
    let mut evaluated = 0;
    loop {
        let witness: Vec<WitnessProjector> = odometer
            .iter()
            .enumerate()
            .map(|(i, &k)| choices[i][k].to_witness(i))
            .collect::<Result<_>>()?;
        let v = witness_violation(state, &witness)?;
        evaluated += 1;
        if v > best {
            best = v;
            best_witness = witness;
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < choices[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
        if odometer.iter().all(|&k| k == 0) {
            break;
        }
    }
    Ok((best, best_witness, evaluated))
}

/// Number of grid tuples counted against the cap: the product of `d_i^2`.
pub(crate) fn grid_tuples(dims: &Dims) -> usize {
    dims.factors().iter().map(|&d| d * d).product()
}

/// Randomized (plus gridded, when affordable) search for a violation of
/// the applicable condition with the default grid cap.
pub fn probe_condition(
    state: &State,
    n_probes: usize,
    seed: u64,
    tol: f64,
) -> Result<ViolationReport> {
    probe_condition_with_cap(state, n_probes, seed, tol, DEFAULT_GRID_CAP)
}

/// As [`probe_condition`] with an explicit grid cap: the deterministic
/// projector-basis grid is included when its size `prod_i d_i^2` is within
/// the cap, then `n_probes` seeded random tuples are evaluated (pure case:
/// Haar rank-1 per factor; mixed case: Haar range of uniform rank, or the
/// identity marker with probability [`IDENTITY_PROBE_PROB`]). Probe `p`
/// draws from stream `p` of a generator seeded with `seed`, so reports are
/// reproducible and probes may be evaluated in any order.
pub fn probe_condition_with_cap(
    state: &State,
    n_probes: usize,
    seed: u64,
    tol: f64,
    grid_cap: usize,
) -> Result<ViolationReport> {
    if let State::Pure(p) = state {
        p.check_unit(UNIT_REJECT_TOL)?;
    }
    let dims = state.dims().clone();
    let n = dims.n_factors();
    let mixed = matches!(state, State::Mixed(_));

    let mut best = 0.0;
    let mut best_witness: Vec<WitnessProjector> = Vec::new();
    let mut evaluated = 0;

    if grid_tuples(&dims) <= grid_cap {
        let (gbest, gwitness, gcount) = grid_search(state)?;
        best = gbest;
        best_witness = gwitness;
        evaluated = gcount;
    }

    for p in 0..n_probes {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(p as u64);
        let witness: Vec<WitnessProjector> = (0..n)
            .map(|i| {
                let d = dims.factor(i);
                let choice = if mixed {
                    if rng.random::<f64>() < IDENTITY_PROBE_PROB {
                        FactorChoice::Identity
                    } else {
                        let r = rng.random_range(1..=d);
                        FactorChoice::Columns(haar_orthonormal(d, r, &mut rng))
                    }
                } else {
                    FactorChoice::Vector(haar_vector(d, &mut rng))
                };
                choice.to_witness(i)
            })
            .collect::<Result<_>>()?;
        let v = witness_violation(state, &witness)?;
        evaluated += 1;
        if v > best {
            best = v;
            best_witness = witness;
        }
    }

    Ok(ViolationReport {
        max_violation: best,
        witness: if best > tol { best_witness } else { Vec::new() },
        probes_evaluated: evaluated,
        seed,
    })
}

/// Evaluates the weakened condition: for every factor subset of size at
/// least 2, the condition with rank-1 projectors on the subset and
/// identity elsewhere. Each subset gets its deterministic projector-basis
/// sub-grid (when within the default cap) plus `probes_per_subset` seeded
/// random rank-1 tuples; subsets are reported in ascending bitmask order
/// with their max violation.
pub fn check_weakened_condition(
    rho: &MixedState,
    tol: f64,
    probes_per_subset: usize,
    seed: u64,
) -> Result<Vec<SubsetViolation>> {
    check_weakened_condition_with_cap(rho, tol, probes_per_subset, seed, DEFAULT_GRID_CAP)
}

/// As [`check_weakened_condition`] with an explicit per-subset grid cap.
pub fn check_weakened_condition_with_cap(
    rho: &MixedState,
    tol: f64,
    probes_per_subset: usize,
    seed: u64,
    grid_cap: usize,
) -> Result<Vec<SubsetViolation>> {
    let dims = rho.dims().clone();
    let n = dims.n_factors();
    let state = State::Mixed(rho.clone());
    let mut out = Vec::new();

    for mask in 0u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let subset: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let mut best = 0.0;

        let sub_tuples: usize = subset.iter().map(|&i| dims.factor(i) * dims.factor(i)).product();
        if sub_tuples <= grid_cap {
            let bases: Vec<Vec<Array1<C64>>> = subset
                .iter()
                .map(|&i| projector_basis(dims.factor(i)))
                .collect();
            let mut odometer = vec![0usize; subset.len()];
            loop {
                let witness =
                    subset_witness(&dims, &subset, |k| bases[k][odometer[k]].clone())?;
                let v = witness_violation(&state, &witness)?;
                if v > best {
                    best = v;
                }
                let mut pos = subset.len();
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    odometer[pos] += 1;
                    if odometer[pos] < bases[pos].len() {
                        break;
                    }
                    odometer[pos] = 0;
                }
                if odometer.iter().all(|&k| k == 0) {
                    break;
                }
            }
        }

        for p in 0..probes_per_subset {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ u64::from(mask));
            rng.set_stream(p as u64);
            let draws: Vec<Array1<C64>> = subset
                .iter()
                .map(|&i| haar_vector(dims.factor(i), &mut rng))
                .collect();
            let witness = subset_witness(&dims, &subset, |k| draws[k].clone())?;
            let v = witness_violation(&state, &witness)?;
            if v > best {
                best = v;
            }
        }

        out.push(SubsetViolation {
            subset,
            max_violation: best,
            violated: best > tol,
        });
    }
    Ok(out)
}

fn subset_witness(
    dims: &Dims,
    subset: &[usize],
    mut vector_for: impl FnMut(usize) -> Array1<C64>,
) -> Result<Vec<WitnessProjector>> {
    (0..dims.n_factors())
        .map(|i| match subset.iter().position(|&s| s == i) {
            Some(k) => WitnessProjector::rank1(i, vector_for(k)),
            None => Ok(WitnessProjector::identity(i)),
        })
        .collect()
}
