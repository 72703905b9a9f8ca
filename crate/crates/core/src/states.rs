//! Commonly used reference states and operators.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::tensor::{kron, Dims, MixedState, PureState};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Standard basis vector `e_i` of dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> Array1<C64> {
    let mut v = Array1::zeros(d);
    v[i] = c(1.0, 0.0);
    v
}

/// Rank-1 projector `|i><i|` of dimension `d`.
pub fn basis_projector(d: usize, i: usize) -> Array2<C64> {
    let mut m = Array2::zeros((d, d));
    m[[i, i]] = c(1.0, 0.0);
    m
}

/// `(|0> + |1>)/sqrt(2)`.
pub fn plus() -> Array1<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Array1::from_vec(vec![c(s, 0.0), c(s, 0.0)])
}

pub fn pauli_x() -> Array2<C64> {
    Array2::from_shape_vec((2, 2), vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
        .unwrap()
}

pub fn pauli_y() -> Array2<C64> {
    Array2::from_shape_vec((2, 2), vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
        .unwrap()
}

pub fn pauli_z() -> Array2<C64> {
    Array2::from_shape_vec((2, 2), vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
        .unwrap()
}

/// `(|00> + |11>)/sqrt(2)` on two qubits.
pub fn bell() -> PureState {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dims = Dims::new(vec![2, 2]).unwrap();
    let amp = Array1::from_vec(vec![c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]);
    PureState::new(dims, amp).unwrap()
}

/// `(|0...0> + |1...1>)/sqrt(2)` on `n` qubits.
pub fn ghz(n: usize) -> PureState {
    assert!(n >= 2);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let dims = Dims::new(vec![2; n]).unwrap();
    let mut amp = Array1::zeros(dims.total());
    amp[0] = c(s, 0.0);
    amp[dims.total() - 1] = c(s, 0.0);
    PureState::new(dims, amp).unwrap()
}

/// `(|100> + |010> + |001>)/sqrt(3)` on three qubits.
pub fn w() -> PureState {
    let s = 1.0 / 3.0_f64.sqrt();
    let dims = Dims::new(vec![2, 2, 2]).unwrap();
    let mut amp = Array1::zeros(8);
    amp[4] = c(s, 0.0);
    amp[2] = c(s, 0.0);
    amp[1] = c(s, 0.0);
    PureState::new(dims, amp).unwrap()
}

/// The rank-1 density matrix of the Bell state.
pub fn bell_projector() -> MixedState {
    bell().density_matrix().unwrap()
}

/// The classically correlated two-qubit state `(|00><00| + |11><11|)/2`,
/// separable but not a product.
pub fn classically_correlated() -> MixedState {
    let dims = Dims::new(vec![2, 2]).unwrap();
    let mut m = Array2::zeros((4, 4));
    m[[0, 0]] = c(0.5, 0.0);
    m[[3, 3]] = c(0.5, 0.0);
    MixedState::new(dims, m).unwrap()
}

/// `|0><0| (x) bell_projector()` on three qubits: a product across the
/// first cut whose right factor is entangled.
pub fn blocked_bell() -> MixedState {
    let dims = Dims::new(vec![2, 2, 2]).unwrap();
    let p0 = basis_projector(2, 0);
    let m = kron(&p0.view(), &bell_projector().matrix().view());
    MixedState::new(dims, m).unwrap()
}
