//! Toolkit for states on finite-dimensional tensor-product spaces.
//!
//! The crate decides whether pure and mixed states factor across the
//! tensor structure. Pure states are handled through Schmidt
//! decompositions, mixed states through operator Schmidt decompositions in
//! Hilbert-Schmidt space; both feed a product check that either returns an
//! explicit factorization or a violation witness made of local projectors.
//! Independent oracles (alternating least squares, marginal comparison,
//! exhaustive projector grids) cross-check every decision path, and a
//! measurement layer connects factorization to statistical independence of
//! local outcomes.

pub mod criterion;
pub mod error;
pub mod measurement;
pub mod op_schmidt;
pub mod oracle;
pub mod random;
pub mod schmidt;
pub mod statefile;
pub mod states;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::{BipartiteSplit, Dims, MixedState, PureState, State};
