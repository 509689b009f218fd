//! Symmetry-reduced semidefinite programs over Pauli correlation data.
//!
//! The crate builds the anti-commutativity graph of n-qubit Pauli strings,
//! reduces moment-matrix and Lovász-theta SDPs with the wreath-product
//! symmetry `S_3 ≀ S_n` (Terwilliger algebra block diagonalization), solves
//! the reduced programs numerically, and verifies dual infeasibility
//! certificates exactly over the quadratic field `Q(√3)`.
//!
//! Module map:
//!
//! - [`pauli`]: Pauli strings, orbit keys, the anti-commutativity graph.
//! - [`exact`]: `Q(√3)` arithmetic and an exact PSD decision procedure.
//! - [`correlations`]: closed-form correlation tables of the 7+7 qubit
//!   state (and its small-n analogues).
//! - [`terwilliger`]: orbit variables, block coefficients, dual y-values.
//! - [`moment`]: brute-force moment matrices from explicit ensembles.
//! - [`sdp`]: solver-neutral instances, builders, SDPA sparse I/O.
//! - [`solver`]: dense primal-dual interior point method.
//! - [`certificate`]: `.qcert` parsing and exact verification.

pub mod certificate;
mod comb;
pub mod correlations;
pub mod error;
pub mod exact;
pub mod moment;
pub mod pauli;
pub mod sdp;
pub mod solver;
pub mod terwilliger;

pub use error::{Error, Result};
