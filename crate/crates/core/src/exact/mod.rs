//! Exact arithmetic in `Q` and `Q(√3)`, symmetric matrices over `Q(√3)`, and
//! a fraction-exact positive-semidefiniteness test.

mod field;
mod matrix;

pub use field::{qsign, FieldOp, QuadExt, Rational};
pub use matrix::{is_psd_exact, ExactSymMatrix, Ldl, PsdFailure, PsdVerdict};
